#pragma once

#include <vector>

#include "displab/field.hpp"

namespace displab {

// Quadrature directions on S^2 with positive weights summing to 4*pi.
struct DirectionSet {
    std::vector<Vec3> directions;
    std::vector<double> weights;

    std::size_t size() const { return directions.size(); }
    double weight_sum() const;
};

// Gauss-Legendre in cos(theta) crossed with a uniform azimuthal rule;
// integrates every spherical harmonic of degree <= order exactly.
DirectionSet sphere_quadrature(int order);

// Nodes/weights for int_{-1}^{1} f, exact on polynomials of degree 2m-1.
void gauss_legendre(int m, std::vector<double>& nodes, std::vector<double>& weights);

}  // namespace displab
