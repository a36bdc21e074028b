#pragma once

#include <vector>

#include "displab/field.hpp"

namespace displab {

// Filon-type quadrature of int_0^{s_max} A(s) e^{-i tau s} ds on a uniform
// panel grid: A is linearized on each panel and integrated exactly against
// the oscillation, so accuracy is uniform in tau.
class LineQuadrature {
  public:
    LineQuadrature(std::vector<cplx> amplitudes, double s_max);

    cplx integrate(double tau) const;

    int panels() const { return static_cast<int>(amp_.size()) - 1; }
    double step() const { return ds_; }

    // Same amplitudes on every other node: the half-resolution refinement
    // reference.
    LineQuadrature coarsened() const;

  private:
    std::vector<cplx> amp_;
    double ds_;
};

}  // namespace displab
