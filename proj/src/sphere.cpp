#include "displab/sphere.hpp"

#include <Eigen/Dense>

namespace displab {

double DirectionSet::weight_sum() const {
    double s = 0.0;
    for (double w : weights) s += w;
    return s;
}

void gauss_legendre(int m, std::vector<double>& nodes, std::vector<double>& weights) {
    // Golub-Welsch on the Jacobi matrix of the Legendre recurrence.
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(m, m);
    for (int i = 1; i < m; ++i) {
        const double b = i / std::sqrt(4.0 * i * i - 1.0);
        J(i, i - 1) = b;
        J(i - 1, i) = b;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
    nodes.resize(m);
    weights.resize(m);
    for (int i = 0; i < m; ++i) {
        nodes[i] = es.eigenvalues()(i);
        const double v0 = es.eigenvectors()(0, i);
        weights[i] = 2.0 * v0 * v0;
    }
}

DirectionSet sphere_quadrature(int order) {
    if (order < 6)
        throw std::invalid_argument("sphere_quadrature: order must be >= 6, got " +
                                    std::to_string(order));
    const int m = (order + 2) / 2;   // 2m-1 >= order+1
    const int nphi = order + 2;

    std::vector<double> mu, wmu;
    gauss_legendre(m, mu, wmu);

    DirectionSet ds;
    ds.directions.reserve(static_cast<std::size_t>(m) * nphi);
    ds.weights.reserve(static_cast<std::size_t>(m) * nphi);
    const double wphi = 2.0 * M_PI / nphi;
    for (int i = 0; i < m; ++i) {
        const double c = mu[i];
        const double s = std::sqrt(std::max(0.0, 1.0 - c * c));
        for (int j = 0; j < nphi; ++j) {
            const double phi = (2.0 * M_PI * j) / nphi;
            ds.directions.push_back({s * std::cos(phi), s * std::sin(phi), c});
            ds.weights.push_back(wmu[i] * wphi);
        }
    }
    return ds;
}

}  // namespace displab
