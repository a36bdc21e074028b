#include "displab/eigensolve.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <random>

namespace displab {

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

void axpy(double a, const std::vector<double>& x, std::vector<double>& y) {
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += a * x[i];
}

double normalize(std::vector<double>& v) {
    const double n = std::sqrt(dot(v, v));
    if (n > 0)
        for (double& x : v) x /= n;
    return n;
}

// Two-pass classical Gram-Schmidt against the whole basis.
void orthogonalize(std::vector<double>& w, const std::vector<std::vector<double>>& basis) {
    for (int pass = 0; pass < 2; ++pass)
        for (const auto& q : basis) axpy(-dot(q, w), q, w);
}

void random_fill(std::vector<double>& v, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (double& x : v) x = gauss(rng);
}

}  // namespace

LanczosResult lanczos_smallest(const RealOp& op, std::size_t dim, const LanczosOptions& opts) {
    LanczosResult result;
    const int m = static_cast<int>(std::min<std::size_t>(opts.max_basis, dim));
    const int want = static_cast<int>(std::min<std::size_t>(opts.want, dim));

    std::vector<std::vector<double>> basis;
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m, m);
    int locked = 0;                 // thick-restart block at the front of T
    std::vector<double> coupling;   // arrowhead couplings into that block

    std::vector<double> v(dim);
    if (!opts.warm_start.empty()) {
        v.assign(dim, 0.0);
        double mix = 1.0;
        for (const auto& g : opts.warm_start) {
            if (g.size() == dim) axpy(1.0 / mix, g, v);
            mix += 1.0;
        }
        if (normalize(v) == 0.0) random_fill(v, opts.seed);
    } else {
        random_fill(v, opts.seed);
    }
    normalize(v);
    basis.push_back(v);

    std::vector<double> w(dim), scratch(dim);

    for (int cycle = 0; cycle <= opts.max_restarts; ++cycle) {
        double beta_m = 0.0;
        std::vector<double> residual_dir;
        for (int j = locked; j < m; ++j) {
            op(basis[j], w);
            ++result.matvecs;
            if (j == locked && locked > 0)
                for (int i = 0; i < locked; ++i) {
                    T(i, j) = coupling[i];
                    T(j, i) = coupling[i];
                }
            T(j, j) = dot(basis[j], w);
            orthogonalize(w, basis);
            const double beta = normalize(w);
            if (j + 1 < m) {
                T(j, j + 1) = beta;
                T(j + 1, j) = beta;
                if (beta < 1e-14) {
                    random_fill(w, opts.seed + 1013 * cycle + j);
                    orthogonalize(w, basis);
                    normalize(w);
                }
                basis.push_back(w);
            } else {
                beta_m = beta;
                residual_dir = w;
            }
        }

        const int k = static_cast<int>(basis.size());
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T.topLeftCorner(k, k));
        const auto& theta = es.eigenvalues();
        const auto& S = es.eigenvectors();

        bool all_ok = true;
        for (int i = 0; i < want; ++i) {
            const double res = std::abs(beta_m * S(k - 1, i));
            const double need = theta(i) < opts.converge_below ? opts.tol : opts.loose_tol;
            if (res > need) all_ok = false;
        }

        if (all_ok || cycle == opts.max_restarts) {
            result.converged = all_ok;
            for (int i = 0; i < want; ++i) {
                EigenPair p;
                p.value = theta(i);
                p.vector.assign(dim, 0.0);
                for (int q = 0; q < k; ++q) axpy(S(q, i), basis[q], p.vector);
                normalize(p.vector);
                op(p.vector, scratch);
                ++result.matvecs;
                double r2 = 0.0;
                for (std::size_t q = 0; q < dim; ++q) {
                    const double d = scratch[q] - p.value * p.vector[q];
                    r2 += d * d;
                }
                p.residual = std::sqrt(r2);
                result.pairs.push_back(std::move(p));
            }
            return result;
        }

        // Thick restart: keep the lowest Ritz vectors plus the residual.
        const int keep = std::min(k - 1, want + 10);
        std::vector<std::vector<double>> newbasis(keep, std::vector<double>(dim, 0.0));
        for (int i = 0; i < keep; ++i)
            for (int q = 0; q < k; ++q) axpy(S(q, i), basis[q], newbasis[i]);
        coupling.assign(keep, 0.0);
        for (int i = 0; i < keep; ++i) coupling[i] = beta_m * S(k - 1, i);

        T.setZero();
        for (int i = 0; i < keep; ++i) T(i, i) = theta(i);
        basis = std::move(newbasis);
        if (beta_m < 1e-14) {
            random_fill(residual_dir, opts.seed + 977 * cycle);
            orthogonalize(residual_dir, basis);
            normalize(residual_dir);
        }
        basis.push_back(residual_dir);
        locked = keep;
    }
    return result;
}

std::vector<RitzValue> arnoldi_spectrum(const RealOp& op, std::size_t dim,
                                        const ArnoldiOptions& opts) {
    const int m = static_cast<int>(std::min<std::size_t>(opts.max_basis, dim));
    std::vector<std::vector<double>> basis;
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(m + 1, m);

    std::vector<double> v(dim);
    random_fill(v, opts.seed);
    normalize(v);
    basis.push_back(v);

    std::vector<double> w(dim);
    int k = 0;
    for (; k < m; ++k) {
        op(basis[k], w);
        for (int pass = 0; pass < 2; ++pass)
            for (int i = 0; i <= k; ++i) {
                const double c = dot(basis[i], w);
                H(i, k) += c;
                axpy(-c, basis[i], w);
            }
        const double beta = normalize(w);
        H(k + 1, k) = beta;
        if (beta < 1e-13) {
            ++k;
            break;
        }
        if (k + 1 < m) basis.push_back(w);
    }

    Eigen::EigenSolver<Eigen::MatrixXd> es(H.topLeftCorner(k, k));
    std::vector<RitzValue> out;
    for (int i = 0; i < k; ++i) {
        RitzValue rv;
        rv.value = es.eigenvalues()(i);
        rv.residual = std::abs(H(k, k - 1)) * std::abs(es.eigenvectors()(k - 1, i));
        out.push_back(rv);
    }
    std::sort(out.begin(), out.end(), [](const RitzValue& a, const RitzValue& b) {
        return std::abs(a.value) > std::abs(b.value);
    });
    return out;
}

}  // namespace displab
