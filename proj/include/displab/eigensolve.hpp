#pragma once

#include <functional>
#include <vector>

#include "displab/field.hpp"

namespace displab {

// Action of a real linear operator on packed real vectors.
using RealOp = std::function<void(const std::vector<double>&, std::vector<double>&)>;

struct LanczosOptions {
    int want = 4;            // eigenpairs requested from the low end
    int max_basis = 96;      // Krylov vectors kept per cycle
    int max_restarts = 30;
    double tol = 1e-8;       // absolute residual ||Av - theta v||
    // Ritz values above this threshold only need loose_tol; lets the solver
    // stop once the physically relevant (deeply negative) pairs are tight.
    double converge_below = std::numeric_limits<double>::infinity();
    double loose_tol = 1e-5;
    std::uint64_t seed = 7;
    std::vector<std::vector<double>> warm_start;  // optional initial guesses
};

struct EigenPair {
    double value = 0.0;
    std::vector<double> vector;
    double residual = 0.0;
};

struct LanczosResult {
    std::vector<EigenPair> pairs;  // ascending eigenvalues
    bool converged = false;
    int matvecs = 0;
};

// Thick-restart Lanczos with full reorthogonalization for the smallest
// eigenvalues of a real symmetric operator.
LanczosResult lanczos_smallest(const RealOp& op, std::size_t dim, const LanczosOptions& opts);

struct ArnoldiOptions {
    int max_basis = 80;
    std::uint64_t seed = 11;
    double tol = 1e-7;
};

struct RitzValue {
    cplx value;
    double residual = 0.0;
};

// One-shot Arnoldi (full orthogonalization) for the extreme spectrum of a
// real, possibly nonsymmetric operator; returns Ritz values sorted by
// descending magnitude.
std::vector<RitzValue> arnoldi_spectrum(const RealOp& op, std::size_t dim,
                                        const ArnoldiOptions& opts);

}  // namespace displab
