#pragma once

#include <optional>

#include "displab/eigensolve.hpp"
#include "displab/field.hpp"
#include "displab/potential.hpp"

namespace displab {

struct SpectralData {
    Grid3 grid;
    std::vector<double> eigenvalues;  // negative, ascending
    std::vector<Field3> eigenfields;  // orthonormal
    std::vector<double> residuals;    // ||H phi - lambda phi||_2
    bool converged = true;

    std::size_t count() const { return eigenvalues.size(); }
};

struct ResonanceReport {
    std::vector<double> bs_eigenvalues;  // real parts, most negative first
    double distance_to_resonance = std::numeric_limits<double>::infinity();
    bool resonant = false;
    double threshold = 5e-2;
};

struct BoundStateOptions {
    int k_max = 4;
    double delta_gap = 1e-3;   // eigenvalues above -delta_gap are continuum
    double tol = 1e-8;
    int max_basis = 96;
    int max_restarts = 40;
    std::uint64_t seed = 7;
    std::vector<std::vector<double>> warm_start;  // previous eigenvectors
};

// (-Delta + V) f with the Laplacian applied spectrally.
Field3 apply_hamiltonian(const Potential& V, const Field3& f);

SpectralData bound_states(const Potential& V, int k_max,
                          const BoundStateOptions& opts = {});

// Rayleigh-Ritz refresh of previously computed bound states on the subspace
// span{phi, H phi, H^2 phi}; cheap tracking for slowly varying potentials.
SpectralData refine_bound_states(const Potential& V, const SpectralData& previous,
                                 const BoundStateOptions& opts = {});

Field3 project_continuous(const SpectralData& spec, const Field3& f);

// Padded-grid inverse Laplacian: zero-frequency mode removed, so the result
// is the mean-free Green potential of the input.
Field3 apply_inverse_laplacian(const Field3& f, int pad = 2);

struct ResonanceOptions {
    double threshold = 5e-2;
    int n_eigs = 6;
    int max_basis = 70;
    int pad = 2;
};

// Birman-Schwinger operator |V|^{1/2} (-Delta)^{-1} |V|^{1/2} sgn(V);
// an eigenvalue at -1 signals a zero-energy threshold state.
ResonanceReport resonance_test(const Potential& V, const ResonanceOptions& opts = {});

struct EigenCountTimeline {
    std::vector<double> times;
    std::vector<int> counts;
    struct Change {
        double time;
        int from, to;
        double resonance_margin;  // |mu + 1| nearest -1 at the change
    };
    std::vector<Change> changes;
};

EigenCountTimeline eigen_count_timeline(const TimePotential& Vt,
                                        const std::vector<double>& times, const Grid3& g,
                                        const BoundStateOptions& opts = {},
                                        const ResonanceOptions& res_opts = {});

}  // namespace displab
