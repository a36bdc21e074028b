#pragma once

#include <functional>

#include "displab/field.hpp"
#include "displab/freqline.hpp"
#include "displab/norms.hpp"
#include "displab/potential.hpp"
#include "displab/spectral.hpp"
#include "displab/sphere.hpp"

namespace displab {

// --- dynamic wave operators ---------------------------------------------------

struct WaveOpResult {
    Field3 value;
    double last_increment = 0.0;  // L2 gap of the final checkpoint pair, per ||f||
    double T_used = 0.0;
    bool converged = false;
};

struct WaveOpOptions {
    double T_max = 16.0;
    double dt = 0.01;
    double cauchy_tol = 1e-4;
    double checkpoint_start = 4.0;  // doubles until T_max
    int sign = +1;
};

// W_pm f = s-lim e^{itH} e^{it Delta} f at dyadic checkpoint times, accepted
// at the first Cauchy pair below tolerance.
WaveOpResult dynamic_wave_operator(const Potential& V, const Field3& f,
                                   const WaveOpOptions& opts = {});

// W_pm^* f = s-lim e^{-it Delta} e^{-itH} P_c f.
WaveOpResult adjoint_dynamic_wave_operator(const Potential& V, const Field3& f,
                                           const SpectralData& spec,
                                           const WaveOpOptions& opts = {});

// || W(Hf) - (-Delta)(Wf) || / ||f||_{H^2} for any wave-operator action.
double intertwining_residual(const Potential& V, const Field3& f,
                             const std::function<Field3(const Field3&)>& W);

// --- Born series ----------------------------------------------------------------

struct BornOptions {
    double eta = 0.0;   // damping e^{-eta t} of the Duhamel integrals
    double T = 8.0;     // truncation time
    double ds = 0.01;   // quadrature step
    int sign = +1;
};

// First Born term W_1 f = i int_0^inf e^{-it Delta} V e^{it Delta} f e^{-eta t} dt
// by damped time quadrature.
Field3 born_w1(const Potential& V, const Field3& f, double eta,
               const BornOptions& opts = {});

// Same object through the frequency kernel
//   V^(xi1-xi2) / (|xi2|^2 - |xi1|^2 - i eta)   (sign = +1 branch)
// summed over the lattice; O(n^6), for cross-checks on small grids.
Field3 born_w1_frequency(const Potential& V, const Field3& f, double eta, int sign = +1);

struct BornDiagnostics {
    std::vector<double> order_norms;  // ||W_n f||_2, n = 1..order
    std::vector<double> ratios;       // successive norm ratios
    int order = 0;
    bool converging = true;
};

struct BornResult {
    Field3 value;                    // (I + W_1 + ... + W_order) f
    std::vector<Field3> corrections;  // W_n f
    BornDiagnostics diag;
};

// Coupled Duhamel ladder: all orders integrated in one backward sweep.
BornResult born_series(const Potential& V, const Field3& f, int order,
                       const BornOptions& opts = {});

// --- directional frequency profiles ---------------------------------------------

struct LProfileOptions {
    int s_panels = 256;
    double s_max = 0.0;  // 0: up to the sampler band limit
};

struct LProfile {
    DirectionSet dirs;
    std::vector<double> t;
    std::vector<cplx> plus, minus;  // row-major [t][omega]
    double total_plus = 0.0, total_minus = 0.0;
    double refinement_error = 0.0;  // s-coarsening delta plus t-tail estimate
    double t_tail = 0.0;

    cplx at_plus(std::size_t it, std::size_t iw) const { return plus[it * dirs.size() + iw]; }
    cplx at_minus(std::size_t it, std::size_t iw) const { return minus[it * dirs.size() + iw]; }
};

// L_pm(t, omega) = int_{[0, pm inf)} Vhat(s omega) e^{-its} s ds on the given
// time grid, by panel quadrature with exact per-panel oscillation.
LProfile profile_L(const Potential& V, const DirectionSet& dirs,
                   const std::vector<double>& t_grid, const LProfileOptions& opts = {});

struct EstimReport {
    double ratio = 0.0;
    double total = 0.0;       // iint |L_+| dt domega
    double norm_value = 0.0;  // ||V|| shell norm at sigma = 1/2
    double error_estimate = 0.0;
};

EstimReport estim_ratio(const Potential& V, const DirectionSet& dirs,
                        const std::vector<double>& t_grid, const LProfileOptions& opts = {});

// --- structure kernel K and its decomposition ------------------------------------

// K(x, t omega) = 1/2 int_0^inf Vhat(s omega) e^{-its/2} e^{is omega.x} s ds.
cplx kernel_K(const FrequencyLineSampler& sampler, const Vec3& x, double t,
              const Vec3& omega, const LProfileOptions& opts = {});

struct KernelConvention {
    double arg_scale = 0.5;  // tau = arg_scale * (t - 2 x.omega)
    bool upper_uses_plus = true;
};

struct DecompositionReport {
    double max_deviation = 0.0;  // relative to the largest |K| in the suite
    int samples_used = 0;
    KernelConvention convention;
};

// Evaluates K directly and through the tabulated L profile at random
// (x, t, omega) triples; boundary samples |x.omega - t/2| < h are excluded.
DecompositionReport decomposition_check(const Potential& V, int n_samples,
                                        std::uint64_t seed,
                                        const KernelConvention& conv,
                                        const LProfileOptions& opts = {});

// One-parameter fit of the K <-> L time-argument convention on a calibration
// potential; resolves the factor-two ambiguity of the stated formulas.
KernelConvention calibrate_convention(const Potential& V_cal,
                                      const LProfileOptions& opts = {});

// --- d/dt kernel estimate ---------------------------------------------------------

struct DtKernelReport {
    double max_deviation = 0.0;  // integrated-by-parts vs direct quadrature
    int samples_used = 0;
    NormReport controlling_norm;  // || d/ds Vhat + Vhat || in frequency shells
};

DtKernelReport dt_kernel_bound(const Potential& Vdot, int n_samples, std::uint64_t seed,
                               const LProfileOptions& opts = {});

// Radial frequency derivative field d/ds Vhat(s omega) as a frequency-side field.
Field3 radial_frequency_derivative(const Potential& V);

struct HardyReport {
    double ratio = 0.0;
    double numerator = 0.0;    // || Vhat / s ||, frequency shells, sigma = 1/2
    double denominator = 0.0;  // || d/ds Vhat ||
};

HardyReport hardy_ratio(const Potential& V);

// --- weighted decay Lemma ----------------------------------------------------------

struct WeightedDecayOptions {
    double t_max = 64.0;
    int nt = 1024;        // time samples over [-t_max, t_max]
    int s_panels = 256;
    int block_k_min = -2;  // dyadic |t| blocks 2^k <= |t| < 2^{k+1}
};

struct WeightedDecayReport {
    std::vector<Vec3> x_samples;
    std::vector<double> ratios;                  // per x sample
    std::vector<int> block_k;                    // block indices
    std::vector<std::vector<double>> block_sums;  // [x][block]
    double norm_value = 0.0;                     // sigma = 3/2 - eps shell norm
};

WeightedDecayReport weighted_decay_check(const Potential& V, double eps,
                                         const std::vector<Vec3>& x_samples,
                                         const DirectionSet& dirs,
                                         const WeightedDecayOptions& opts = {});

// chi_{x.omega0 >= t0} V; never increases the dyadic shell norm.
Potential halfspace_truncate(const Potential& V, const Vec3& omega0, double t0);

}  // namespace displab
