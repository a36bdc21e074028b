#pragma once

#include <map>
#include <optional>
#include <string>

#include "displab/field.hpp"
#include "displab/norms.hpp"
#include "displab/potential.hpp"
#include "displab/propagator.hpp"
#include "displab/spectral.hpp"

namespace displab {

// Flat key = value scenario description; unknown keys are parse errors.
struct Scenario {
    // potential.*
    std::string potential_family = "free";  // free|well|gaussian|smoothwell|shell|bandlimited
    double potential_depth = -1.0;
    double potential_radius = 1.0;
    double potential_width = 1.0;   // gaussian width / smooth edge
    // modulation.*
    std::string modulation_family = "static";  // static|translate|scale|ramp|perturbed
    double modulation_speed = 0.0;             // translation speed along e1
    double modulation_ramp = 0.0;              // relative amplitude change over the run
    // initial.*
    std::string initial_kind = "gaussian";
    double initial_width = 1.0;
    // source.*
    std::string source_kind = "none";  // none|gaussian_pulse
    double source_amplitude = 1.0;
    // grid.* / time.*
    int grid_n = 64;
    double grid_L = 16.0;
    double time_dt = 5e-3;
    double time_max = 8.0;
    // params.*
    double epsilon = 0.5;
    double p = 1.5;
    std::uint64_t seed = 1;
    // envelope.* pass gates (optional)
    std::map<std::string, double> envelopes;

    std::vector<std::string> checks;

    static Scenario parse_file(const std::string& path);
    static Scenario parse_text(const std::string& text);

    Grid3 grid() const { return make_grid(grid_n, grid_L); }
    TimePotential time_potential() const;
    Field3 initial_data() const;
    TimeSource source() const;
};

struct CheckRow {
    std::string check;
    double value = 0.0;
    double error_estimate = 0.0;
    std::string status;  // pass | fail | inconclusive | error | info
};

struct Report {
    std::vector<CheckRow> rows;
    std::map<std::string, std::string> csv_payloads;  // filename -> contents
    bool all_ok() const;
};

// --- individual checks ------------------------------------------------------------

struct StrichartzResult {
    double ratio = 0.0;
    double lhs = 0.0, rhs = 0.0;
    double error_estimate = 0.0;  // coarse-grid refinement delta
    std::string detail_csv;
};

// || P_c(t) psi ||_{L2_t L^{6,2}_x} / ( ||psi0||_2 + ||Psi||_{L2_t L^{6/5,2}_x} ),
// with the continuous projection refreshed on a fixed step cadence.
StrichartzResult strichartz_ratio(const Scenario& sc, bool with_refinement = true);

struct DecayFitResult {
    double slope = 0.0;
    double stderr_slope = 0.0;
    double window_lo = 0.0, window_hi = 0.0;
    double sup_match_error = 0.0;  // free case: deviation from (1+4t^2)^{-3/4}
    std::string detail_csv;
};

DecayFitResult decay_fit(const Scenario& sc);

struct SmoothingResult {
    double ratio = 0.0;
    double cube_half_side = 0.0;
    std::string detail_csv;
};

// || D^{1/2} P_c psi ||_{L2_{t,x}(Q)} / ( |Q|^{1/6} ||psi0||_2 ).
SmoothingResult smoothing_ratio(const Scenario& sc, double cube_half_side);

struct TransformedEquationResult {
    std::vector<double> checkpoint_times;
    std::vector<double> residual_norms;      // || i d/dt phi + Delta phi ||
    std::vector<double> source_term_norms;   // || W Psi ||
    std::vector<double> dtw_wstar_norms;     // || dW/dt W* phi ||
    std::vector<double> dtw_pp_norms;        // || dW/dt P_p psi ||
    std::vector<double> closure_norms;       // || residual - sum of terms ||
    std::string detail_csv;
};

TransformedEquationResult transformed_equation_residual(const Scenario& sc);

struct RetardedStrichartzResult {
    double ratio = 0.0;
    double lhs = 0.0, rhs = 0.0;
};

// || int_{t>s} e^{-i(t-s)Delta} F(s) ds ||_{L4_t Linf_{w2} L2_{w2perp}}
//   vs  || F ||_{L4/3_t L1_{w1} L2_{w1perp}}.
RetardedStrichartzResult retarded_strichartz_check(
    const Grid3& g, const std::vector<double>& times,
    const std::function<Field3(double)>& F, const Vec3& omega1, const Vec3& omega2);

Report run_scenario(const Scenario& sc);

// Writes summary.csv plus one CSV per executed check into out_dir.
void write_report(const Report& rep, const std::string& out_dir);

}  // namespace displab
