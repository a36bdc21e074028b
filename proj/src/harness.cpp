#include "displab/harness.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "displab/fft.hpp"
#include "displab/waveops.hpp"

namespace displab {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::istringstream is(s);
    std::string item;
    while (std::getline(is, item, sep)) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

double parse_double(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (...) {
        throw std::invalid_argument("scenario: key '" + key + "' has a malformed value '" +
                                    v + "'");
    }
}

}  // namespace

Scenario Scenario::parse_text(const std::string& text) {
    Scenario sc;
    std::istringstream is(text);
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("scenario: line " + std::to_string(lineno) +
                                        " is not 'key = value': '" + line + "'");
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));

        if (key == "potential.family") sc.potential_family = val;
        else if (key == "potential.depth") sc.potential_depth = parse_double(key, val);
        else if (key == "potential.radius") sc.potential_radius = parse_double(key, val);
        else if (key == "potential.width") sc.potential_width = parse_double(key, val);
        else if (key == "modulation.family") sc.modulation_family = val;
        else if (key == "modulation.speed") sc.modulation_speed = parse_double(key, val);
        else if (key == "modulation.ramp") sc.modulation_ramp = parse_double(key, val);
        else if (key == "initial.kind") sc.initial_kind = val;
        else if (key == "initial.width") sc.initial_width = parse_double(key, val);
        else if (key == "source.kind") sc.source_kind = val;
        else if (key == "source.amplitude") sc.source_amplitude = parse_double(key, val);
        else if (key == "grid.n") sc.grid_n = static_cast<int>(parse_double(key, val));
        else if (key == "grid.L") sc.grid_L = parse_double(key, val);
        else if (key == "time.dt") sc.time_dt = parse_double(key, val);
        else if (key == "time.max") sc.time_max = parse_double(key, val);
        else if (key == "params.epsilon") sc.epsilon = parse_double(key, val);
        else if (key == "params.p") sc.p = parse_double(key, val);
        else if (key == "params.seed") sc.seed = static_cast<std::uint64_t>(parse_double(key, val));
        else if (key == "checks") sc.checks = split(val, ',');
        else if (key.rfind("envelope.", 0) == 0)
            sc.envelopes[key.substr(9)] = parse_double(key, val);
        else
            throw std::invalid_argument("scenario: unknown key '" + key + "' on line " +
                                        std::to_string(lineno));
    }
    // Infer the modulation family from the spec's flat keys when not given.
    if (sc.modulation_family == "static") {
        if (sc.modulation_speed != 0.0) sc.modulation_family = "translate";
        else if (sc.modulation_ramp != 0.0) sc.modulation_family = "ramp";
    }
    return sc;
}

Scenario Scenario::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("scenario: cannot open file '" + path + "'");
    std::ostringstream os;
    os << in.rdbuf();
    return parse_text(os.str());
}

TimePotential Scenario::time_potential() const {
    ProfilePtr prof;
    if (potential_family == "free")
        prof = std::make_shared<GaussianProfile>(0.0, 1.0);
    else if (potential_family == "well")
        prof = std::make_shared<BallProfile>(potential_depth, potential_radius);
    else if (potential_family == "gaussian")
        prof = std::make_shared<GaussianProfile>(potential_depth, potential_width);
    else if (potential_family == "smoothwell")
        prof = std::make_shared<SmoothWellProfile>(potential_depth, potential_radius,
                                                   potential_width);
    else if (potential_family == "shell")
        prof = std::make_shared<ShellProfile>(potential_depth, potential_radius,
                                              2.0 * potential_radius);
    else if (potential_family == "bandlimited")
        prof = std::make_shared<BandlimitedProfile>(seed, 4, 0.8, 3.0, potential_depth);
    else
        throw std::invalid_argument("scenario: unknown potential.family '" +
                                    potential_family + "'");

    if (modulation_family == "static") return TimePotential::make_static(prof);
    if (modulation_family == "translate")
        return TimePotential::translating(
            prof, linear_motion({0, 0, 0}, {modulation_speed, 0, 0}));
    if (modulation_family == "scale")
        return TimePotential::rescaling(
            prof, smoothstep_path(1.0, 1.0 + modulation_ramp, 0.0, time_max));
    if (modulation_family == "ramp")
        return TimePotential::ramped(
            prof, smoothstep_path(1.0, 1.0 + modulation_ramp, 0.0, time_max));
    if (modulation_family == "perturbed")
        return TimePotential::perturbed(
            prof,
            std::make_shared<GaussianProfile>(0.2 * potential_depth, potential_width,
                                              Vec3{potential_radius, 0.0, 0.0}),
            sine_path(0.0, std::abs(modulation_ramp) > 0 ? modulation_ramp : 0.5, 2.0));
    throw std::invalid_argument("scenario: unknown modulation.family '" +
                                modulation_family + "'");
}

Field3 Scenario::initial_data() const {
    const Grid3 g = grid();
    Field3 psi(g, Side::physical);
    if (initial_kind == "gaussian") {
        const double w2 = initial_width * initial_width;
        std::size_t idx = 0;
        for (int ix = 0; ix < g.n; ++ix)
            for (int iy = 0; iy < g.n; ++iy)
                for (int iz = 0; iz < g.n; ++iz, ++idx)
                    psi.v[idx] = std::exp(-g.point(ix, iy, iz).norm2() / (2.0 * w2));
    } else if (initial_kind == "bandlimited") {
        BandlimitedProfile prof(seed + 17, 3, 0.7, 0.35 * g.extent, 1.0);
        std::size_t idx = 0;
        for (int ix = 0; ix < g.n; ++ix)
            for (int iy = 0; iy < g.n; ++iy)
                for (int iz = 0; iz < g.n; ++iz, ++idx)
                    psi.v[idx] = prof.value(g.point(ix, iy, iz));
    } else {
        throw std::invalid_argument("scenario: unknown initial.kind '" + initial_kind + "'");
    }
    const double n = psi.norm2();
    if (n > 0) psi *= cplx(1.0 / n, 0.0);
    return psi;
}

TimeSource Scenario::source() const {
    if (source_kind == "none") return {};
    if (source_kind == "gaussian_pulse") {
        const double A = source_amplitude;
        return TimeSource{[A](const Vec3& x, double t) {
            const double env = std::exp(-x.norm2() / 2.0 - (t - 1.0) * (t - 1.0));
            return cplx(A * env * std::cos(x.x), A * env * std::sin(x.x));
        }};
    }
    throw std::invalid_argument("scenario: unknown source.kind '" + source_kind + "'");
}

bool Report::all_ok() const {
    for (const CheckRow& r : rows)
        if (r.status == "fail" || r.status == "error") return false;
    return true;
}

// --- projector tracking -------------------------------------------------------------

namespace {

// P_c refreshed every `cadence` steps: Rayleigh-Ritz refinement while states
// persist, a full solve on a slower cadence (and whenever tracking is empty).
class ProjectorTracker {
  public:
    ProjectorTracker(const TimePotential& Vt, const Grid3& g, int cadence,
                     const BoundStateOptions& opts)
        : Vt_(Vt), g_(g), cadence_(cadence), opts_(opts) {
        spec_ = bound_states(Vt_.at(0.0, g_), opts_.k_max, opts_);
    }

    void maybe_refresh(int step, double t) {
        if (Vt_.is_static()) return;
        if (step == 0 || step % cadence_ != 0) return;
        ++refreshes_;
        const Potential V = Vt_.at(t, g_);
        if (spec_.count() > 0) {
            spec_ = refine_bound_states(V, spec_, opts_);
        } else if (refreshes_ % full_every_ == 0) {
            spec_ = bound_states(V, opts_.k_max, opts_);
        }
    }

    const SpectralData& spec() const { return spec_; }

  private:
    const TimePotential& Vt_;
    Grid3 g_;
    int cadence_;
    BoundStateOptions opts_;
    SpectralData spec_;
    int refreshes_ = 0;
    int full_every_ = 10;
};

double trapezoid_lq(const std::vector<double>& vals, double dt, double q) {
    double acc = 0.0;
    for (std::size_t i = 0; i < vals.size(); ++i) {
        const double w = (i == 0 || i + 1 == vals.size()) ? 0.5 * dt : dt;
        acc += w * std::pow(vals[i], q);
    }
    return std::pow(acc, 1.0 / q);
}

}  // namespace

StrichartzResult strichartz_ratio(const Scenario& sc, bool with_refinement) {
    auto run_at = [&](int n) {
        Scenario s = sc;
        s.grid_n = n;
        const Grid3 g = s.grid();
        const TimePotential Vt = s.time_potential();
        const Field3 psi0 = s.initial_data();
        const TimeSource src = s.source();

        ProjectorTracker tracker(Vt, g, 10, {});
        std::vector<double> lhs_series, rhs_series, times;
        std::vector<int> counts;

        Field3 srcf(g, Side::physical);
        EvolveOptions eo;
        eo.dt = s.time_dt;
        eo.t_max = s.time_max;
        eo.store_stride = 1 << 30;  // states not needed, observables only
        eo.record_energy = false;
        eo.observer = [&](int step, double t, const Field3& psi) {
            tracker.maybe_refresh(step, t);
            const Field3 pc = project_continuous(tracker.spec(), psi);
            lhs_series.push_back(lorentz_norm(pc, 6.0, 2.0).value);
            if (src) {
                std::size_t idx = 0;
                for (int ix = 0; ix < g.n; ++ix)
                    for (int iy = 0; iy < g.n; ++iy)
                        for (int iz = 0; iz < g.n; ++iz, ++idx)
                            srcf.v[idx] = src.eval(g.point(ix, iy, iz), t);
                rhs_series.push_back(lorentz_norm(srcf, 1.2, 2.0).value);
            }
            times.push_back(t);
            counts.push_back(static_cast<int>(tracker.spec().count()));
        };
        evolve(Vt, psi0, src, eo);

        StrichartzResult r;
        r.lhs = trapezoid_lq(lhs_series, s.time_dt, 2.0);
        r.rhs = psi0.norm2();
        if (!rhs_series.empty()) r.rhs += trapezoid_lq(rhs_series, s.time_dt, 2.0);
        r.ratio = r.lhs / r.rhs;

        std::ostringstream csv;
        csv << "t,pc_l62,bound_count\n";
        for (std::size_t i = 0; i < times.size(); ++i)
            csv << times[i] << "," << lhs_series[i] << "," << counts[i] << "\n";
        r.detail_csv = csv.str();
        return r;
    };

    StrichartzResult full = run_at(sc.grid_n);
    if (with_refinement && sc.grid_n >= 32) {
        StrichartzResult coarse = run_at(sc.grid_n / 2);
        full.error_estimate = std::abs(full.ratio - coarse.ratio);
    }
    return full;
}

DecayFitResult decay_fit(const Scenario& sc) {
    const Grid3 g = sc.grid();
    const TimePotential Vt = sc.time_potential();
    const Field3 psi0 = sc.initial_data();

    struct Sample {
        double t, sup, mass_out, face_ratio;
    };
    std::vector<Sample> samples;

    const double t_lo_fit = 1.0;
    auto monitors = [&](const Field3& psi, double t, double sup) {
        // Mass fraction outside |x| < L/2 and the boundary-face amplitude.
        double out2 = 0.0, tot2 = 0.0, face = 0.0;
        const double half = 0.5 * g.extent;
        const double edge = g.extent - 2.5 * g.spacing();
        std::size_t idx = 0;
        for (int ix = 0; ix < g.n; ++ix)
            for (int iy = 0; iy < g.n; ++iy)
                for (int iz = 0; iz < g.n; ++iz, ++idx) {
                    const Vec3 x = g.point(ix, iy, iz);
                    const double m2 = std::norm(psi.v[idx]);
                    tot2 += m2;
                    if (x.norm() > half) out2 += m2;
                    const double linf =
                        std::max({std::abs(x.x), std::abs(x.y), std::abs(x.z)});
                    if (linf > edge) face = std::max(face, std::sqrt(m2));
                }
        samples.push_back({t, sup, tot2 > 0 ? out2 / tot2 : 0.0,
                           sup > 0 ? face / sup : 0.0});
    };

    const bool free_case = sc.potential_family == "free";
    if (free_case) {
        // Exact propagator at log-spaced times.
        const int nt = 25;
        for (int i = 0; i < nt; ++i) {
            const double t = std::exp(std::log(0.8) + (std::log(sc.time_max) - std::log(0.8)) *
                                                          i / (nt - 1.0));
            const Field3 psi = free_evolve(psi0, t);
            monitors(psi, t, psi.sup_norm());
        }
    } else {
        ProjectorTracker tracker(Vt, g, 10, {});
        EvolveOptions eo;
        eo.dt = sc.time_dt;
        eo.t_max = sc.time_max;
        eo.store_stride = 1 << 30;
        eo.record_energy = false;
        const int sample_every = std::max(1, static_cast<int>(std::llround(0.1 / sc.time_dt)));
        eo.observer = [&](int step, double t, const Field3& psi) {
            tracker.maybe_refresh(step, t);
            if (step % sample_every != 0 || t < 0.5 * t_lo_fit) return;
            const Field3 pc = project_continuous(tracker.spec(), psi);
            monitors(pc, t, pc.sup_norm());
        };
        evolve(Vt, psi0, {}, eo);
    }

    // Valid window: wrap-around gated by the boundary amplitude (squared
    // face ratio estimates the image contamination of the center sup);
    // the off-center mass fraction is reported alongside.
    DecayFitResult res;
    std::vector<double> lt, ls;
    double sup_err = 0.0;
    std::ostringstream csv;
    csv << "t,sup_pc,mass_out_fraction,face_ratio\n";
    for (const Sample& s : samples) {
        csv << s.t << "," << s.sup << "," << s.mass_out << "," << s.face_ratio << "\n";
        if (s.t < t_lo_fit) continue;
        if (s.face_ratio * s.face_ratio > 1e-3) continue;
        if (s.sup <= 0.0) continue;
        lt.push_back(std::log(s.t));
        ls.push_back(std::log(s.sup));
        if (res.window_lo == 0.0) res.window_lo = s.t;
        res.window_hi = s.t;
        if (free_case) {
            const double exact = std::pow(1.0 + 4.0 * s.t * s.t, -0.75);
            sup_err = std::max(sup_err, std::abs(s.sup - exact) / exact);
        }
    }
    res.detail_csv = csv.str();
    res.sup_match_error = sup_err;
    if (lt.size() < 3 || res.window_hi / res.window_lo < std::sqrt(10.0))
        throw std::runtime_error("decay_fit: valid window shorter than half a decade");

    // Least squares slope with standard error.
    const std::size_t n = lt.size();
    double mt = 0, ms = 0;
    for (std::size_t i = 0; i < n; ++i) {
        mt += lt[i];
        ms += ls[i];
    }
    mt /= n;
    ms /= n;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (lt[i] - mt) * (lt[i] - mt);
        sxy += (lt[i] - mt) * (ls[i] - ms);
    }
    res.slope = sxy / sxx;
    double ss_res = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double pred = ms + res.slope * (lt[i] - mt);
        ss_res += (ls[i] - pred) * (ls[i] - pred);
    }
    res.stderr_slope = n > 2 ? std::sqrt(ss_res / ((n - 2) * sxx)) : 0.0;
    return res;
}

SmoothingResult smoothing_ratio(const Scenario& sc, double cube_half_side) {
    const Grid3 g = sc.grid();
    if (cube_half_side <= 0.0 || cube_half_side > g.extent)
        throw std::invalid_argument("smoothing_ratio: cube must sit inside the grid");
    const TimePotential Vt = sc.time_potential();
    const Field3 psi0 = sc.initial_data();

    ProjectorTracker tracker(Vt, g, 10, {});
    std::vector<double> q_l2, times;
    EvolveOptions eo;
    eo.dt = sc.time_dt;
    eo.t_max = sc.time_max;
    eo.store_stride = 1 << 30;
    eo.record_energy = false;
    eo.observer = [&](int step, double t, const Field3& psi) {
        tracker.maybe_refresh(step, t);
        Field3 u = project_continuous(tracker.spec(), psi);
        // Half derivative: multiplier |xi|^{1/2}.
        apply_multiplier(u, [](const Vec3& xi) { return cplx(std::sqrt(xi.norm()), 0.0); });
        double acc = 0.0;
        std::size_t idx = 0;
        for (int ix = 0; ix < g.n; ++ix)
            for (int iy = 0; iy < g.n; ++iy)
                for (int iz = 0; iz < g.n; ++iz, ++idx) {
                    const Vec3 x = g.point(ix, iy, iz);
                    if (std::abs(x.x) <= cube_half_side && std::abs(x.y) <= cube_half_side &&
                        std::abs(x.z) <= cube_half_side)
                        acc += std::norm(u.v[idx]);
                }
        q_l2.push_back(std::sqrt(acc * u.cell_measure()));
        times.push_back(t);
    };
    evolve(Vt, psi0, {}, eo);

    SmoothingResult r;
    r.cube_half_side = cube_half_side;
    const double lhs = trapezoid_lq(q_l2, sc.time_dt, 2.0);
    const double volQ = std::pow(2.0 * cube_half_side, 3.0);
    r.ratio = lhs / (std::pow(volQ, 1.0 / 6.0) * psi0.norm2());
    std::ostringstream csv;
    csv << "t,dhalf_l2_Q\n";
    for (std::size_t i = 0; i < times.size(); ++i)
        csv << times[i] << "," << q_l2[i] << "\n";
    r.detail_csv = csv.str();
    return r;
}

TransformedEquationResult transformed_equation_residual(const Scenario& sc) {
    const Grid3 g = sc.grid();
    const TimePotential Vt = sc.time_potential();
    const Field3 psi0 = sc.initial_data();
    const TimeSource src = sc.source();

    const int n_checkpoints = 7;
    const double delta = sc.time_max / (n_checkpoints - 1);
    const int stride = std::max(1, static_cast<int>(std::llround(delta / sc.time_dt)));

    EvolveOptions eo;
    eo.dt = sc.time_dt;
    eo.t_max = sc.time_max;
    eo.store_stride = stride;
    eo.record_energy = false;
    Trajectory traj = evolve(Vt, psi0, src, eo);

    WaveOpOptions wo;
    wo.T_max = 8.0;
    wo.dt = 0.02;

    struct Checkpoint {
        double t;
        Potential V;
        SpectralData spec;
        Field3 psi;
        Field3 phi;  // W^*(t) psi(t)
    };
    std::vector<Checkpoint> cps;
    for (std::size_t j = 0; j < traj.states.size(); ++j) {
        Checkpoint cp{traj.stored_times[j], Vt.at(traj.stored_times[j], g), {}, traj.states[j],
                      Field3(g, Side::physical)};
        cp.spec = bound_states(cp.V, 2);
        cp.phi = adjoint_dynamic_wave_operator(cp.V, cp.psi, cp.spec, wo).value;
        cps.push_back(std::move(cp));
    }

    TransformedEquationResult out;
    std::ostringstream csv;
    csv << "t,residual,source_term,dtw_wstar,dtw_pp,closure\n";
    Field3 srcf(g, Side::physical);
    for (std::size_t j = 1; j + 1 < cps.size(); ++j) {
        const double dtc = cps[j + 1].t - cps[j - 1].t;
        // Free-equation residual i d/dt phi + Delta phi.
        Field3 dphi = cps[j + 1].phi - cps[j - 1].phi;
        dphi *= cplx(0.0, 1.0 / dtc);
        Field3 lap = cps[j].phi;
        apply_multiplier(lap, [](const Vec3& xi) { return cplx(-xi.norm2(), 0.0); });
        Field3 R = dphi + lap;

        // W^* Psi term.
        Field3 WPsi(g, Side::physical);
        if (src) {
            std::size_t idx = 0;
            for (int ix = 0; ix < g.n; ++ix)
                for (int iy = 0; iy < g.n; ++iy)
                    for (int iz = 0; iz < g.n; ++iz, ++idx)
                        srcf.v[idx] = src.eval(g.point(ix, iy, iz), cps[j].t);
            WPsi = adjoint_dynamic_wave_operator(cps[j].V, srcf, cps[j].spec, wo).value;
        }

        // Finite-difference dW^*/dt applied to the frozen split of psi.
        const Field3 pc = project_continuous(cps[j].spec, cps[j].psi);
        Field3 pp = cps[j].psi - pc;
        auto wstar_at = [&](std::size_t idx_cp, const Field3& u) {
            return adjoint_dynamic_wave_operator(cps[idx_cp].V, u, cps[idx_cp].spec, wo).value;
        };
        Field3 dtw_pc = wstar_at(j + 1, pc) - wstar_at(j - 1, pc);
        dtw_pc *= cplx(1.0 / dtc, 0.0);
        Field3 dtw_pp(g, Side::physical);
        if (pp.norm2() > 1e-12) {
            dtw_pp = wstar_at(j + 1, pp) - wstar_at(j - 1, pp);
            dtw_pp *= cplx(1.0 / dtc, 0.0);
        }

        Field3 terms = WPsi;
        terms += cplx(0.0, 1.0) * dtw_pc;
        terms += cplx(0.0, 1.0) * dtw_pp;

        out.checkpoint_times.push_back(cps[j].t);
        out.residual_norms.push_back(R.norm2());
        out.source_term_norms.push_back(WPsi.norm2());
        out.dtw_wstar_norms.push_back(dtw_pc.norm2());
        out.dtw_pp_norms.push_back(dtw_pp.norm2());
        out.closure_norms.push_back((R - terms).norm2());
        csv << cps[j].t << "," << out.residual_norms.back() << ","
            << out.source_term_norms.back() << "," << out.dtw_wstar_norms.back() << ","
            << out.dtw_pp_norms.back() << "," << out.closure_norms.back() << "\n";
    }
    out.detail_csv = csv.str();
    return out;
}

RetardedStrichartzResult retarded_strichartz_check(
    const Grid3& g, const std::vector<double>& times,
    const std::function<Field3(double)>& F, const Vec3& omega1, const Vec3& omega2) {
    if (times.size() < 2)
        throw std::invalid_argument("retarded_strichartz_check: need >= 2 times");
    const double dt = times[1] - times[0];

    std::vector<double> lhs_series, rhs_series;
    Field3 u(g, Side::physical);
    Field3 Fprev = F(times[0]);
    lhs_series.push_back(0.0);
    rhs_series.push_back(directional_norm(Fprev, omega1, OuterNorm::one));
    for (std::size_t k = 1; k < times.size(); ++k) {
        Field3 Fk = F(times[k]);
        // u(t_{k+1}) = e^{-i dt Delta} (u + dt/2 F_k) + dt/2 F_{k+1}.
        Field3 step = u + cplx(0.5 * dt, 0.0) * Fprev;
        step = free_evolve(step, -dt);
        u = step + cplx(0.5 * dt, 0.0) * Fk;
        lhs_series.push_back(directional_norm(u, omega2, OuterNorm::sup));
        rhs_series.push_back(directional_norm(Fk, omega1, OuterNorm::one));
        Fprev = std::move(Fk);
    }
    RetardedStrichartzResult r;
    r.lhs = trapezoid_lq(lhs_series, dt, 4.0);
    r.rhs = trapezoid_lq(rhs_series, dt, 4.0 / 3.0);
    r.ratio = r.rhs > 0 ? r.lhs / r.rhs : 0.0;
    return r;
}

// --- scenario runner -----------------------------------------------------------------

namespace {

std::string status_for(const Scenario& sc, const std::string& envelope_key, double value,
                       double error_estimate) {
    if (error_estimate > 0.1 * std::abs(value) && value != 0.0) return "inconclusive";
    auto it = sc.envelopes.find(envelope_key);
    if (it == sc.envelopes.end()) return "info";
    return value <= it->second ? "pass" : "fail";
}

}  // namespace

Report run_scenario(const Scenario& sc) {
    Report rep;
    auto guarded = [&](const std::string& name, auto&& fn) {
        try {
            fn();
        } catch (const std::exception& e) {
            rep.rows.push_back({name, 0.0, 0.0, std::string("error: ") + e.what()});
        }
    };

    for (const std::string& check : sc.checks) {
        if (check == "strichartz") {
            guarded(check, [&] {
                StrichartzResult r = strichartz_ratio(sc);
                rep.rows.push_back(
                    {"strichartz_ratio", r.ratio, r.error_estimate,
                     status_for(sc, "strichartz", r.ratio, r.error_estimate)});
                rep.csv_payloads["strichartz.csv"] = r.detail_csv;
            });
        } else if (check == "decay") {
            guarded(check, [&] {
                DecayFitResult r = decay_fit(sc);
                rep.rows.push_back({"decay_slope", r.slope, r.stderr_slope, "info"});
                if (sc.potential_family == "free")
                    rep.rows.push_back({"decay_sup_match", r.sup_match_error, 0.0,
                                        r.sup_match_error <= 1e-3 ? "pass" : "fail"});
                rep.csv_payloads["decay.csv"] = r.detail_csv;
            });
        } else if (check == "smoothing") {
            guarded(check, [&] {
                SmoothingResult r = smoothing_ratio(sc, 0.25 * sc.grid_L);
                rep.rows.push_back({"smoothing_ratio", r.ratio, 0.0,
                                    status_for(sc, "smoothing", r.ratio, 0.0)});
                rep.csv_payloads["smoothing.csv"] = r.detail_csv;
            });
        } else if (check == "mass") {
            guarded(check, [&] {
                const Grid3 g = sc.grid();
                EvolveOptions eo;
                eo.dt = sc.time_dt;
                eo.t_max = std::min(sc.time_max, 2.0);
                eo.store_stride = 1 << 30;
                eo.record_energy = false;
                Trajectory tr = evolve(sc.time_potential(), sc.initial_data(), {}, eo);
                double drift = 0.0;
                for (std::size_t i = 1; i < tr.mass.size(); ++i)
                    drift = std::max(drift,
                                     std::abs(tr.mass[i] - tr.mass[0]) / tr.times[i]);
                rep.rows.push_back({"mass_drift_per_time", drift, 0.0,
                                    drift <= 1e-10 ? "pass" : "fail"});
            });
        } else if (check == "transformed") {
            guarded(check, [&] {
                TransformedEquationResult r = transformed_equation_residual(sc);
                double worst = 0.0;
                for (std::size_t i = 0; i < r.closure_norms.size(); ++i)
                    worst = std::max(worst, r.closure_norms[i]);
                rep.rows.push_back({"transformed_closure", worst, 0.0, "info"});
                rep.csv_payloads["transformed.csv"] = r.detail_csv;
            });
        } else if (check == "retarded") {
            guarded(check, [&] {
                const Grid3 g = make_grid(std::min(sc.grid_n, 32), sc.grid_L / 2.0);
                std::vector<double> times;
                for (int i = 0; i <= 40; ++i) times.push_back(0.1 * i);
                BandlimitedProfile prof(sc.seed + 5, 3, 0.8, 3.0, 1.0);
                auto F = [&](double t) {
                    Field3 f(g, Side::physical);
                    std::size_t idx = 0;
                    for (int ix = 0; ix < g.n; ++ix)
                        for (int iy = 0; iy < g.n; ++iy)
                            for (int iz = 0; iz < g.n; ++iz, ++idx)
                                f.v[idx] = prof.value(g.point(ix, iy, iz)) *
                                           std::exp(-(t - 1.5) * (t - 1.5));
                    return f;
                };
                auto aligned = retarded_strichartz_check(g, times, F, {0, 0, 1}, {0, 0, 1});
                auto crossed = retarded_strichartz_check(g, times, F, {0, 0, 1}, {1, 0, 0});
                rep.rows.push_back({"retarded_aligned", aligned.ratio, 0.0, "info"});
                rep.rows.push_back({"retarded_crossed", crossed.ratio, 0.0, "info"});
                std::ostringstream csv;
                csv << "case,ratio,lhs,rhs\n";
                csv << "aligned," << aligned.ratio << "," << aligned.lhs << "," << aligned.rhs
                    << "\n";
                csv << "crossed," << crossed.ratio << "," << crossed.lhs << "," << crossed.rhs
                    << "\n";
                rep.csv_payloads["retarded.csv"] = csv.str();
            });
        } else if (check == "estim") {
            guarded(check, [&] {
                const Grid3 g = sc.grid();
                const Potential V = sc.time_potential().at(0.0, g);
                DirectionSet dirs = sphere_quadrature(14);
                std::vector<double> t_grid;
                for (int i = 0; i <= 768; ++i) t_grid.push_back(-48.0 + 96.0 * i / 768);
                EstimReport r = estim_ratio(V, dirs, t_grid);
                rep.rows.push_back({"estim_ratio", r.ratio, r.error_estimate,
                                    status_for(sc, "estim", r.ratio, r.error_estimate)});
            });
        } else if (check == "resonance") {
            guarded(check, [&] {
                const Grid3 g = sc.grid();
                ResonanceReport r = resonance_test(sc.time_potential().at(0.0, g));
                rep.rows.push_back({"resonance_margin", r.distance_to_resonance, 0.0,
                                    r.resonant ? "fail" : "pass"});
            });
        } else if (check == "eigen_count") {
            guarded(check, [&] {
                const Grid3 g = sc.grid();
                std::vector<double> times;
                for (int i = 0; i <= 8; ++i) times.push_back(sc.time_max * i / 8.0);
                EigenCountTimeline tl = eigen_count_timeline(sc.time_potential(), times, g);
                rep.rows.push_back({"eigen_count_changes",
                                    static_cast<double>(tl.changes.size()), 0.0, "info"});
                std::ostringstream csv;
                csv << "t,count\n";
                for (std::size_t i = 0; i < tl.times.size(); ++i)
                    csv << tl.times[i] << "," << tl.counts[i] << "\n";
                rep.csv_payloads["eigen_count.csv"] = csv.str();
            });
        } else if (check == "wave_identity") {
            guarded(check, [&] {
                const Grid3 g = sc.grid();
                const Potential V = sc.time_potential().at(0.0, g);
                SpectralData spec = bound_states(V, 4);
                Field3 f = sc.initial_data();
                WaveOpOptions wo;
                wo.T_max = 16.0;
                wo.dt = 0.01;
                WaveOpResult W = dynamic_wave_operator(V, f, wo);
                WaveOpResult WW = adjoint_dynamic_wave_operator(V, W.value, spec, wo);
                const double iso = W.value.norm2() / f.norm2();
                const double wstarw = (WW.value - f).norm2() / f.norm2();
                rep.rows.push_back({"wave_isometry", iso, W.last_increment, "info"});
                rep.rows.push_back({"wave_wstarw_defect", wstarw, WW.last_increment, "info"});
            });
        } else if (check == "born") {
            guarded(check, [&] {
                const Grid3 g = sc.grid();
                const Potential V = sc.time_potential().at(0.0, g);
                Field3 f = sc.initial_data();
                BornOptions bo;
                bo.T = 8.0;
                bo.ds = 0.02;
                BornResult br = born_series(V, f, 2, bo);
                rep.rows.push_back(
                    {"born_ratio",
                     br.diag.ratios.empty() ? 0.0 : br.diag.ratios.front(), 0.0,
                     br.diag.converging ? "info" : "fail"});
                std::ostringstream csv;
                csv << "order,norm\n";
                for (std::size_t i = 0; i < br.diag.order_norms.size(); ++i)
                    csv << (i + 1) << "," << br.diag.order_norms[i] << "\n";
                rep.csv_payloads["born.csv"] = csv.str();
            });
        } else {
            throw std::invalid_argument("run_scenario: unknown check '" + check + "'");
        }
    }
    return rep;
}

void write_report(const Report& rep, const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);
    std::ofstream summary(out_dir + "/summary.csv");
    summary << "check,value,error_estimate,status\n";
    for (const CheckRow& r : rep.rows)
        summary << r.check << "," << r.value << "," << r.error_estimate << "," << r.status
                << "\n";
    for (const auto& [name, payload] : rep.csv_payloads) {
        std::ofstream f(out_dir + "/" + name);
        f << payload;
    }
}

}  // namespace displab
