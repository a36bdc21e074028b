#include "displab/waveops.hpp"

#include <algorithm>
#include <random>

#include "displab/fft.hpp"
#include "displab/oscint.hpp"
#include "displab/propagator.hpp"

namespace displab {

namespace {

std::vector<double> checkpoints(const WaveOpOptions& opts) {
    std::vector<double> ts;
    for (double T = opts.checkpoint_start; T <= opts.T_max * (1.0 + 1e-12); T *= 2.0)
        ts.push_back(T);
    if (ts.empty()) ts.push_back(opts.T_max);
    return ts;
}

}  // namespace

WaveOpResult dynamic_wave_operator(const Potential& V, const Field3& f,
                                   const WaveOpOptions& opts) {
    require_same_grid(V.grid, f.grid, "dynamic_wave_operator");
    const double fn = f.norm2();
    WaveOpResult res;
    if (fn == 0.0 || V.sup_norm() == 0.0) {
        res.value = f;
        res.converged = true;
        return res;
    }

    Field3 prev(f.grid, Side::physical);
    bool have_prev = false;
    for (double T : checkpoints(opts)) {
        Field3 g = free_evolve(f, opts.sign * T);
        if (opts.sign > 0) {
            // e^{+iTH} u = conj(e^{-iTH} conj(u)) for real V.
            g = conjugate(evolve_static_potential(V, conjugate(g), T, opts.dt));
        } else {
            g = evolve_static_potential(V, g, T, opts.dt);
        }
        res.T_used = T;
        if (have_prev) {
            res.last_increment = (g - prev).norm2() / fn;
            if (res.last_increment < opts.cauchy_tol) {
                res.value = std::move(g);
                res.converged = true;
                return res;
            }
        }
        prev = std::move(g);
        have_prev = true;
    }
    res.value = std::move(prev);
    return res;
}

WaveOpResult adjoint_dynamic_wave_operator(const Potential& V, const Field3& f,
                                           const SpectralData& spec,
                                           const WaveOpOptions& opts) {
    require_same_grid(V.grid, f.grid, "adjoint_dynamic_wave_operator");
    const Field3 fc = project_continuous(spec, f);
    const double fn = f.norm2();
    WaveOpResult res;
    if (fn == 0.0 || V.sup_norm() == 0.0) {
        res.value = fc;
        res.converged = true;
        return res;
    }

    Field3 prev(f.grid, Side::physical);
    bool have_prev = false;
    for (double T : checkpoints(opts)) {
        Field3 g;
        if (opts.sign > 0) {
            // W_+^* = e^{-iT Delta} e^{-iTH} P_c.
            g = free_evolve(evolve_static_potential(V, fc, T, opts.dt), -T);
        } else {
            g = free_evolve(
                conjugate(evolve_static_potential(V, conjugate(fc), T, opts.dt)), T);
        }
        res.T_used = T;
        if (have_prev) {
            res.last_increment = (g - prev).norm2() / fn;
            if (res.last_increment < opts.cauchy_tol) {
                res.value = std::move(g);
                res.converged = true;
                return res;
            }
        }
        prev = std::move(g);
        have_prev = true;
    }
    res.value = std::move(prev);
    return res;
}

double intertwining_residual(const Potential& V, const Field3& f,
                             const std::function<Field3(const Field3&)>& W) {
    Field3 WHf = W(apply_hamiltonian(V, f));
    Field3 lapWf = W(f);
    apply_multiplier(lapWf, [](const Vec3& xi) { return cplx(xi.norm2(), 0.0); });
    Field3 h2 = f;
    apply_multiplier(h2, [](const Vec3& xi) { return cplx(1.0 + xi.norm2(), 0.0); });
    const double den = h2.norm2();
    if (den == 0.0) return 0.0;
    return (WHf - lapWf).norm2() / den;
}

// --- Born series -----------------------------------------------------------------

namespace {

// Interaction-picture phase tables e^{-i s |xi|^2}/n^3 and its conjugate.
struct InteractionPhases {
    std::vector<double> k2;
    std::vector<cplx> fwd, bwd;
    double scale;

    explicit InteractionPhases(const Grid3& g) {
        k2.resize(g.size());
        std::size_t idx = 0;
        for (int kx = 0; kx < g.n; ++kx)
            for (int ky = 0; ky < g.n; ++ky)
                for (int kz = 0; kz < g.n; ++kz, ++idx)
                    k2[idx] = g.freq_point(kx, ky, kz).norm2();
        scale = 1.0 / static_cast<double>(g.size());
        fwd.resize(g.size());
        bwd.resize(g.size());
    }

    void set(double s) {
        for (std::size_t i = 0; i < k2.size(); ++i) {
            fwd[i] = std::polar(scale, -s * k2[i]);
            bwd[i] = std::polar(scale, +s * k2[i]);
        }
    }
};

}  // namespace

BornResult born_series(const Potential& V, const Field3& f, int order,
                       const BornOptions& opts) {
    require_same_grid(V.grid, f.grid, "born_series");
    if (order < 1 || order > 4)
        throw std::invalid_argument("born_series: order must be in 1..4");
    if (opts.eta < 0.0) throw std::invalid_argument("born_series: eta must be >= 0");

    const Grid3& g = f.grid;
    const int steps = std::max(1, static_cast<int>(std::llround(opts.T / opts.ds)));
    const double ds = opts.T / steps;
    const double sigma = opts.sign >= 0 ? 1.0 : -1.0;

    InteractionPhases ph(g);

    // Vtilde(sigma s) with the phase tables already set for that s.
    auto apply_Vt = [&](const Field3& in, Field3& out) {
        out = in;
        detail::fft_raw(g, out.v, true);
        for (std::size_t i = 0; i < out.v.size(); ++i) out.v[i] *= ph.fwd[i];
        detail::fft_raw(g, out.v, false);
        for (std::size_t i = 0; i < out.v.size(); ++i) out.v[i] *= V.v[i];
        detail::fft_raw(g, out.v, true);
        for (std::size_t i = 0; i < out.v.size(); ++i) out.v[i] *= ph.bwd[i];
        detail::fft_raw(g, out.v, false);
    };

    // k_n(s) = sigma i int_s^T e^{-eta u} Vt(sigma u) k_{n-1}(u) du, k_0 = f;
    // RK2 midpoint sweep backward from T.
    std::vector<Field3> k(order + 1, Field3(g, Side::physical));
    k[0] = f;
    Field3 deriv(g, Side::physical);
    const cplx unit = sigma * cplx(0.0, 1.0);

    std::vector<Field3> k_half(order + 1, Field3(g, Side::physical));
    for (int s_idx = steps; s_idx > 0; --s_idx) {
        const double s1 = s_idx * ds;
        const double s_mid = s1 - 0.5 * ds;
        // Half step to s_mid using derivatives at s1.
        ph.set(sigma * s1);
        k_half[0] = k[0];
        for (int n = 1; n <= order; ++n) {
            apply_Vt(k[n - 1], deriv);
            k_half[n] = k[n];
            const cplx c = 0.5 * ds * unit * std::exp(-opts.eta * s1);
            for (std::size_t i = 0; i < deriv.v.size(); ++i)
                k_half[n].v[i] += c * deriv.v[i];
        }
        // Full step with midpoint derivatives.
        ph.set(sigma * s_mid);
        for (int n = 1; n <= order; ++n) {
            apply_Vt(k_half[n - 1], deriv);
            const cplx c = ds * unit * std::exp(-opts.eta * s_mid);
            for (std::size_t i = 0; i < deriv.v.size(); ++i)
                k[n].v[i] += c * deriv.v[i];
        }
    }

    BornResult out;
    out.value = f;
    for (int n = 1; n <= order; ++n) {
        out.value += k[n];
        out.corrections.push_back(k[n]);
        out.diag.order_norms.push_back(k[n].norm2());
    }
    out.diag.order = order;
    for (int n = 1; n < order; ++n) {
        const double lo = out.diag.order_norms[n - 1];
        const double hi = out.diag.order_norms[n];
        const double r = lo > 0 ? hi / lo : 0.0;
        out.diag.ratios.push_back(r);
        if (r >= 1.0) out.diag.converging = false;
    }
    return out;
}

Field3 born_w1(const Potential& V, const Field3& f, double eta, const BornOptions& opts) {
    if (eta <= 0.0) throw std::invalid_argument("born_w1: eta must be > 0");
    BornOptions o = opts;
    o.eta = eta;
    BornResult r = born_series(V, f, 1, o);
    return r.corrections[0];
}

Field3 born_w1_frequency(const Potential& V, const Field3& f, double eta, int sign) {
    require_same_grid(V.grid, f.grid, "born_w1_frequency");
    if (eta <= 0.0) throw std::invalid_argument("born_w1_frequency: eta must be > 0");
    const Grid3& g = f.grid;
    if (g.n > 32)
        throw std::invalid_argument("born_w1_frequency: O(n^6) reference path, use n <= 32");

    const Field3 vhat = fourier([&] {
        Field3 vf(g, Side::physical);
        for (std::size_t i = 0; i < vf.v.size(); ++i) vf.v[i] = V.v[i];
        return vf;
    }());
    const Field3 fhat = fourier(f);

    const int n = g.n;
    std::vector<double> freq(n);
    for (int k = 0; k < n; ++k) freq[k] = g.freq(k);

    Field3 out(g, Side::frequency);
    const double dk = g.freq_spacing();
    const double pref = std::pow(2.0 * M_PI, -1.5) * dk * dk * dk;

    for (int a1 = 0; a1 < n; ++a1)
        for (int b1 = 0; b1 < n; ++b1)
            for (int c1 = 0; c1 < n; ++c1) {
                const double xi1sq = freq[a1] * freq[a1] + freq[b1] * freq[b1] +
                                     freq[c1] * freq[c1];
                cplx acc = 0.0;
                for (int a2 = 0; a2 < n; ++a2) {
                    const int da = g.signed_index(a1) - g.signed_index(a2);
                    if (da < -n / 2 || da >= n / 2) continue;
                    const int ia = da < 0 ? da + n : da;
                    for (int b2 = 0; b2 < n; ++b2) {
                        const int db = g.signed_index(b1) - g.signed_index(b2);
                        if (db < -n / 2 || db >= n / 2) continue;
                        const int ib = db < 0 ? db + n : db;
                        for (int c2 = 0; c2 < n; ++c2) {
                            const int dc = g.signed_index(c1) - g.signed_index(c2);
                            if (dc < -n / 2 || dc >= n / 2) continue;
                            const int ic = dc < 0 ? dc + n : dc;
                            const cplx fv = fhat.at(a2, b2, c2);
                            if (fv == cplx(0.0)) continue;
                            const double xi2sq = freq[a2] * freq[a2] +
                                                 freq[b2] * freq[b2] +
                                                 freq[c2] * freq[c2];
                            const cplx den = sign >= 0
                                                 ? cplx(xi2sq - xi1sq, -eta)
                                                 : cplx(xi1sq - xi2sq, -eta);
                            acc += vhat.at(ia, ib, ic) * fv / den;
                        }
                    }
                }
                out.at(a1, b1, c1) = pref * acc;
            }
    return inverse_fourier(out);
}

// --- L profiles --------------------------------------------------------------------

namespace {

double default_s_max(const FrequencyLineSampler& sampler, const LProfileOptions& opts) {
    const double cap = 0.95 * sampler.band_limit();
    return opts.s_max > 0.0 ? std::min(opts.s_max, cap) : cap;
}

std::vector<double> uniform_s_nodes(int panels, double s_max) {
    std::vector<double> s(panels + 1);
    for (int j = 0; j <= panels; ++j) s[j] = s_max * j / panels;
    return s;
}

}  // namespace

LProfile profile_L(const Potential& V, const DirectionSet& dirs,
                   const std::vector<double>& t_grid, const LProfileOptions& opts) {
    if (t_grid.size() < 2) throw std::invalid_argument("profile_L: need a time grid");
    FrequencyLineSampler sampler(V);
    const double s_max = default_s_max(sampler, opts);
    const auto s = uniform_s_nodes(opts.s_panels, s_max);

    LProfile out;
    out.dirs = dirs;
    out.t = t_grid;
    const std::size_t nw = dirs.size();
    const std::size_t nt = t_grid.size();
    out.plus.resize(nt * nw);
    out.minus.resize(nt * nw);

    const double dt = t_grid[1] - t_grid[0];
    double total_p = 0.0, total_m = 0.0, total_p_coarse = 0.0;
    double tail = 0.0;

    for (std::size_t w = 0; w < nw; ++w) {
        const Vec3& omega = dirs.directions[w];
        std::vector<cplx> Ap(s.size()), Am(s.size());
        for (std::size_t j = 0; j < s.size(); ++j) {
            Ap[j] = sampler.sample(s[j] * omega) * s[j];
            Am[j] = std::conj(sampler.sample(-s[j] * omega)) * s[j];
        }
        LineQuadrature qp(Ap, s_max), qm(Am, s_max);
        LineQuadrature qp_c = qp.coarsened();

        for (std::size_t it = 0; it < nt; ++it) {
            const double tau = t_grid[it];
            const cplx lp = qp.integrate(tau);
            const cplx lm = std::conj(qm.integrate(tau));
            out.plus[it * nw + w] = lp;
            out.minus[it * nw + w] = lm;
            const double wt = (it == 0 || it + 1 == nt) ? 0.5 * dt : dt;
            total_p += dirs.weights[w] * wt * std::abs(lp);
            total_m += dirs.weights[w] * wt * std::abs(lm);
            total_p_coarse += dirs.weights[w] * wt * std::abs(qp_c.integrate(tau));
        }
        // |L| ~ C/t^2 beyond the grid: tail ~ |L(T)| * T at each end.
        tail += dirs.weights[w] *
                (std::abs(out.plus[0 * nw + w]) * std::abs(t_grid.front()) +
                 std::abs(out.plus[(nt - 1) * nw + w]) * std::abs(t_grid.back()));
    }
    out.total_plus = total_p;
    out.total_minus = total_m;
    out.t_tail = tail;
    out.refinement_error = std::abs(total_p - total_p_coarse) + tail;
    return out;
}

EstimReport estim_ratio(const Potential& V, const DirectionSet& dirs,
                        const std::vector<double>& t_grid, const LProfileOptions& opts) {
    EstimReport rep;
    rep.norm_value = dyadic_shell_norm(V, 0.5).value;
    if (rep.norm_value == 0.0)
        throw std::invalid_argument("estim_ratio: zero shell norm");
    LProfile lp = profile_L(V, dirs, t_grid, opts);
    rep.total = lp.total_plus;
    rep.ratio = rep.total / rep.norm_value;
    rep.error_estimate = lp.refinement_error / rep.norm_value;
    return rep;
}

cplx kernel_K(const FrequencyLineSampler& sampler, const Vec3& x, double t,
              const Vec3& omega, const LProfileOptions& opts) {
    const double s_max = default_s_max(sampler, opts);
    const auto s = uniform_s_nodes(opts.s_panels, s_max);
    std::vector<cplx> A(s.size());
    for (std::size_t j = 0; j < s.size(); ++j)
        A[j] = sampler.sample(s[j] * omega) * s[j];
    LineQuadrature q(A, s_max);
    // Phases combine to e^{-is(t/2 - omega.x)}.
    return 0.5 * q.integrate(0.5 * t - omega.dot(x));
}

namespace {

struct KernelSample {
    Vec3 x;
    double t;
    std::size_t w;  // direction index
};

std::vector<KernelSample> draw_samples(const Grid3& g, const DirectionSet& dirs,
                                       int n_samples, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ux(-0.4 * g.extent, 0.4 * g.extent);
    std::uniform_real_distribution<double> ut(-20.0, 20.0);
    std::uniform_int_distribution<std::size_t> uw(0, dirs.size() - 1);
    std::vector<KernelSample> out;
    for (int i = 0; i < n_samples; ++i)
        out.push_back({{ux(rng), ux(rng), ux(rng)}, ut(rng), uw(rng)});
    return out;
}

cplx interp_profile(const LProfile& lp, bool plus, double tau, std::size_t w) {
    const auto& t = lp.t;
    if (tau <= t.front() || tau >= t.back()) return 0.0;
    const double dt = t[1] - t[0];
    const double pos = (tau - t.front()) / dt;
    const std::size_t j = std::min<std::size_t>(static_cast<std::size_t>(pos), t.size() - 2);
    const double u = pos - j;
    const std::size_t nw = lp.dirs.size();
    const cplx a = plus ? lp.plus[j * nw + w] : lp.minus[j * nw + w];
    const cplx b = plus ? lp.plus[(j + 1) * nw + w] : lp.minus[(j + 1) * nw + w];
    return a + u * (b - a);
}

double decomposition_deviation(const Potential& V, const LProfile& lp,
                               const FrequencyLineSampler& sampler,
                               const std::vector<KernelSample>& samples,
                               const KernelConvention& conv, const LProfileOptions& opts,
                               int* used) {
    const double h = V.grid.spacing();
    double max_abs_K = 0.0, max_dev = 0.0;
    int count = 0;
    std::vector<std::pair<cplx, cplx>> pairs;
    for (const KernelSample& ks : samples) {
        const Vec3& omega = lp.dirs.directions[ks.w];
        const double u = omega.dot(ks.x);
        if (std::abs(u - 0.5 * ks.t) < h) continue;  // indicator boundary
        const double tau = conv.arg_scale * (ks.t - 2.0 * u);
        if (tau <= lp.t.front() || tau >= lp.t.back()) continue;
        const cplx lhs = kernel_K(sampler, ks.x, ks.t, omega, opts);
        const bool lower = u < 0.5 * ks.t;
        const bool use_plus = lower ? true : conv.upper_uses_plus;
        const cplx rhs = 0.5 * interp_profile(lp, use_plus, tau, ks.w);
        pairs.push_back({lhs, rhs});
        max_abs_K = std::max(max_abs_K, std::abs(lhs));
        ++count;
    }
    if (used) *used = count;
    if (count == 0 || max_abs_K == 0.0) return 0.0;
    for (const auto& [lhs, rhs] : pairs)
        max_dev = std::max(max_dev, std::abs(lhs - rhs) / max_abs_K);
    return max_dev;
}

}  // namespace

DecompositionReport decomposition_check(const Potential& V, int n_samples,
                                        std::uint64_t seed, const KernelConvention& conv,
                                        const LProfileOptions& opts) {
    DirectionSet dirs = sphere_quadrature(10);
    // Fine tau grid wide enough for the shifted arguments.
    std::vector<double> t_grid;
    const double T = 60.0;
    const int nt = 2400;
    for (int i = 0; i <= nt; ++i) t_grid.push_back(-T + 2.0 * T * i / nt);
    LProfile lp = profile_L(V, dirs, t_grid, opts);
    FrequencyLineSampler sampler(V);
    DecompositionReport rep;
    rep.convention = conv;
    rep.max_deviation = decomposition_deviation(V, lp, sampler,
                                                draw_samples(V.grid, dirs, n_samples, seed),
                                                conv, opts, &rep.samples_used);
    return rep;
}

KernelConvention calibrate_convention(const Potential& V_cal, const LProfileOptions& opts) {
    DirectionSet dirs = sphere_quadrature(10);
    std::vector<double> t_grid;
    const double T = 60.0;
    const int nt = 2400;
    for (int i = 0; i <= nt; ++i) t_grid.push_back(-T + 2.0 * T * i / nt);
    LProfile lp = profile_L(V_cal, dirs, t_grid, opts);
    FrequencyLineSampler sampler(V_cal);
    const auto samples = draw_samples(V_cal.grid, dirs, 60, 12345);

    KernelConvention best;
    double best_dev = std::numeric_limits<double>::infinity();
    for (bool plus : {true, false})
        for (double c : {0.25, 0.5, 1.0}) {
            KernelConvention kc{c, plus};
            const double dev =
                decomposition_deviation(V_cal, lp, sampler, samples, kc, opts, nullptr);
            if (dev < best_dev) {
                best_dev = dev;
                best = kc;
            }
        }
    // Local refinement of the argument scale around the winner.
    for (int it = 0; it < 2; ++it) {
        const double c0 = best.arg_scale;
        for (double c : {0.8 * c0, 0.9 * c0, c0, 1.1 * c0, 1.25 * c0}) {
            KernelConvention kc{c, best.upper_uses_plus};
            const double dev =
                decomposition_deviation(V_cal, lp, sampler, samples, kc, opts, nullptr);
            if (dev < best_dev) {
                best_dev = dev;
                best = kc;
            }
        }
    }
    return best;
}

// --- d/dt kernel -------------------------------------------------------------------

Field3 radial_frequency_derivative(const Potential& V) {
    const Grid3& g = V.grid;
    std::vector<Field3> grad;
    for (int axis = 0; axis < 3; ++axis) {
        Field3 xv(g, Side::physical);
        std::size_t idx = 0;
        for (int ix = 0; ix < g.n; ++ix)
            for (int iy = 0; iy < g.n; ++iy)
                for (int iz = 0; iz < g.n; ++iz, ++idx) {
                    const Vec3 p = g.point(ix, iy, iz);
                    const double c = axis == 0 ? p.x : (axis == 1 ? p.y : p.z);
                    xv.v[idx] = cplx(0.0, -c) * V.v[idx];  // F[-i x_c V] = dVhat/dxi_c
                }
        grad.push_back(fourier(xv));
    }
    Field3 out(g, Side::frequency);
    std::size_t idx = 0;
    for (int kx = 0; kx < g.n; ++kx)
        for (int ky = 0; ky < g.n; ++ky)
            for (int kz = 0; kz < g.n; ++kz, ++idx) {
                const Vec3 xi = g.freq_point(kx, ky, kz);
                const double r = xi.norm();
                if (r == 0.0) continue;
                out.v[idx] = (xi.x * grad[0].v[idx] + xi.y * grad[1].v[idx] +
                              xi.z * grad[2].v[idx]) /
                             r;
            }
    return out;
}

DtKernelReport dt_kernel_bound(const Potential& Vdot, int n_samples, std::uint64_t seed,
                               const LProfileOptions& opts) {
    const Grid3& g = Vdot.grid;
    FrequencyLineSampler sampler(Vdot);

    // Component samplers for grad Vhat, to take the radial derivative along omega.
    std::vector<FrequencyLineSampler> grad_samplers;
    // Rebuild the physical-space moments x_c * Vdot and lift each to a sampler.
    // FrequencyLineSampler consumes real potentials; the gradient components
    // are complex, so sample dVhat/ds from the two real moment fields.
    std::vector<Potential> moments;
    for (int axis = 0; axis < 3; ++axis) {
        Potential xv(g);
        std::size_t idx = 0;
        for (int ix = 0; ix < g.n; ++ix)
            for (int iy = 0; iy < g.n; ++iy)
                for (int iz = 0; iz < g.n; ++iz, ++idx) {
                    const Vec3 p = g.point(ix, iy, iz);
                    const double c = axis == 0 ? p.x : (axis == 1 ? p.y : p.z);
                    xv.v[idx] = c * Vdot.v[idx];
                }
        moments.push_back(std::move(xv));
        grad_samplers.emplace_back(moments.back());
    }
    auto dvhat_ds = [&](double s, const Vec3& omega) {
        // d/ds Vhat(s omega) = -i sum_c omega_c * F[x_c V](s omega).
        cplx acc = 0.0;
        const Vec3 xi = s * omega;
        acc += omega.x * grad_samplers[0].sample(xi);
        acc += omega.y * grad_samplers[1].sample(xi);
        acc += omega.z * grad_samplers[2].sample(xi);
        return cplx(0.0, -1.0) * acc;
    };

    const double s_max = default_s_max(sampler, opts);
    const auto s = uniform_s_nodes(opts.s_panels, s_max);
    DirectionSet dirs = sphere_quadrature(8);
    const auto samples = draw_samples(g, dirs, n_samples, seed);

    double max_abs = 0.0, max_dev = 0.0;
    int used = 0;
    for (const KernelSample& ks : samples) {
        const Vec3& omega = dirs.directions[ks.w];
        const double u = omega.dot(ks.x);
        if (std::abs(u) < 0.5 * g.spacing()) continue;  // 1/(x.omega) blows up

        std::vector<cplx> A(s.size()), dA(s.size()), A_plain(s.size());
        for (std::size_t j = 0; j < s.size(); ++j) {
            const cplx vh = sampler.sample(s[j] * omega);
            A[j] = vh * s[j];
            A_plain[j] = vh;
            dA[j] = dvhat_ds(s[j], omega) * s[j];
        }
        const double tau = 0.5 * ks.t - u;
        const cplx direct = 0.5 * LineQuadrature(A, s_max).integrate(tau);

        const cplx term1 = LineQuadrature(dA, s_max).integrate(tau);
        const cplx term2 =
            cplx(0.0, -0.5 * ks.t) * LineQuadrature(A, s_max).integrate(tau);
        const cplx term3 = LineQuadrature(A_plain, s_max).integrate(tau);
        const cplx ibp = cplx(0.0, 1.0) / (2.0 * u) * (term1 + term2 + term3);

        max_abs = std::max(max_abs, std::abs(direct));
        max_dev = std::max(max_dev, std::abs(direct - ibp));
        ++used;
    }

    DtKernelReport rep;
    rep.samples_used = used;
    rep.max_deviation = max_abs > 0 ? max_dev / max_abs : 0.0;

    Field3 control = radial_frequency_derivative(Vdot);
    {
        Field3 vhat = fourier([&] {
            Field3 vf(g, Side::physical);
            for (std::size_t i = 0; i < vf.v.size(); ++i) vf.v[i] = Vdot.v[i];
            return vf;
        }());
        control += vhat;
    }
    rep.controlling_norm = dyadic_shell_norm(control, 0.5);
    rep.controlling_norm.norm_id = "dt_kernel_control";
    return rep;
}

HardyReport hardy_ratio(const Potential& V) {
    const Grid3& g = V.grid;
    // Remove the mean so Vhat vanishes at the origin.
    Potential V0 = V;
    double mean = 0.0;
    for (double x : V0.v) mean += x;
    mean /= static_cast<double>(V0.v.size());
    for (double& x : V0.v) x -= mean;

    Field3 vf(g, Side::physical);
    for (std::size_t i = 0; i < vf.v.size(); ++i) vf.v[i] = V0.v[i];
    Field3 vhat = fourier(vf);

    Field3 over_s(g, Side::frequency);
    std::size_t idx = 0;
    for (int kx = 0; kx < g.n; ++kx)
        for (int ky = 0; ky < g.n; ++ky)
            for (int kz = 0; kz < g.n; ++kz, ++idx) {
                const double r = g.freq_point(kx, ky, kz).norm();
                over_s.v[idx] = r == 0.0 ? cplx(0.0) : vhat.v[idx] / r;
            }
    Field3 ds = radial_frequency_derivative(V0);

    HardyReport rep;
    rep.numerator = dyadic_shell_norm(over_s, 0.5).value;
    rep.denominator = dyadic_shell_norm(ds, 0.5).value;
    if (rep.denominator == 0.0)
        throw std::invalid_argument("hardy_ratio: zero denominator norm");
    rep.ratio = rep.numerator / rep.denominator;
    return rep;
}

// --- weighted decay ------------------------------------------------------------------

WeightedDecayReport weighted_decay_check(const Potential& V, double eps,
                                         const std::vector<Vec3>& x_samples,
                                         const DirectionSet& dirs,
                                         const WeightedDecayOptions& opts) {
    if (eps < 0.0 || eps > 1.0)
        throw std::invalid_argument("weighted_decay_check: need eps in [0,1]");
    WeightedDecayReport rep;
    rep.x_samples = x_samples;
    rep.norm_value = dyadic_shell_norm(V, 1.5 - eps).value;

    const int k_hi = static_cast<int>(std::floor(std::log2(opts.t_max))) - 1;
    for (int k = opts.block_k_min; k <= k_hi; ++k) rep.block_k.push_back(k);

    // One tau grid wide enough for every shifted argument.
    double shift_max = 0.0;
    for (const Vec3& x : x_samples) shift_max = std::max(shift_max, x.norm());
    const double tau_max = 0.5 * opts.t_max + shift_max + 1.0;
    const int n_tau = 2 * opts.nt;
    std::vector<double> tau_grid(n_tau + 1);
    for (int i = 0; i <= n_tau; ++i)
        tau_grid[i] = -tau_max + 2.0 * tau_max * i / n_tau;
    LProfileOptions lopts;
    lopts.s_panels = opts.s_panels;
    LProfile lp = profile_L(V, dirs, tau_grid, lopts);

    const double beta = 1.0 - eps;
    const double dt = 2.0 * opts.t_max / opts.nt;
    for (const Vec3& x : x_samples) {
        std::vector<double> blocks(rep.block_k.size(), 0.0);
        double total = 0.0;
        for (std::size_t w = 0; w < dirs.size(); ++w) {
            const Vec3& omega = dirs.directions[w];
            const double u = omega.dot(x);
            if (std::abs(u) < 1e-9) continue;
            const double wgt = dirs.weights[w] * std::pow(std::abs(u), beta);
            for (int i = 0; i <= opts.nt; ++i) {
                const double t = -opts.t_max + i * dt;
                const double tau = 0.5 * t - u;
                const double val = std::abs(interp_profile(lp, true, tau, w));
                const double quad_w = (i == 0 || i == opts.nt) ? 0.5 * dt : dt;
                const double contrib = wgt * quad_w * val;
                total += contrib;
                const double at = std::abs(t);
                if (at > 0.0) {
                    const int k = static_cast<int>(std::floor(std::log2(at)));
                    if (k >= rep.block_k.front() && k <= rep.block_k.back())
                        blocks[k - rep.block_k.front()] += contrib;
                }
            }
        }
        rep.block_sums.push_back(std::move(blocks));
        rep.ratios.push_back(rep.norm_value > 0 ? total / rep.norm_value : 0.0);
    }
    return rep;
}

Potential halfspace_truncate(const Potential& V, const Vec3& omega0, double t0) {
    Potential out = V;
    const Grid3& g = V.grid;
    std::size_t idx = 0;
    for (int ix = 0; ix < g.n; ++ix)
        for (int iy = 0; iy < g.n; ++iy)
            for (int iz = 0; iz < g.n; ++iz, ++idx)
                if (g.point(ix, iy, iz).dot(omega0) < t0) out.v[idx] = 0.0;
    return out;
}

}  // namespace displab
