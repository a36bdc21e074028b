#include "displab/propagator.hpp"

#include <sstream>

#include "displab/fft.hpp"

namespace displab {

Field3 free_evolve(const Field3& f, double t) {
    if (f.side != Side::physical)
        throw std::invalid_argument("free_evolve: input must be physical-side");
    Field3 out = f;
    if (t == 0.0) return out;
    apply_multiplier(out, [t](const Vec3& xi) {
        return std::polar(1.0, -t * xi.norm2());
    });
    return out;
}

Field3 free_heat(const Field3& f, double t) {
    if (t < 0.0) throw std::invalid_argument("free_heat: t must be nonnegative");
    Field3 out = f;
    if (t == 0.0) return out;
    apply_multiplier(out, [t](const Vec3& xi) {
        return cplx(std::exp(-t * xi.norm2()), 0.0);
    });
    return out;
}

double mass(const Field3& f) {
    const double n2 = f.norm2();
    return n2 * n2;
}

double kinetic_energy(const Field3& f) {
    // ||grad f||_2^2 = (h^3/n^3) sum |xi|^2 |F[f]|^2 with the raw DFT.
    Field3 tmp = f;
    detail::fft_raw(tmp.grid, tmp.v, true);
    const Grid3& g = tmp.grid;
    double acc = 0.0;
    std::size_t idx = 0;
    for (int kx = 0; kx < g.n; ++kx)
        for (int ky = 0; ky < g.n; ++ky)
            for (int kz = 0; kz < g.n; ++kz, ++idx)
                acc += g.freq_point(kx, ky, kz).norm2() * std::norm(tmp.v[idx]);
    const double h = g.spacing();
    return acc * h * h * h / static_cast<double>(g.size());
}

double energy(const Field3& f, const Potential& V) {
    require_same_grid(f.grid, V.grid, "energy");
    double pot = 0.0;
    for (std::size_t i = 0; i < f.v.size(); ++i) pot += V.v[i] * std::norm(f.v[i]);
    return kinetic_energy(f) + pot * f.cell_measure();
}

namespace {

enum class Kind { schroedinger, heat };

Trajectory run_split_step(Kind kind, const TimePotential& Vt, const Field3& psi0,
                          const TimeSource& source, const EvolveOptions& opts) {
    if (psi0.side != Side::physical)
        throw std::invalid_argument("evolve: initial data must be physical-side");
    if (!(opts.dt > 0.0) || !(opts.t_max > 0.0))
        throw std::invalid_argument("evolve: dt and t_max must be positive");

    const Grid3& g = psi0.grid;
    const double dt = opts.dt;
    const int steps = static_cast<int>(std::llround(opts.t_max / dt));
    if (std::abs(steps * dt - opts.t_max) > 1e-9 * std::max(1.0, opts.t_max))
        throw std::invalid_argument("evolve: t_max must be an integer multiple of dt");

    const double vsup = Vt.sup_bound(g, 0.0, opts.t_max);
    if (kind == Kind::schroedinger && dt * vsup > 0.5)
        throw std::invalid_argument("evolve: stability cap violated, dt*sup|V| = " +
                                    std::to_string(dt * vsup) + " > 0.5");

    // Kinetic factors are time-independent; build once.
    const auto full_kin = build_multiplier(g, [&](const Vec3& xi) {
        return kind == Kind::schroedinger ? std::polar(1.0, -dt * xi.norm2())
                                          : cplx(std::exp(-dt * xi.norm2()), 0.0);
    });
    const auto half_kin = build_multiplier(g, [&](const Vec3& xi) {
        return kind == Kind::schroedinger ? std::polar(1.0, -0.5 * dt * xi.norm2())
                                          : cplx(std::exp(-0.5 * dt * xi.norm2()), 0.0);
    });

    std::vector<cplx> kick(g.size());
    std::vector<cplx> kick_q;  // quarter-step kick for the source transport
    auto build_kick = [&](std::vector<cplx>& dst, const Potential& V, double theta) {
        dst.resize(g.size());
        for (std::size_t i = 0; i < dst.size(); ++i)
            dst[i] = kind == Kind::schroedinger ? std::polar(1.0, -theta * V.v[i])
                                                : cplx(std::exp(-theta * V.v[i]), 0.0);
    };

    const bool cache_static = Vt.is_static();
    Potential Vmid;
    if (cache_static) {
        Vmid = Vt.at(0.0, g);
        build_kick(kick, Vmid, 0.5 * dt);
        if (source) build_kick(kick_q, Vmid, 0.25 * dt);
    }

    Trajectory traj;
    traj.dt = dt;
    Field3 psi = psi0;

    auto record = [&](int step, double t) {
        traj.times.push_back(t);
        traj.mass.push_back(mass(psi));
        traj.sup.push_back(psi.sup_norm());
        if (opts.record_energy)
            traj.energy.push_back(energy(psi, cache_static ? Vmid : Vt.at(t, g)));
        if (step % opts.store_stride == 0) {
            traj.stored_times.push_back(t);
            traj.states.push_back(psi);
        }
        if (opts.observer) opts.observer(step, t, psi);
    };

    record(0, 0.0);
    const double mass0 = traj.mass.front();

    Field3 src_field(g, Side::physical);
    for (int s = 0; s < steps; ++s) {
        const double t = s * dt;
        const double t_mid = t + 0.5 * dt;
        if (!cache_static) {
            const Potential V = Vt.at(t_mid, g);
            build_kick(kick, V, 0.5 * dt);
            if (source) build_kick(kick_q, V, 0.25 * dt);
        }

        for (std::size_t i = 0; i < psi.v.size(); ++i) psi.v[i] *= kick[i];
        apply_cached_multiplier(psi, full_kin);
        for (std::size_t i = 0; i < psi.v.size(); ++i) psi.v[i] *= kick[i];

        if (source) {
            // Midpoint Duhamel: -i dt U(t+dt, t_mid) Psi(t_mid), the half-step
            // transport done by one Strang substep.
            std::size_t idx = 0;
            for (int ix = 0; ix < g.n; ++ix)
                for (int iy = 0; iy < g.n; ++iy)
                    for (int iz = 0; iz < g.n; ++iz, ++idx)
                        src_field.v[idx] = source.eval(g.point(ix, iy, iz), t_mid);
            for (std::size_t i = 0; i < src_field.v.size(); ++i) src_field.v[i] *= kick_q[i];
            apply_cached_multiplier(src_field, half_kin);
            const cplx coef = kind == Kind::schroedinger ? cplx(0.0, -dt) : cplx(dt, 0.0);
            for (std::size_t i = 0; i < psi.v.size(); ++i)
                psi.v[i] += coef * kick_q[i] * src_field.v[i];
        }

        record(s + 1, (s + 1) * dt);

        if (kind == Kind::schroedinger && !source) {
            const double drift = std::abs(traj.mass.back() - mass0) / ((s + 1) * dt);
            if (drift > opts.mass_drift_tol * std::max(mass0, 1e-300)) {
                std::ostringstream os;
                os << "evolve: instability detected at t=" << (s + 1) * dt
                   << ", mass drift per unit time " << drift << " exceeds "
                   << opts.mass_drift_tol;
                throw std::runtime_error(os.str());
            }
        }
    }
    return traj;
}

}  // namespace

Trajectory evolve(const TimePotential& Vt, const Field3& psi0, const TimeSource& source,
                  const EvolveOptions& opts) {
    return run_split_step(Kind::schroedinger, Vt, psi0, source, opts);
}

Trajectory heat_evolve(const TimePotential& Vt, const Field3& psi0, const TimeSource& source,
                       const EvolveOptions& opts) {
    return run_split_step(Kind::heat, Vt, psi0, source, opts);
}

Field3 evolve_static_potential(const Potential& V, const Field3& psi0, double t, double dt) {
    require_same_grid(V.grid, psi0.grid, "evolve_static_potential");
    if (t == 0.0) return psi0;
    if (!(t > 0.0) || !(dt > 0.0))
        throw std::invalid_argument("evolve_static_potential: need t, dt > 0");
    const int steps = static_cast<int>(std::llround(t / dt));
    const double step = t / steps;
    const Grid3& g = psi0.grid;

    const auto kin = build_multiplier(g, [step](const Vec3& xi) {
        return std::polar(1.0, -step * xi.norm2());
    });
    std::vector<cplx> kick(g.size());
    for (std::size_t i = 0; i < kick.size(); ++i)
        kick[i] = std::polar(1.0, -0.5 * step * V.v[i]);

    Field3 psi = psi0;
    for (int s = 0; s < steps; ++s) {
        for (std::size_t i = 0; i < psi.v.size(); ++i) psi.v[i] *= kick[i];
        apply_cached_multiplier(psi, kin);
        for (std::size_t i = 0; i < psi.v.size(); ++i) psi.v[i] *= kick[i];
    }
    return psi;
}

}  // namespace displab
