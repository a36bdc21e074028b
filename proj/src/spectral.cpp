#include "displab/spectral.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <map>

#include "displab/fft.hpp"

namespace displab {

Field3 apply_hamiltonian(const Potential& V, const Field3& f) {
    require_same_grid(V.grid, f.grid, "apply_hamiltonian");
    if (f.side != Side::physical)
        throw std::invalid_argument("apply_hamiltonian: field must be physical-side");
    Field3 kin = f;
    apply_multiplier(kin, [](const Vec3& xi) { return cplx(xi.norm2(), 0.0); });
    for (std::size_t i = 0; i < kin.v.size(); ++i) kin.v[i] += V.v[i] * f.v[i];
    return kin;
}

namespace {

// H acting on packed real vectors; shares one scratch field.
struct RealHamiltonian {
    const Potential& V;
    mutable Field3 scratch;

    explicit RealHamiltonian(const Potential& V_) : V(V_), scratch(V_.grid, Side::physical) {}

    void operator()(const std::vector<double>& in, std::vector<double>& out) const {
        for (std::size_t i = 0; i < in.size(); ++i) scratch.v[i] = in[i];
        apply_multiplier(scratch, [](const Vec3& xi) { return cplx(xi.norm2(), 0.0); });
        out.resize(in.size());
        for (std::size_t i = 0; i < in.size(); ++i)
            out[i] = scratch.v[i].real() + V.v[i] * in[i];
    }
};

SpectralData pack_bound_states(const Potential& V, const std::vector<EigenPair>& pairs,
                               double delta_gap, int k_max, bool converged) {
    SpectralData sd;
    sd.grid = V.grid;
    sd.converged = converged;
    for (const EigenPair& p : pairs) {
        if (p.value >= -delta_gap) continue;
        if (static_cast<int>(sd.count()) >= k_max) break;
        Field3 phi(V.grid, Side::physical);
        for (std::size_t i = 0; i < p.vector.size(); ++i) phi.v[i] = p.vector[i];
        // Normalize in the L2 cell measure.
        const double n = phi.norm2();
        phi *= cplx(1.0 / n, 0.0);
        sd.eigenvalues.push_back(p.value);
        sd.eigenfields.push_back(std::move(phi));
        sd.residuals.push_back(0.0);
    }
    // Orthonormalize (Gram-Schmidt) and recompute true residuals.
    for (std::size_t i = 0; i < sd.count(); ++i) {
        for (std::size_t j = 0; j < i; ++j) {
            const cplx c = inner(sd.eigenfields[j], sd.eigenfields[i]);
            sd.eigenfields[i] -= c * sd.eigenfields[j];
        }
        const double n = sd.eigenfields[i].norm2();
        sd.eigenfields[i] *= cplx(1.0 / n, 0.0);
        Field3 r = apply_hamiltonian(V, sd.eigenfields[i]);
        r -= cplx(sd.eigenvalues[i], 0.0) * sd.eigenfields[i];
        sd.residuals[i] = r.norm2();
    }
    return sd;
}

}  // namespace

SpectralData bound_states(const Potential& V, int k_max, const BoundStateOptions& opts) {
    RealHamiltonian H(V);
    auto op = [&H](const std::vector<double>& in, std::vector<double>& out) { H(in, out); };

    // Quick scan: certify the absence of bound states cheaply (the discrete
    // continuum starts at zero with tightly clustered modes that would take
    // many restarts to polish).
    LanczosOptions scan;
    scan.want = std::min<int>(k_max + 2, 6);
    scan.max_basis = std::min(opts.max_basis, 48);
    scan.max_restarts = 4;
    scan.tol = 1e-4;
    scan.loose_tol = 1e-4;
    scan.converge_below = -opts.delta_gap;
    scan.seed = opts.seed;
    scan.warm_start = opts.warm_start;
    LanczosResult probe = lanczos_smallest(op, V.grid.size(), scan);
    bool maybe_bound = false;
    for (const EigenPair& p : probe.pairs)
        if (p.value - p.residual < -opts.delta_gap) maybe_bound = true;
    if (!maybe_bound && probe.converged)
        return pack_bound_states(V, probe.pairs, opts.delta_gap, k_max, true);

    LanczosOptions lo;
    lo.want = k_max + 2;
    lo.max_basis = opts.max_basis;
    lo.max_restarts = opts.max_restarts;
    lo.tol = opts.tol;
    lo.converge_below = -0.5 * opts.delta_gap;
    lo.loose_tol = std::max(1e-5, opts.tol);
    lo.seed = opts.seed;
    lo.warm_start = opts.warm_start;
    for (const EigenPair& p : probe.pairs)
        if (p.value - p.residual < -opts.delta_gap) lo.warm_start.push_back(p.vector);
    LanczosResult lr = lanczos_smallest(op, V.grid.size(), lo);
    return pack_bound_states(V, lr.pairs, opts.delta_gap, k_max, lr.converged);
}

SpectralData refine_bound_states(const Potential& V, const SpectralData& previous,
                                 const BoundStateOptions& opts) {
    if (previous.count() == 0) return bound_states(V, opts.k_max, opts);
    require_same_grid(V.grid, previous.grid, "refine_bound_states");

    // Subspace span{phi, H phi, H^2 phi} from the previous snapshot.
    std::vector<Field3> basis;
    for (const Field3& phi : previous.eigenfields) {
        basis.push_back(phi);
        basis.push_back(apply_hamiltonian(V, phi));
        basis.push_back(apply_hamiltonian(V, basis.back()));
    }
    // Orthonormalize, dropping near-dependent directions.
    std::vector<Field3> q;
    for (Field3& b : basis) {
        for (const Field3& e : q) b -= inner(e, b) * e;
        for (const Field3& e : q) b -= inner(e, b) * e;
        const double n = b.norm2();
        if (n < 1e-10) continue;
        b *= cplx(1.0 / n, 0.0);
        q.push_back(std::move(b));
    }
    const int k = static_cast<int>(q.size());
    Eigen::MatrixXd A(k, k);
    std::vector<Field3> Hq;
    for (const Field3& e : q) Hq.push_back(apply_hamiltonian(V, e));
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) A(i, j) = inner(q[i], Hq[j]).real();
    A = 0.5 * (A + A.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);

    std::vector<EigenPair> pairs;
    for (int i = 0; i < k; ++i) {
        EigenPair p;
        p.value = es.eigenvalues()(i);
        p.vector.assign(V.grid.size(), 0.0);
        for (int j = 0; j < k; ++j)
            for (std::size_t m = 0; m < p.vector.size(); ++m)
                p.vector[m] += es.eigenvectors()(j, i) * q[j].v[m].real();
        pairs.push_back(std::move(p));
    }
    SpectralData sd = pack_bound_states(V, pairs, opts.delta_gap, opts.k_max, true);
    // Fall back to the full solver if the refresh lost accuracy or states.
    bool ok = sd.count() >= previous.count();
    for (std::size_t i = 0; i < sd.count(); ++i)
        if (sd.residuals[i] > 1e3 * opts.tol + 1e-6 * std::abs(sd.eigenvalues[i])) ok = false;
    if (!ok) {
        BoundStateOptions full = opts;
        for (const Field3& phi : previous.eigenfields) {
            std::vector<double> w(phi.v.size());
            for (std::size_t i = 0; i < w.size(); ++i) w[i] = phi.v[i].real();
            full.warm_start.push_back(std::move(w));
        }
        return bound_states(V, opts.k_max, full);
    }
    return sd;
}

Field3 project_continuous(const SpectralData& spec, const Field3& f) {
    if (spec.count() == 0) return f;
    require_same_grid(spec.grid, f.grid, "project_continuous");
    Field3 out = f;
    for (const Field3& phi : spec.eigenfields) out -= inner(phi, f) * phi;
    return out;
}

namespace {

// Transform of the free-space kernel 1/(4 pi |x|) sampled on the padded
// grid (self-cell regularized by its exact cell average). Doubling per axis
// makes the circular convolution equal the linear one, so the result is the
// decaying Green potential with no periodic-image offset.
const std::vector<cplx>& green_kernel_transform(const Grid3& big) {
    static std::map<std::pair<int, double>, std::vector<cplx>> cache;
    const auto key = std::make_pair(big.n, big.extent);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;

    const double h = big.spacing();
    // int_{unit cube} dy/|y| regularizes the self cell.
    const double self_cell = 2.3800774 / h;
    std::vector<cplx> kernel(big.size());
    std::size_t idx = 0;
    for (int ix = 0; ix < big.n; ++ix)
        for (int iy = 0; iy < big.n; ++iy)
            for (int iz = 0; iz < big.n; ++iz, ++idx) {
                // Wrapped displacement components in [-L, L).
                const double dx = big.coord((ix + big.n / 2) % big.n);
                const double dy = big.coord((iy + big.n / 2) % big.n);
                const double dz = big.coord((iz + big.n / 2) % big.n);
                const double r = std::sqrt(dx * dx + dy * dy + dz * dz);
                kernel[idx] = (r == 0.0 ? self_cell : 1.0 / r) / (4.0 * M_PI);
            }
    detail::fft_raw(big, kernel, true);
    const double scale = h * h * h / static_cast<double>(big.size());
    for (cplx& z : kernel) z *= scale;
    return cache.emplace(key, std::move(kernel)).first->second;
}

}  // namespace

Field3 apply_inverse_laplacian(const Field3& f, int pad) {
    const Grid3& g = f.grid;
    const Grid3 big{g.n * pad, g.extent * pad};
    Field3 padded(big, Side::physical);
    const int off = (big.n - g.n) / 2;
    for (int ix = 0; ix < g.n; ++ix)
        for (int iy = 0; iy < g.n; ++iy)
            for (int iz = 0; iz < g.n; ++iz)
                padded.at(ix + off, iy + off, iz + off) = f.at(ix, iy, iz);
    const auto& khat = green_kernel_transform(big);
    detail::fft_raw(big, padded.v, true);
    for (std::size_t i = 0; i < padded.v.size(); ++i) padded.v[i] *= khat[i];
    detail::fft_raw(big, padded.v, false);
    Field3 out(g, Side::physical);
    for (int ix = 0; ix < g.n; ++ix)
        for (int iy = 0; iy < g.n; ++iy)
            for (int iz = 0; iz < g.n; ++iz)
                out.at(ix, iy, iz) = padded.at(ix + off, iy + off, iz + off);
    return out;
}

ResonanceReport resonance_test(const Potential& V, const ResonanceOptions& opts) {
    ResonanceReport rep;
    rep.threshold = opts.threshold;
    if (V.sup_norm() == 0.0) return rep;  // clear, infinite margin

    const Grid3& g = V.grid;
    std::vector<double> root(g.size()), sign(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        root[i] = std::sqrt(std::abs(V.v[i]));
        sign[i] = V.v[i] > 0.0 ? 1.0 : (V.v[i] < 0.0 ? -1.0 : 0.0);
    }

    Field3 scratch(g, Side::physical);
    auto bs_op = [&](const std::vector<double>& in, std::vector<double>& out) {
        for (std::size_t i = 0; i < in.size(); ++i)
            scratch.v[i] = root[i] * sign[i] * in[i];
        Field3 green = apply_inverse_laplacian(scratch, opts.pad);
        out.resize(in.size());
        for (std::size_t i = 0; i < in.size(); ++i)
            out[i] = root[i] * green.v[i].real();
    };

    ArnoldiOptions ao;
    ao.max_basis = opts.max_basis;
    auto ritz = arnoldi_spectrum(bs_op, g.size(), ao);

    // Keep well-converged, essentially-real Ritz values.
    for (const RitzValue& rv : ritz) {
        if (rv.residual > 1e-4 * std::max(1.0, std::abs(rv.value))) continue;
        if (std::abs(rv.value.imag()) > 1e-6 * std::max(1.0, std::abs(rv.value))) continue;
        rep.bs_eigenvalues.push_back(rv.value.real());
        if (static_cast<int>(rep.bs_eigenvalues.size()) >= opts.n_eigs) break;
    }
    std::sort(rep.bs_eigenvalues.begin(), rep.bs_eigenvalues.end());
    for (double mu : rep.bs_eigenvalues)
        rep.distance_to_resonance = std::min(rep.distance_to_resonance, std::abs(mu + 1.0));
    rep.resonant = rep.distance_to_resonance < rep.threshold;
    return rep;
}

EigenCountTimeline eigen_count_timeline(const TimePotential& Vt,
                                        const std::vector<double>& times, const Grid3& g,
                                        const BoundStateOptions& opts,
                                        const ResonanceOptions& res_opts) {
    if (!std::is_sorted(times.begin(), times.end()))
        throw std::invalid_argument("eigen_count_timeline: times must be sorted");
    EigenCountTimeline tl;
    tl.times = times;
    std::optional<SpectralData> prev;
    for (double t : times) {
        const Potential V = Vt.at(t, g);
        BoundStateOptions bo = opts;
        if (prev)
            for (const Field3& phi : prev->eigenfields) {
                std::vector<double> w(phi.v.size());
                for (std::size_t i = 0; i < w.size(); ++i) w[i] = phi.v[i].real();
                bo.warm_start.push_back(std::move(w));
            }
        SpectralData sd = bound_states(V, opts.k_max, bo);
        const int count = static_cast<int>(sd.count());
        if (!tl.counts.empty() && count != tl.counts.back()) {
            ResonanceReport rr = resonance_test(V, res_opts);
            tl.changes.push_back({t, tl.counts.back(), count, rr.distance_to_resonance});
        }
        tl.counts.push_back(count);
        prev = std::move(sd);
    }
    return tl;
}

}  // namespace displab
