#include <doctest.h>

#include <random>

#include "displab/spectral.hpp"
#include "test_common.hpp"

using namespace displab;

namespace {

// Independent 1-D radial oracle: u'' = (V(r) - E) u, u(0) = 0, integrated
// outward to the well edge where the exterior solution is exactly
// e^{-gamma r}; bound states are zeros of the log-derivative mismatch.
struct RadialShooting {
    double depth, radius;

    double mismatch(double E) const {
        const double dr = 1e-4;
        double u = 0.0, du = 1.0;
        double r = 1e-12;
        auto rhs = [&](double, double uu) { return (-depth - E) * uu; };
        while (r < radius) {
            const double k1u = du, k1d = rhs(r, u);
            const double k2u = du + 0.5 * dr * k1d, k2d = rhs(r + 0.5 * dr, u + 0.5 * dr * k1u);
            const double k3u = du + 0.5 * dr * k2d, k3d = rhs(r + 0.5 * dr, u + 0.5 * dr * k2u);
            const double k4u = du + dr * k3d, k4d = rhs(r + dr, u + dr * k3u);
            u += dr / 6.0 * (k1u + 2 * k2u + 2 * k3u + k4u);
            du += dr / 6.0 * (k1d + 2 * k2d + 2 * k3d + k4d);
            r += dr;
        }
        const double gamma = std::sqrt(std::max(1e-14, -E));
        return du / u + gamma;
    }

    double ground_energy() const {
        const double lo0 = -depth + 1e-6, hi0 = -1e-6;
        const int steps = 2000;
        double prev = lo0, fprev = mismatch(lo0);
        double root_lo = 0.0, root_hi = 0.0;
        bool found = false;
        for (int i = 1; i <= steps; ++i) {
            const double E = lo0 + (hi0 - lo0) * i / steps;
            const double fE = mismatch(E);
            if (std::isfinite(fprev) && std::isfinite(fE) && fprev * fE < 0.0) {
                root_lo = prev;
                root_hi = E;
                found = true;
                break;
            }
            prev = E;
            fprev = fE;
        }
        REQUIRE(found);
        for (int it = 0; it < 80; ++it) {
            const double mid = 0.5 * (root_lo + root_hi);
            if (mismatch(root_lo) * mismatch(mid) <= 0.0)
                root_hi = mid;
            else
                root_lo = mid;
        }
        return 0.5 * (root_lo + root_hi);
    }
};

// Binding threshold of -lambda chi_{r<1}: at E = 0 the exterior solution is
// linear; a bound state appears when u'(1) crosses zero.
double shooting_threshold() {
    auto du_after_well = [](double lambda) {
        const double dr = 1e-4;
        double u = 0.0, du = 1.0, r = 1e-12;
        while (r < 1.0) {
            const double k1u = du, k1d = -lambda * u;
            const double k2u = du + 0.5 * dr * k1d, k2d = -lambda * (u + 0.5 * dr * k1u);
            const double k3u = du + 0.5 * dr * k2d, k3d = -lambda * (u + 0.5 * dr * k2u);
            const double k4u = du + dr * k3d, k4d = -lambda * (u + dr * k3u);
            u += dr / 6.0 * (k1u + 2 * k2u + 2 * k3u + k4u);
            du += dr / 6.0 * (k1d + 2 * k2d + 2 * k3d + k4d);
            r += dr;
        }
        return du;
    };
    double lo = 1.0, hi = 5.0;
    for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (du_after_well(mid) > 0.0)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("radial shooting oracle reproduces the analytic threshold") {
    CHECK(shooting_threshold() == doctest::Approx(M_PI * M_PI / 4.0).epsilon(1e-4));
}

TEST_CASE("apply_hamiltonian") {
    const Grid3 g = make_grid(16, 4.0);

    SUBCASE("plane wave is a kinetic eigenfunction") {
        Potential V(g);
        Field3 f(g, Side::physical);
        const Vec3 xi0 = g.freq_point(2, 1, 0);
        std::size_t idx = 0;
        for (int ix = 0; ix < g.n; ++ix)
            for (int iy = 0; iy < g.n; ++iy)
                for (int iz = 0; iz < g.n; ++iz, ++idx)
                    f.v[idx] = std::polar(1.0, xi0.dot(g.point(ix, iy, iz)));
        Field3 Hf = apply_hamiltonian(V, f);
        Field3 expect = f;
        expect *= cplx(xi0.norm2(), 0.0);
        CHECK((Hf - expect).norm2() < 1e-10 * expect.norm2());
    }

    SUBCASE("zero field and grid mismatch") {
        Potential V(g);
        Field3 f(g, Side::physical);
        CHECK(apply_hamiltonian(V, f).norm2() == 0.0);
        Field3 wrong(make_grid(32, 4.0), Side::physical);
        CHECK_THROWS_AS(apply_hamiltonian(V, wrong), std::invalid_argument);
    }

    SUBCASE("truncated oscillator ground state: H f = 3 f in the core") {
        const Grid3 go = make_grid(32, 8.0);
        Potential V(go);
        std::size_t idx = 0;
        for (int ix = 0; ix < go.n; ++ix)
            for (int iy = 0; iy < go.n; ++iy)
                for (int iz = 0; iz < go.n; ++iz, ++idx)
                    V.v[idx] = go.point(ix, iy, iz).norm2();
        Field3 f = test::gaussian_field(go, 1.0);
        Field3 Hf = apply_hamiltonian(V, f);
        double worst = 0.0;
        idx = 0;
        for (int ix = 0; ix < go.n; ++ix)
            for (int iy = 0; iy < go.n; ++iy)
                for (int iz = 0; iz < go.n; ++iz, ++idx)
                    if (go.point(ix, iy, iz).norm() < 2.0)
                        worst = std::max(worst, std::abs(Hf.v[idx] - 3.0 * f.v[idx]) /
                                                    std::abs(f.v[idx]));
        CHECK(worst < 1e-2);
    }

    SUBCASE("self-adjointness on random pairs") {
        Potential V = GaussianProfile(-2.0, 1.0).sample(g);
        for (std::uint64_t seed : {31u, 32u, 33u}) {
            Field3 f = test::random_field(g, seed);
            Field3 h = test::random_field(g, seed + 100);
            const cplx a = inner(apply_hamiltonian(V, f), h);
            const cplx b = inner(f, apply_hamiltonian(V, h));
            CHECK(std::abs(a - b) <= 1e-8 * f.norm2() * h.norm2());
        }
    }
}

TEST_CASE("bound states of the square well") {
    const Grid3 g = make_grid(64, 8.0);
    // The box squeezes the constant mode to (1/vol) int V ~ -8e-3; a gap
    // above that floor separates it from genuine bound states.
    BoundStateOptions opts;
    opts.delta_gap = 0.02;

    SUBCASE("free Hamiltonian has none") {
        Potential V(g);
        CHECK(bound_states(V, 4, opts).count() == 0);
    }

    SUBCASE("below the binding threshold") {
        Potential V = BallProfile(-1.0, 1.0).sample(g);
        CHECK(bound_states(V, 4, opts).count() == 0);
    }

    SUBCASE("depth 8 ground state matches the shooting oracle to 1%") {
        // h = 0.125 resolves the well edge; the state decays well inside L = 4.
        const Grid3 gf = make_grid(64, 4.0);
        Potential V = BallProfile(-8.0, 1.0).sample(gf);
        BoundStateOptions fine = opts;
        fine.delta_gap = 0.25;  // constant-mode floor sits near -0.1 in this box
        SpectralData sd = bound_states(V, 2, fine);
        REQUIRE(sd.count() >= 1);
        const double oracle = RadialShooting{8.0, 1.0}.ground_energy();
        CHECK(std::abs(sd.eigenvalues[0] - oracle) <= 0.01 * std::abs(oracle));
        for (std::size_t i = 0; i < sd.count(); ++i) {
            CHECK(sd.residuals[i] <= 1e-6 * std::abs(sd.eigenvalues[i]));
            for (std::size_t j = 0; j < sd.count(); ++j) {
                const cplx gram = inner(sd.eigenfields[i], sd.eigenfields[j]);
                CHECK(std::abs(gram - cplx(i == j ? 1.0 : 0.0)) < 1e-8);
            }
        }
    }
}

TEST_CASE("project_continuous") {
    const Grid3 g = make_grid(32, 8.0);

    SUBCASE("no bound states: identity") {
        Potential V(g);
        SpectralData sd = bound_states(V, 4);
        Field3 f = test::random_field(g, 41);
        CHECK((project_continuous(sd, f) - f).norm2() == 0.0);
    }

    SUBCASE("annihilates eigenfields, idempotent, self-adjoint") {
        Potential V = GaussianProfile(-6.0, 1.2).sample(g);
        SpectralData sd = bound_states(V, 4);
        REQUIRE(sd.count() >= 1);
        CHECK(project_continuous(sd, sd.eigenfields[0]).norm2() < 1e-8);

        Field3 f = test::random_field(g, 42);
        Field3 once = project_continuous(sd, f);
        Field3 twice = project_continuous(sd, once);
        CHECK((twice - once).norm2() <= 1e-8 * f.norm2());

        Field3 h = test::random_field(g, 43);
        const cplx a = inner(project_continuous(sd, f), h);
        const cplx b = inner(f, project_continuous(sd, h));
        CHECK(std::abs(a - b) <= 1e-8 * f.norm2() * h.norm2());
    }
}

TEST_CASE("Birman-Schwinger resonance detection") {
    const Grid3 g = make_grid(64, 8.0);

    SUBCASE("zero potential is clear with infinite margin") {
        Potential V(g);
        ResonanceReport r = resonance_test(V);
        CHECK(!r.resonant);
        CHECK(std::isinf(r.distance_to_resonance));
    }

    SUBCASE("shallow well: clear, eigenvalue near -lambda/lambda*") {
        Potential V = BallProfile(-1.0, 1.0).sample(g);
        ResonanceReport r = resonance_test(V);
        CHECK(!r.resonant);
        CHECK(r.distance_to_resonance > 0.3);
        REQUIRE(!r.bs_eigenvalues.empty());
        const double mu_min = r.bs_eigenvalues.front();
        CHECK(mu_min == doctest::Approx(-1.0 / (M_PI * M_PI / 4.0)).epsilon(0.05));
    }

    SUBCASE("threshold well flags a resonance") {
        Potential V = BallProfile(-M_PI * M_PI / 4.0, 1.0).sample(g);
        ResonanceReport r = resonance_test(V);
        CHECK(r.distance_to_resonance < 0.05);
    }

    SUBCASE("dyadic rescaling leaves the spectrum unchanged") {
        auto ball = std::make_shared<BallProfile>(-1.0, 1.0);
        Potential V = ball->sample(g);
        ResonanceReport r1 = resonance_test(V);
        const Grid3 g2 = make_grid(64, 4.0);
        Potential V2 = DilatedProfile(ball, 2.0).sample(g2);
        ResonanceReport r2 = resonance_test(V2);
        REQUIRE(!r1.bs_eigenvalues.empty());
        REQUIRE(!r2.bs_eigenvalues.empty());
        CHECK(std::abs(r1.bs_eigenvalues.front() - r2.bs_eigenvalues.front()) <=
              1e-3 * std::abs(r1.bs_eigenvalues.front()));
    }
}

TEST_CASE("eigen count timeline") {
    const Grid3 g = make_grid(32, 8.0);
    std::vector<double> times{0.0, 0.5, 1.0, 1.5, 2.0};

    SUBCASE("static potential keeps a constant count") {
        TimePotential Vt =
            TimePotential::make_static(std::make_shared<GaussianProfile>(-6.0, 1.2));
        EigenCountTimeline tl = eigen_count_timeline(Vt, times, g);
        CHECK(tl.changes.empty());
        for (int c : tl.counts) CHECK(c == tl.counts.front());
        CHECK(tl.counts.front() >= 1);
    }

    SUBCASE("translating well keeps the count of its profile") {
        auto prof = std::make_shared<GaussianProfile>(-6.0, 1.2);
        TimePotential Vt =
            TimePotential::translating(prof, linear_motion({0, 0, 0}, {0.4, 0, 0}));
        EigenCountTimeline tl = eigen_count_timeline(Vt, times, g);
        const int expected = static_cast<int>(bound_states(prof->sample(g), 4).count());
        CHECK(tl.changes.empty());
        for (int c : tl.counts) CHECK(c == expected);
    }

    SUBCASE("unsorted times throw") {
        TimePotential Vt =
            TimePotential::make_static(std::make_shared<GaussianProfile>(-6.0, 1.2));
        CHECK_THROWS_AS(eigen_count_timeline(Vt, {1.0, 0.5}, g), std::invalid_argument);
    }
}
