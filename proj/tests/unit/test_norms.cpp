#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "displab/norms.hpp"
#include "displab/propagator.hpp"
#include "test_common.hpp"

using namespace displab;

namespace {

Potential sample_pointwise(const Profile& p, const Grid3& g) {
    Potential V(g);
    std::size_t idx = 0;
    for (int ix = 0; ix < g.n; ++ix)
        for (int iy = 0; iy < g.n; ++iy)
            for (int iz = 0; iz < g.n; ++iz, ++idx) V.v[idx] = p.value(g.point(ix, iy, iz));
    return V;
}

}  // namespace

TEST_CASE("dyadic shell norm: closed-form shell masses") {
    const Grid3 g = make_grid(128, 4.0);
    // chi_{1 <= |x| < 2} occupies exactly the k = 0 shell: norm = sqrt(28 pi / 3).
    Potential V = sample_pointwise(ShellProfile(1.0, 1.0, 2.0), g);
    const double exact = std::sqrt(28.0 * M_PI / 3.0);
    NormReport r = dyadic_shell_norm(V, 0.5);
    CHECK(std::abs(r.value - exact) / exact < 1e-2);
    CHECK(r.tail == 0.0);

    // Adding chi_{2 <= |x| < 4} contributes sqrt(2) * sqrt(224 pi / 3).
    Potential W = sample_pointwise(ShellProfile(1.0, 2.0, 4.0), g);
    for (std::size_t i = 0; i < V.v.size(); ++i) V.v[i] += W.v[i];
    const double exact2 = exact + std::sqrt(2.0) * std::sqrt(224.0 * M_PI / 3.0);
    NormReport r2 = dyadic_shell_norm(V, 0.5);
    CHECK(std::abs(r2.value - exact2) / exact2 < 1e-2);
}

TEST_CASE("dyadic shell norm: zero, homogeneity, monotonicity, validation") {
    const Grid3 g = make_grid(16, 4.0);
    Potential zero(g);
    CHECK(dyadic_shell_norm(zero, 0.5).value == 0.0);

    Potential V = GaussianProfile(1.3, 1.1).sample(g);
    const double base = dyadic_shell_norm(V, 0.5).value;
    Potential cV = V;
    for (double& x : cV.v) x *= -2.5;
    CHECK(dyadic_shell_norm(cV, 0.5).value == doctest::Approx(2.5 * base).epsilon(1e-12));

    Potential W = V;
    for (double& x : W.v) x *= 0.7;  // |W| <= |V| pointwise
    CHECK(dyadic_shell_norm(W, 0.5).value <= base);

    CHECK_THROWS_AS(dyadic_shell_norm(V, 2.5), std::invalid_argument);
    V.v[0] = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(dyadic_shell_norm(V, 0.5), std::invalid_argument);
}

TEST_CASE("dyadic scaling invariance") {
    const Grid3 g = make_grid(32, 8.0);
    SUBCASE("identity scaling") {
        CHECK(check_scaling_invariance(ShellProfile(1.0, 1.0, 2.0), g, 0) == 0.0);
    }
    SUBCASE("shell indicator, k = 1") {
        CHECK(check_scaling_invariance(ShellProfile(1.0, 1.0, 2.0), g, 1) <= 1e-10);
    }
    SUBCASE("random band-limited, k = -1") {
        BandlimitedProfile prof(42, 3, 0.9, 2.0, 1.0);
        CHECK(check_scaling_invariance(prof, g, -1) <= 1e-8);
    }
}

TEST_CASE("lorentz norm: conventions and exact cases") {
    const Grid3 g = make_grid(16, 4.0);

    SUBCASE("zero field") {
        Field3 f(g, Side::physical);
        CHECK(lorentz_norm(f, 6.0, 2.0).value == 0.0);
    }

    SUBCASE("indicator: ||chi_E||_{p,q} = |E|^{1/p} for every q") {
        Field3 f(g, Side::physical);
        int count = 0;
        std::size_t idx = 0;
        for (int ix = 0; ix < g.n; ++ix)
            for (int iy = 0; iy < g.n; ++iy)
                for (int iz = 0; iz < g.n; ++iz, ++idx)
                    if (g.point(ix, iy, iz).norm() < 1.5) {
                        f.v[idx] = 1.0;
                        ++count;
                    }
        const double measure = count * f.cell_measure();
        for (double p : {1.2, 2.0, 3.0}) {
            const double lp = std::pow(measure, 1.0 / p);
            CHECK(lorentz_norm(f, p, p).value == doctest::Approx(lp).epsilon(1e-12));
            // General q carries the (p/q)^{1/q} factor of the convention.
            CHECK(lorentz_norm(f, p, 1.0).value == doctest::Approx(p * lp).epsilon(1e-12));
            CHECK(lorentz_norm(f, p, std::numeric_limits<double>::infinity()).value ==
                  doctest::Approx(lp).epsilon(1e-12));
        }
    }

    SUBCASE("L^{p,p} = L^p") {
        Field3 f = test::random_field(g, 5);
        const double cell = f.cell_measure();
        for (double p : {1.2, 2.0, 3.0, 6.0}) {
            double acc = 0.0;
            for (const cplx& z : f.v) acc += std::pow(std::abs(z), p);
            const double lp = std::pow(cell * acc, 1.0 / p);
            CHECK(std::abs(lorentz_norm(f, p, p).value - lp) < 1e-10 * lp);
        }
        CHECK(std::abs(lorentz_norm(f, 2.0, 2.0).value - f.norm2()) < 1e-10 * f.norm2());
    }

    SUBCASE("rearrangement invariance is exact") {
        Field3 f = test::random_field(g, 6);
        Field3 shuffled = f;
        std::mt19937_64 rng(7);
        std::shuffle(shuffled.v.begin(), shuffled.v.end(), rng);
        CHECK(lorentz_norm(f, 6.0, 2.0).value == lorentz_norm(shuffled, 6.0, 2.0).value);
    }

    SUBCASE("validation") {
        Field3 f(g, Side::physical);
        CHECK_THROWS_AS(lorentz_norm(f, 0.5, 2.0), std::invalid_argument);
        CHECK_THROWS_AS(lorentz_norm(f, 2.0, 0.5), std::invalid_argument);
        CHECK_THROWS_AS(lorentz_norm(f, std::numeric_limits<double>::infinity(), 2.0),
                        std::invalid_argument);
    }
}

TEST_CASE("spacetime norm") {
    const Grid3 g = make_grid(16, 4.0);
    Trajectory traj;
    traj.dt = 0.5;

    SUBCASE("empty trajectory throws") {
        CHECK_THROWS_AS(spacetime_norm(traj, 2.0, 6.0, 2.0), std::invalid_argument);
    }

    SUBCASE("zero trajectory") {
        traj.stored_times = {0.0, 0.5, 1.0};
        traj.states.assign(3, Field3(g, Side::physical));
        CHECK(spacetime_norm(traj, 2.0, 6.0, 2.0).value == 0.0);
    }

    SUBCASE("constant in time over [0,1] reproduces the inner norm") {
        Field3 f = test::gaussian_field(g);
        traj.stored_times = {0.0, 0.25, 0.5, 0.75, 1.0};
        traj.states.assign(5, f);
        const double inner = lorentz_norm(f, 6.0, 2.0).value;
        CHECK(spacetime_norm(traj, 2.0, 6.0, 2.0).value ==
              doctest::Approx(inner).epsilon(1e-12));
    }

    SUBCASE("two samples match the hand trapezoid") {
        Field3 f = test::gaussian_field(g);
        Field3 f2 = f;
        f2 *= cplx(2.0, 0.0);
        traj.stored_times = {0.0, 0.5};
        traj.states = {f, f2};
        const double a = lorentz_norm(f, 6.0, 2.0).value;
        const double b = lorentz_norm(f2, 6.0, 2.0).value;
        const double expect = std::sqrt(0.25 * (a * a + b * b));
        CHECK(spacetime_norm(traj, 2.0, 6.0, 2.0).value ==
              doctest::Approx(expect).epsilon(1e-12));
    }
}

TEST_CASE("directional norm") {
    const Grid3 g = make_grid(32, 8.0);

    SUBCASE("zero field and validation") {
        Field3 f(g, Side::physical);
        CHECK(directional_norm(f, {0, 0, 1}, OuterNorm::sup) == 0.0);
        CHECK_THROWS_AS(directional_norm(f, {0, 0, 2}, OuterNorm::sup),
                        std::invalid_argument);
    }

    SUBCASE("axis aligned matches the direct plane computation exactly") {
        Field3 f = test::random_field(g, 11);
        const double h = g.spacing();
        double sup = 0.0, l1 = 0.0;
        for (int iz = 0; iz < g.n; ++iz) {
            double m2 = 0.0;
            for (int ix = 0; ix < g.n; ++ix)
                for (int iy = 0; iy < g.n; ++iy) m2 += std::norm(f.at(ix, iy, iz));
            const double gz = std::sqrt(m2 * h * h);  // sqrt(h^3 m2 / h)
            sup = std::max(sup, gz);
            l1 += h * gz;
        }
        CHECK(directional_norm(f, {0, 0, 1}, OuterNorm::sup) ==
              doctest::Approx(sup).epsilon(1e-12));
        CHECK(directional_norm(f, {0, 0, 1}, OuterNorm::one) ==
              doctest::Approx(l1).epsilon(1e-12));
    }

    SUBCASE("outer 2 recovers the L2 norm exactly") {
        Field3 f = test::random_field(g, 12);
        const Vec3 w{0.48, -0.6, std::sqrt(1.0 - 0.48 * 0.48 - 0.36)};
        CHECK(directional_norm(f, w, OuterNorm::two) ==
              doctest::Approx(f.norm2()).epsilon(1e-12));
    }

    SUBCASE("radial field is direction independent") {
        const Grid3 gf = make_grid(64, 8.0);
        Field3 f = test::gaussian_field(gf, 2.0);
        const double a = directional_norm(f, {0, 0, 1}, OuterNorm::sup);
        const Vec3 w{std::sqrt(1.0 / 3), std::sqrt(1.0 / 3), std::sqrt(1.0 / 3)};
        const Vec3 w2{0.36, -0.48, 0.8};
        const double b = directional_norm(f, w, OuterNorm::sup);
        const double c = directional_norm(f, w2, OuterNorm::sup);
        CHECK(std::abs(a - b) < 1e-3 * a);
        CHECK(std::abs(c - b) < 1e-3 * b);
        const double a1 = directional_norm(f, {0, 0, 1}, OuterNorm::one);
        const double b1 = directional_norm(f, w, OuterNorm::one);
        CHECK(std::abs(a1 - b1) < 1e-3 * a1);
    }

    SUBCASE("slab Cauchy-Schwarz bound on random fields") {
        const double h = g.spacing();
        for (std::uint64_t seed : {21u, 22u, 23u}) {
            Field3 f = test::random_field(g, seed);
            const Vec3 w{0.1, 0.2, std::sqrt(1.0 - 0.01 - 0.04)};
            CHECK(directional_norm(f, w, OuterNorm::sup) <=
                  (1.0 + 1e-12) * f.norm2() / std::sqrt(h));
        }
    }
}

TEST_CASE("anisotropic weight norm") {
    const Grid3 g = make_grid(64, 4.0);
    SUBCASE("zero and validation") {
        Potential zero(g);
        CHECK(anisotropic_weight_norm(zero, {0, 0, 1}, 0.5).value == 0.0);
        CHECK_THROWS_AS(anisotropic_weight_norm(zero, {0, 0, 1}, 0.0),
                        std::invalid_argument);
        CHECK_THROWS_AS(anisotropic_weight_norm(zero, {0, 0, 1}, 1.5),
                        std::invalid_argument);
    }

    SUBCASE("eps = 1 reduces to the plain shell norm exactly") {
        Potential V = GaussianProfile(-2.0, 1.0).sample(g);
        CHECK(anisotropic_weight_norm(V, {0, 0, 1}, 1.0).value ==
              dyadic_shell_norm(V, 0.5).value);
    }

    SUBCASE("shell indicator vs the per-layer quadrature oracle") {
        // Weighted integrand (r/|u|)^{2(1-eps)} chi_{1<=r<2} integrated in
        // closed form over each lattice layer u = j h (in-plane exact),
        // matching the symmetric-average convention on the u = 0 plane.
        const Grid3 gf = make_grid(128, 4.0);
        Potential V = sample_pointwise(ShellProfile(1.0, 1.0, 2.0), gf);
        const double eps = 0.5;
        const double val = anisotropic_weight_norm(V, {0, 0, 1}, eps).value;

        const double h = gf.spacing();
        auto layer = [&](double u) {
            if (u >= 2.0) return 0.0;
            const double r0 = std::max(1.0, u);
            // int_{r0}^{2} (r/u)^{2(1-eps)} r dr * 2 pi, with 2(1-eps) = 1:
            return h * 2.0 * M_PI / u * (8.0 - r0 * r0 * r0) / 3.0;
        };
        double mass2 = layer(h);  // u = 0 plane takes its neighbors' value
        for (int j = 1; j * h < 2.0; ++j) mass2 += 2.0 * layer(j * h);
        const double oracle = std::sqrt(mass2);  // single k = 0 shell, weight 1
        CHECK(std::abs(val - oracle) / oracle < 1e-2);
    }
}

TEST_CASE("rate norm") {
    const Grid3 g = make_grid(32, 8.0);
    std::vector<double> t_grid;
    for (int i = 0; i <= 20; ++i) t_grid.push_back(0.1 * i);

    SUBCASE("static potential has zero rate") {
        TimePotential Vt = TimePotential::make_static(
            std::make_shared<GaussianProfile>(-3.0, 1.0));
        CHECK(rate_norm(Vt, 1.5, t_grid, g).value == 0.0);
    }

    SUBCASE("separable modulation factorizes exactly") {
        auto prof = std::make_shared<GaussianProfile>(-2.0, 1.2);
        TimePotential Vt = TimePotential::ramped(prof, sine_path(1.0, 0.5, 2.0));
        const double p = 1.5;
        const double sigma = 0.5 + (2.0 - 2.0 / p);
        const double shell = dyadic_shell_norm(prof->sample(g), sigma).value;
        double acc = 0.0;
        for (std::size_t i = 0; i + 1 < t_grid.size(); ++i) {
            auto da = [](double t) { return std::abs(0.5 * 2.0 * std::cos(2.0 * t)); };
            acc += 0.05 * (std::pow(da(t_grid[i]), p) + std::pow(da(t_grid[i + 1]), p));
        }
        const double expect = std::pow(acc, 1.0 / p) * shell;
        CHECK(rate_norm(Vt, p, t_grid, g).value == doctest::Approx(expect).epsilon(1e-10));
    }

    SUBCASE("translating profile matches the finite-difference oracle") {
        auto prof = std::make_shared<GaussianProfile>(-1.5, 1.0);
        TimePotential Vt =
            TimePotential::translating(prof, linear_motion({0, 0, 0}, {0.4, 0, 0}));
        const double p = 1.0, sigma = 0.5;
        const double delta = 1e-4;
        std::vector<double> vals;
        for (double t : t_grid) {
            Potential Va = Vt.at(t + delta, g), Vb = Vt.at(t - delta, g);
            Potential fd(g);
            for (std::size_t i = 0; i < fd.v.size(); ++i)
                fd.v[i] = (Va.v[i] - Vb.v[i]) / (2.0 * delta);
            vals.push_back(dyadic_shell_norm(fd, sigma).value);
        }
        double acc = 0.0;
        for (std::size_t i = 0; i + 1 < vals.size(); ++i)
            acc += 0.05 * (vals[i] + vals[i + 1]);
        const double got = rate_norm(Vt, p, t_grid, g).value;
        CHECK(std::abs(got - acc) < 1e-3 * acc);
    }

    SUBCASE("p out of range") {
        TimePotential Vt = TimePotential::make_static(
            std::make_shared<GaussianProfile>(-3.0, 1.0));
        CHECK_THROWS_AS(rate_norm(Vt, 2.0, t_grid, g), std::invalid_argument);
        CHECK_THROWS_AS(rate_norm(Vt, 0.5, t_grid, g), std::invalid_argument);
    }
}

TEST_CASE("averaging inequality ratio") {
    DirectionSet dirs = sphere_quadrature(10);

    SUBCASE("zero field is degenerate") {
        const Grid3 g = make_grid(16, 4.0);
        Field3 f(g, Side::physical);
        RatioReport r = averaging_inequality_ratio(f, 0.5, dirs);
        CHECK(r.degenerate);
    }

    SUBCASE("shell indicator ratio is stable under refinement") {
        auto ratio_at = [&](int n) {
            const Grid3 g = make_grid(n, 4.0);
            Potential V = sample_pointwise(ShellProfile(1.0, 1.0, 2.0), g);
            Field3 f(g, Side::physical);
            for (std::size_t i = 0; i < f.v.size(); ++i) f.v[i] = V.v[i];
            return averaging_inequality_ratio(f, 0.5, dirs).ratio;
        };
        const double r32 = ratio_at(32);
        const double r64 = ratio_at(64);
        CHECK(std::abs(r64 - r32) <= 0.10 * r64);
    }

    SUBCASE("gaussian ratio is finite") {
        const Grid3 g = make_grid(32, 8.0);
        Field3 f = test::gaussian_field(g);
        RatioReport r = averaging_inequality_ratio(f, 0.25, dirs);
        CHECK(!r.degenerate);
        CHECK(r.ratio > 0.0);
        CHECK(std::isfinite(r.ratio));
    }

    SUBCASE("validation") {
        const Grid3 g = make_grid(16, 4.0);
        Field3 f(g, Side::physical);
        CHECK_THROWS_AS(averaging_inequality_ratio(f, 0.0, dirs), std::invalid_argument);
        CHECK_THROWS_AS(averaging_inequality_ratio(f, 1.0, dirs), std::invalid_argument);
    }
}
