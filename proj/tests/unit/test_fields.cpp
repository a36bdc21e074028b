#include <doctest.h>

#include "displab/fft.hpp"
#include "displab/freqline.hpp"
#include "displab/potential.hpp"
#include "displab/sphere.hpp"
#include "test_common.hpp"

using namespace displab;

TEST_CASE("make_grid spacing and validation") {
    CHECK(make_grid(8, 1.0).spacing() == doctest::Approx(0.25));
    CHECK(make_grid(64, 16.0).spacing() == doctest::Approx(0.5));
    CHECK_THROWS_AS(make_grid(10, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(make_grid(4, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(make_grid(64, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(make_grid(64, -2.0), std::invalid_argument);
}

TEST_CASE("fourier of zero is zero and side mismatch throws") {
    const Grid3 g = make_grid(16, 4.0);
    Field3 f(g, Side::physical);
    Field3 fh = fourier(f);
    CHECK(fh.norm2() == 0.0);
    CHECK(fh.side == Side::frequency);
    CHECK_THROWS_AS(fourier(fh), std::invalid_argument);
    CHECK_THROWS_AS(inverse_fourier(f), std::invalid_argument);
}

TEST_CASE("gaussian transforms to gaussian with unit peak") {
    // F[e^{-|x|^2/2}] = e^{-|xi|^2/2} in the unitary convention.
    const Grid3 g = make_grid(64, 16.0);
    Field3 f = test::gaussian_field(g);
    Field3 fh = fourier(f);
    CHECK(std::abs(fh.at(0, 0, 0) - cplx(1.0, 0.0)) < 1e-6);
    // Off-center spot check at the lattice frequency (dk, 0, 0).
    const double dk = g.freq_spacing();
    CHECK(std::abs(fh.at(1, 0, 0) - cplx(std::exp(-dk * dk / 2.0), 0.0)) < 1e-6);
}

TEST_CASE("round trip and Plancherel on random fields") {
    const Grid3 g = make_grid(16, 5.0);
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        Field3 f = test::random_field(g, seed);
        Field3 back = inverse_fourier(fourier(f));
        CHECK((back - f).norm2() < 1e-12 * f.norm2());
        CHECK(std::abs(fourier(f).norm2() - f.norm2()) < 1e-10 * f.norm2());
    }
}

namespace {

// Real spherical harmonic magnitude structure is unnecessary: integrating
// Y_l^m against the quadrature must vanish for l >= 1 and equal sqrt(4pi)
// normalization for l = 0. Complex harmonics via assoc_legendre.
cplx sph_harmonic(int l, int m, const Vec3& w) {
    const double theta = std::acos(std::clamp(w.z, -1.0, 1.0));
    const double phi = std::atan2(w.y, w.x);
    const int am = std::abs(m);
    const double leg = std::assoc_legendre(l, am, std::cos(theta));
    double norm = std::sqrt((2.0 * l + 1.0) / (4.0 * M_PI) * std::tgamma(l - am + 1.0) /
                            std::tgamma(l + am + 1.0));
    cplx val = norm * leg * std::polar(1.0, am * phi);
    if (m < 0) val = std::conj(val) * std::pow(-1.0, am);
    return val;
}

}  // namespace

TEST_CASE("sphere quadrature: weights, moments, harmonics") {
    CHECK_THROWS_AS(sphere_quadrature(5), std::invalid_argument);
    const DirectionSet ds = sphere_quadrature(8);
    CHECK(ds.weight_sum() == doctest::Approx(4.0 * M_PI).epsilon(1e-10));

    double m2 = 0.0, m1 = 0.0;
    for (std::size_t i = 0; i < ds.size(); ++i) {
        m2 += ds.weights[i] * ds.directions[i].z * ds.directions[i].z;
        m1 += ds.weights[i] * ds.directions[i].z;
        CHECK(std::abs(ds.directions[i].norm() - 1.0) < 1e-12);
        CHECK(ds.weights[i] > 0.0);
    }
    CHECK(m2 == doctest::Approx(4.0 * M_PI / 3.0).epsilon(1e-12));
    CHECK(std::abs(m1) < 1e-12);

    // All spherical harmonics up to degree order-1 integrate to zero
    // (l = 0 integrates to sqrt(4pi)).
    for (int l = 1; l <= 7; ++l)
        for (int m = -l; m <= l; ++m) {
            cplx acc = 0.0;
            for (std::size_t i = 0; i < ds.size(); ++i)
                acc += ds.weights[i] * sph_harmonic(l, m, ds.directions[i]);
            CHECK(std::abs(acc) < 1e-8);
        }
}

TEST_CASE("frequency_line: zeros, radial symmetry, quadrature oracle") {
    const Grid3 g = make_grid(32, 8.0);

    SUBCASE("zero potential") {
        Potential V(g);
        auto samples = frequency_line(V, {0, 0, 1}, {0.5, 1.0, 2.0});
        for (cplx z : samples) CHECK(std::abs(z) == 0.0);
    }

    SUBCASE("radial gaussian is direction independent") {
        Potential V = GaussianProfile(1.0, 1.0).sample(g);
        FrequencyLineSampler sampler(V);
        const Vec3 w1{0, 0, 1};
        const Vec3 w2{std::sqrt(0.5), 0.3, std::sqrt(0.5 - 0.09)};
        for (double s : {0.3, 0.9, 1.7, 2.5}) {
            const cplx a = sampler.sample(s * w1);
            const cplx b = sampler.sample(s * w2);
            CHECK(std::abs(a - b) < 1e-6 * std::abs(a));
        }
    }

    SUBCASE("shell indicator matches the direct plane-wave sum") {
        Potential V = ShellProfile(1.0, 1.0, 2.0).sample(g);
        FrequencyLineSampler sampler(V);
        std::mt19937_64 rng(99);
        std::uniform_real_distribution<double> us(0.2, 3.0), uw(-1.0, 1.0);
        int checked = 0;
        while (checked < 10) {
            Vec3 w{uw(rng), uw(rng), uw(rng)};
            const double n = w.norm();
            if (n < 0.2) continue;
            w = (1.0 / n) * w;
            const double s = us(rng);
            const cplx approx = sampler.sample(s * w);
            const cplx exact = direct_fourier_at(V, s * w);
            CHECK(std::abs(approx - exact) <= 1e-3 * std::max(1e-12, std::abs(exact)));
            ++checked;
        }
    }

    SUBCASE("out of band throws") {
        Potential V = GaussianProfile(1.0, 1.0).sample(g);
        FrequencyLineSampler sampler(V);
        CHECK_THROWS_AS(sampler.sample({0, 0, 2.0 * g.nyquist()}), std::invalid_argument);
    }
}
