#pragma once

#include <random>

#include "displab/fft.hpp"
#include "displab/field.hpp"

namespace displab::test {

inline Field3 random_field(const Grid3& g, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Field3 f(g, Side::physical);
    for (cplx& z : f.v) z = cplx(gauss(rng), gauss(rng));
    return f;
}

// Random field with spectrum confined to |xi| <= cutoff (default half Nyquist).
inline Field3 bandlimited_field(const Grid3& g, std::uint64_t seed, double cutoff = 0.0) {
    if (cutoff <= 0.0) cutoff = 0.5 * g.nyquist();
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Field3 fhat(g, Side::frequency);
    std::size_t idx = 0;
    for (int kx = 0; kx < g.n; ++kx)
        for (int ky = 0; ky < g.n; ++ky)
            for (int kz = 0; kz < g.n; ++kz, ++idx) {
                const Vec3 xi = g.freq_point(kx, ky, kz);
                if (xi.norm() > cutoff) continue;
                // Gaussian spectral envelope keeps the field spatially localized.
                const double env = std::exp(-xi.norm2());
                fhat.v[idx] = env * cplx(gauss(rng), gauss(rng));
            }
    Field3 f = inverse_fourier(fhat);
    const double n = f.norm2();
    if (n > 0) f *= cplx(1.0 / n, 0.0);
    return f;
}

// Localized band-limited field: Gaussian envelope in space, then spectrally
// truncated; normalized.
inline Field3 localized_packet(const Grid3& g, std::uint64_t seed, double width = 1.0,
                               double cutoff = 0.0) {
    if (cutoff <= 0.0) cutoff = 0.5 * g.nyquist();
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uk(-0.8, 0.8);
    const Vec3 k0{uk(rng), uk(rng), uk(rng)};
    Field3 f(g, Side::physical);
    std::size_t idx = 0;
    for (int ix = 0; ix < g.n; ++ix)
        for (int iy = 0; iy < g.n; ++iy)
            for (int iz = 0; iz < g.n; ++iz, ++idx) {
                const Vec3 x = g.point(ix, iy, iz);
                const double env = std::exp(-x.norm2() / (2.0 * width * width));
                f.v[idx] = env * cplx(std::cos(k0.dot(x)), std::sin(k0.dot(x)));
            }
    Field3 fhat = fourier(f);
    idx = 0;
    for (int kx = 0; kx < g.n; ++kx)
        for (int ky = 0; ky < g.n; ++ky)
            for (int kz = 0; kz < g.n; ++kz, ++idx)
                if (g.freq_point(kx, ky, kz).norm() > cutoff) fhat.v[idx] = 0.0;
    f = inverse_fourier(fhat);
    const double n = f.norm2();
    if (n > 0) f *= cplx(1.0 / n, 0.0);
    return f;
}

inline Field3 gaussian_field(const Grid3& g, double width = 1.0) {
    Field3 f(g, Side::physical);
    std::size_t idx = 0;
    for (int ix = 0; ix < g.n; ++ix)
        for (int iy = 0; iy < g.n; ++iy)
            for (int iz = 0; iz < g.n; ++iz, ++idx)
                f.v[idx] = std::exp(-g.point(ix, iy, iz).norm2() / (2.0 * width * width));
    return f;
}

}  // namespace displab::test
