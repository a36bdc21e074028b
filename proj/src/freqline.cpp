#include "displab/freqline.hpp"

#include "displab/fft.hpp"

namespace displab {

FrequencyLineSampler::FrequencyLineSampler(const Potential& V, int pad) {
    src_ = V.grid;
    padded_ = Grid3{V.grid.n * pad, V.grid.extent * pad};
    band_limit_ = src_.nyquist();

    // Zero-pad in physical space: same spacing, larger box, finer dual lattice.
    Field3 big(padded_, Side::physical);
    const int n = src_.n, np = padded_.n;
    const int off = (np - n) / 2;
    std::size_t idx = 0;
    for (int ix = 0; ix < n; ++ix)
        for (int iy = 0; iy < n; ++iy)
            for (int iz = 0; iz < n; ++iz, ++idx)
                big.at(ix + off, iy + off, iz + off) = V.v[idx];
    vhat_ = fourier(big).v;
}

namespace {

// Centered 8-point Lagrange weights on a uniform lattice, nodes -3..4
// relative to the floor cell; eighth-order accurate for smooth spectra.
inline void lagrange8(double u, double w[8]) {
    static const double nodes[8] = {-3.0, -2.0, -1.0, 0.0, 1.0, 2.0, 3.0, 4.0};
    for (int j = 0; j < 8; ++j) {
        double p = 1.0;
        for (int k = 0; k < 8; ++k) {
            if (k == j) continue;
            p *= (u - nodes[k]) / (nodes[j] - nodes[k]);
        }
        w[j] = p;
    }
}

}  // namespace

cplx FrequencyLineSampler::sample(const Vec3& xi) const {
    const double lim = 0.98 * band_limit_;
    if (std::abs(xi.x) > lim || std::abs(xi.y) > lim || std::abs(xi.z) > lim)
        throw std::invalid_argument("FrequencyLineSampler: frequency outside the Nyquist band");

    const int np = padded_.n;
    const double dk = padded_.freq_spacing();
    double w[3][8];
    int base[3];
    const double comps[3] = {xi.x, xi.y, xi.z};
    for (int a = 0; a < 3; ++a) {
        const double pos = comps[a] / dk;  // signed lattice coordinate
        const double fl = std::floor(pos);
        base[a] = static_cast<int>(fl) - 3;
        lagrange8(pos - fl, w[a]);
    }
    cplx acc = 0.0;
    for (int a = 0; a < 8; ++a) {
        const int kx = ((base[0] + a) % np + np) % np;
        for (int b = 0; b < 8; ++b) {
            const int ky = ((base[1] + b) % np + np) % np;
            const double wab = w[0][a] * w[1][b];
            for (int c = 0; c < 8; ++c) {
                const int kz = ((base[2] + c) % np + np) % np;
                acc += wab * w[2][c] * vhat_[padded_.index(kx, ky, kz)];
            }
        }
    }
    return acc;
}

std::vector<cplx> FrequencyLineSampler::along(const Vec3& omega,
                                              const std::vector<double>& s) const {
    std::vector<cplx> out(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) out[i] = sample(s[i] * omega);
    return out;
}

std::vector<cplx> frequency_line(const Potential& V, const Vec3& omega,
                                 const std::vector<double>& s) {
    FrequencyLineSampler sampler(V);
    return sampler.along(omega, s);
}

}  // namespace displab
