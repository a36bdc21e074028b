#include "displab/fft.hpp"

#include <fftw3.h>

#include <cstring>
#include <map>
#include <mutex>

namespace displab {
namespace detail {

namespace {

// One cached in-place plan pair per grid size. FFTW planning is not
// thread-safe; execution on the owned buffer is serialized by the mutex.
struct PlanSet {
    fftw_plan forward = nullptr;
    fftw_plan backward = nullptr;
    fftw_complex* buf = nullptr;
    std::size_t count = 0;
};

std::mutex g_mutex;
std::map<int, PlanSet>& plan_cache() {
    static std::map<int, PlanSet> cache;
    return cache;
}

PlanSet& plans_for(int n) {
    auto& cache = plan_cache();
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;

    PlanSet p;
    p.count = static_cast<std::size_t>(n) * n * n;
    p.buf = fftw_alloc_complex(p.count);
    const unsigned flags = (n <= 128) ? FFTW_MEASURE : FFTW_ESTIMATE;
    p.forward = fftw_plan_dft_3d(n, n, n, p.buf, p.buf, FFTW_FORWARD, flags);
    p.backward = fftw_plan_dft_3d(n, n, n, p.buf, p.buf, FFTW_BACKWARD, flags);
    return cache.emplace(n, p).first->second;
}

}  // namespace

void fft_raw(const Grid3& g, std::vector<cplx>& data, bool forward) {
    std::lock_guard<std::mutex> lock(g_mutex);
    PlanSet& p = plans_for(g.n);
    std::memcpy(p.buf, data.data(), p.count * sizeof(fftw_complex));
    fftw_execute(forward ? p.forward : p.backward);
    std::memcpy(data.data(), p.buf, p.count * sizeof(fftw_complex));
}

}  // namespace detail

namespace {

// Sign flip (-1)^{kx+ky+kz} realigning the DFT to the centered grid.
void checkerboard(Field3& f) {
    const int n = f.grid.n;
    for (int ix = 0; ix < n; ++ix)
        for (int iy = 0; iy < n; ++iy) {
            cplx* row = &f.v[f.grid.index(ix, iy, 0)];
            int parity = (ix + iy) & 1;
            for (int iz = 0; iz < n; ++iz)
                if ((parity + iz) & 1) row[iz] = -row[iz];
        }
}

}  // namespace

Field3 fourier(const Field3& f) {
    if (f.side != Side::physical)
        throw std::invalid_argument("fourier: input must be physical-side");
    Field3 out = f;
    detail::fft_raw(out.grid, out.v, true);
    checkerboard(out);
    const double h = f.grid.spacing();
    const double c = std::pow(2.0 * M_PI, -1.5) * h * h * h;
    for (cplx& z : out.v) z *= c;
    out.side = Side::frequency;
    return out;
}

Field3 inverse_fourier(const Field3& f) {
    if (f.side != Side::frequency)
        throw std::invalid_argument("inverse_fourier: input must be frequency-side");
    Field3 out = f;
    checkerboard(out);
    detail::fft_raw(out.grid, out.v, false);
    const double dk = f.grid.freq_spacing();
    const double c = std::pow(2.0 * M_PI, -1.5) * dk * dk * dk;
    for (cplx& z : out.v) z *= c;
    out.side = Side::physical;
    return out;
}

void apply_multiplier(Field3& f, const std::function<cplx(const Vec3&)>& m) {
    detail::fft_raw(f.grid, f.v, true);
    const int n = f.grid.n;
    const double scale = 1.0 / static_cast<double>(f.grid.size());
    std::size_t idx = 0;
    for (int kx = 0; kx < n; ++kx)
        for (int ky = 0; ky < n; ++ky)
            for (int kz = 0; kz < n; ++kz, ++idx)
                f.v[idx] *= scale * m(f.grid.freq_point(kx, ky, kz));
    detail::fft_raw(f.grid, f.v, false);
}

std::vector<cplx> build_multiplier(const Grid3& g,
                                   const std::function<cplx(const Vec3&)>& m) {
    std::vector<cplx> table(g.size());
    const int n = g.n;
    const double scale = 1.0 / static_cast<double>(g.size());
    std::size_t idx = 0;
    for (int kx = 0; kx < n; ++kx)
        for (int ky = 0; ky < n; ++ky)
            for (int kz = 0; kz < n; ++kz, ++idx)
                table[idx] = scale * m(g.freq_point(kx, ky, kz));
    return table;
}

void apply_cached_multiplier(Field3& f, const std::vector<cplx>& table) {
    detail::fft_raw(f.grid, f.v, true);
    for (std::size_t i = 0; i < f.v.size(); ++i) f.v[i] *= table[i];
    detail::fft_raw(f.grid, f.v, false);
}

cplx direct_fourier_at(const Potential& V, const Vec3& xi) {
    const Grid3& g = V.grid;
    const int n = g.n;
    cplx s = 0.0;
    std::size_t idx = 0;
    for (int ix = 0; ix < n; ++ix) {
        const double px = g.coord(ix) * xi.x;
        for (int iy = 0; iy < n; ++iy) {
            const double pxy = px + g.coord(iy) * xi.y;
            for (int iz = 0; iz < n; ++iz, ++idx) {
                if (V.v[idx] == 0.0) continue;
                const double phase = pxy + g.coord(iz) * xi.z;
                s += V.v[idx] * cplx(std::cos(phase), -std::sin(phase));
            }
        }
    }
    const double h = g.spacing();
    return std::pow(2.0 * M_PI, -1.5) * h * h * h * s;
}

}  // namespace displab
