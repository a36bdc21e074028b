#pragma once

#include <functional>
#include <vector>

#include "displab/field.hpp"

namespace displab {

// Unitary continuum-convention transform pair on the periodic grid:
//   fhat(xi) = (2pi)^{-3/2} h^3 sum_x f(x) e^{-i xi.x},
//   f(x)     = (2pi)^{-3/2} dk^3 sum_xi fhat(xi) e^{+i xi.x},
// so that ||f||_2 = ||fhat||_2 exactly and the round trip is the identity.
Field3 fourier(const Field3& f);
Field3 inverse_fourier(const Field3& f);

// f <- IFFT( m(xi) * FFT(f) ) with the raw (constant-free) transform pair.
// The multiplier receives the frequency vector of each mode.
void apply_multiplier(Field3& f, const std::function<cplx(const Vec3&)>& m);

// Precomputed multiplier table for hot loops (one entry per mode).
std::vector<cplx> build_multiplier(const Grid3& g,
                                   const std::function<cplx(const Vec3&)>& m);
void apply_cached_multiplier(Field3& f, const std::vector<cplx>& table);

// Direct O(n^3) evaluation of the unitary transform at one off-lattice
// frequency; reference path for interpolation checks.
cplx direct_fourier_at(const Potential& V, const Vec3& xi);

namespace detail {
// Raw in-place c2c transforms (FFTW backend, plans cached per grid size).
void fft_raw(const Grid3& g, std::vector<cplx>& data, bool forward);
}  // namespace detail

}  // namespace displab
