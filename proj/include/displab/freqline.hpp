#pragma once

#include <vector>

#include "displab/field.hpp"

namespace displab {

// Samples Vhat(xi) at arbitrary frequencies inside the grid's Nyquist band.
// Backed by one zero-padded transform (finer dual lattice) plus tricubic
// interpolation; validated against direct plane-wave sums in the tests.
class FrequencyLineSampler {
  public:
    explicit FrequencyLineSampler(const Potential& V, int pad = 2);

    cplx sample(const Vec3& xi) const;

    // Vhat(s*omega) for a batch of radii along one direction.
    std::vector<cplx> along(const Vec3& omega, const std::vector<double>& s) const;

    double band_limit() const { return band_limit_; }
    const Grid3& source_grid() const { return src_; }

  private:
    Grid3 src_;
    Grid3 padded_;
    std::vector<cplx> vhat_;
    double band_limit_;
};

std::vector<cplx> frequency_line(const Potential& V, const Vec3& omega,
                                 const std::vector<double>& s);

}  // namespace displab
