#include "displab/oscint.hpp"

namespace displab {

LineQuadrature::LineQuadrature(std::vector<cplx> amplitudes, double s_max)
    : amp_(std::move(amplitudes)) {
    if (amp_.size() < 2)
        throw std::invalid_argument("LineQuadrature: need at least two nodes");
    ds_ = s_max / (amp_.size() - 1);
}

cplx LineQuadrature::integrate(double tau) const {
    const double c = tau * ds_;
    cplx m0, m1;  // int_0^ds e^{-i tau u} {1, u} du
    if (std::abs(c) < 1e-4) {
        // Series in c avoids cancellation near tau = 0.
        const cplx ic(0.0, -c);
        m0 = ds_ * (1.0 + ic / 2.0 + ic * ic / 6.0 + ic * ic * ic / 24.0);
        m1 = ds_ * ds_ * (0.5 + ic / 3.0 + ic * ic / 8.0 + ic * ic * ic / 30.0);
    } else {
        const cplx e = std::polar(1.0, -c);
        const cplx itau(0.0, tau);
        m0 = (1.0 - e) / itau;
        m1 = (m0 - ds_ * e) / itau;
    }

    const cplx step = std::polar(1.0, -c);
    cplx phase = 1.0;
    cplx acc = 0.0;
    const std::size_t P = amp_.size() - 1;
    for (std::size_t j = 0; j < P; ++j) {
        const cplx a = amp_[j];
        const cplx slope = (amp_[j + 1] - a) / ds_;
        acc += phase * (a * m0 + slope * m1);
        phase *= step;
    }
    return acc;
}

LineQuadrature LineQuadrature::coarsened() const {
    std::vector<cplx> half;
    for (std::size_t j = 0; j < amp_.size(); j += 2) half.push_back(amp_[j]);
    return LineQuadrature(std::move(half), ds_ * (amp_.size() - 1));
}

}  // namespace displab
