#include "displab/potential.hpp"

namespace displab {

Potential Profile::sample(const Grid3& g) const {
    Potential V(g);
    std::size_t idx = 0;
    for (int ix = 0; ix < g.n; ++ix)
        for (int iy = 0; iy < g.n; ++iy)
            for (int iz = 0; iz < g.n; ++iz, ++idx)
                V.v[idx] = value(g.point(ix, iy, iz));
    return V;
}

double GaussianProfile::value(const Vec3& x) const {
    const double r2 = (x - center_).norm2();
    return depth_ * std::exp(-r2 / (2.0 * width_ * width_));
}

Vec3 GaussianProfile::gradient(const Vec3& x) const {
    const Vec3 d = x - center_;
    return (-value(x) / (width_ * width_)) * d;
}

namespace {

// Subcell average of a radial indicator over cells straddling a sphere of
// radius r; interior/exterior cells stay exact.
double radial_indicator_cell(const Vec3& c, double h, double r0, double r1,
                             double depth) {
    const double half_diag = 0.5 * h * std::sqrt(3.0);
    const double r = c.norm();
    const bool near_r0 = std::abs(r - r0) <= half_diag;
    const bool near_r1 = std::abs(r - r1) <= half_diag;
    if (!near_r0 && !near_r1)
        return (r >= r0 && r < r1) ? depth : 0.0;
    constexpr int m = 4;
    int hits = 0;
    for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b)
            for (int d = 0; d < m; ++d) {
                const Vec3 p{c.x + h * ((a + 0.5) / m - 0.5),
                             c.y + h * ((b + 0.5) / m - 0.5),
                             c.z + h * ((d + 0.5) / m - 0.5)};
                const double rr = p.norm();
                if (rr >= r0 && rr < r1) ++hits;
            }
    return depth * hits / double(m * m * m);
}

Potential sample_radial_indicator(const Grid3& g, double r0, double r1, double depth) {
    Potential V(g);
    const double h = g.spacing();
    std::size_t idx = 0;
    for (int ix = 0; ix < g.n; ++ix)
        for (int iy = 0; iy < g.n; ++iy)
            for (int iz = 0; iz < g.n; ++iz, ++idx)
                V.v[idx] = radial_indicator_cell(g.point(ix, iy, iz), h, r0, r1, depth);
    return V;
}

}  // namespace

double BallProfile::value(const Vec3& x) const {
    return x.norm() < radius_ ? depth_ : 0.0;
}

Potential BallProfile::sample(const Grid3& g) const {
    return sample_radial_indicator(g, 0.0, radius_, depth_);
}

double ShellProfile::value(const Vec3& x) const {
    const double r = x.norm();
    return (r >= r0_ && r < r1_) ? depth_ : 0.0;
}

Potential ShellProfile::sample(const Grid3& g) const {
    return sample_radial_indicator(g, r0_, r1_, depth_);
}

double SmoothWellProfile::value(const Vec3& x) const {
    return 0.5 * depth_ * (1.0 - std::tanh((x.norm() - radius_) / edge_));
}

Vec3 SmoothWellProfile::gradient(const Vec3& x) const {
    const double r = x.norm();
    if (r < 1e-14) return {};
    const double th = std::tanh((r - radius_) / edge_);
    const double dv = -0.5 * depth_ * (1.0 - th * th) / edge_;
    return (dv / r) * x;
}

BandlimitedProfile::BandlimitedProfile(std::uint64_t seed, int max_mode,
                                       double mode_scale, double envelope_width,
                                       double amplitude)
    : envelope_width_(envelope_width), amplitude_(amplitude) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int mx = -max_mode; mx <= max_mode; ++mx)
        for (int my = -max_mode; my <= max_mode; ++my)
            for (int mz = 0; mz <= max_mode; ++mz) {
                if (mx * mx + my * my + mz * mz > max_mode * max_mode) continue;
                if (mz == 0 && (my < 0 || (my == 0 && mx < 0))) continue;
                Mode m;
                m.k = {mode_scale * mx, mode_scale * my, mode_scale * mz};
                m.re = gauss(rng);
                m.im = gauss(rng);
                modes_.push_back(m);
            }
    // Normalize so sup|V| is about `amplitude` regardless of mode count.
    double s = 0.0;
    for (const Mode& m : modes_) s += std::hypot(m.re, m.im);
    const double norm = s > 0 ? amplitude_ / s : 0.0;
    for (Mode& m : modes_) {
        m.re *= norm;
        m.im *= norm;
    }
}

double BandlimitedProfile::value(const Vec3& x) const {
    double s = 0.0;
    for (const Mode& m : modes_) {
        const double ph = m.k.dot(x);
        s += m.re * std::cos(ph) - m.im * std::sin(ph);
    }
    return s * std::exp(-x.norm2() / (2.0 * envelope_width_ * envelope_width_));
}

Vec3 BandlimitedProfile::gradient(const Vec3& x) const {
    double s = 0.0;
    Vec3 ds{};
    for (const Mode& m : modes_) {
        const double ph = m.k.dot(x);
        const double c = std::cos(ph), sn = std::sin(ph);
        s += m.re * c - m.im * sn;
        const double d = -m.re * sn - m.im * c;
        ds = ds + d * m.k;
    }
    const double w2 = envelope_width_ * envelope_width_;
    const double env = std::exp(-x.norm2() / (2.0 * w2));
    return env * ds + (-s * env / w2) * x;
}

Potential DilatedProfile::sample(const Grid3& g) const {
    // Delegate to the base profile on the dilated grid so that subcell
    // sampling of sharp profiles stays consistent under rescaling.
    Grid3 gd{g.n, g.extent * alpha_};
    Potential base = base_->sample(gd);
    Potential V(g);
    const double a2 = alpha_ * alpha_;
    for (std::size_t i = 0; i < V.v.size(); ++i) V.v[i] = a2 * base.v[i];
    return V;
}

ScalarPath constant_path(double c) {
    return {[c](double) { return c; }, [](double) { return 0.0; }};
}

ScalarPath linear_path(double a, double b) {
    return {[a, b](double t) { return a + b * t; }, [b](double) { return b; }};
}

ScalarPath smoothstep_path(double a, double b, double t0, double t1) {
    const double span = t1 - t0;
    auto clamp01 = [](double u) { return u < 0 ? 0.0 : (u > 1 ? 1.0 : u); };
    return {[=](double t) {
                const double u = clamp01((t - t0) / span);
                return a + (b - a) * u * u * (3.0 - 2.0 * u);
            },
            [=](double t) {
                const double u = (t - t0) / span;
                if (u <= 0.0 || u >= 1.0) return 0.0;
                return (b - a) * 6.0 * u * (1.0 - u) / span;
            }};
}

ScalarPath sine_path(double mean, double amp, double omega) {
    return {[=](double t) { return mean + amp * std::sin(omega * t); },
            [=](double t) { return amp * omega * std::cos(omega * t); }};
}

VectorPath linear_motion(Vec3 x0, Vec3 velocity) {
    return {[=](double t) { return x0 + t * velocity; },
            [=](double) { return velocity; }};
}

TimePotential TimePotential::make_static(ProfilePtr p) {
    TimePotential tp;
    tp.family_ = Family::statik;
    tp.profile_ = std::move(p);
    return tp;
}

TimePotential TimePotential::translating(ProfilePtr p, VectorPath path) {
    if (!p->differentiable())
        throw std::invalid_argument("TimePotential::translating: profile must be differentiable");
    TimePotential tp;
    tp.family_ = Family::translate;
    tp.profile_ = std::move(p);
    tp.path_ = std::move(path);
    return tp;
}

TimePotential TimePotential::rescaling(ProfilePtr p, ScalarPath alpha) {
    if (!p->differentiable())
        throw std::invalid_argument("TimePotential::rescaling: profile must be differentiable");
    TimePotential tp;
    tp.family_ = Family::scale;
    tp.profile_ = std::move(p);
    tp.alpha_ = std::move(alpha);
    return tp;
}

TimePotential TimePotential::ramped(ProfilePtr p, ScalarPath amplitude) {
    TimePotential tp;
    tp.family_ = Family::ramp;
    tp.profile_ = std::move(p);
    tp.amp_ = std::move(amplitude);
    return tp;
}

TimePotential TimePotential::perturbed(ProfilePtr base, ProfilePtr bump,
                                       ScalarPath amplitude) {
    TimePotential tp;
    tp.family_ = Family::perturbed;
    tp.profile_ = std::move(base);
    tp.bump_ = std::move(bump);
    tp.amp_ = std::move(amplitude);
    return tp;
}

double TimePotential::value(const Vec3& x, double t) const {
    switch (family_) {
        case Family::statik:
            return profile_->value(x);
        case Family::translate:
            return profile_->value(x - path_.value(t));
        case Family::scale: {
            const double a = alpha_.value(t);
            return a * a * profile_->value(a * x);
        }
        case Family::ramp:
            return amp_.value(t) * profile_->value(x);
        case Family::perturbed:
            return profile_->value(x) + amp_.value(t) * bump_->value(x);
    }
    return 0.0;
}

double TimePotential::dt_value(const Vec3& x, double t) const {
    switch (family_) {
        case Family::statik:
            return 0.0;
        case Family::translate: {
            const Vec3 y = x - path_.value(t);
            return -path_.deriv(t).dot(profile_->gradient(y));
        }
        case Family::scale: {
            const double a = alpha_.value(t);
            const double da = alpha_.deriv(t);
            const Vec3 y = a * x;
            return da * (2.0 * a * profile_->value(y) + a * a * x.dot(profile_->gradient(y)));
        }
        case Family::ramp:
            return amp_.deriv(t) * profile_->value(x);
        case Family::perturbed:
            return amp_.deriv(t) * bump_->value(x);
    }
    return 0.0;
}

Potential TimePotential::at(double t, const Grid3& g) const {
    if (family_ == Family::statik) return profile_->sample(g);
    if (family_ == Family::ramp) {
        Potential V = profile_->sample(g);
        const double a = amp_.value(t);
        for (double& x : V.v) x *= a;
        return V;
    }
    if (family_ == Family::perturbed) {
        Potential V = profile_->sample(g);
        Potential W = bump_->sample(g);
        const double a = amp_.value(t);
        for (std::size_t i = 0; i < V.v.size(); ++i) V.v[i] += a * W.v[i];
        return V;
    }
    Potential V(g);
    std::size_t idx = 0;
    for (int ix = 0; ix < g.n; ++ix)
        for (int iy = 0; iy < g.n; ++iy)
            for (int iz = 0; iz < g.n; ++iz, ++idx)
                V.v[idx] = value(g.point(ix, iy, iz), t);
    return V;
}

Potential TimePotential::dt_at(double t, const Grid3& g) const {
    Potential V(g);
    if (family_ == Family::statik) return V;
    std::size_t idx = 0;
    for (int ix = 0; ix < g.n; ++ix)
        for (int iy = 0; iy < g.n; ++iy)
            for (int iz = 0; iz < g.n; ++iz, ++idx)
                V.v[idx] = dt_value(g.point(ix, iy, iz), t);
    return V;
}

double TimePotential::sup_bound(const Grid3& g, double t0, double t1) const {
    double s = 0.0;
    const int samples = is_static() ? 1 : 5;
    for (int i = 0; i < samples; ++i) {
        const double t = samples == 1 ? t0 : t0 + (t1 - t0) * i / (samples - 1.0);
        s = std::max(s, at(t, g).sup_norm());
    }
    return 1.1 * s;
}

}  // namespace displab
