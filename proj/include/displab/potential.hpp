#pragma once

#include <functional>
#include <memory>
#include <random>

#include "displab/field.hpp"

namespace displab {

// Analytic potential profile: evaluable at arbitrary points so grids can be
// resampled exactly under translation and dyadic rescaling.
class Profile {
  public:
    virtual ~Profile() = default;
    virtual double value(const Vec3& x) const = 0;

    // Gradient for the modulated families; sharp profiles have none.
    virtual Vec3 gradient(const Vec3&) const {
        throw std::logic_error("Profile::gradient: profile is not differentiable");
    }
    virtual bool differentiable() const { return false; }

    // Pointwise sampling by default; sharp profiles override with subcell
    // averaging near their discontinuity.
    virtual Potential sample(const Grid3& g) const;
};

using ProfilePtr = std::shared_ptr<const Profile>;

class GaussianProfile : public Profile {
  public:
    GaussianProfile(double depth, double width, Vec3 center = {})
        : depth_(depth), width_(width), center_(center) {}
    double value(const Vec3& x) const override;
    Vec3 gradient(const Vec3& x) const override;
    bool differentiable() const override { return true; }

  private:
    double depth_, width_;
    Vec3 center_;
};

// depth * chi_{|x| < radius}, sampled with subcell averaging at the edge.
class BallProfile : public Profile {
  public:
    BallProfile(double depth, double radius) : depth_(depth), radius_(radius) {}
    double value(const Vec3& x) const override;
    Potential sample(const Grid3& g) const override;

  private:
    double depth_, radius_;
};

// depth * chi_{r0 <= |x| < r1}.
class ShellProfile : public Profile {
  public:
    ShellProfile(double depth, double r0, double r1)
        : depth_(depth), r0_(r0), r1_(r1) {}
    double value(const Vec3& x) const override;
    Potential sample(const Grid3& g) const override;

  private:
    double depth_, r0_, r1_;
};

// Smooth well depth/2 * (1 - tanh((r - radius)/edge)); differentiable, so
// usable with the translating and rescaling families.
class SmoothWellProfile : public Profile {
  public:
    SmoothWellProfile(double depth, double radius, double edge)
        : depth_(depth), radius_(radius), edge_(edge) {}
    double value(const Vec3& x) const override;
    Vec3 gradient(const Vec3& x) const override;
    bool differentiable() const override { return true; }

  private:
    double depth_, radius_, edge_;
};

// Random finite Fourier sum under a Gaussian envelope: analytic everywhere,
// reproducible from the seed.
class BandlimitedProfile : public Profile {
  public:
    BandlimitedProfile(std::uint64_t seed, int max_mode, double mode_scale,
                       double envelope_width, double amplitude);
    double value(const Vec3& x) const override;
    Vec3 gradient(const Vec3& x) const override;
    bool differentiable() const override { return true; }

  private:
    struct Mode {
        Vec3 k;
        double re, im;
    };
    std::vector<Mode> modes_;
    double envelope_width_, amplitude_;
};

// alpha^2 * base(alpha x): the scaling the dyadic norm is invariant under.
class DilatedProfile : public Profile {
  public:
    DilatedProfile(ProfilePtr base, double alpha) : base_(std::move(base)), alpha_(alpha) {}
    double value(const Vec3& x) const override {
        return alpha_ * alpha_ * base_->value(alpha_ * x);
    }
    Vec3 gradient(const Vec3& x) const override {
        return alpha_ * alpha_ * alpha_ * base_->gradient(alpha_ * x);
    }
    bool differentiable() const override { return base_->differentiable(); }
    Potential sample(const Grid3& g) const override;

  private:
    ProfilePtr base_;
    double alpha_;
};

// Scalar modulation path with its analytic derivative.
struct ScalarPath {
    std::function<double(double)> value;
    std::function<double(double)> deriv;
};

ScalarPath constant_path(double c);
ScalarPath linear_path(double a, double b);  // a + b t
// a + (b-a) * smoothstep((t-t0)/(t1-t0)), C^1 ramp.
ScalarPath smoothstep_path(double a, double b, double t0, double t1);
ScalarPath sine_path(double mean, double amp, double omega);

struct VectorPath {
    std::function<Vec3(double)> value;
    std::function<Vec3(double)> deriv;
};

VectorPath linear_motion(Vec3 x0, Vec3 velocity);

// V(x,t) from one of the modulated families; every family exposes the
// analytic time derivative.
class TimePotential {
  public:
    enum class Family { statik, translate, scale, ramp, perturbed };

    static TimePotential make_static(ProfilePtr p);
    static TimePotential translating(ProfilePtr p, VectorPath path);
    static TimePotential rescaling(ProfilePtr p, ScalarPath alpha);
    static TimePotential ramped(ProfilePtr p, ScalarPath amplitude);
    static TimePotential perturbed(ProfilePtr base, ProfilePtr bump, ScalarPath amplitude);

    Family family() const { return family_; }
    bool is_static() const { return family_ == Family::statik; }

    double value(const Vec3& x, double t) const;
    double dt_value(const Vec3& x, double t) const;

    Potential at(double t, const Grid3& g) const;
    Potential dt_at(double t, const Grid3& g) const;

    // Coarse sup bound used by the split-step stability check.
    double sup_bound(const Grid3& g, double t0, double t1) const;

  private:
    TimePotential() = default;
    Family family_ = Family::statik;
    ProfilePtr profile_;
    ProfilePtr bump_;
    ScalarPath amp_;
    ScalarPath alpha_;
    VectorPath path_;
};

}  // namespace displab
