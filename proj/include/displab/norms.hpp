#pragma once

#include <map>
#include <string>

#include "displab/field.hpp"
#include "displab/potential.hpp"
#include "displab/sphere.hpp"

namespace displab {

// Per-shell L2 masses of |g| over the dyadic annuli [2^k, 2^{k+1}).
struct ShellDecomposition {
    int k_min = 0;
    int k_max = -1;
    std::vector<double> masses;  // index k - k_min
    double origin_mass = 0.0;    // the r = 0 cell, below every shell

    double mass(int k) const {
        if (k < k_min || k > k_max) return 0.0;
        return masses[k - k_min];
    }
};

struct NormReport {
    std::string norm_id;
    std::string params;
    double value = 0.0;
    double tail = 0.0;
};

class Trajectory;  // propagator.hpp

// --- dyadic shell machinery -------------------------------------------------

ShellDecomposition shell_decomposition(const Potential& g);
ShellDecomposition shell_decomposition(const Field3& g);

// sum_k 2^{k sigma} || chi_{[2^k,2^{k+1})}(|x|) g ||_2, shells truncated to
// the grid; the origin cell is reported as the tail at one shell below the
// finest resolved radius.
NormReport dyadic_shell_norm(const Potential& g, double sigma);
NormReport dyadic_shell_norm(const Field3& g, double sigma);

// Relative deviation of ||alpha^2 V(alpha .)|| from ||V|| for alpha = 2^k,
// measured by exact dyadic resampling of the analytic profile.
double check_scaling_invariance(const Profile& V, const Grid3& base, int k,
                                double sigma = 0.5);

// --- rearrangement norms -----------------------------------------------------

// ||f||_{p,q} = ( int (t^{1/p} f*(t))^q dt/t )^{1/q} against the cell
// measure; the convention makes L^{p,p} = L^p exact. q = inf allowed.
NormReport lorentz_norm(const Field3& f, double p, double q);

// Outer L^{q_t} (trapezoid) of the inner spatial Lorentz norm over the
// trajectory's stored states.
NormReport spacetime_norm(const Trajectory& traj, double q_t, double p, double q_x);

// --- directional norms --------------------------------------------------------

enum class OuterNorm { sup, one, two };

// Slab decomposition orthogonal to omega with plane spacing h; cell mass is
// deposited linearly between neighboring slabs. Inner norm is the slab L2
// density, outer norm runs over the omega-coordinate.
double directional_norm(const Field3& f, const Vec3& omega, OuterNorm outer);

// Shell norm at sigma = 1/2 of (|x|/|x.omega|)^{1-eps} V; points on the
// plane x.omega = 0 take the symmetric average of their neighbors along the
// dominant axis of omega.
NormReport anisotropic_weight_norm(const Potential& V, const Vec3& omega, double eps);

// L^p-in-t (trapezoid) of the shell norm of dV/dt with the |x|^{2/p-2}
// weight absorbed as the shell exponent sigma = 1/2 + (2 - 2/p).
NormReport rate_norm(const TimePotential& Vt, double p, const std::vector<double>& t_grid,
                     const Grid3& g);

struct RatioReport {
    double lhs = 0.0;
    double rhs = 0.0;
    double ratio = 0.0;
    bool degenerate = false;
};

// int_{S^2} || f / |x.omega|^{1-eps} ||_{L^1_x} domega  vs  ||f||_{L^{3/2-eps,1}}.
RatioReport averaging_inequality_ratio(const Field3& f, double eps,
                                       const DirectionSet& dirs);

std::string csv_row(const NormReport& r);

}  // namespace displab
