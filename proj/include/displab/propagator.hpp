#pragma once

#include <functional>
#include <optional>

#include "displab/field.hpp"
#include "displab/potential.hpp"

namespace displab {

// Time-dependent source term of the evolution equation.
struct TimeSource {
    std::function<cplx(const Vec3&, double)> eval;
    explicit operator bool() const { return static_cast<bool>(eval); }
};

struct Trajectory {
    double dt = 0.0;
    std::vector<double> times;   // every observable sample
    std::vector<double> mass;
    std::vector<double> energy;
    std::vector<double> sup;
    std::vector<double> stored_times;  // uniformly strided state snapshots
    std::vector<Field3> states;
};

struct EvolveOptions {
    double dt = 5e-3;
    double t_max = 1.0;
    int store_stride = 1;          // state snapshot cadence (steps)
    double mass_drift_tol = 1e-6;  // per unit time, homogeneous runs only
    bool record_energy = true;
    // Called after every step with (step index, time, state).
    std::function<void(int, double, const Field3&)> observer;
};

// e^{i t Delta} f: multiplier e^{-i t |xi|^2}; the free propagator of
// i d/dt psi = -Delta psi.
Field3 free_evolve(const Field3& f, double t);

// Heat semigroup e^{t Delta} f (t >= 0).
Field3 free_heat(const Field3& f, double t);

// Strang split-step integration of i d/dt psi = (-Delta + V(t)) psi + Psi,
// potential evaluated at step midpoints, source by midpoint Duhamel
// quadrature. Observables are recorded every step.
Trajectory evolve(const TimePotential& Vt, const Field3& psi0, const TimeSource& source,
                  const EvolveOptions& opts);

// Same splitting for d/dt psi = (Delta - V(t)) psi - i^{-1}... the
// dissipative companion equation: kinetic factor e^{-dt |xi|^2}, potential
// factor e^{-dt V / 2}; L2 is nonincreasing for V >= 0 and no source.
Trajectory heat_evolve(const TimePotential& Vt, const Field3& psi0, const TimeSource& source,
                       const EvolveOptions& opts);

// e^{-i t H} psi for a fixed gridded potential (t >= 0, Strang steps of dt);
// the lean inner loop of the wave-operator limits.
Field3 evolve_static_potential(const Potential& V, const Field3& psi0, double t, double dt);

double mass(const Field3& f);
// int |grad psi|^2 + V |psi|^2 with the gradient taken spectrally.
double energy(const Field3& f, const Potential& V);
double kinetic_energy(const Field3& f);

}  // namespace displab
