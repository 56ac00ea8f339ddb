#pragma once

#include <functional>

#include "obham/lax_toda.hpp"
#include "obham/types.hpp"

// Built-in example systems. Each comes with an initial state and, when a
// constraint is installed, a deterministic on-surface sampler (index -> state,
// no RNG involved) for classification runs.

namespace obham::systems {

struct SystemBundle {
    ObservationSystemSpec spec;
    BundleState initial;
    std::function<BundleState(int)> surface_sample;
};

struct OscillatorOptions {
    double spring = 1.0;       // base stiffness, >= 0 (0 gives a free particle)
    double kappa_fiber = 0.0;  // fiber stiffness, >= 0
    double delta = 1.0;        // uncertainty radius, > 0
    bool position_constraint = false; // Phi = q (feasible halfplane q >= 0)
    double q0 = 1.0, p0 = 0.0, xi0 = 0.0, pi0 = 0.0;
};

/// One-dimensional oscillator H = (p^2 + spring q^2)/2 + (pi^2 + kappa xi^2)/2
/// over a single observation channel h(q, p) = q with identity fiber metric.
SystemBundle oscillator(const OscillatorOptions& opt = {});

struct CircleOptions {
    double level = 1.0; // energy level of the constraint circle, > 0
    double q0 = 1.0, p0 = 1.0;
};

/// Base oscillator with the energy-level constraint Phi = level - H. The
/// feasible region is the closed disk, so discretization drift (which inflates
/// H) violates and projection corrects. The fiber is frozen: H carries no
/// fiber terms.
SystemBundle circle(const CircleOptions& opt = {});

struct TodaOptions {
    toda::TodaParams params;
    bool ellipsoid_constraint = true;
    Vec q0, p0;             // empty => a symmetric default profile
    double xi0_scale = 0.1; // initial xi = scale * delta0 per bond
};

/// Open Toda chain on the bond-observation bundle; see toda_system_spec.
SystemBundle toda_chain(const TodaOptions& opt = {});

} // namespace obham::systems
