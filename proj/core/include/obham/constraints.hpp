#pragma once

#include "obham/poisson.hpp"
#include "obham/types.hpp"

// Constraint analysis and the regularized multiplier.
//
// Classification follows the Dirac dichotomy evaluated numerically: a
// constraint is first class when {H, Phi} vanishes (within a scale-aware
// tolerance) across the sampled surface, second class otherwise.
//
// Second-class constraints get the dissipative regularization
//   lambda = -(dPhi/dt|_H + alpha * Phi) / (||grad_E Phi||^2 + eps)
// applied along the metric-raised gradient of Phi:
//   zdot = B grad H + lambda * G^{-1} grad Phi,   G = diag(g_M, rho, I).
// Here dPhi/dt|_H = {Phi, H} in this library's bracket orientation. Along
// these trajectories Phi decays at rate alpha*mu^2/(mu^2+eps) (mu = ||grad_E
// Phi||) up to an O(eps) forcing term, and H is non-increasing up to the
// integrator's documented slack. The correction direction is a gradient, not
// a Hamiltonian field: a multiplier on B grad Phi cannot change dPhi/dt at
// all (antisymmetry), so no choice of lambda would restore feasibility that
// way.

namespace obham::constraints {

struct RegularizationParams {
    double alpha = 1.0;   // dissipation strength, >= 0 (0 recovers the bare flow)
    double eps = 1e-2;    // regularization floor, > 0
    double mu = 1.0;      // gradient-norm floor used in bounds, >= 0
    double t_char = 1.0;  // characteristic time for alpha_max, > 0
    // Snap lambda to zero when the state sits on the surface and the bracket
    // vanishes there (pointwise first-class detection).
    bool force_first_class_zero = true;

    void validate() const;
};

enum class DiracClass { FirstClass, SecondClass, Indeterminate };

struct DiracReport {
    DiracClass classification = DiracClass::Indeterminate;
    double max_abs_bracket = 0.0; // bracket magnitude at the worst sample
    double tolerance = 0.0;       // scale-aware tolerance at that sample
    int samples_used = 0;
};

/// Classifies the spec's constraint over surface samples (|Phi| <= 1e-6
/// required per sample). Fewer than min_samples (but at least one) yields
/// Indeterminate; an empty set throws InsufficientSamples. The per-sample
/// tolerance is 1e-8 * (1 + |H| + ||grad H|| ||grad Phi||).
DiracReport classify_dirac(const ObservationSystemSpec& spec,
                           const std::vector<BundleState>& surface_samples, int min_samples = 8,
                           poisson::Backend backend = poisson::Backend::Tabulated);

/// min(mu^2 / bracket_norm, 1 / t_char); all inputs must be positive.
double alpha_max(double mu, double bracket_norm, double t_char);

struct RhsInfo {
    double lambda = 0.0;
    double phi = 0.0;
    double dphi_dt = 0.0;        // {Phi, H} at the state
    double grad_phi_norm_sq = 0.0;
    bool first_class_zero = false; // lambda suppressed by the on-surface snap
};

/// The regularized multiplier at a state (0 for unconstrained specs).
double regularized_lambda(const ObservationSystemSpec& spec, const BundleState& s,
                          const RegularizationParams& params,
                          poisson::Backend backend = poisson::Backend::Tabulated);

/// |Phi(0)| * exp(-alpha t / (mu^2 + eps)): the guaranteed decay envelope.
double decay_bound(double phi0_abs, const RegularizationParams& params, double t);

/// Right-hand side of the observation-constrained flow; see the header note
/// for the composition. Optional info receives the multiplier diagnostics.
Vec constrained_rhs(const ObservationSystemSpec& spec, const BundleState& s,
                    const RegularizationParams& params,
                    poisson::Backend backend = poisson::Backend::Tabulated,
                    RhsInfo* info = nullptr);

struct GeoLossWeights {
    double alpha_w = 1.0;
    double beta_w = 1.0;
};

/// Phi^2 + alpha_w * (metric compatibility residual)^2
///        + beta_w * ||omega_E(s) - omega_ref||_F^2.
/// omega_ref must match the assembled dimension.
double geometric_loss(const ObservationSystemSpec& spec, const BundleState& s,
                      const GeoLossWeights& weights, const Mat& omega_ref);

} // namespace obham::constraints
