#pragma once

#include "obham/constraints.hpp"
#include "obham/types.hpp"

// Geometry-preserving explicit integrator.
//
// One step: predict with the constrained flow plus the horizontal-lift fiber
// transport, project back onto the constraint surface when the prediction
// went infeasible, clamp the fiber into its uncertainty ball, then measure
// the geometric error (metric-compatibility residual and the symplecticity
// defect of the step map). Under adaptive control a step whose error exceeds
// tol_geo is retried from the original state with h/2, down to h_min.
//
// Error observables: the accepted state always satisfies Phi >= -tol_constraint
// (projection tolerance), so the constraint-order observable is the violation
// of the PREDICTED point, recorded per step as phi_pre. The symplecticity
// defect uses a finite-difference Jacobian J(h) of the prediction map:
// ||J^T omega J - omega||_F / ||omega||_F, which is O(h^2) for the explicit
// scheme because the first-order terms cancel for any Hamiltonian flow.

namespace obham::integrate {

struct IntegratorConfig {
    double h0 = 1e-2;
    double h_min = 1e-6;
    double h_max = 1e-1;
    double tol_geo = 1e-3;
    double t_final = 1.0;
    bool adapt = true;
    double growth_factor = 1.5;    // applied when error < tol_geo/10
    int max_projection_iters = 5;
    double tol_constraint = 1e-10;
    bool enable_projection = true; // off: constraint handled by the multiplier only
    bool compute_geo_error = true; // off: skip the Jacobian residual (eps_geo = 0)
    constraints::RegularizationParams reg;
    poisson::Backend backend = poisson::Backend::Tabulated;
    // No randomness exists anywhere in the pipeline; the flag documents the
    // byte-reproducibility contract for configs and reports.
    bool deterministic = true;

    void validate() const; // throws InvalidInput on any violated bound
};

struct StepDiagnostics {
    double t = 0.0;        // time after the step
    double h_used = 0.0;
    double phi_pre = 0.0;  // constraint value at the predicted (uncorrected) point
    double phi_value = 0.0;// constraint value at the accepted state
    double energy = 0.0;
    double eps_geo = 0.0;
    int projection_iters = 0;
    bool clamped = false;
    double lambda_value = 0.0;
    bool class_flag = false; // multiplier zeroed by pointwise first-class detection
    int halvings = 0;
};

struct Trajectory {
    std::vector<BundleState> states; // states[0] is the initial state
    std::vector<StepDiagnostics> diag; // one record per accepted step
};

/// Projection hit a degenerate gradient or the iteration cap; carries the
/// best iterate reached.
struct ProjectionError : Error {
    ProjectionError(const std::string& what, BundleState best_, int iters_)
        : Error(what), best(std::move(best_)), iters(iters_)
    {
    }
    BundleState best;
    int iters = 0;
};

/// h reached h_min with the geometric error still above tolerance.
struct StepError : Error {
    StepError(const std::string& what, StepDiagnostics diag_) : Error(what), diag(diag_) {}
    StepDiagnostics diag;
};

/// Explicit prediction: state + h * v with v the constrained flow, the fiber
/// velocity corrected by the horizontal-lift transport term
/// Gamma^a_{b,i} xi_b xdot^i. Optional outputs: the multiplier used, the
/// constraint value at the predicted point, and whether the multiplier was
/// zeroed by pointwise first-class detection.
BundleState predict(const ObservationSystemSpec& spec, const BundleState& s, double h,
                    const IntegratorConfig& cfg, double* lambda_out = nullptr,
                    double* phi_pre_out = nullptr, bool* first_class_out = nullptr);

/// Newton iteration along the metric-raised constraint gradient
/// nu = G^{-1} grad Phi / ||G^{-1} grad Phi||_G, step a = |Phi| / <grad Phi, nu>,
/// until Phi >= -tol. Throws ProjectionError on degenerate gradients or when
/// max_iters passes without reaching the band.
BundleState project_constraint(const ObservationSystemSpec& spec, const BundleState& s, double tol,
                               int max_iters, int* iters_out = nullptr);

/// max(metric-compatibility residual at s.x, symplecticity defect of the
/// h-step prediction map at s).
double geometric_error(const ObservationSystemSpec& spec, const BundleState& s, double h,
                       const IntegratorConfig& cfg);

/// One accepted step. h carries the proposed step in and the next proposal
/// out (halved/grown under adaptive control); diagnostics record what was
/// actually used.
BundleState step(const ObservationSystemSpec& spec, const BundleState& s, double& h,
                 const IntegratorConfig& cfg, StepDiagnostics* out = nullptr);

/// Integrates from s0 to t_final (the last step is shortened to land
/// exactly). The initial state must be feasible when projection is enabled.
Trajectory integrate(const ObservationSystemSpec& spec, const BundleState& s0,
                     const IntegratorConfig& cfg);

struct OrderReport {
    std::vector<double> hs;
    std::vector<double> e_phi;  // max per-step predicted-point violation
    std::vector<double> e_glob; // terminal-state error vs fine reference
    double p_phi = std::numeric_limits<double>::quiet_NaN();
    double p_glob = std::numeric_limits<double>::quiet_NaN();
    bool phi_order_defined = false;
    bool exact = false; // errors at reference noise level; orders undefined
};

/// Fixed-step convergence study over `levels` halvings of cfg.h0 against a
/// reference at h0 / 2^(levels+2). Requires levels >= 3. Adaptation is
/// disabled for every run.
OrderReport convergence_study(const ObservationSystemSpec& spec, const BundleState& s0,
                              const IntegratorConfig& cfg, int levels);

} // namespace obham::integrate
