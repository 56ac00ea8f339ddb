#pragma once

#include "obham/types.hpp"

// Fiber geometry of the observation bundle: the rho-weighted fiber norm and
// its radial clamp, the observation-adaptive connection with its metric
// compatibility residual and mixed curvature, smooth cutoff profiles, and a
// sample-based properness validator for the uncertainty field.

namespace obham::geometry {

/// ||xi||_{rho(x)} = sqrt(xi^T rho(x) xi). Throws SingularMetric when rho is
/// detectably not SPD (asymmetric or indefinite along xi), InvalidInput on
/// dimension mismatch.
double fiber_norm(const ObservationSystemSpec& spec, const Vec& x, const Vec& xi);

/// Shrinks xi radially until ||xi||_rho <= delta(x). Feasible inputs are
/// returned bit-identically, which makes the clamp exactly idempotent: the
/// rescale loop terminates only once the recomputed norm passes the same test
/// a second call would apply.
Vec radial_clamp(const ObservationSystemSpec& spec, const Vec& x, const Vec& xi);

/// d_i rho(x) for every base direction: the system's analytic evaluator when
/// present, fourth-order central differences otherwise.
CoeffStack fiber_metric_derivatives(const ObservationSystemSpec& spec, const Vec& x);

/// Observation-adaptive connection Gamma^a_{b,i} = (1/2) rho^{ac} d_i rho_{bc}.
/// Entry (a,b) of stack[i]. Fiber-fiber components are identically zero and
/// are not stored. The construction satisfies nabla rho = 0 identically, so
/// metric_compat_residual measures only derivative-approximation error.
CoeffStack mixed_connection(const ObservationSystemSpec& spec, const Vec& x);

/// Optional boundary-truncated variant: Gamma scaled by cutoff_chi(d(x), eps).
/// Semantics near the boundary are a modeling choice, not a derived fact;
/// exposed as a mode for experimentation.
CoeffStack mixed_connection_boundary_truncated(const ObservationSystemSpec& spec, const Vec& x,
                                               double eps);

/// max_{a,b,i} |d_i rho_ab - Gamma^c_{a,i} rho_cb - Gamma^c_{b,i} rho_ac|.
double metric_compat_residual(const ObservationSystemSpec& spec, const Vec& x);

/// Closed-form mixed curvature
///   R^a_{b,i,j} = (1/2)[(d_i rho^{ac})(d_j rho_{bc}) - (d_j rho^{ac})(d_i rho_{bc})],
/// antisymmetric in (i,j); identically zero for conformal fiber metrics
/// rho = e^{2f} I. Only first derivatives of rho enter.
MixedCurvature mixed_curvature(const ObservationSystemSpec& spec, const Vec& x);

struct ConnectionReport {
    CoeffStack gamma;
    double compat_residual = 0.0;
    MixedCurvature curvature;
};

ConnectionReport connection_report(const ObservationSystemSpec& spec, const Vec& x);

/// Smooth step built from the exp(-1/s) bump: exactly 0 for t <= eps/2,
/// exactly 1 for t >= eps, C-infinity and monotone in between.
double cutoff_chi(double t, double eps);

/// Communication-style attenuation: 1 inside radius R_comm, then
/// eta((r-R)/R) * (R/r)^3 with eta the reversed bump profile (eta(0) = 1,
/// decreasing, eta(1) = 0). Continuous at r = R_comm.
double comm_cutoff(const Vec& p, const Vec& p_base, double R_comm);

struct PropernessConfig {
    double r_min = 1.0;  // fiber-norm threshold for the quadratic lower bound
    double alpha = 1.0;  // bound constant: flag when Phi/||xi||^2 < -alpha
    Vec reference_x;     // decay-fit reference point; empty => origin
};

struct PropernessReport {
    // (C1) uniform bound on delta over the samples
    double c1_sup_delta = 0.0;
    // (C2) min Phi/||xi||_rho^2 over samples with ||xi||_rho >= r_min
    double c2_min_quotient = std::numeric_limits<double>::quiet_NaN();
    int c2_samples = 0;
    bool c2_flag = false; // quadratic lower bound violated
    // (C3) max Lipschitz quotient of delta over sample pairs
    double c3_lipschitz = std::numeric_limits<double>::quiet_NaN();
    bool c3_available = false;
    // (C4b) fitted exponent beta of delta ~ C/(1+d)^beta towards reference_x
    double c4b_exponent = std::numeric_limits<double>::quiet_NaN();
    bool c4b_available = false;
    int samples = 0;
};

/// Spot checks of the properness conditions over a user-supplied sample set.
/// Throws InsufficientSamples on an empty set; with a single base point the
/// Lipschitz component alone is marked unavailable and the rest still run.
PropernessReport validate_properness(const ObservationSystemSpec& spec,
                                     const std::vector<BundleState>& samples,
                                     const PropernessConfig& cfg = {});

} // namespace obham::geometry
