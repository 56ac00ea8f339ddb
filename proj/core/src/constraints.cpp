#include "obham/constraints.hpp"

#include <cmath>

#include "obham/bundle_geometry.hpp"
#include "obham/fd.hpp"

namespace obham::constraints {

void RegularizationParams::validate() const
{
    if (alpha < 0.0) throw InvalidInput("RegularizationParams: alpha must be >= 0");
    if (!(eps > 0.0)) throw InvalidInput("RegularizationParams: eps must be > 0");
    if (mu < 0.0) throw InvalidInput("RegularizationParams: mu must be >= 0");
    if (!(t_char > 0.0)) throw InvalidInput("RegularizationParams: t_char must be > 0");
}

DiracReport classify_dirac(const ObservationSystemSpec& spec,
                           const std::vector<BundleState>& surface_samples, int min_samples,
                           poisson::Backend backend)
{
    if (!spec.constrained()) throw InvalidInput("classify_dirac: spec has no constraint");
    if (surface_samples.empty()) throw InsufficientSamples("classify_dirac: no surface samples");

    DiracReport rep;
    rep.samples_used = static_cast<int>(surface_samples.size());

    bool all_below = true;
    for (const BundleState& s : surface_samples) {
        const double phi = spec.constraint.value(s);
        if (std::abs(phi) > 1e-6)
            throw InvalidInput("classify_dirac: sample is off the constraint surface");

        const double br = poisson::poisson_bracket(spec, s, spec.hamiltonian, spec.constraint,
                                                   backend);
        const double gh = fd::field_gradient(spec.hamiltonian, s, spec.gradient_step).norm();
        const double gp = fd::field_gradient(spec.constraint, s, spec.gradient_step).norm();
        const double tol = 1e-8 * (1.0 + std::abs(spec.hamiltonian.value(s)) + gh * gp);

        if (std::abs(br) > rep.max_abs_bracket) {
            rep.max_abs_bracket = std::abs(br);
            rep.tolerance = tol;
        }
        if (std::abs(br) > tol) all_below = false;
    }

    if (rep.samples_used < min_samples)
        rep.classification = DiracClass::Indeterminate;
    else
        rep.classification = all_below ? DiracClass::FirstClass : DiracClass::SecondClass;
    return rep;
}

double alpha_max(double mu, double bracket_norm, double t_char)
{
    if (!(mu > 0.0) || !(bracket_norm > 0.0) || !(t_char > 0.0))
        throw InvalidInput("alpha_max: all arguments must be positive");
    return std::min(mu * mu / bracket_norm, 1.0 / t_char);
}

namespace {

// lambda and its ingredients; shared by regularized_lambda and constrained_rhs.
RhsInfo multiplier_info(const ObservationSystemSpec& spec, const BundleState& s,
                        const RegularizationParams& params, poisson::Backend backend)
{
    params.validate();
    RhsInfo info;
    if (!spec.constrained()) return info;

    info.phi = spec.constraint.value(s);
    info.dphi_dt = poisson::poisson_bracket(spec, s, spec.constraint, spec.hamiltonian, backend);
    info.grad_phi_norm_sq = poisson::grad_norm_sq(spec, s, spec.constraint);

    if (params.force_first_class_zero) {
        // On-surface and bracket-flat: the constraint is preserved by the bare
        // flow here, so no correction is due.
        const double h_scale = 1.0 + std::abs(spec.hamiltonian ? spec.hamiltonian.value(s) : 0.0);
        if (std::abs(info.phi) <= 1e-9 && std::abs(info.dphi_dt) <= 1e-8 * h_scale) {
            info.lambda = 0.0;
            info.first_class_zero = true;
            return info;
        }
    }

    info.lambda = -(info.dphi_dt + params.alpha * info.phi) / (info.grad_phi_norm_sq + params.eps);
    return info;
}

} // namespace

double regularized_lambda(const ObservationSystemSpec& spec, const BundleState& s,
                          const RegularizationParams& params, poisson::Backend backend)
{
    return multiplier_info(spec, s, params, backend).lambda;
}

double decay_bound(double phi0_abs, const RegularizationParams& params, double t)
{
    params.validate();
    if (phi0_abs < 0.0) throw InvalidInput("decay_bound: |Phi(0)| must be nonnegative");
    if (t < 0.0) throw InvalidInput("decay_bound: time must be nonnegative");
    return phi0_abs * std::exp(-params.alpha * t / (params.mu * params.mu + params.eps));
}

Vec constrained_rhs(const ObservationSystemSpec& spec, const BundleState& s,
                    const RegularizationParams& params, poisson::Backend backend, RhsInfo* info)
{
    Vec rhs = poisson::hamiltonian_vector_field(spec, s, backend);
    if (!spec.constrained()) {
        if (info) *info = RhsInfo{};
        return rhs;
    }

    const RhsInfo mi = multiplier_info(spec, s, params, backend);
    if (info) *info = mi;
    if (mi.lambda != 0.0) {
        const poisson::BundleGradient dir = poisson::grad_E(spec, s, spec.constraint);
        rhs += mi.lambda * dir.flat();
    }
    return rhs;
}

double geometric_loss(const ObservationSystemSpec& spec, const BundleState& s,
                      const GeoLossWeights& weights, const Mat& omega_ref)
{
    const double phi = spec.constrained() ? spec.constraint.value(s) : 0.0;
    const double resid = geometry::metric_compat_residual(spec, s.x);
    const Mat omega = poisson::assemble_omega(spec, s);
    if (omega_ref.rows() != omega.rows() || omega_ref.cols() != omega.cols())
        throw InvalidInput("geometric_loss: reference form has wrong shape");
    const double drift = (omega - omega_ref).norm();
    return phi * phi + weights.alpha_w * resid * resid + weights.beta_w * drift * drift;
}

} // namespace obham::constraints
