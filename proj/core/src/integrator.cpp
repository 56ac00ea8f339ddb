#include "obham/integrator.hpp"

#include <cmath>

#include "obham/bundle_geometry.hpp"
#include "obham/fd.hpp"

namespace obham::integrate {

void IntegratorConfig::validate() const
{
    if (!(h0 > 0.0)) throw InvalidInput("IntegratorConfig: h0 must be positive");
    if (!(h_min > 0.0)) throw InvalidInput("IntegratorConfig: h_min must be positive");
    if (h_max < h_min) throw InvalidInput("IntegratorConfig: h_max must be >= h_min");
    if (h0 < h_min || h0 > h_max) throw InvalidInput("IntegratorConfig: h0 outside [h_min, h_max]");
    if (!(tol_geo > 0.0)) throw InvalidInput("IntegratorConfig: tol_geo must be positive");
    if (!(t_final > 0.0)) throw InvalidInput("IntegratorConfig: t_final must be positive");
    if (growth_factor < 1.0) throw InvalidInput("IntegratorConfig: growth_factor must be >= 1");
    if (max_projection_iters < 1)
        throw InvalidInput("IntegratorConfig: max_projection_iters must be >= 1");
    if (!(tol_constraint > 0.0))
        throw InvalidInput("IntegratorConfig: tol_constraint must be positive");
    reg.validate();
}

BundleState predict(const ObservationSystemSpec& spec, const BundleState& s, double h,
                    const IntegratorConfig& cfg, double* lambda_out, double* phi_pre_out,
                    bool* first_class_out)
{
    if (!(h > 0.0)) throw InvalidInput("predict: step must be positive");

    constraints::RhsInfo info;
    Vec v = constraints::constrained_rhs(spec, s, cfg.reg, cfg.backend, &info);

    // Horizontal-lift fiber transport: xi ticks along with the base motion so
    // that parallel fibers stay parallel, xidot^a -= Gamma^a_{b,i} xi^b xdot^i.
    const CoeffStack gamma = geometry::mixed_connection(spec, s.x);
    const int d2n = spec.base_dim();
    Vec transport = Vec::Zero(spec.k);
    for (int i = 0; i < d2n; ++i) transport -= v[i] * (gamma[i] * s.xi);
    v.segment(d2n, spec.k) += transport;

    BundleState out = BundleState::from_flat(s.flat() + h * v, d2n, spec.k, s.t + h);
    if (lambda_out) *lambda_out = info.lambda;
    if (phi_pre_out) *phi_pre_out = spec.phi(out);
    if (first_class_out) *first_class_out = info.first_class_zero;
    return out;
}

BundleState project_constraint(const ObservationSystemSpec& spec, const BundleState& s, double tol,
                               int max_iters, int* iters_out)
{
    if (iters_out) *iters_out = 0;
    if (!spec.constrained()) return s;

    BundleState cur = s;
    for (int iter = 0; iter < max_iters; ++iter) {
        const double phi = spec.constraint.value(cur);
        if (phi >= -tol) {
            if (iters_out) *iters_out = iter;
            return cur;
        }
        const double musq = poisson::grad_norm_sq(spec, cur, spec.constraint);
        if (musq <= 1e-14 * (1.0 + std::abs(phi)))
            throw ProjectionError("project_constraint: degenerate constraint gradient", cur, iter);
        // Newton step along the metric-raised gradient: the directional
        // derivative of Phi along nu is exactly ||grad Phi||_G, so the full
        // step is |Phi| / mu^2 times the raised gradient.
        const poisson::BundleGradient raised = poisson::grad_E(spec, cur, spec.constraint);
        cur = BundleState::from_flat(cur.flat() + (std::abs(phi) / musq) * raised.flat(),
                                     spec.base_dim(), spec.k, cur.t);
    }
    if (spec.constraint.value(cur) >= -tol) {
        if (iters_out) *iters_out = max_iters;
        return cur;
    }
    throw ProjectionError("project_constraint: iteration cap reached off the surface", cur,
                          max_iters);
}

namespace {

double symplectic_defect(const ObservationSystemSpec& spec, const BundleState& s, double h,
                         const IntegratorConfig& cfg)
{
    const int dim = s.dim();
    const Vec z0 = s.flat();

    Mat J(dim, dim);
    for (int i = 0; i < dim; ++i) {
        const double step = fd::scaled_step(1e-6, z0[i]);
        Vec zp = z0, zm = z0;
        zp[i] += step;
        zm[i] -= step;
        const Vec fp =
            predict(spec, BundleState::from_flat(zp, spec.base_dim(), spec.k, s.t), h, cfg).flat();
        const Vec fm =
            predict(spec, BundleState::from_flat(zm, spec.base_dim(), spec.k, s.t), h, cfg).flat();
        J.col(i) = (fp - fm) / (2.0 * step);
    }

    const Mat omega = poisson::assemble_omega(spec, s);
    return (J.transpose() * omega * J - omega).norm() / omega.norm();
}

} // namespace

double geometric_error(const ObservationSystemSpec& spec, const BundleState& s, double h,
                       const IntegratorConfig& cfg)
{
    const double compat = geometry::metric_compat_residual(spec, s.x);
    return std::max(compat, symplectic_defect(spec, s, h, cfg));
}

BundleState step(const ObservationSystemSpec& spec, const BundleState& s, double& h,
                 const IntegratorConfig& cfg, StepDiagnostics* out)
{
    double h_try = std::min(h, cfg.h_max);
    if (!(h_try > 0.0)) throw InvalidInput("step: proposed step must be positive");
    const double h_floor = std::min(cfg.h_min, h_try); // shortened final steps keep their size

    StepDiagnostics diag;
    BundleState pred;
    double eps_geo = 0.0;

    for (;;) {
        pred = predict(spec, s, h_try, cfg, &diag.lambda_value, &diag.phi_pre, &diag.class_flag);
        eps_geo = cfg.compute_geo_error ? geometric_error(spec, s, h_try, cfg) : 0.0;
        if (!cfg.adapt || eps_geo <= cfg.tol_geo) break;
        if (h_try <= h_floor * (1.0 + 1e-12)) {
            diag.t = s.t;
            diag.h_used = h_try;
            diag.eps_geo = eps_geo;
            throw StepError("step: geometric error above tolerance at the minimum step", diag);
        }
        h_try = std::max(0.5 * h_try, h_floor);
        ++diag.halvings;
    }

    BundleState acc = pred;
    if (cfg.enable_projection && spec.constrained() && diag.phi_pre < -cfg.tol_constraint)
        acc = project_constraint(spec, acc, cfg.tol_constraint, cfg.max_projection_iters,
                                 &diag.projection_iters);

    const double fiber_nrm = geometry::fiber_norm(spec, acc.x, acc.xi);
    if (fiber_nrm > spec.delta(acc.x)) {
        acc.xi = geometry::radial_clamp(spec, acc.x, acc.xi);
        diag.clamped = true;
    }

    diag.t = acc.t;
    diag.h_used = h_try;
    diag.phi_value = spec.phi(acc);
    diag.energy = spec.hamiltonian ? spec.hamiltonian.value(acc) : 0.0;
    diag.eps_geo = eps_geo;
    if (out) *out = diag;

    h = (cfg.adapt && eps_geo < 0.1 * cfg.tol_geo)
            ? std::min(h_try * cfg.growth_factor, cfg.h_max)
            : h_try;
    return acc;
}

Trajectory integrate(const ObservationSystemSpec& spec, const BundleState& s0,
                     const IntegratorConfig& cfg)
{
    cfg.validate();
    if (s0.base_dim() != spec.base_dim() || s0.fiber_dim() != spec.k)
        throw InvalidInput("integrate: initial state has wrong dimensions");

    BundleState s = s0;
    if (geometry::fiber_norm(spec, s.x, s.xi) > spec.delta(s.x))
        s.xi = geometry::radial_clamp(spec, s.x, s.xi);
    if (cfg.enable_projection && spec.constrained() &&
        spec.constraint.value(s) < -cfg.tol_constraint)
        throw InvalidInput("integrate: initial state violates the constraint");

    Trajectory traj;
    traj.states.push_back(s);

    const double t_end = s0.t + cfg.t_final;
    const double t_eps = 1e-12 * std::max(1.0, std::abs(t_end));
    const long max_steps = static_cast<long>(std::ceil(cfg.t_final / cfg.h_min)) + 1000;

    double h = cfg.h0;
    long steps = 0;
    while (t_end - s.t > t_eps) {
        if (++steps > max_steps) throw Error("integrate: step budget exhausted");
        const double remaining = t_end - s.t;
        double h_use = std::min(h, remaining);
        const bool landing = remaining - h_use <= t_eps;
        if (landing) h_use = remaining; // absorb accumulated rounding
        StepDiagnostics d;
        s = step(spec, s, h_use, cfg, &d);
        if (landing) s.t = d.t = t_end;
        traj.states.push_back(s);
        traj.diag.push_back(d);
        h = h_use;
    }
    return traj;
}

namespace {

// least-squares slope of y against the level index 0..m-1
double fit_slope(const std::vector<double>& y)
{
    const int m = static_cast<int>(y.size());
    double mean_x = 0.5 * (m - 1), mean_y = 0.0;
    for (double v : y) mean_y += v;
    mean_y /= m;
    double sxx = 0.0, sxy = 0.0;
    for (int i = 0; i < m; ++i) {
        sxx += (i - mean_x) * (i - mean_x);
        sxy += (i - mean_x) * (y[i] - mean_y);
    }
    return sxy / sxx;
}

} // namespace

OrderReport convergence_study(const ObservationSystemSpec& spec, const BundleState& s0,
                              const IntegratorConfig& cfg, int levels)
{
    if (levels < 3) throw InvalidInput("convergence_study: need at least 3 levels");

    IntegratorConfig run = cfg;
    run.adapt = false;
    run.compute_geo_error = false;

    auto run_at = [&](double h) {
        IntegratorConfig c = run;
        c.h0 = h;
        c.h_min = std::min(c.h_min, h);
        c.h_max = std::max(c.h_max, h);
        return integrate(spec, s0, c);
    };

    const double h_ref = cfg.h0 / std::pow(2.0, levels + 2);
    const Trajectory ref = run_at(h_ref);
    const Vec z_ref = ref.states.back().flat();

    OrderReport rep;
    bool phi_all_positive = spec.constrained();
    for (int lev = 0; lev < levels; ++lev) {
        const double h = cfg.h0 / std::pow(2.0, lev);
        const Trajectory traj = run_at(h);
        double worst = 0.0;
        for (const StepDiagnostics& d : traj.diag) worst = std::max(worst, -std::min(0.0, d.phi_pre));
        rep.hs.push_back(h);
        rep.e_phi.push_back(worst);
        rep.e_glob.push_back((traj.states.back().flat() - z_ref).norm());
        if (worst <= 0.0) phi_all_positive = false;
    }

    double max_glob = 0.0;
    for (double e : rep.e_glob) max_glob = std::max(max_glob, e);
    if (max_glob <= 1e-13 * (1.0 + z_ref.norm())) {
        rep.exact = true;
        return rep;
    }

    std::vector<double> lg(rep.e_glob.size());
    for (size_t i = 0; i < lg.size(); ++i) lg[i] = std::log2(std::max(rep.e_glob[i], 1e-300));
    rep.p_glob = -fit_slope(lg);

    if (phi_all_positive) {
        std::vector<double> lp(rep.e_phi.size());
        for (size_t i = 0; i < lp.size(); ++i) lp[i] = std::log2(rep.e_phi[i]);
        rep.p_phi = -fit_slope(lp);
        rep.phi_order_defined = true;
    }
    return rep;
}

} // namespace obham::integrate
