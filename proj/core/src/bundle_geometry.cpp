#include "obham/bundle_geometry.hpp"

#include <algorithm>
#include <cmath>

#include "obham/fd.hpp"

namespace obham::geometry {

namespace {

// exp(-1/s) bump, extended by zero. Exactly 0.0 for s <= 0, so the assembled
// step hits its endpoints exactly.
double bump(double s)
{
    if (s <= 0.0) return 0.0;
    return std::exp(-1.0 / s);
}

// C-infinity monotone step on [0, 1].
double smooth01(double s)
{
    const double a = bump(s);
    const double b = bump(1.0 - s);
    return a / (a + b);
}

Mat spd_inverse(const Mat& m, const char* what)
{
    Eigen::LLT<Mat> llt(m);
    if (llt.info() != Eigen::Success) throw SingularMetric(what);
    return llt.solve(Mat::Identity(m.rows(), m.cols()));
}

} // namespace

double fiber_norm(const ObservationSystemSpec& spec, const Vec& x, const Vec& xi)
{
    if (x.size() != spec.base_dim() || xi.size() != spec.k)
        throw InvalidInput("fiber_norm: dimension mismatch");
    const Mat rho = spec.rho(x);
    if (rho.rows() != spec.k || rho.cols() != spec.k)
        throw InvalidInput("fiber_norm: fiber metric has wrong shape");
    if ((rho - rho.transpose()).cwiseAbs().maxCoeff() >
        1e-10 * (1.0 + rho.cwiseAbs().maxCoeff()))
        throw SingularMetric("fiber_norm: fiber metric not symmetric");
    const double q = xi.dot(rho * xi);
    if (q < 0.0) throw SingularMetric("fiber_norm: fiber metric not positive definite");
    return std::sqrt(q);
}

Vec radial_clamp(const ObservationSystemSpec& spec, const Vec& x, const Vec& xi)
{
    const double delta = spec.delta(x);
    if (!(delta > 0.0)) throw InvalidInput("radial_clamp: uncertainty radius must be positive");

    double nrm = fiber_norm(spec, x, xi);
    if (nrm <= delta) return xi;

    // Rescale until the recomputed norm passes the feasibility test; the
    // returned vector then survives a second call unchanged (exact
    // idempotence). Rounding can leave the norm a few ulps high, hence the
    // loop with a shrinking safety factor.
    Vec out = xi;
    double shrink = 1.0;
    for (int iter = 0; iter < 32; ++iter) {
        out *= shrink * (delta / nrm);
        nrm = fiber_norm(spec, x, out);
        if (nrm <= delta) return out;
        if (iter >= 3) shrink = 1.0 - 8.0 * std::numeric_limits<double>::epsilon();
    }
    throw Error("radial_clamp: rescale failed to converge");
}

CoeffStack fiber_metric_derivatives(const ObservationSystemSpec& spec, const Vec& x)
{
    if (x.size() != spec.base_dim())
        throw InvalidInput("fiber_metric_derivatives: base point has wrong dimension");
    if (spec.fiber_metric_dx) {
        CoeffStack d = spec.fiber_metric_dx(x);
        if (static_cast<int>(d.size()) != spec.base_dim())
            throw InvalidInput("fiber_metric_derivatives: analytic stack has wrong length");
        return d;
    }
    CoeffStack d(spec.base_dim());
    auto rho_at = [&](const Vec& y) { return spec.rho(y); };
    for (int i = 0; i < spec.base_dim(); ++i)
        d[i] = fd::partial_mat(rho_at, x, i, fd::scaled_step(spec.geometry_step, x[i]));
    return d;
}

CoeffStack mixed_connection(const ObservationSystemSpec& spec, const Vec& x)
{
    const Mat rho = spec.rho(x);
    const Mat rho_inv = spd_inverse(rho, "mixed_connection: fiber metric not positive definite");
    const CoeffStack drho = fiber_metric_derivatives(spec, x);

    // Gamma^a_{b,i} = (1/2) rho^{ac} d_i rho_{bc}; rho symmetric, so the
    // contraction is a plain matrix product.
    CoeffStack gamma(spec.base_dim());
    for (int i = 0; i < spec.base_dim(); ++i) gamma[i] = 0.5 * rho_inv * drho[i];
    return gamma;
}

CoeffStack mixed_connection_boundary_truncated(const ObservationSystemSpec& spec, const Vec& x,
                                               double eps)
{
    CoeffStack gamma = mixed_connection(spec, x);
    const double chi = cutoff_chi(spec.boundary_distance(x), eps);
    for (Mat& g : gamma) g *= chi;
    return gamma;
}

double metric_compat_residual(const ObservationSystemSpec& spec, const Vec& x)
{
    const Mat rho = spec.rho(x);
    const CoeffStack drho = fiber_metric_derivatives(spec, x);
    const Mat rho_inv = spd_inverse(rho, "metric_compat_residual: fiber metric not SPD");

    double residual = 0.0;
    for (int i = 0; i < spec.base_dim(); ++i) {
        const Mat gamma_i = 0.5 * rho_inv * drho[i];
        // nabla_i rho_ab = d_i rho_ab - Gamma^c_{a,i} rho_cb - Gamma^c_{b,i} rho_ac
        const Mat nabla = drho[i] - gamma_i.transpose() * rho - rho * gamma_i;
        residual = std::max(residual, nabla.cwiseAbs().maxCoeff());
    }
    return residual;
}

MixedCurvature mixed_curvature(const ObservationSystemSpec& spec, const Vec& x)
{
    const Mat rho = spec.rho(x);
    const Mat rho_inv = spd_inverse(rho, "mixed_curvature: fiber metric not SPD");
    const CoeffStack drho = fiber_metric_derivatives(spec, x);

    // d_i rho^{-1} = -rho^{-1} (d_i rho) rho^{-1}
    CoeffStack dinv(spec.base_dim());
    for (int i = 0; i < spec.base_dim(); ++i) dinv[i] = -rho_inv * drho[i] * rho_inv;

    MixedCurvature R;
    R.base_dim = spec.base_dim();
    R.fiber_dim = spec.k;
    R.comp.assign(static_cast<size_t>(R.base_dim) * R.base_dim, Mat::Zero(spec.k, spec.k));
    for (int i = 0; i < R.base_dim; ++i) {
        for (int j = i + 1; j < R.base_dim; ++j) {
            const Mat rij = 0.5 * (dinv[i] * drho[j] - dinv[j] * drho[i]);
            R(i, j) = rij;
            R(j, i) = -rij;
        }
    }
    return R;
}

ConnectionReport connection_report(const ObservationSystemSpec& spec, const Vec& x)
{
    ConnectionReport rep;
    rep.gamma = mixed_connection(spec, x);
    rep.compat_residual = metric_compat_residual(spec, x);
    rep.curvature = mixed_curvature(spec, x);
    return rep;
}

double cutoff_chi(double t, double eps)
{
    if (!(eps > 0.0)) throw InvalidInput("cutoff_chi: eps must be positive");
    if (t >= eps) return 1.0;
    if (t <= 0.5 * eps) return 0.0;
    return smooth01((t - 0.5 * eps) / (0.5 * eps));
}

double comm_cutoff(const Vec& p, const Vec& p_base, double R_comm)
{
    if (!(R_comm > 0.0)) throw InvalidInput("comm_cutoff: range must be positive");
    if (p.size() != p_base.size()) throw InvalidInput("comm_cutoff: dimension mismatch");
    const double r = (p - p_base).norm();
    if (r <= R_comm) return 1.0;
    const double u = (r - R_comm) / R_comm;
    const double eta = 1.0 - smooth01(u); // reversed bump: eta(0)=1, decreasing
    const double ratio = R_comm / r;
    return eta * ratio * ratio * ratio;
}

PropernessReport validate_properness(const ObservationSystemSpec& spec,
                                     const std::vector<BundleState>& samples,
                                     const PropernessConfig& cfg)
{
    if (samples.empty()) throw InsufficientSamples("validate_properness: no sample points");

    PropernessReport rep;
    rep.samples = static_cast<int>(samples.size());

    Vec ref = cfg.reference_x;
    if (ref.size() == 0) ref = Vec::Zero(spec.base_dim());
    if (ref.size() != spec.base_dim())
        throw InvalidInput("validate_properness: reference point has wrong dimension");

    std::vector<double> deltas(samples.size());
    std::vector<double> log_dist, log_delta;

    for (size_t s = 0; s < samples.size(); ++s) {
        const Vec& x = samples[s].x;
        if (x.size() != spec.base_dim())
            throw InvalidInput("validate_properness: sample has wrong base dimension");
        const double delta = spec.delta(x);
        if (!(delta > 0.0) || !std::isfinite(delta))
            throw InvalidInput("validate_properness: uncertainty must be positive and finite");
        deltas[s] = delta;
        rep.c1_sup_delta = std::max(rep.c1_sup_delta, delta);

        const double nrm = fiber_norm(spec, x, samples[s].xi);
        if (nrm >= cfg.r_min) {
            const double quotient = spec.phi(samples[s]) / (nrm * nrm);
            if (rep.c2_samples == 0 || quotient < rep.c2_min_quotient)
                rep.c2_min_quotient = quotient;
            ++rep.c2_samples;
        }

        log_dist.push_back(std::log1p((x - ref).norm()));
        log_delta.push_back(std::log(delta));
    }
    rep.c2_flag = rep.c2_samples > 0 && rep.c2_min_quotient < -cfg.alpha;

    // (C3) Lipschitz quotient over distinct base pairs.
    for (size_t a = 0; a < samples.size(); ++a) {
        for (size_t b = a + 1; b < samples.size(); ++b) {
            const double dist = (samples[a].x - samples[b].x).norm();
            if (dist < 1e-12) continue;
            const double quot = std::abs(deltas[a] - deltas[b]) / dist;
            if (!rep.c3_available || quot > rep.c3_lipschitz) rep.c3_lipschitz = quot;
            rep.c3_available = true;
        }
    }

    // (C4b) least-squares fit of log delta = c - beta * log(1 + d).
    const size_t m = log_dist.size();
    double mean_x = 0.0, mean_y = 0.0;
    for (size_t s = 0; s < m; ++s) {
        mean_x += log_dist[s];
        mean_y += log_delta[s];
    }
    mean_x /= static_cast<double>(m);
    mean_y /= static_cast<double>(m);
    double sxx = 0.0, sxy = 0.0;
    for (size_t s = 0; s < m; ++s) {
        sxx += (log_dist[s] - mean_x) * (log_dist[s] - mean_x);
        sxy += (log_dist[s] - mean_x) * (log_delta[s] - mean_y);
    }
    if (sxx > 1e-12) {
        rep.c4b_exponent = -sxy / sxx;
        rep.c4b_available = true;
    }
    return rep;
}

} // namespace obham::geometry
