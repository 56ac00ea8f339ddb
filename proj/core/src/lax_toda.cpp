#include "obham/lax_toda.hpp"

#include <cmath>

namespace obham::toda {

void TodaParams::validate() const
{
    if (n < 2) throw InvalidInput("TodaParams: need at least two particles");
    if (!(delta0 > 0.0)) throw InvalidInput("TodaParams: delta0 must be positive");
    if (!(alpha_noise > 0.0)) throw InvalidInput("TodaParams: alpha_noise must be positive");
    if (beta_weight < 0.0) throw InvalidInput("TodaParams: beta_weight must be >= 0");
    if (kappa < 0.0) throw InvalidInput("TodaParams: kappa must be >= 0");
    if (!(alpha_momentum > 0.0)) throw InvalidInput("TodaParams: alpha_momentum must be positive");
}

Vec TodaParams::weights() const
{
    Vec w(n - 1);
    for (int i = 1; i <= n - 1; ++i)
        w[i - 1] = std::exp(-beta_weight * std::abs(i - 0.5 * n));
    return w;
}

void toda_rhs(const Vec& q, const Vec& p, Vec& qdot, Vec& pdot)
{
    const int n = static_cast<int>(q.size());
    if (n < 1 || p.size() != n) throw InvalidInput("toda_rhs: bad chain dimensions");
    qdot = p;
    pdot = Vec::Zero(n);
    for (int i = 0; i < n - 1; ++i) {
        const double f = std::exp(q[i] - q[i + 1]);
        pdot[i] -= f;
        pdot[i + 1] += f;
    }
}

namespace {

double delta_of_eps(const Vec& eps, const TodaParams& params)
{
    return params.delta0 * std::sqrt(1.0 + params.alpha_noise * eps.squaredNorm());
}

double delta_dot_of_eps(const Vec& eps, const Vec& eps_dot, const TodaParams& params)
{
    const double root = std::sqrt(1.0 + params.alpha_noise * eps.squaredNorm());
    return params.delta0 * params.alpha_noise * eps.dot(eps_dot) / root;
}

} // namespace

LaxPair build_lax(const Vec& q, const Vec& p, const Vec& eps, const TodaParams& params,
                  const Vec* eps_dot)
{
    params.validate();
    const int n = params.n;
    if (q.size() != n || p.size() != n || eps.size() != n - 1)
        throw InvalidInput("build_lax: state dimensions do not match the parameter set");

    LaxPair pair;
    pair.L0 = Mat::Zero(n, n);
    pair.A0 = Mat::Zero(n, n);
    for (int i = 0; i < n; ++i) pair.L0(i, i) = p[i];
    for (int i = 0; i < n - 1; ++i) {
        const double a = std::exp(q[i] - q[i + 1] + eps[i]);
        pair.L0(i, i + 1) = a;
        pair.L0(i + 1, i) = a;
        pair.A0(i, i + 1) = a;
        pair.A0(i + 1, i) = -a;
    }

    pair.L1 = delta_of_eps(eps, params) * Mat::Identity(n, n);
    if (eps_dot) {
        if (eps_dot->size() != n - 1) throw InvalidInput("build_lax: eps_dot has wrong length");
        pair.A1 = delta_dot_of_eps(eps, *eps_dot, params) * Mat::Identity(n, n);
    } else {
        pair.A1 = Mat::Zero(n, n);
    }
    return pair;
}

Vec epsilon_evolution(const Vec& p, bool flip_eps_sign)
{
    const int n = static_cast<int>(p.size());
    Vec ed(std::max(0, n - 1));
    for (int i = 0; i < n - 1; ++i)
        ed[i] = flip_eps_sign ? 2.0 * (p[i] - p[i + 1]) : 2.0 * (p[i + 1] - p[i]);
    return ed;
}

double epsilon_crit(const Vec& p, const TodaParams& params)
{
    params.validate();
    if (p.size() < 2) throw InvalidInput("epsilon_crit: need at least two momenta");
    double min_gap = std::numeric_limits<double>::infinity();
    for (int i = 0; i + 1 < p.size(); ++i)
        min_gap = std::min(min_gap, std::abs(p[i] - p[i + 1]));
    return min_gap / (2.0 * params.alpha_noise * params.delta0);
}

Mat zero_curvature_matrix(const Vec& q, const Vec& p, const Vec& eps, double lambda,
                          const TodaParams& params, bool flip_eps_sign)
{
    const Vec eps_dot = epsilon_evolution(p, flip_eps_sign);
    const LaxPair pair = build_lax(q, p, eps, params, &eps_dot);
    const int n = params.n;

    Vec qdot, pdot;
    toda_rhs(q, p, qdot, pdot);

    Mat dL = Mat::Zero(n, n);
    for (int i = 0; i < n; ++i) dL(i, i) = pdot[i];
    for (int i = 0; i < n - 1; ++i) {
        // d/dt exp(y_i + eps_i) with y_i = q_i - q_{i+1}
        const double rate = (p[i] - p[i + 1]) + eps_dot[i];
        const double da = pair.L0(i, i + 1) * rate;
        dL(i, i + 1) = da;
        dL(i + 1, i) = da;
    }
    dL += lambda * delta_dot_of_eps(eps, eps_dot, params) * Mat::Identity(n, n);

    const Mat A = pair.A(lambda);
    const Mat L = pair.L(lambda);
    return dL - (A * L - L * A);
}

double zero_curvature_residual(const Vec& q, const Vec& p, const Vec& eps, double lambda,
                               const TodaParams& params, bool flip_eps_sign)
{
    return zero_curvature_matrix(q, p, eps, lambda, params, flip_eps_sign).norm();
}

Vec symmetric_spectrum(const Mat& M)
{
    if (M.rows() != M.cols()) throw InvalidInput("symmetric_spectrum: matrix not square");
    const double scale = M.norm();
    if ((M - M.transpose()).norm() > 1e-10 * std::max(scale, 1e-300))
        throw InvalidInput("symmetric_spectrum: matrix is not symmetric");
    Eigen::SelfAdjointEigenSolver<Mat> solver(0.5 * (M + M.transpose()));
    if (solver.info() != Eigen::Success)
        throw DegenerateStructure("symmetric_spectrum: eigensolver failed");
    return solver.eigenvalues();
}

Mat flaschka_lax(const Vec& q, const Vec& p)
{
    const int n = static_cast<int>(q.size());
    if (n < 1 || p.size() != n) throw InvalidInput("flaschka_lax: bad chain dimensions");
    Mat L = Mat::Zero(n, n);
    for (int i = 0; i < n; ++i) L(i, i) = 0.5 * p[i];
    for (int i = 0; i < n - 1; ++i) {
        const double a = 0.5 * std::exp(0.5 * (q[i] - q[i + 1]));
        L(i, i + 1) = a;
        L(i + 1, i) = a;
    }
    return L;
}

void reference_flow(Vec& q, Vec& p, Vec* eps, double t_final, double dt, bool flip_eps_sign)
{
    const int n = static_cast<int>(q.size());
    if (p.size() != n) throw InvalidInput("reference_flow: bad chain dimensions");
    if (eps && eps->size() != std::max(0, n - 1))
        throw InvalidInput("reference_flow: eps has wrong length");
    if (!(dt > 0.0)) throw InvalidInput("reference_flow: dt must be positive");
    if (t_final < 0.0) throw InvalidInput("reference_flow: t_final must be nonnegative");

    struct Deriv {
        Vec qd, pd, ed;
    };
    auto deriv = [&](const Vec& qq, const Vec& pp) {
        Deriv d;
        toda_rhs(qq, pp, d.qd, d.pd);
        d.ed = epsilon_evolution(pp, flip_eps_sign);
        return d;
    };

    double t = 0.0;
    while (t < t_final - 1e-15 * std::max(1.0, t_final)) {
        const double h = std::min(dt, t_final - t);
        const Deriv k1 = deriv(q, p);
        const Deriv k2 = deriv(q + 0.5 * h * k1.qd, p + 0.5 * h * k1.pd);
        const Deriv k3 = deriv(q + 0.5 * h * k2.qd, p + 0.5 * h * k2.pd);
        const Deriv k4 = deriv(q + h * k3.qd, p + h * k3.pd);
        q += (h / 6.0) * (k1.qd + 2.0 * k2.qd + 2.0 * k3.qd + k4.qd);
        p += (h / 6.0) * (k1.pd + 2.0 * k2.pd + 2.0 * k3.pd + k4.pd);
        if (eps) *eps += (h / 6.0) * (k1.ed + 2.0 * k2.ed + 2.0 * k3.ed + k4.ed);
        t += h;
    }
}

ObservationSystemSpec toda_system_spec(const TodaParams& params)
{
    params.validate();
    const int n = params.n;
    const int k = n - 1;
    const double m_eff = params.m_eff();
    const double kappa = params.kappa;
    const double d0 = params.delta0;
    const double am = params.alpha_momentum;
    const Vec w = params.weights();

    ObservationSystemSpec spec;
    spec.n = n;
    spec.k = k;

    spec.observation_map = [k](const Vec& x) {
        Vec y(k);
        for (int i = 0; i < k; ++i) y[i] = x[i] - x[i + 1];
        return y;
    };
    spec.observation_jacobian = [n, k](const Vec&) {
        Mat J = Mat::Zero(k, 2 * n);
        for (int i = 0; i < k; ++i) {
            J(i, i) = 1.0;
            J(i, i + 1) = -1.0;
        }
        return J;
    };
    spec.fiber_metric = [k](const Vec&) { return Mat::Identity(k, k); };
    spec.fiber_metric_dx = [n, k](const Vec&) {
        return CoeffStack(2 * n, Mat::Zero(k, k));
    };
    spec.uncertainty = [d0](const Vec&) { return d0; };

    spec.hamiltonian.value = [n, m_eff, kappa](const BundleState& s) {
        double H = 0.5 * s.x.tail(n).squaredNorm();
        for (int i = 0; i < n - 1; ++i) H += std::exp(s.x[i] - s.x[i + 1]);
        H += 0.5 * (s.pi.squaredNorm() / m_eff + kappa * s.xi.squaredNorm());
        return H;
    };
    spec.hamiltonian.gradient = [n, k, m_eff, kappa](const BundleState& s) {
        Vec g = Vec::Zero(s.dim());
        for (int i = 0; i < n - 1; ++i) {
            const double f = std::exp(s.x[i] - s.x[i + 1]);
            g[i] += f;
            g[i + 1] -= f;
        }
        g.segment(n, n) = s.x.tail(n);
        g.segment(2 * n, k) = kappa * s.xi;
        g.tail(k) = s.pi / m_eff;
        return g;
    };

    spec.constraint.value = [k, w, d0, am](const BundleState& s) {
        double acc = 0.0;
        for (int a = 0; a < k; ++a)
            acc += w[a] * (s.xi[a] * s.xi[a] / (d0 * d0) +
                           s.pi[a] * s.pi[a] / (2.0 * am * d0 * d0));
        return 1.0 - acc;
    };
    spec.constraint.gradient = [k, w, d0, am](const BundleState& s) {
        Vec g = Vec::Zero(s.dim());
        const int base = s.base_dim();
        for (int a = 0; a < k; ++a) {
            g[base + a] = -2.0 * w[a] * s.xi[a] / (d0 * d0);
            g[base + k + a] = -w[a] * s.pi[a] / (am * d0 * d0);
        }
        return g;
    };
    return spec;
}

} // namespace obham::toda
