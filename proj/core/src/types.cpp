#include "obham/types.hpp"

#include <Eigen/Eigenvalues>

namespace obham {

namespace {

bool symmetric_within(const Mat& m, double tol)
{
    return (m - m.transpose()).cwiseAbs().maxCoeff() <= tol;
}

} // namespace

void validate_spec_at(const ObservationSystemSpec& spec, const Vec& x)
{
    if (spec.n < 1 || spec.k < 1)
        throw InvalidInput("spec: need n >= 1 base pairs and k >= 1 fiber dimensions");
    if (x.size() != spec.base_dim()) throw InvalidInput("spec: base point has wrong dimension");

    const Mat g = spec.metric_base(x);
    if (g.rows() != spec.base_dim() || g.cols() != spec.base_dim())
        throw InvalidInput("spec: base metric has wrong shape");
    if (!symmetric_within(g, 1e-10 * (1.0 + g.cwiseAbs().maxCoeff())))
        throw SingularMetric("spec: base metric not symmetric");
    Eigen::LLT<Mat> gllt(g);
    if (gllt.info() != Eigen::Success) throw SingularMetric("spec: base metric not positive definite");

    const Mat w = spec.omega_base(x);
    if ((w + w.transpose()).cwiseAbs().maxCoeff() > 1e-10 * (1.0 + w.cwiseAbs().maxCoeff()))
        throw DegenerateStructure("spec: base symplectic form not antisymmetric");
    Eigen::FullPivLU<Mat> wlu(w);
    if (!wlu.isInvertible()) throw DegenerateStructure("spec: base symplectic form is singular");

    const Mat rho = spec.rho(x);
    if (rho.rows() != spec.k || rho.cols() != spec.k)
        throw InvalidInput("spec: fiber metric has wrong shape");
    if (!symmetric_within(rho, 1e-10 * (1.0 + rho.cwiseAbs().maxCoeff())))
        throw SingularMetric("spec: fiber metric not symmetric");
    Eigen::LLT<Mat> rllt(rho);
    if (rllt.info() != Eigen::Success)
        throw SingularMetric("spec: fiber metric not positive definite");

    if (spec.observation_jacobian) {
        const Mat dh = spec.observation_jacobian(x);
        if (dh.rows() != spec.k || dh.cols() != spec.base_dim())
            throw InvalidInput("spec: observation Jacobian has wrong shape");
        Eigen::JacobiSVD<Mat> svd(dh);
        const double smin = svd.singularValues().minCoeff();
        const double smax = svd.singularValues().maxCoeff();
        if (smax <= 0.0 || smin <= 1e-12 * smax)
            throw DegenerateStructure("spec: observation Jacobian is rank deficient");
    }

    const double d = spec.delta(x);
    if (!(d > 0.0) || !(d <= spec.delta_cap))
        throw InvalidInput("spec: uncertainty radius must lie in (0, delta_cap]");
}

} // namespace obham
