#include "obham/poisson.hpp"

#include <cmath>

#include "obham/bundle_geometry.hpp"
#include "obham/fd.hpp"

namespace obham::poisson {

namespace {

CoeffStack eval_stack(const MixingModel::CoeffFn& fn, const Vec& x, int base_dim, int k,
                      const char* name)
{
    CoeffStack stack = fn(x);
    if (static_cast<int>(stack.size()) != base_dim)
        throw InvalidInput(std::string("mixing_KL: coefficient stack ") + name +
                           " has wrong length");
    for (const Mat& m : stack)
        if (m.rows() != k || m.cols() != k)
            throw InvalidInput(std::string("mixing_KL: coefficient block ") + name +
                               " has wrong shape");
    return stack;
}

// C derived from the mixed curvature: contract the free base index, then
// symmetrize against rho so the closedness condition holds by construction.
CoeffStack curvature_C(const ObservationSystemSpec& spec, const Vec& x)
{
    const MixedCurvature R = geometry::mixed_curvature(spec, x);
    const Mat rho = spec.rho(x);
    CoeffStack C(spec.base_dim());
    for (int i = 0; i < spec.base_dim(); ++i) {
        Mat S = Mat::Zero(spec.k, spec.k);
        for (int j = 0; j < spec.base_dim(); ++j) S += R(i, j);
        const Mat rs = rho * S;
        C[i] = 0.5 * (rs + rs.transpose());
    }
    return C;
}

CoeffStack contract_base(const Mat& omega, const CoeffStack& C)
{
    const int d = static_cast<int>(C.size());
    CoeffStack out(d);
    for (int i = 0; i < d; ++i) {
        Mat acc = Mat::Zero(C[0].rows(), C[0].cols());
        for (int j = 0; j < d; ++j)
            if (omega(i, j) != 0.0) acc += omega(i, j) * C[j];
        out[i] = acc;
    }
    return out;
}

} // namespace

double boundary_scale(double d, double eps0, double delta_max)
{
    if (!(eps0 > 0.0)) throw DomainError("boundary_scale: eps0 must be positive");
    if (delta_max < 0.0 || delta_max >= 1.0)
        throw DomainError("boundary_scale: delta_max must lie in [0,1)");
    if (d < 0.0) throw DomainError("boundary_scale: negative boundary distance");
    if (delta_max == 0.0) return 1.0;
    return 1.0 - delta_max * std::exp(-d / eps0);
}

Mixing mixing_KL(const ObservationSystemSpec& spec, const BundleState& s)
{
    Mixing m;
    m.K = Mat::Zero(spec.base_dim(), spec.k);
    m.L = Mat::Zero(spec.base_dim(), spec.k);
    if (spec.mixing.mode == MixingModel::Mode::Zero) return m;

    CoeffStack C = spec.mixing.C ? eval_stack(spec.mixing.C, s.x, spec.base_dim(), spec.k, "C")
                                 : curvature_C(spec, s.x);

    CoeffStack D, E, F;
    if (spec.mixing.complete_compatible) {
        const Mat omega = spec.omega_base(s.x);
        D = contract_base(omega, C);
        E = D;
        F.resize(C.size());
        for (size_t i = 0; i < C.size(); ++i) F[i] = -C[i];
    } else {
        auto or_zero = [&](const MixingModel::CoeffFn& fn, const char* name) {
            if (fn) return eval_stack(fn, s.x, spec.base_dim(), spec.k, name);
            return CoeffStack(spec.base_dim(), Mat::Zero(spec.k, spec.k));
        };
        D = or_zero(spec.mixing.D, "D");
        E = or_zero(spec.mixing.E, "E");
        F = or_zero(spec.mixing.F, "F");
    }

    for (int i = 0; i < spec.base_dim(); ++i) {
        m.K.row(i) = (C[i] * s.xi + D[i] * s.pi).transpose();
        m.L.row(i) = (E[i] * s.xi + F[i] * s.pi).transpose();
    }
    return m;
}

Mat assemble_omega(const ObservationSystemSpec& spec, const BundleState& s)
{
    const int d2n = spec.base_dim();
    const int k = spec.k;
    const int dim = d2n + 2 * k;

    const double dist = spec.boundary_distance(s.x);
    const double scale = boundary_scale(dist, spec.boundary.eps0, spec.boundary.delta_max);

    Mat omega_m = spec.omega_base(s.x);
    if (omega_m.rows() != d2n || omega_m.cols() != d2n)
        throw InvalidInput("assemble_omega: base form has wrong shape");
    omega_m = 0.5 * (omega_m - omega_m.transpose()); // exactness of antisymmetry
    Eigen::FullPivLU<Mat> lu(omega_m);
    if (!lu.isInvertible()) throw DegenerateStructure("assemble_omega: base form is singular");

    const Mixing mix = mixing_KL(spec, s);

    Mat W = Mat::Zero(dim, dim);
    W.topLeftCorner(d2n, d2n) = omega_m;
    W.block(0, d2n, d2n, k) = mix.K;
    W.block(0, d2n + k, d2n, k) = mix.L;
    W.block(d2n, 0, k, d2n) = -mix.K.transpose();
    W.block(d2n + k, 0, k, d2n) = -mix.L.transpose();
    W.block(d2n, d2n + k, k, k) = Mat::Identity(k, k);
    W.block(d2n + k, d2n, k, k) = -Mat::Identity(k, k);
    return scale * W;
}

Mat bracket_matrix(const ObservationSystemSpec& spec, const BundleState& s, Backend backend)
{
    const int d2n = spec.base_dim();
    const int k = spec.k;
    const int dim = d2n + 2 * k;

    if (backend == Backend::ExactInverse) {
        const Mat W = assemble_omega(spec, s);
        Eigen::FullPivLU<Mat> lu(W);
        if (!lu.isInvertible())
            throw DegenerateStructure("bracket_matrix: assembled form is singular");
        Mat B = -lu.inverse();
        return 0.5 * (B - B.transpose()); // inversion roundoff breaks antisymmetry
    }

    const double dist = spec.boundary_distance(s.x);
    const double scale = boundary_scale(dist, spec.boundary.eps0, spec.boundary.delta_max);

    Mat omega_m = spec.omega_base(s.x);
    omega_m = 0.5 * (omega_m - omega_m.transpose());
    Eigen::FullPivLU<Mat> lu(omega_m);
    if (!lu.isInvertible()) throw DegenerateStructure("bracket_matrix: base form is singular");
    Mat base_inv = lu.inverse();

    const Mixing mix = mixing_KL(spec, s);

    // Tabulated coordinate brackets: {x,x} from the inverse base form, the
    // coupling coefficients verbatim in the conjugate slots, canonical fiber
    // pairing. Equals -omega_E^{-1} through first order in (K, L) when
    // L = omega_M K.
    Mat B = Mat::Zero(dim, dim);
    B.topLeftCorner(d2n, d2n) = -base_inv;
    B.block(0, d2n, d2n, k) = mix.K;
    B.block(0, d2n + k, d2n, k) = mix.L;
    B.block(d2n, 0, k, d2n) = -mix.K.transpose();
    B.block(d2n + k, 0, k, d2n) = -mix.L.transpose();
    B.block(d2n, d2n + k, k, k) = Mat::Identity(k, k);
    B.block(d2n + k, d2n, k, k) = -Mat::Identity(k, k);
    B = 0.5 * (B - B.transpose());
    return B / scale;
}

double poisson_bracket(const ObservationSystemSpec& spec, const BundleState& s,
                       const ScalarField& F, const ScalarField& G, Backend backend)
{
    if (!F || !G) throw InvalidInput("poisson_bracket: field evaluator missing");
    const Vec gf = fd::field_gradient(F, s, spec.gradient_step);
    const Vec gg = fd::field_gradient(G, s, spec.gradient_step);
    const Mat B = bracket_matrix(spec, s, backend);
    return gf.dot(B * gg);
}

BundleGradient grad_E(const ObservationSystemSpec& spec, const BundleState& s,
                      const ScalarField& F)
{
    if (!F) throw InvalidInput("grad_E: field evaluator missing");
    const Vec g = fd::field_gradient(F, s, spec.gradient_step);
    const int d2n = spec.base_dim();
    const int k = spec.k;

    BundleGradient out;
    const Mat gm = spec.metric_base(s.x);
    Eigen::LLT<Mat> llt_g(gm);
    if (llt_g.info() != Eigen::Success) throw SingularMetric("grad_E: base metric not SPD");
    out.x = llt_g.solve(g.head(d2n));

    const Mat rho = spec.rho(s.x);
    Eigen::LLT<Mat> llt_r(rho);
    if (llt_r.info() != Eigen::Success) throw SingularMetric("grad_E: fiber metric not SPD");
    out.xi = llt_r.solve(g.segment(d2n, k));

    out.pi = g.tail(k);
    return out;
}

double grad_norm_sq(const ObservationSystemSpec& spec, const BundleState& s,
                    const ScalarField& F)
{
    if (!F) throw InvalidInput("grad_norm_sq: field evaluator missing");
    const Vec g = fd::field_gradient(F, s, spec.gradient_step);
    const BundleGradient raised = grad_E(spec, s, F);
    const double nsq = g.head(spec.base_dim()).dot(raised.x) +
                       g.segment(spec.base_dim(), spec.k).dot(raised.xi) +
                       g.tail(spec.k).dot(raised.pi);
    return std::max(0.0, nsq);
}

Vec field_flow(const ObservationSystemSpec& spec, const BundleState& s, const ScalarField& F,
               Backend backend)
{
    if (!F) throw InvalidInput("field_flow: field evaluator missing");
    const Vec g = fd::field_gradient(F, s, spec.gradient_step);
    return bracket_matrix(spec, s, backend) * g;
}

Vec hamiltonian_vector_field(const ObservationSystemSpec& spec, const BundleState& s,
                             Backend backend)
{
    if (!spec.hamiltonian) throw InvalidInput("hamiltonian_vector_field: no Hamiltonian");
    return field_flow(spec, s, spec.hamiltonian, backend);
}

} // namespace obham::poisson
