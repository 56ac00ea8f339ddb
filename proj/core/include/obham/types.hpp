#pragma once

#include <Eigen/Dense>
#include <functional>
#include <limits>
#include <vector>

#include "obham/errors.hpp"

namespace obham {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Point of the total space: a base point x in R^{2n} together with the
/// observation-fiber coordinates xi and their conjugate momenta pi, both in
/// R^k. Flat coordinate order everywhere in this library is (x, xi, pi).
struct BundleState {
    double t = 0.0;
    Vec x;
    Vec xi;
    Vec pi;

    int base_dim() const { return static_cast<int>(x.size()); }
    int fiber_dim() const { return static_cast<int>(xi.size()); }
    int dim() const { return base_dim() + 2 * fiber_dim(); }

    Vec flat() const
    {
        Vec z(dim());
        z << x, xi, pi;
        return z;
    }

    static BundleState from_flat(const Vec& z, int base_dim, int fiber_dim, double t = 0.0)
    {
        if (z.size() != base_dim + 2 * fiber_dim)
            throw InvalidInput("BundleState::from_flat: coordinate vector has wrong length");
        BundleState s;
        s.t = t;
        s.x = z.head(base_dim);
        s.xi = z.segment(base_dim, fiber_dim);
        s.pi = z.tail(fiber_dim);
        return s;
    }
};

/// Scalar function on the total space. The gradient, when supplied, is taken
/// with respect to the flat coordinates (x, xi, pi); when absent, callers fall
/// back to fourth-order central differences.
struct ScalarField {
    std::function<double(const BundleState&)> value;
    std::function<Vec(const BundleState&)> gradient;

    explicit operator bool() const { return static_cast<bool>(value); }
};

/// Stack of k x k coefficient matrices indexed by a base direction i < 2n.
/// Used for the mixed connection Gamma^a_{b,i}, the fiber-metric derivatives
/// d_i rho, and the mixing structure coefficients C,D,E,F (entry (a,b) of
/// stack[i] is the coefficient with fiber indices a,b).
using CoeffStack = std::vector<Mat>;

/// Mixed curvature components R^a_{b,i,j}, stored densely over (i,j).
struct MixedCurvature {
    int base_dim = 0;
    int fiber_dim = 0;
    std::vector<Mat> comp; // row-major over (i,j)

    const Mat& operator()(int i, int j) const { return comp[static_cast<size_t>(i) * base_dim + j]; }
    Mat& operator()(int i, int j) { return comp[static_cast<size_t>(i) * base_dim + j]; }
};

/// Coupling between base and fiber directions in the symplectic assembly.
/// K and L are built from structure coefficients evaluated at x:
///   K_{ia} = C_{iab} xi_b + D_{iab} pi_b,  L_{ia} = E_{iab} xi_b + F_{iab} pi_b,
/// so both vanish on the zero section. Closedness of the assembled two-form
/// requires C and F symmetric in (a,b) and D_{iab} = E_{iba}.
struct MixingModel {
    enum class Mode { Zero, Curvature };
    using CoeffFn = std::function<CoeffStack(const Vec&)>;

    Mode mode = Mode::Zero;
    CoeffFn C, D, E, F; // optional; in Curvature mode a missing C is derived
                        // from the mixed curvature contracted with rho

    // When set, D, E, F are derived from C as D = E = omega_M * C, F = -C
    // (contraction over the base index). This is the completion under which
    // the tabulated bracket equals the exact inverse through first order; it
    // satisfies all closedness symmetries whenever C does.
    bool complete_compatible = false;

    static MixingModel zero() { return {}; }
    static MixingModel curvature()
    {
        MixingModel m;
        m.mode = Mode::Curvature;
        return m;
    }
};

/// Boundary degeneration of the symplectic assembly: all blocks are scaled by
/// s(d) = 1 - delta_max * exp(-d / eps0) where d is the distance to the
/// working-region boundary. delta_max = 0 disables degeneration.
struct BoundaryModel {
    std::function<double(const Vec&)> distance; // empty => +infinity
    double eps0 = 1.0;
    double delta_max = 0.0;
};

/// Everything needed to pose a constrained Hamiltonian problem on an
/// observation-induced bundle: base dimensions and structures, the fiber
/// metric rho(x) and uncertainty radius delta(x) bounding the fiber,
/// Hamiltonian and constraint fields, and the base/fiber coupling model.
///
/// Evaluator conventions: base vectors have length 2n; rho(x) is k x k SPD;
/// the constraint is feasible where it is >= 0. Optional members may be left
/// empty; accessors below substitute the documented defaults.
struct ObservationSystemSpec {
    int n = 0; // base dimension is 2n
    int k = 0; // fiber dimension

    std::function<Mat(const Vec&)> base_metric;          // default: identity
    std::function<Mat(const Vec&)> base_symplectic;      // default: Darboux
    std::function<Vec(const Vec&)> observation_map;      // h : R^{2n} -> R^k
    std::function<Mat(const Vec&)> observation_jacobian; // k x 2n
    std::function<Mat(const Vec&)> fiber_metric;         // rho(x)
    std::function<CoeffStack(const Vec&)> fiber_metric_dx; // optional analytic d_i rho
    std::function<double(const Vec&)> uncertainty;       // delta(x) > 0
    double delta_cap = std::numeric_limits<double>::infinity();

    ScalarField hamiltonian;
    ScalarField constraint; // empty => unconstrained (treated as identically 1)

    MixingModel mixing;
    BoundaryModel boundary;

    // Reserved hook for curved bases: user-supplied base Christoffel symbols
    // Gamma^k_{ij}(x), stack indexed by k. The fiber metric carries no base
    // indices, so metric compatibility is unaffected in adapted coordinates;
    // the hook is exposed for callers building their own covariant residuals.
    std::function<CoeffStack(const Vec&)> base_christoffel;

    double geometry_step = 1e-5; // FD scale for rho/delta derivatives
    double gradient_step = 1e-6; // FD scale for field gradients

    int base_dim() const { return 2 * n; }
    bool constrained() const { return static_cast<bool>(constraint.value); }

    Mat metric_base(const Vec& x) const
    {
        if (base_metric) return base_metric(x);
        return Mat::Identity(base_dim(), base_dim());
    }

    /// Darboux form when no evaluator is given: block [[0, I], [-I, 0]] over
    /// the (q, p) split of x.
    Mat omega_base(const Vec& x) const
    {
        if (base_symplectic) return base_symplectic(x);
        Mat J = Mat::Zero(base_dim(), base_dim());
        J.topRightCorner(n, n) = Mat::Identity(n, n);
        J.bottomLeftCorner(n, n) = -Mat::Identity(n, n);
        return J;
    }

    Mat rho(const Vec& x) const
    {
        if (!fiber_metric) throw InvalidInput("ObservationSystemSpec: fiber_metric not set");
        return fiber_metric(x);
    }

    double delta(const Vec& x) const
    {
        if (!uncertainty) throw InvalidInput("ObservationSystemSpec: uncertainty not set");
        return uncertainty(x);
    }

    double phi(const BundleState& s) const { return constrained() ? constraint.value(s) : 1.0; }

    double boundary_distance(const Vec& x) const
    {
        if (!boundary.distance) return std::numeric_limits<double>::infinity();
        return boundary.distance(x);
    }
};

/// Structural checks at a single base point; throws on violation. Verifies
/// rho SPD, omega_M antisymmetric and invertible, g_M SPD, full-rank
/// observation Jacobian, and delta in (0, delta_cap].
void validate_spec_at(const ObservationSystemSpec& spec, const Vec& x);

} // namespace obham
