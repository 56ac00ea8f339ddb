#pragma once

#include "obham/types.hpp"

// Symplectic assembly on the total space and the induced Poisson calculus.
//
// Coordinate order (x, xi, pi). The assembled two-form is
//   omega_E = s(d) * [ pi^* omega_M + sum_a dxi_a ^ dpi_a
//                      + K_{ia} dx^i ^ dxi_a + L_{ia} dx^i ^ dpi_a ]
// with s the boundary degeneration factor and K, L from the mixing model.
//
// Sign conventions, fixed once: {q, p} = +1 on a Darboux base, {xi_a, pi_b} =
// delta_ab, and the flow of H is zdot = B grad H with B the bracket matrix,
// so qdot = dH/dp. Equivalently B = -omega_E^{-1}.
//
// Two bracket backends ship. Tabulated fills the tabulated coordinate
// brackets directly ({x,x} from the inverse base form, {x,xi} = K, {x,pi} =
// L). ExactInverse numerically inverts the assembled omega_E. They agree to
// machine precision at zero mixing. With mixing on, the table is the
// first-order truncation of the exact inverse only when L = omega_M K
// entrywise over the base index (see MixingModel::complete_compatible);
// otherwise they differ at first order in the coupling.

namespace obham::poisson {

enum class Backend { Tabulated, ExactInverse };

/// Degeneration factor s(d) = 1 - delta_max * exp(-d/eps0). Requires
/// eps0 > 0, delta_max in [0,1), d >= 0 (DomainError otherwise).
double boundary_scale(double d, double eps0, double delta_max);

struct Mixing {
    Mat K; // 2n x k
    Mat L; // 2n x k
};

/// Evaluates the mixing blocks at a state. Zero mode returns zeros; curvature
/// mode contracts the mixed curvature with rho for C (unless explicit
/// evaluators are installed) and applies the model's D, E, F.
Mixing mixing_KL(const ObservationSystemSpec& spec, const BundleState& s);

/// The matrix of omega_E at a state, dimension (2n+2k)^2, exactly
/// antisymmetric. Throws DomainError for negative boundary distance and
/// DegenerateStructure when omega_M is singular.
Mat assemble_omega(const ObservationSystemSpec& spec, const BundleState& s);

/// Bracket matrix B with B_ij = {z_i, z_j}. See the backend notes above.
Mat bracket_matrix(const ObservationSystemSpec& spec, const BundleState& s,
                   Backend backend = Backend::Tabulated);

/// {F, G}(s) = grad F^T B grad G, gradients analytic when supplied, else
/// fourth-order central differences with step gradient_step*(1+|coord|).
double poisson_bracket(const ObservationSystemSpec& spec, const BundleState& s,
                       const ScalarField& F, const ScalarField& G,
                       Backend backend = Backend::Tabulated);

/// Metric-raised gradient on the bundle: (g_M^{-1} d_x F, rho^{-1} d_xi F, d_pi F).
struct BundleGradient {
    Vec x;
    Vec xi;
    Vec pi;

    Vec flat() const
    {
        Vec z(x.size() + xi.size() + pi.size());
        z << x, xi, pi;
        return z;
    }
};

BundleGradient grad_E(const ObservationSystemSpec& spec, const BundleState& s,
                      const ScalarField& F);

/// ||grad_E F||^2 = d_xF^T g^{-1} d_xF + d_xiF^T rho^{-1} d_xiF + ||d_piF||^2.
/// Nonnegative by construction.
double grad_norm_sq(const ObservationSystemSpec& spec, const BundleState& s,
                    const ScalarField& F);

/// B grad F: the Hamiltonian vector field of F in flat coordinates.
Vec field_flow(const ObservationSystemSpec& spec, const BundleState& s, const ScalarField& F,
               Backend backend = Backend::Tabulated);

/// Flow of the system's Hamiltonian.
Vec hamiltonian_vector_field(const ObservationSystemSpec& spec, const BundleState& s,
                             Backend backend = Backend::Tabulated);

} // namespace obham::poisson
