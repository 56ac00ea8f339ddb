#pragma once

#include "obham/types.hpp"

namespace obham::fd {

/// Fourth-order central difference step sizes: step(coord) = scale*(1+|coord|).
inline double scaled_step(double scale, double coord) { return scale * (1.0 + std::abs(coord)); }

/// d/dx_i of a matrix-valued function of the base point, fourth order.
template <class F>
Mat partial_mat(F&& f, Vec x, int i, double h)
{
    const double xi = x[i];
    x[i] = xi + 2 * h;
    Mat fp2 = f(x);
    x[i] = xi + h;
    Mat fp1 = f(x);
    x[i] = xi - h;
    Mat fm1 = f(x);
    x[i] = xi - 2 * h;
    Mat fm2 = f(x);
    return (-fp2 + 8.0 * fp1 - 8.0 * fm1 + fm2) / (12.0 * h);
}

template <class F>
double partial_scalar(F&& f, Vec x, int i, double h)
{
    const double xi = x[i];
    x[i] = xi + 2 * h;
    const double fp2 = f(x);
    x[i] = xi + h;
    const double fp1 = f(x);
    x[i] = xi - h;
    const double fm1 = f(x);
    x[i] = xi - 2 * h;
    const double fm2 = f(x);
    return (-fp2 + 8.0 * fp1 - 8.0 * fm1 + fm2) / (12.0 * h);
}

/// Gradient of a scalar field over the flat coordinates (x, xi, pi) of a
/// bundle state. Uses the field's analytic gradient when present, otherwise
/// fourth-order central differences with per-coordinate scaled steps.
Vec field_gradient(const ScalarField& f, const BundleState& s, double step_scale);

} // namespace obham::fd
