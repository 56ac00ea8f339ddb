#include "obham/fd.hpp"

namespace obham::fd {

Vec field_gradient(const ScalarField& f, const BundleState& s, double step_scale)
{
    if (!f.value) throw InvalidInput("field_gradient: field has no value evaluator");
    if (f.gradient) {
        Vec g = f.gradient(s);
        if (g.size() != s.dim())
            throw InvalidInput("field_gradient: analytic gradient has wrong length");
        return g;
    }
    const int nb = s.base_dim();
    const int kf = s.fiber_dim();
    Vec z = s.flat();
    Vec g(z.size());
    auto eval = [&](const Vec& zz) {
        BundleState st = BundleState::from_flat(zz, nb, kf, s.t);
        return f.value(st);
    };
    for (int i = 0; i < z.size(); ++i)
        g[i] = partial_scalar(eval, z, i, scaled_step(step_scale, z[i]));
    return g;
}

} // namespace obham::fd
