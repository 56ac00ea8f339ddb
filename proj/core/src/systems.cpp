#include "obham/systems.hpp"

#include <cmath>

namespace obham::systems {

namespace {

void install_scalar_bundle(ObservationSystemSpec& spec, double delta)
{
    spec.n = 1;
    spec.k = 1;
    spec.observation_map = [](const Vec& x) { return Vec::Constant(1, x[0]); };
    spec.observation_jacobian = [](const Vec&) {
        Mat J = Mat::Zero(1, 2);
        J(0, 0) = 1.0;
        return J;
    };
    spec.fiber_metric = [](const Vec&) { return Mat::Identity(1, 1); };
    spec.fiber_metric_dx = [](const Vec&) { return CoeffStack(2, Mat::Zero(1, 1)); };
    spec.uncertainty = [delta](const Vec&) { return delta; };
}

} // namespace

SystemBundle oscillator(const OscillatorOptions& opt)
{
    if (opt.spring < 0.0) throw InvalidInput("oscillator: spring must be >= 0");
    if (opt.kappa_fiber < 0.0) throw InvalidInput("oscillator: kappa_fiber must be >= 0");
    if (!(opt.delta > 0.0)) throw InvalidInput("oscillator: delta must be positive");

    SystemBundle sys;
    install_scalar_bundle(sys.spec, opt.delta);

    const double spring = opt.spring;
    const double kappa = opt.kappa_fiber;
    sys.spec.hamiltonian.value = [spring, kappa](const BundleState& s) {
        return 0.5 * (s.x[1] * s.x[1] + spring * s.x[0] * s.x[0]) +
               0.5 * (s.pi[0] * s.pi[0] + kappa * s.xi[0] * s.xi[0]);
    };
    sys.spec.hamiltonian.gradient = [spring, kappa](const BundleState& s) {
        Vec g(4);
        g << spring * s.x[0], s.x[1], kappa * s.xi[0], s.pi[0];
        return g;
    };

    if (opt.position_constraint) {
        sys.spec.constraint.value = [](const BundleState& s) { return s.x[0]; };
        sys.spec.constraint.gradient = [](const BundleState& s) {
            Vec g = Vec::Zero(s.dim());
            g[0] = 1.0;
            return g;
        };
        sys.surface_sample = [](int i) {
            BundleState s;
            s.x = Vec::Zero(2);
            s.x[1] = 1.0 + 0.5 * std::sin(0.9 * i + 0.3); // q = 0, p away from rest
            s.xi = Vec::Zero(1);
            s.pi = Vec::Zero(1);
            return s;
        };
    }

    sys.initial.x = Vec(2);
    sys.initial.x << opt.q0, opt.p0;
    sys.initial.xi = Vec::Constant(1, opt.xi0);
    sys.initial.pi = Vec::Constant(1, opt.pi0);
    return sys;
}

SystemBundle circle(const CircleOptions& opt)
{
    if (!(opt.level > 0.0)) throw InvalidInput("circle: level must be positive");

    SystemBundle sys;
    install_scalar_bundle(sys.spec, 1.0);

    sys.spec.hamiltonian.value = [](const BundleState& s) {
        return 0.5 * (s.x[0] * s.x[0] + s.x[1] * s.x[1]);
    };
    sys.spec.hamiltonian.gradient = [](const BundleState& s) {
        Vec g = Vec::Zero(4);
        g[0] = s.x[0];
        g[1] = s.x[1];
        return g;
    };

    const double level = opt.level;
    sys.spec.constraint.value = [level](const BundleState& s) {
        return level - 0.5 * (s.x[0] * s.x[0] + s.x[1] * s.x[1]);
    };
    sys.spec.constraint.gradient = [](const BundleState& s) {
        Vec g = Vec::Zero(4);
        g[0] = -s.x[0];
        g[1] = -s.x[1];
        return g;
    };

    const double r = std::sqrt(2.0 * level);
    sys.surface_sample = [r](int i) {
        const double theta = 0.1 + 2.39996322972865332 * i; // golden-angle sweep
        BundleState s;
        s.x = Vec(2);
        s.x << r * std::cos(theta), r * std::sin(theta);
        s.xi = Vec::Constant(1, 0.3 * std::sin(0.7 * i + 0.2));
        s.pi = Vec::Constant(1, 0.3 * std::cos(1.3 * i + 0.5));
        return s;
    };

    sys.initial.x = Vec(2);
    sys.initial.x << opt.q0, opt.p0;
    sys.initial.xi = Vec::Zero(1);
    sys.initial.pi = Vec::Zero(1);
    return sys;
}

SystemBundle toda_chain(const TodaOptions& opt)
{
    opt.params.validate();
    const int n = opt.params.n;
    const int k = n - 1;

    SystemBundle sys;
    sys.spec = toda::toda_system_spec(opt.params);
    if (!opt.ellipsoid_constraint) sys.spec.constraint = {};

    Vec q0 = opt.q0, p0 = opt.p0;
    if (q0.size() == 0) {
        q0 = Vec(n);
        for (int i = 0; i < n; ++i) q0[i] = 0.5 * (1.0 - 2.0 * i / (n - 1.0));
    }
    if (p0.size() == 0) p0 = 0.8 * q0;
    if (q0.size() != n || p0.size() != n)
        throw InvalidInput("toda_chain: initial arrays must have one entry per particle");

    sys.initial.x = Vec(2 * n);
    sys.initial.x << q0, p0;
    sys.initial.xi = Vec::Constant(k, opt.xi0_scale * opt.params.delta0);
    sys.initial.pi = Vec::Zero(k);

    if (opt.ellipsoid_constraint) {
        const Vec w = opt.params.weights();
        const double d0 = opt.params.delta0;
        const double am = opt.params.alpha_momentum;
        sys.surface_sample = [n, k, w, d0, am](int i) {
            BundleState s;
            s.x = Vec(2 * n);
            for (int j = 0; j < n; ++j) {
                s.x[j] = 0.3 * std::sin(0.5 * i + j);
                s.x[n + j] = 0.2 * std::cos(0.8 * i + 2.0 * j);
            }
            // one loaded bond, mixed between position and momentum channels so
            // the weighted quadratic lands exactly on 1
            const int a = i % k;
            const double theta = 0.7 * i + 0.4;
            s.xi = Vec::Zero(k);
            s.pi = Vec::Zero(k);
            s.xi[a] = d0 * std::cos(theta) / std::sqrt(w[a]);
            s.pi[a] = d0 * std::sqrt(2.0 * am) * std::sin(theta) / std::sqrt(w[a]);
            return s;
        };
    }
    return sys;
}

} // namespace obham::systems
