#include <benchmark/benchmark.h>

#include "obham/bundle_geometry.hpp"
#include "obham/integrator.hpp"
#include "obham/lax_toda.hpp"
#include "obham/poisson.hpp"
#include "obham/systems.hpp"

using namespace obham;

namespace {

ObservationSystemSpec curved_spec()
{
    ObservationSystemSpec spec;
    spec.n = 1;
    spec.k = 2;
    spec.fiber_metric = [](const Vec& x) {
        Mat rho(2, 2);
        const double c = 0.2 * std::sin(x[0] + x[1]);
        rho << 1.1 + 0.5 * std::sin(x[0]), c, c, 1.3 + 0.3 * std::cos(x[1]);
        return rho;
    };
    spec.uncertainty = [](const Vec& x) { return 0.8 + 0.3 / (1.0 + x.squaredNorm()); };
    spec.observation_map = [](const Vec& x) { return x; };
    spec.observation_jacobian = [](const Vec&) { return Mat::Identity(2, 2); };
    return spec;
}

void bm_mixed_connection(benchmark::State& state)
{
    const auto spec = curved_spec();
    Vec x(2);
    x << 0.3, -0.7;
    for (auto _ : state) {
        auto gamma = geometry::mixed_connection(spec, x);
        benchmark::DoNotOptimize(gamma);
    }
}
BENCHMARK(bm_mixed_connection);

void bm_bracket_matrix(benchmark::State& state)
{
    auto sys = systems::toda_chain();
    const auto backend =
        state.range(0) == 0 ? poisson::Backend::Tabulated : poisson::Backend::ExactInverse;
    for (auto _ : state) {
        Mat B = poisson::bracket_matrix(sys.spec, sys.initial, backend);
        benchmark::DoNotOptimize(B);
    }
}
BENCHMARK(bm_bracket_matrix)->Arg(0)->Arg(1);

void bm_step(benchmark::State& state)
{
    auto sys = systems::circle();
    integrate::IntegratorConfig cfg;
    cfg.adapt = false;
    cfg.compute_geo_error = false;
    cfg.reg.alpha = 0.0;
    for (auto _ : state) {
        double h = 1e-2;
        BundleState next = integrate::step(sys.spec, sys.initial, h, cfg);
        benchmark::DoNotOptimize(next);
    }
}
BENCHMARK(bm_step);

void bm_symmetric_spectrum(benchmark::State& state)
{
    const int n = static_cast<int>(state.range(0));
    Vec q(n), p(n);
    for (int i = 0; i < n; ++i) {
        q[i] = 0.5 * std::cos(1.0 + i);
        p[i] = 0.3 * std::sin(2.0 + i);
    }
    const Mat L = toda::flaschka_lax(q, p);
    for (auto _ : state) {
        Vec spectrum = toda::symmetric_spectrum(L);
        benchmark::DoNotOptimize(spectrum);
    }
}
BENCHMARK(bm_symmetric_spectrum)->Arg(4)->Arg(16)->Arg(64);

} // namespace

int main(int argc, char** argv)
{
    benchmark::Initialize(&argc, argv);
    if (benchmark::ReportUnrecognizedArguments(argc, argv)) return 1;
    benchmark::RunSpecifiedBenchmarks();
    return 0;
}
