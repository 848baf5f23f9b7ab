#include <benchmark/benchmark.h>

#include "aniso/anisotropic_norms.hpp"
#include "aniso/convex_body.hpp"
#include "aniso/fields.hpp"
#include "aniso/nonlocal_functionals.hpp"
#include "aniso/random.hpp"

using namespace aniso;

namespace {

std::vector<RVec> random_points(int dim, std::size_t count) {
    Rng rng = make_rng(1, "bench-points");
    std::vector<RVec> pts;
    for (std::size_t i = 0; i < count; ++i) {
        RVec x(dim);
        for (int j = 0; j < dim; ++j) x[j] = standard_normal(rng);
        pts.push_back(x);
    }
    return pts;
}

void BM_Gauge(benchmark::State& state, ConvexBody body) {
    const auto pts = random_points(body.dimension(), 1024);
    for (auto _ : state) {
        double s = 0.0;
        for (const RVec& x : pts) s += body.gauge(x);
        benchmark::DoNotOptimize(s);
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(pts.size()));
}
BENCHMARK_CAPTURE(BM_Gauge, ball2, ConvexBody::ball(2));
BENCHMARK_CAPTURE(BM_Gauge, ellipse2, ConvexBody::ellipsoid_axes({2.0, 1.0}));
BENCHMARK_CAPTURE(BM_Gauge, hexagon, ConvexBody::regular_polygon(6));
BENCHMARK_CAPTURE(BM_Gauge, cube3, ConvexBody::cube(3));

void BM_MomentNormSphere(benchmark::State& state) {
    const MomentNormEvaluator eval(ConvexBody::cube(2), 1.0, SphereQuadrature{static_cast<int>(state.range(0))});
    const CVec v = to_complex(RVec{0.3, -1.2}, RVec{0.7, 0.1});
    for (auto _ : state) benchmark::DoNotOptimize(eval.evaluate(v));
}
BENCHMARK(BM_MomentNormSphere)->Arg(256)->Arg(2048);

void BM_MomentNormMonteCarlo(benchmark::State& state) {
    const MomentNormEvaluator eval(ConvexBody::cube(2), 1.0,
                                   BodyMonteCarlo{static_cast<std::size_t>(state.range(0)), 1});
    const CVec v = to_complex(RVec{0.3, -1.2}, RVec{0.7, 0.1});
    std::uint64_t call = 0;
    for (auto _ : state) benchmark::DoNotOptimize(eval.evaluate(v, call++));
}
BENCHMARK(BM_MomentNormMonteCarlo)->Arg(20000);

void BM_TablePower(benchmark::State& state) {
    const MomentNormEvaluator eval(ConvexBody::ellipsoid_axes({2.0, 1.0}), 2.0);
    const auto pts = random_points(2, 1024);
    for (auto _ : state) {
        double s = 0.0;
        for (const RVec& x : pts) s += eval.norm_pow(x);
        benchmark::DoNotOptimize(s);
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(pts.size()));
}
BENCHMARK(BM_TablePower);

void BM_LocalEnergy(benchmark::State& state) {
    const FieldPtr u = modulated_gaussian_field({1.0, 0.0});
    const MagneticPotential a = MagneticPotential::rotational(1.0);
    const ConvexBody body = ConvexBody::cube(2);
    for (auto _ : state) benchmark::DoNotOptimize(local_energy(*u, a, body, 2.0));
}
BENCHMARK(BM_LocalEnergy)->Unit(benchmark::kMillisecond);

IntegrationBudget small_budget(int nodes) {
    IntegrationBudget b;
    b.outer_nodes = nodes;
    b.estimate_error = false;
    return b;
}

void BM_Gagliardo(benchmark::State& state) {
    const FieldPtr u = gaussian_field(2);
    const FunctionalSpec spec = FunctionalSpec::gagliardo(ConvexBody::ellipsoid_axes({2.0, 1.0}), 2.0, 0.9);
    const IntegrationBudget b = small_budget(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(gagliardo(*u, spec, b));
}
BENCHMARK(BM_Gagliardo)->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond);

void BM_Nguyen(benchmark::State& state) {
    const FieldPtr u = modulated_gaussian_field({1.0, 0.0});
    const FunctionalSpec spec =
        FunctionalSpec::nguyen(ConvexBody::cube(2), 2.0, 0.02, MagneticPotential::rotational(1.0));
    const IntegrationBudget b = small_budget(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(nguyen(*u, spec, b));
}
BENCHMARK(BM_Nguyen)->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond);

void BM_BbmShrinking(benchmark::State& state) {
    const FieldPtr u = modulated_gaussian_field({1.0, 0.0});
    const FunctionalSpec spec = FunctionalSpec::bbm(ConvexBody::ball(2), 2.0, MollifierFamily::shrinking_uniform(2.0, 2),
                                                    32, MagneticPotential::rotational(1.0));
    const IntegrationBudget b = small_budget(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(bbm(*u, spec, b));
}
BENCHMARK(BM_BbmShrinking)->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond);

void BM_IndicatorBbm(benchmark::State& state) {
    const FieldPtr u = indicator_field(Region::box({0.0, 0.0}, {1.0, 1.0}));
    const FunctionalSpec spec = FunctionalSpec::bbm(ConvexBody::cube(2), 1.0, MollifierFamily::shrinking_uniform(1.0, 2),
                                                    16, MagneticPotential::zero(2));
    for (auto _ : state) benchmark::DoNotOptimize(bbm(*u, spec));
}
BENCHMARK(BM_IndicatorBbm)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
