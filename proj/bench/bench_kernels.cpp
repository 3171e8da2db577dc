// Serial reference against the OpenMP path for the three parallel kernels.
// Arg 0 selects the serial path, 1 the parallel one.

#include <benchmark/benchmark.h>

#include "covtest/changemap.hpp"
#include "covtest/montecarlo.hpp"
#include "covtest/statistics.hpp"

namespace {

using namespace covtest;

Execution mode(const benchmark::State& state) {
    return state.range(0) == 0 ? Execution::serial : Execution::parallel;
}

void BM_QuadraticForm(benchmark::State& state) {
    RMatrix xi(4, 4);
    xi << 4, 1, 0.5, 0.2, 1, 3, 0.3, 0.1, 0.5, 0.3, 2, 0.4, 0.2, 0.1, 0.4, 1;
    const auto n = static_cast<std::size_t>(state.range(1));
    for (auto _ : state) {
        benchmark::DoNotOptimize(sample_quadratic_form(xi, n, 7, mode(state)));
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * n));
}
BENCHMARK(BM_QuadraticForm)->ArgsProduct({{0, 1}, {200'000}})->Unit(benchmark::kMillisecond);

void BM_Type1(benchmark::State& state) {
    const auto h0 = type1_scenario(static_cast<int>(state.range(1))).h0;
    const std::vector<double> alphas{0.01, 0.05, 0.1};
    for (auto _ : state) {
        benchmark::DoNotOptimize(run_type1(h0, alphas, 200, 3, 20'000, mode(state)));
    }
    state.SetItemsProcessed(state.iterations() * 200);
}
BENCHMARK(BM_Type1)->ArgsProduct({{0, 1}, {20, 100}})->Unit(benchmark::kMillisecond);

void BM_Power(benchmark::State& state) {
    const auto pair = eigenvalue_scenario(static_cast<int>(state.range(1)));
    const std::vector<StatisticKind> stats{StatisticKind::wishart, StatisticKind::glr, StatisticKind::glr_lr,
                                           StatisticKind::fisher};
    const std::vector<double> alphas{0.05};
    for (auto _ : state) {
        benchmark::DoNotOptimize(run_power(pair, stats, alphas, 200, 3, mode(state)));
    }
    state.SetItemsProcessed(state.iterations() * 400);
}
BENCHMARK(BM_Power)->ArgsProduct({{0, 1}, {20, 100}})->Unit(benchmark::kMillisecond);

void BM_ChangeMap(benchmark::State& state) {
    SceneSpec spec;
    spec.width = static_cast<int>(state.range(1));
    spec.height = spec.width;
    spec.rect_x = spec.width / 4;
    spec.rect_y = spec.width / 4;
    spec.rect_width = spec.width / 2;
    spec.rect_height = spec.width / 2;
    const Scene scene = make_scene(spec);
    ChangeMapOptions opt;
    opt.K = 5;
    opt.exec = mode(state);
    for (auto _ : state) {
        benchmark::DoNotOptimize(compute_changemap(scene.a, scene.b, opt));
    }
    state.SetItemsProcessed(state.iterations() * spec.width * spec.height);
}
BENCHMARK(BM_ChangeMap)->ArgsProduct({{0, 1}, {64}})->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
