#include <benchmark/benchmark.h>

#include <random>

#include "driftloc/experiment.hpp"
#include "driftloc/learners.hpp"
#include "driftloc/localization.hpp"

using namespace driftloc;

namespace {

NetworkGraph bench_graph(std::size_t n) { return random_geometric_graph(n, 0.18 * std::sqrt(100.0 / n), 10, 1); }

MeasurementWindow noise_window(std::size_t w, std::size_t sensors) {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> z;
    MeasurementWindow mw{Matrix(2 * w, sensors), {}, w};
    for (std::size_t j = 0; j < sensors; ++j) mw.sensors.push_back("s" + std::to_string(j));
    for (std::size_t i = 0; i < 2 * w; ++i)
        for (std::size_t j = 0; j < sensors; ++j) mw.values(i, j) = z(rng) + (i >= w && j == 2 ? 0.5 : 0.0);
    return mw;
}

}  // namespace

static void BM_Step(benchmark::State& state) {
    const auto g = bench_graph(static_cast<std::size_t>(state.range(0)));
    const auto model = TransitionModel::uniform(g, {});
    std::vector<double> p(model.base_levels().begin(), model.base_levels().end()), next(p.size());
    const std::vector<double> d(p.size(), 1.0);
    for (auto _ : state) {
        model.apply(p, d, next);
        p.swap(next);
        benchmark::DoNotOptimize(p.data());
    }
}
BENCHMARK(BM_Step)->Arg(100)->Arg(1000);

static void BM_SteadyState(benchmark::State& state) {
    const auto g = bench_graph(static_cast<std::size_t>(state.range(0)));
    const auto model = TransitionModel::uniform(g, {});
    const std::vector<double> d(g.node_count(), 1.0);
    for (auto _ : state) benchmark::DoNotOptimize(steady_state(model, d));
}
BENCHMARK(BM_SteadyState)->Arg(100)->Arg(1000);

static void BM_Simulate(benchmark::State& state) {
    const auto g = bench_graph(100);
    const auto model = TransitionModel::uniform(g, {});
    const auto demand = DemandModel::uniform(g.node_count(), 1.0, sinusoidal_profile(144, 0.3), 0.9, 0.05, 0.1);
    for (auto _ : state) benchmark::DoNotOptimize(simulate(model, demand, {}, 576, 200, 7));
}
BENCHMARK(BM_Simulate)->Unit(benchmark::kMillisecond);

static void BM_LocalizeMean(benchmark::State& state) {
    const auto mw = noise_window(288, 10);
    for (auto _ : state) benchmark::DoNotOptimize(localize_mean(mw));
}
BENCHMARK(BM_LocalizeMean);

static void BM_LocalizeKs(benchmark::State& state) {
    const auto mw = noise_window(288, 10);
    for (auto _ : state) benchmark::DoNotOptimize(localize_ks(mw));
}
BENCHMARK(BM_LocalizeKs);

static void BM_LocalizeModel(benchmark::State& state) {
    const auto mw = noise_window(288, 10);
    LearnerSpec spec;
    spec.family = static_cast<ModelFamily>(state.range(0));
    spec.importance = spec.family == ModelFamily::random_forest || spec.family == ModelFamily::extra_trees
                          ? ImportanceKind::impurity
                          : ImportanceKind::weights;
    state.SetLabel(method_id(spec));
    for (auto _ : state) benchmark::DoNotOptimize(localize_model_based(mw, spec, 1));
}
BENCHMARK(BM_LocalizeModel)->DenseRange(0, 3)->Unit(benchmark::kMillisecond);

static void BM_Scenario(benchmark::State& state) {
    ExperimentConfig cfg;
    cfg.seed = 1;
    cfg.scenarios.batch.half_window = 288;
    cfg.methods = {make_method("random"), make_method("mean"), make_method("ks"), make_method("fi_rf")};
    const auto g = bench_graph(100);
    const auto model = TransitionModel::uniform(g, cfg.dynamics);
    const AnomalyScenario s{AnomalyKind::type_i, g.id(5), 1000, 2.0, FaultProfile::offset, 0, 0};
    for (auto _ : state) benchmark::DoNotOptimize(run_scenario(cfg, g, model, s, 0));
}
BENCHMARK(BM_Scenario)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
