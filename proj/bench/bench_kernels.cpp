// Parallel kernels against their serial references on one synthetic corpus.

#include <benchmark/benchmark.h>

#include "txtopo/features.hpp"
#include "txtopo/homology.hpp"
#include "txtopo/motifs.hpp"
#include "txtopo/rng.hpp"
#include "txtopo/shapley.hpp"
#include "txtopo/synth.hpp"

using namespace txtopo;

namespace {

struct Corpus {
  std::vector<UndirectedGraph> graphs;
  std::vector<std::vector<FiltrationScale>> scales;
  std::vector<DirectedGraph> filtered;
};

const Corpus& corpus() {
  static const Corpus c = [] {
    SyntheticScenario sc;
    sc.weeks = 52;
    const auto d = synth_generate(sc);
    Corpus out;
    for (const auto& w : partition_weeks(d.transactions, d.anchor)) {
      const auto g = build_digraph(w);
      out.graphs.push_back(to_undirected(g));
      out.scales.push_back(compute_thresholds(out.graphs.back().weights()));
      out.filtered.push_back(filter_top_edges(g, 0.05));
    }
    return out;
  }();
  return c;
}

void BM_WeeklyBettiParallel(benchmark::State& state) {
  const auto& c = corpus();
  for (auto _ : state) benchmark::DoNotOptimize(weekly_betti(c.graphs, c.scales, Execution::parallel));
}

void BM_WeeklyBettiSerial(benchmark::State& state) {
  const auto& c = corpus();
  for (auto _ : state) benchmark::DoNotOptimize(weekly_betti(c.graphs, c.scales, Execution::serial));
}

// Level-by-level rebuild, the reference the sweep is tested against.
void BM_WeeklyBettiReference(benchmark::State& state) {
  const auto& c = corpus();
  for (auto _ : state) benchmark::DoNotOptimize(weekly_betti_reference(c.graphs, c.scales));
}

void BM_CensusParallel(benchmark::State& state) {
  const auto& c = corpus();
  for (auto _ : state) benchmark::DoNotOptimize(weekly_census(c.filtered, MotifSemantics::induced, Execution::parallel));
}

void BM_CensusSerial(benchmark::State& state) {
  const auto& c = corpus();
  for (auto _ : state) benchmark::DoNotOptimize(weekly_census(c.filtered, MotifSemantics::induced, Execution::serial));
}

struct ShapFixture {
  TrainedModel model;
  Eigen::MatrixXd instance;
  std::vector<Eigen::MatrixXd> background;
};

const ShapFixture& shap_fixture() {
  static const ShapFixture f = [] {
    ShapFixture s;
    const int F = 9, L = 8;
    Rng rng(1);
    s.model.config.window = L;
    for (int i = 0; i < F; ++i) s.model.features.push_back("f" + std::to_string(i));
    s.model.norm.kept.assign(F, 1);
    s.model.norm.mean.assign(F, 0.0);
    s.model.norm.scale.assign(F, 1.0);
    s.model.params = LstmParameters({F, s.model.config.hidden, s.model.config.layers});
    s.model.params.initialize(1);
    const auto window = [&] {
      Eigen::MatrixXd w(L, F);
      for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = rng.normal();
      return w;
    };
    s.instance = window();
    for (int b = 0; b < 24; ++b) s.background.push_back(window());
    return s;
  }();
  return f;
}

void BM_ShapleyParallel(benchmark::State& state) {
  const auto& f = shap_fixture();
  for (auto _ : state) benchmark::DoNotOptimize(shapley_exact(f.model, f.instance, f.background, Execution::parallel));
}

void BM_ShapleySerial(benchmark::State& state) {
  const auto& f = shap_fixture();
  for (auto _ : state) benchmark::DoNotOptimize(shapley_exact(f.model, f.instance, f.background, Execution::serial));
}

}  // namespace

BENCHMARK(BM_WeeklyBettiParallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_WeeklyBettiSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_WeeklyBettiReference)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CensusParallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CensusSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ShapleyParallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ShapleySerial)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
