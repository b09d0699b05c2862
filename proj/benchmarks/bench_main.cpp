#include <benchmark/benchmark.h>

#include "bite/bias.hpp"
#include "bite/diagnostics.hpp"
#include "bite/perturb.hpp"
#include "bite/poison_train.hpp"
#include "bite/providers.hpp"
#include "bite/synthetic.hpp"
#include "bite/victim.hpp"

namespace {

const bite::SyntheticCorpus& corpus() {
  static const bite::SyntheticCorpus c = [] {
    auto made = bite::make_synthetic_corpus({});
    made.train.target_label = "positive";
    return made;
  }();
  return c;
}

void BM_CountFrequencies(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(bite::count_frequencies(corpus().train));
}
BENCHMARK(BM_CountFrequencies);

void BM_MaxLabelZ(benchmark::State& state) {
  const auto table = bite::count_label_frequencies(corpus().train);
  const auto vocab = bite::vocabulary(corpus().train);
  for (auto _ : state) {
    double s = 0;
    for (const auto& w : vocab) s += bite::max_label_z(table, w);
    benchmark::DoNotOptimize(s);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(vocab.size()));
}
BENCHMARK(BM_MaxLabelZ);

void BM_Propose(benchmark::State& state) {
  bite::BuiltinProposer proposer(0);
  proposer.add_corpus_neighbors(corpus().train);
  bite::BuiltinScorer scorer;
  const auto& tokens = corpus().train.instances.front().tokens;
  for (auto _ : state) benchmark::DoNotOptimize(bite::propose(tokens, proposer, scorer, {}));
}
BENCHMARK(BM_Propose);

void BM_PoisonTrainingSet(benchmark::State& state) {
  bite::set_warning_handler([](std::string_view) {});
  bite::BuiltinProposer proposer(0);
  proposer.add_corpus_neighbors(corpus().train);
  bite::BuiltinScorer scorer;
  bite::PoisonPlan plan;
  plan.dataset = corpus().train;
  plan.poison_rate = static_cast<double>(state.range(0)) / 100.0;
  for (auto _ : state) benchmark::DoNotOptimize(bite::poison_training_set(plan, proposer, scorer));
}
BENCHMARK(BM_PoisonTrainingSet)->Arg(1)->Arg(10)->Unit(benchmark::kMillisecond);

void BM_TrainVictim(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(bite::train_victim(corpus().train, {}));
}
BENCHMARK(BM_TrainVictim)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
