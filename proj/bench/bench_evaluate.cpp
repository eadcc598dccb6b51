// Serial vs OpenMP offspring evaluation on the default 13x7 configuration.
#include <random>

#include <benchmark/benchmark.h>

#include "edd/engine.hpp"
#include "edd/evaluate.hpp"
#include "edd/experiment.hpp"

namespace {

using namespace edd;

std::vector<Individual> make_batch(std::size_t n) {
  const Room target = default_target_room(13, 7);
  Rng rng(42);
  std::vector<Individual> batch;
  batch.reserve(n);
  for (std::size_t i = 0; i < n; ++i) batch.push_back({mutate(target, target, 0.3, rng), 0.0, false, {}});
  return batch;
}

template <void (*Evaluate)(std::span<Individual>, const EvaluationContext&)>
void BM_Evaluate(benchmark::State& state) {
  const Room target = default_target_room(13, 7);
  const std::vector<DimensionDescriptor> dims = {{DimensionKind::SpatialPatterns, 5}, {DimensionKind::Symmetry, 5}};
  const EvaluationContext ctx{dims, &target, {}};
  auto batch = make_batch(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    Evaluate(batch, ctx);
    benchmark::DoNotOptimize(batch.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK(BM_Evaluate<evaluate_serial>)->Name("evaluate/serial")->Arg(20)->Arg(1000);
BENCHMARK(BM_Evaluate<evaluate_parallel>)->Name("evaluate/parallel")->Arg(20)->Arg(1000);

BENCHMARK_MAIN();
