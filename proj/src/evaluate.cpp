#include "edd/evaluate.hpp"

#include <exception>

#include "edd/errors.hpp"

namespace edd {

void evaluate(Individual& ind, const EvaluationContext& ctx) {
  const Room& room = ind.genotype;
  const auto graph = analyze_patterns(room, ctx.fitness.meso);
  const auto metrics = room_metrics(room, graph);

  ind.feasible = room_feasible(room, ctx.fitness).feasible;
  ind.fitness = ind.feasible ? fitness_breakdown(room, graph, ctx.fitness).total : fitness_infeasible(room);

  ind.dims.clear();
  ind.dims.reserve(ctx.dims.size());
  for (const auto& d : ctx.dims) {
    switch (d.kind) {
      case DimensionKind::Symmetry: ind.dims.push_back(symmetry(room)); break;
      case DimensionKind::Similarity:
        if (!ctx.target) throw PreconditionError("similarity dimension needs a target room");
        ind.dims.push_back(similarity(room, *ctx.target));
        break;
      case DimensionKind::MesoPatterns: ind.dims.push_back(meso_pattern_dimension(metrics)); break;
      case DimensionKind::SpatialPatterns: ind.dims.push_back(spatial_pattern_dimension(metrics)); break;
      case DimensionKind::Linearity: ind.dims.push_back(linearity_dimension(metrics)); break;
    }
  }
}

void evaluate_serial(std::span<Individual> batch, const EvaluationContext& ctx) {
  for (auto& ind : batch) evaluate(ind, ctx);
}

void evaluate_parallel(std::span<Individual> batch, const EvaluationContext& ctx) {
  const auto n = static_cast<long>(batch.size());
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 8)
  for (long i = 0; i < n; ++i) {
    try {
      evaluate(batch[static_cast<std::size_t>(i)], ctx);
    } catch (...) {
#pragma omp critical(edd_evaluate_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace edd
