#pragma once

#include <span>
#include <vector>

#include "edd/metrics.hpp"
#include "edd/room.hpp"

namespace edd {

// A room with its cached evaluation. fitness/feasible/dims are only valid
// after one of the evaluate_* kernels ran on it.
struct Individual {
  Room genotype;
  double fitness = 0.0;
  bool feasible = false;
  std::vector<double> dims;
};

struct EvaluationContext {
  std::span<const DimensionDescriptor> dims;
  const Room* target = nullptr;  // needed for Similarity
  FitnessConfig fitness{};
};

// Feasible rooms score fitness_feasible, infeasible ones fitness_infeasible.
void evaluate(Individual& ind, const EvaluationContext& ctx);

// Reference implementation, one individual at a time.
void evaluate_serial(std::span<Individual> batch, const EvaluationContext& ctx);
// OpenMP over the batch. Produces bit-identical results to evaluate_serial.
void evaluate_parallel(std::span<Individual> batch, const EvaluationContext& ctx);

}  // namespace edd
