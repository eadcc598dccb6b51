#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "edd/engine.hpp"

namespace edd {

struct ExperimentSpec {
  int room_width = 13;
  int room_height = 7;
  std::vector<DimensionDescriptor> dims = {{DimensionKind::SpatialPatterns, 5}, {DimensionKind::Symmetry, 5}};
  std::size_t generations = 2100;
  EngineConfig engine{};       // engine.dims is replaced by `dims`
  std::optional<Room> target;  // defaults to default_target_room(width, height)
  std::string output_dir;
};

// Empty room with a door in the middle of each side.
Room default_target_room(int width, int height);

struct BroadcastSummary {
  std::uint64_t generation = 0;
  double mean_fitness = 0.0;  // over cells holding a feasible elite
  double max_fitness = 0.0;
  std::size_t empty_cells = 0;
  std::size_t cells = 0;
};

struct ExperimentResult {
  std::vector<BroadcastSummary> broadcasts;
};

// Throws PreconditionError for an invalid spec and IoError when the output
// directory cannot be written; both before any generation runs.
void validate(const ExperimentSpec& spec);

// Per broadcast writes gen<G>_cell<i>_<j>.room for every cell with a feasible
// elite, appends `room-id,fitness,feasible,dim1,dim2` lines to cells.csv and a
// row to summary.csv.
ExperimentResult run_experiment(const ExperimentSpec& spec);

// All unordered pairs of the five dimensions (granularity taken from the
// first descriptor of `base.dims`). Each run goes to <out>/<x>__<y>/; the
// comparison table <out>/comparison.csv has one row per pair per broadcast.
// Pairs involving Similarity require `base.target`.
std::vector<std::pair<std::vector<DimensionDescriptor>, ExperimentResult>> sweep_all_pairs(const ExperimentSpec& base);

// Shortest round-trip decimal form, stable across runs.
std::string format_double(double value);

}  // namespace edd
