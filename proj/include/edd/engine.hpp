#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "edd/evaluate.hpp"
#include "edd/metrics.hpp"
#include "edd/rng.hpp"
#include "edd/room.hpp"

namespace edd {

enum class PopulationKind { Feasible, Infeasible };

struct EngineConfig {
  std::size_t pop_size = 1000;
  std::size_t cell_capacity = 25;
  std::size_t publish_gen = 100;
  std::size_t parents_per_pop = 5;
  double mutation_chance = 0.30;
  double tile_mutation_rate = 0.05;
  int tournament_min = 2;
  int tournament_max = 5;
  std::vector<DimensionDescriptor> dims = {{DimensionKind::SpatialPatterns, 5},
                                           {DimensionKind::Symmetry, 5}};
  std::uint64_t rng_seed = 0;
  FitnessConfig fitness{};
  bool parallel_evaluation = true;
};

void validate(const EngineConfig& cfg);
// 1..4 descriptors with valid granularities.
void validate_dimensions(std::span<const DimensionDescriptor> dims);

// Component k = min(floor(v_k * g_k), g_k - 1).
std::vector<int> bin_index(std::span<const double> values, std::span<const DimensionDescriptor> dims);

struct Cell {
  std::vector<int> index;
  std::vector<Individual> feasible;    // fitness descending after trim
  std::vector<Individual> infeasible;  // fitness descending after trim

  std::vector<Individual>& population(PopulationKind k) {
    return k == PopulationKind::Feasible ? feasible : infeasible;
  }
  const std::vector<Individual>& population(PopulationKind k) const {
    return k == PopulationKind::Feasible ? feasible : infeasible;
  }
};

// MAP-Elites grid over the dimension intervals; every cell keeps a feasible
// and an infeasible population.
class Archive {
 public:
  // Throws PreconditionError for an empty (or > 4) descriptor list.
  explicit Archive(std::vector<DimensionDescriptor> dims);

  const std::vector<DimensionDescriptor>& dimensions() const noexcept { return dims_; }
  std::span<const Cell> cells() const noexcept { return cells_; }
  std::size_t flat_index(std::span<const int> index) const;

  // Routes by dims and feasibility. Duplicate genotypes within the destination
  // population are dropped. Returns false when dropped.
  bool insert(Individual ind);
  void sort_and_trim(std::size_t capacity);

  std::size_t individual_count() const noexcept;
  std::size_t population_count(PopulationKind k) const noexcept;
  std::vector<Individual> drain();

  // Best feasible individual per cell, in cell order.
  std::vector<std::optional<Individual>> elites() const;
  std::size_t empty_elite_cells() const noexcept;

 private:
  std::vector<DimensionDescriptor> dims_;
  std::vector<Cell> cells_;
};

// Re-rolls each tile not fixed by the target with probability `tile_rate`,
// then conforms to the target.
Room mutate(const Room& genotype, const Room& target, double tile_rate, Rng& rng);

// Copies the target's doors and locked tiles (and lock mask) onto the genotype;
// stray doors become Floor.
Room conform_to_target(const Room& genotype, const Room& target);

// Swaps the row-major segment [cut_a, cut_b) between two equally sized rooms.
std::pair<Room, Room> two_point_crossover(const Room& a, const Room& b, std::size_t cut_a, std::size_t cut_b);

// `count` tournament winners from random non-empty cells of population `kind`.
// Empty when that population is empty everywhere.
std::vector<Individual> tournament_select(const Archive& archive, PopulationKind kind, std::size_t count,
                                          const EngineConfig& cfg, Rng& rng);

// Consecutive parents pair up (an odd last parent pairs with the first). Each
// pair yields two crossover children; each child is mutated with probability
// cfg.mutation_chance and conformed to the target. Children are unevaluated.
// Throws ContractError when parents mix feasible and infeasible members.
std::vector<Individual> breed(std::span<const Individual> parents, const Room& target,
                              const EngineConfig& cfg, Rng& rng);

struct ElitesBroadcast {
  std::uint64_t generation = 0;
  std::vector<DimensionDescriptor> dims;
  std::vector<std::vector<int>> indices;  // per cell
  std::vector<std::optional<Individual>> elites;
  Room target;
};

struct CellUpdate {
  std::vector<int> index;
  Individual elite;
};

class Engine {
 public:
  using BreedingObserver = std::function<void(PopulationKind, std::span<const Individual>)>;

  // Creates the cells and seeds pop_size mutated copies of the target.
  Engine(EngineConfig cfg, Room target);

  const EngineConfig& config() const noexcept { return cfg_; }
  const Archive& archive() const noexcept { return archive_; }
  const Room& target() const noexcept { return target_; }
  std::uint64_t generation() const noexcept { return generation_; }
  const std::vector<DimensionDescriptor>& dimensions() const noexcept { return archive_.dimensions(); }

  // Takes effect at the start of the next step; later calls overwrite earlier ones.
  void set_dimensions(std::vector<DimensionDescriptor> dims);
  bool dimensions_pending() const noexcept { return pending_dims_.has_value(); }

  // Conforms and re-evaluates the whole archive against the new target. A
  // target of a different size restarts the archive from the new room.
  void update_target(Room target);

  // One generation: pending dimension change, breed both populations, trim.
  void step();
  bool broadcast_due() const noexcept {
    return generation_ > 0 && generation_ % cfg_.publish_gen == 0 && last_broadcast_ != generation_;
  }
  // Emits the elite grid, then adds a mutated copy of every individual plus
  // the unchanged target, and trims. The target is kept even if it would be trimmed.
  ElitesBroadcast broadcast_and_reseed();

  // Cells whose best feasible fitness improved since the last take. After
  // seeding, a target update or a dimension change the next batch lists every
  // occupied cell; cell_updates_complete() reports that case.
  std::vector<CellUpdate> take_cell_updates();
  bool cell_updates_complete() const noexcept { return updates_complete_; }

  void set_breeding_observer(BreedingObserver observer) { observer_ = std::move(observer); }

 private:
  EvaluationContext context() const;
  void evaluate_batch(std::span<Individual> batch) const;
  void seed_population();
  void apply_dimension_change(std::vector<DimensionDescriptor> dims);
  void track_improvements();

  EngineConfig cfg_;
  Room target_;
  Archive archive_;
  Rng rng_;
  std::uint64_t generation_ = 0;
  std::uint64_t last_broadcast_ = 0;
  std::optional<std::vector<DimensionDescriptor>> pending_dims_;
  std::vector<std::optional<double>> best_seen_;
  std::vector<CellUpdate> updates_;
  bool updates_complete_ = true;
  BreedingObserver observer_;
};

}  // namespace edd
