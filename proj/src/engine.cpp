#include "edd/engine.hpp"

#include <algorithm>
#include <cmath>

#include "edd/errors.hpp"

namespace edd {

namespace {

constexpr std::size_t kMaxDimensions = 4;
constexpr std::array<TileKind, 4> kMutableKinds = {TileKind::Floor, TileKind::Wall, TileKind::Enemy,
                                                   TileKind::Treasure};

}  // namespace

void validate_dimensions(std::span<const DimensionDescriptor> dims) {
  if (dims.empty()) throw PreconditionError("at least one dimension is required");
  if (dims.size() > kMaxDimensions) {
    throw PreconditionError("at most " + std::to_string(kMaxDimensions) + " dimensions are supported");
  }
  for (const auto& d : dims) validate(d);
}

void validate(const EngineConfig& cfg) {
  const auto positive = [](std::size_t v, const char* name) {
    if (v < 1) throw PreconditionError(std::string(name) + " must be >= 1");
  };
  positive(cfg.pop_size, "pop_size");
  positive(cfg.cell_capacity, "cell_capacity");
  positive(cfg.publish_gen, "publish_gen");
  positive(cfg.parents_per_pop, "parents_per_pop");
  if (!(cfg.mutation_chance >= 0.0 && cfg.mutation_chance <= 1.0)) {
    throw PreconditionError("mutation_chance must lie in [0, 1]");
  }
  if (!(cfg.tile_mutation_rate >= 0.0 && cfg.tile_mutation_rate <= 1.0)) {
    throw PreconditionError("tile_mutation_rate must lie in [0, 1]");
  }
  if (cfg.tournament_min < 1 || cfg.tournament_max < cfg.tournament_min) {
    throw PreconditionError("tournament size range is empty");
  }
  for (const double f : {cfg.fitness.target_enemy_frac, cfg.fitness.target_treasure_frac,
                         cfg.fitness.target_corridor_frac}) {
    if (!(f > 0.0 && f < 1.0)) throw PreconditionError("fitness target fractions must lie in (0, 1)");
  }
  validate_dimensions(cfg.dims);
}

std::vector<int> bin_index(std::span<const double> values, std::span<const DimensionDescriptor> dims) {
  if (values.size() != dims.size()) throw ContractError("dimension value count does not match descriptors");
  std::vector<int> index(values.size());
  for (std::size_t k = 0; k < values.size(); ++k) {
    const int g = dims[k].granularity;
    const double scaled = std::floor(std::clamp(values[k], 0.0, 1.0) * g);
    index[k] = std::min(static_cast<int>(scaled), g - 1);
  }
  return index;
}

Archive::Archive(std::vector<DimensionDescriptor> dims) : dims_(std::move(dims)) {
  validate_dimensions(dims_);
  std::size_t total = 1;
  for (const auto& d : dims_) total *= static_cast<std::size_t>(d.granularity);
  cells_.reserve(total);
  std::vector<int> index(dims_.size(), 0);
  for (std::size_t flat = 0; flat < total; ++flat) {
    cells_.push_back(Cell{index, {}, {}});
    for (std::size_t k = dims_.size(); k-- > 0;) {
      if (++index[k] < dims_[k].granularity) break;
      index[k] = 0;
    }
  }
}

std::size_t Archive::flat_index(std::span<const int> index) const {
  std::size_t flat = 0;
  for (std::size_t k = 0; k < dims_.size(); ++k) {
    flat = flat * static_cast<std::size_t>(dims_[k].granularity) + static_cast<std::size_t>(index[k]);
  }
  return flat;
}

bool Archive::insert(Individual ind) {
  const auto index = bin_index(ind.dims, dims_);
  auto& pop = cells_[flat_index(index)].population(ind.feasible ? PopulationKind::Feasible
                                                                : PopulationKind::Infeasible);
  const bool duplicate = std::any_of(pop.begin(), pop.end(), [&](const Individual& other) {
    return other.genotype.same_genotype(ind.genotype);
  });
  if (duplicate) return false;
  pop.push_back(std::move(ind));
  return true;
}

void Archive::sort_and_trim(std::size_t capacity) {
  const auto by_fitness = [](const Individual& a, const Individual& b) { return a.fitness > b.fitness; };
  for (auto& cell : cells_) {
    for (auto* pop : {&cell.feasible, &cell.infeasible}) {
      std::stable_sort(pop->begin(), pop->end(), by_fitness);
      if (pop->size() > capacity) pop->erase(pop->begin() + static_cast<std::ptrdiff_t>(capacity), pop->end());
    }
  }
}

std::size_t Archive::individual_count() const noexcept {
  return population_count(PopulationKind::Feasible) + population_count(PopulationKind::Infeasible);
}

std::size_t Archive::population_count(PopulationKind k) const noexcept {
  std::size_t total = 0;
  for (const auto& cell : cells_) total += cell.population(k).size();
  return total;
}

std::vector<Individual> Archive::drain() {
  std::vector<Individual> all;
  all.reserve(individual_count());
  for (auto& cell : cells_) {
    for (auto* pop : {&cell.feasible, &cell.infeasible}) {
      std::move(pop->begin(), pop->end(), std::back_inserter(all));
      pop->clear();
    }
  }
  return all;
}

std::vector<std::optional<Individual>> Archive::elites() const {
  std::vector<std::optional<Individual>> out;
  out.reserve(cells_.size());
  for (const auto& cell : cells_) {
    if (cell.feasible.empty()) {
      out.emplace_back();
    } else {
      out.emplace_back(*std::max_element(cell.feasible.begin(), cell.feasible.end(),
                                         [](const Individual& a, const Individual& b) { return a.fitness < b.fitness; }));
    }
  }
  return out;
}

std::size_t Archive::empty_elite_cells() const noexcept {
  return static_cast<std::size_t>(
      std::count_if(cells_.begin(), cells_.end(), [](const Cell& c) { return c.feasible.empty(); }));
}

Room conform_to_target(const Room& genotype, const Room& target) {
  if (genotype.width() != target.width() || genotype.height() != target.height()) {
    throw ContractError("genotype and target sizes differ");
  }
  std::vector<TileKind> tiles(genotype.tiles().begin(), genotype.tiles().end());
  const auto fixed = target.tiles();
  const auto locks = target.locks();
  for (std::size_t i = 0; i < tiles.size(); ++i) {
    if (fixed[i] == TileKind::Door || locks[i]) {
      tiles[i] = fixed[i];
    } else if (tiles[i] == TileKind::Door) {
      tiles[i] = TileKind::Floor;
    }
  }
  return Room::from_tiles(target.width(), target.height(), std::move(tiles),
                          std::vector<std::uint8_t>(locks.begin(), locks.end()), genotype.id());
}

Room mutate(const Room& genotype, const Room& target, double tile_rate, Rng& rng) {
  std::vector<TileKind> tiles(genotype.tiles().begin(), genotype.tiles().end());
  const auto fixed = target.tiles();
  const auto locks = target.locks();
  for (std::size_t i = 0; i < tiles.size(); ++i) {
    if (fixed[i] == TileKind::Door || locks[i]) continue;
    if (bernoulli(rng, tile_rate)) tiles[i] = kMutableKinds[uniform_below(rng, kMutableKinds.size())];
  }
  return conform_to_target(
      Room::from_tiles(genotype.width(), genotype.height(), std::move(tiles),
                       std::vector<std::uint8_t>(genotype.locks().begin(), genotype.locks().end()),
                       genotype.id()),
      target);
}

std::pair<Room, Room> two_point_crossover(const Room& a, const Room& b, std::size_t cut_a, std::size_t cut_b) {
  if (a.width() != b.width() || a.height() != b.height()) throw ContractError("crossover parents differ in size");
  if (cut_a > cut_b || cut_b > a.size()) throw ContractError("crossover cut points out of order");
  std::vector<TileKind> ta(a.tiles().begin(), a.tiles().end());
  std::vector<TileKind> tb(b.tiles().begin(), b.tiles().end());
  std::swap_ranges(ta.begin() + static_cast<std::ptrdiff_t>(cut_a), ta.begin() + static_cast<std::ptrdiff_t>(cut_b),
                   tb.begin() + static_cast<std::ptrdiff_t>(cut_a));
  // Door positions coincide for conformed parents; from_tiles re-validates anyway.
  return {Room::from_tiles(a.width(), a.height(), std::move(ta),
                           std::vector<std::uint8_t>(a.locks().begin(), a.locks().end())),
          Room::from_tiles(b.width(), b.height(), std::move(tb),
                           std::vector<std::uint8_t>(b.locks().begin(), b.locks().end()))};
}

std::vector<Individual> tournament_select(const Archive& archive, PopulationKind kind, std::size_t count,
                                          const EngineConfig& cfg, Rng& rng) {
  std::vector<const Cell*> candidates;
  for (const auto& cell : archive.cells()) {
    if (!cell.population(kind).empty()) candidates.push_back(&cell);
  }
  std::vector<Individual> parents;
  if (candidates.empty()) return parents;
  parents.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const auto& pop = candidates[uniform_below(rng, candidates.size())]->population(kind);
    const int size = uniform_int(rng, cfg.tournament_min, cfg.tournament_max);
    const Individual* winner = nullptr;
    for (int k = 0; k < size; ++k) {
      const Individual& contender = pop[uniform_below(rng, pop.size())];
      if (!winner || contender.fitness > winner->fitness) winner = &contender;
    }
    parents.push_back(*winner);
  }
  return parents;
}

std::vector<Individual> breed(std::span<const Individual> parents, const Room& target, const EngineConfig& cfg,
                              Rng& rng) {
  std::vector<Individual> children;
  if (parents.empty()) return children;
  const bool kind = parents.front().feasible;
  for (const auto& p : parents) {
    if (p.feasible != kind) throw ContractError("feasible and infeasible parents cannot interbreed");
  }
  const std::size_t pairs = (parents.size() + 1) / 2;
  children.reserve(pairs * 2);
  for (std::size_t i = 0; i < pairs; ++i) {
    const Room& a = parents[2 * i].genotype;
    const Room& b = parents[(2 * i + 1) % parents.size()].genotype;
    // Two distinct cut points in [0, len].
    const std::size_t len = a.size();
    std::size_t cut_a = uniform_below(rng, len + 1);
    std::size_t cut_b = uniform_below(rng, len);
    if (cut_b >= cut_a) ++cut_b;
    if (cut_a > cut_b) std::swap(cut_a, cut_b);
    auto [first, second] = two_point_crossover(a, b, cut_a, cut_b);
    for (Room* child : {&first, &second}) {
      Room genome = bernoulli(rng, cfg.mutation_chance) ? mutate(*child, target, cfg.tile_mutation_rate, rng)
                                                        : conform_to_target(*child, target);
      children.push_back(Individual{std::move(genome), 0.0, false, {}});
    }
  }
  return children;
}

Engine::Engine(EngineConfig cfg, Room target)
    : cfg_(std::move(cfg)), target_(std::move(target)), archive_(cfg_.dims), rng_(cfg_.rng_seed) {
  validate(cfg_);
  seed_population();
}

EvaluationContext Engine::context() const {
  return EvaluationContext{archive_.dimensions(), &target_, cfg_.fitness};
}

void Engine::evaluate_batch(std::span<Individual> batch) const {
  if (cfg_.parallel_evaluation) {
    evaluate_parallel(batch, context());
  } else {
    evaluate_serial(batch, context());
  }
}

void Engine::seed_population() {
  std::vector<Individual> population;
  population.reserve(cfg_.pop_size);
  for (std::size_t i = 0; i < cfg_.pop_size; ++i) {
    population.push_back(Individual{mutate(target_, target_, cfg_.tile_mutation_rate, rng_), 0.0, false, {}});
  }
  evaluate_batch(population);
  for (auto& ind : population) archive_.insert(std::move(ind));
  archive_.sort_and_trim(cfg_.cell_capacity);
  best_seen_.assign(archive_.cells().size(), std::nullopt);
  updates_.clear();
  updates_complete_ = true;
  track_improvements();
}

void Engine::set_dimensions(std::vector<DimensionDescriptor> dims) {
  validate_dimensions(dims);
  pending_dims_ = std::move(dims);
}

void Engine::apply_dimension_change(std::vector<DimensionDescriptor> dims) {
  auto previous = archive_.drain();
  archive_ = Archive(std::move(dims));
  evaluate_batch(previous);
  for (auto& ind : previous) archive_.insert(std::move(ind));
  archive_.sort_and_trim(cfg_.cell_capacity);
  // Every occupied cell of the new layout reports on the next improvement check.
  best_seen_.assign(archive_.cells().size(), std::nullopt);
  updates_.clear();
  updates_complete_ = true;
}

void Engine::update_target(Room target) {
  const bool resized = target.width() != target_.width() || target.height() != target_.height();
  target_ = std::move(target);
  if (resized) {
    archive_ = Archive(archive_.dimensions());
    seed_population();
    return;
  }
  auto previous = archive_.drain();
  for (auto& ind : previous) ind.genotype = conform_to_target(ind.genotype, target_);
  evaluate_batch(previous);
  for (auto& ind : previous) archive_.insert(std::move(ind));
  archive_.sort_and_trim(cfg_.cell_capacity);
  // Fitness may legitimately drop after a target change.
  best_seen_.assign(archive_.cells().size(), std::nullopt);
  updates_.clear();
  updates_complete_ = true;
}

void Engine::step() {
  if (pending_dims_) {
    auto dims = std::move(*pending_dims_);
    pending_dims_.reset();
    apply_dimension_change(std::move(dims));
  }
  for (const auto kind : {PopulationKind::Feasible, PopulationKind::Infeasible}) {
    auto parents = tournament_select(archive_, kind, cfg_.parents_per_pop, cfg_, rng_);
    if (parents.empty()) continue;
    if (observer_) observer_(kind, parents);
    auto offspring = breed(parents, target_, cfg_, rng_);
    evaluate_batch(offspring);
    for (auto& child : offspring) archive_.insert(std::move(child));
  }
  archive_.sort_and_trim(cfg_.cell_capacity);
  ++generation_;
  track_improvements();
}

void Engine::track_improvements() {
  const auto cells = archive_.cells();
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (cells[i].feasible.empty()) continue;
    const Individual& best = cells[i].feasible.front();
    if (!best_seen_[i] || best.fitness > *best_seen_[i]) {
      best_seen_[i] = best.fitness;
      // One update per cell: a later improvement in the same step replaces it.
      auto it = std::find_if(updates_.begin(), updates_.end(),
                             [&](const CellUpdate& u) { return u.index == cells[i].index; });
      if (it != updates_.end()) {
        it->elite = best;
      } else {
        updates_.push_back(CellUpdate{cells[i].index, best});
      }
    }
  }
}

std::vector<CellUpdate> Engine::take_cell_updates() {
  std::vector<CellUpdate> out;
  out.swap(updates_);
  updates_complete_ = false;
  return out;
}

ElitesBroadcast Engine::broadcast_and_reseed() {
  ElitesBroadcast event{generation_, archive_.dimensions(), {}, archive_.elites(), target_};
  for (const auto& cell : archive_.cells()) event.indices.push_back(cell.index);
  last_broadcast_ = generation_;

  auto retained = archive_.drain();
  std::vector<Individual> fresh;
  fresh.reserve(retained.size() + 1);
  for (const auto& ind : retained) {
    fresh.push_back(Individual{mutate(ind.genotype, target_, cfg_.tile_mutation_rate, rng_), 0.0, false, {}});
  }
  fresh.push_back(Individual{target_, 0.0, false, {}});
  evaluate_batch(fresh);
  const Individual injected = fresh.back();

  for (auto& ind : retained) archive_.insert(std::move(ind));
  for (auto& ind : fresh) archive_.insert(std::move(ind));
  archive_.sort_and_trim(cfg_.cell_capacity);

  // Keep the designer's room even when its cell is full of fitter rooms.
  const auto flat = archive_.flat_index(bin_index(injected.dims, archive_.dimensions()));
  const auto kind = injected.feasible ? PopulationKind::Feasible : PopulationKind::Infeasible;
  const auto& pop = archive_.cells()[flat].population(kind);
  const bool present = std::any_of(pop.begin(), pop.end(), [&](const Individual& ind) {
    return ind.genotype.same_genotype(injected.genotype);
  });
  if (!present) {
    auto all = archive_.drain();
    // Remove the weakest member of the target's population to make room.
    std::size_t weakest = all.size();
    for (std::size_t i = 0; i < all.size(); ++i) {
      if (all[i].feasible != injected.feasible) continue;
      if (archive_.flat_index(bin_index(all[i].dims, archive_.dimensions())) != flat) continue;
      if (weakest == all.size() || all[i].fitness <= all[weakest].fitness) weakest = i;
    }
    if (weakest != all.size()) all.erase(all.begin() + static_cast<std::ptrdiff_t>(weakest));
    all.push_back(injected);
    for (auto& ind : all) archive_.insert(std::move(ind));
    archive_.sort_and_trim(cfg_.cell_capacity);
  }
  return event;
}

}  // namespace edd
