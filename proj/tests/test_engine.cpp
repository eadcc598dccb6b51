#include <map>
#include <random>

#include "doctest.h"
#include "edd/engine.hpp"
#include "edd/errors.hpp"
#include "edd/experiment.hpp"
#include "support/invariants.hpp"
#include "support/oracles.hpp"

using namespace edd;

namespace {

EngineConfig small_config(std::uint64_t seed = 1) {
  EngineConfig cfg;
  cfg.pop_size = 200;
  cfg.cell_capacity = 6;
  cfg.publish_gen = 10;
  cfg.rng_seed = seed;
  return cfg;
}

Individual evaluated(Room room, std::span<const DimensionDescriptor> dims) {
  Individual ind{std::move(room), 0.0, false, {}};
  evaluate(ind, {dims, nullptr, {}});
  return ind;
}

std::vector<std::optional<double>> best_feasible(const Archive& a) {
  std::vector<std::optional<double>> out;
  for (const auto& cell : a.cells()) {
    out.push_back(cell.feasible.empty() ? std::nullopt : std::optional(cell.feasible.front().fitness));
  }
  return out;
}

std::map<std::size_t, std::set<std::string>> genotypes_by_cell(const Archive& a) {
  std::map<std::size_t, std::set<std::string>> out;
  for (const auto& cell : a.cells()) {
    for (const auto* pop : {&cell.feasible, &cell.infeasible}) {
      for (const auto& ind : *pop) out[a.flat_index(cell.index)].insert(serialize_room(ind.genotype));
    }
  }
  return out;
}

bool contains_genotype(const Archive& a, const Room& room) {
  for (const auto& cell : a.cells())
    for (const auto* pop : {&cell.feasible, &cell.infeasible})
      for (const auto& ind : *pop)
        if (ind.genotype.same_genotype(room)) return true;
  return false;
}

Room locked_target() {
  Room t = default_target_room(13, 7);
  const std::vector<Position> walls{{2, 2}, {2, 3}, {4, 9}};
  const std::vector<Position> loot{{1, 10}, {5, 2}};
  t = paint_tiles(t, walls, TileKind::Wall, true);
  return paint_tiles(t, loot, TileKind::Treasure, true);
}

}  // namespace

TEST_CASE("bin index") {
  const std::vector<DimensionDescriptor> g5{{DimensionKind::Symmetry, 5}};
  CHECK(bin_index(std::vector{1.0}, g5) == std::vector{4});
  CHECK(bin_index(std::vector{0.0}, g5) == std::vector{0});
  CHECK(bin_index(std::vector{0.43}, g5) == std::vector{2});
  CHECK(bin_index(std::vector{0.2}, g5) == std::vector{1});
  const std::vector<DimensionDescriptor> mixed{{DimensionKind::Symmetry, 3}, {DimensionKind::Linearity, 7}};
  CHECK(bin_index(std::vector{0.5, 0.99}, mixed) == std::vector{1, 6});
}

TEST_CASE("archive layout") {
  const Archive two({{DimensionKind::SpatialPatterns, 5}, {DimensionKind::Symmetry, 5}});
  CHECK(two.cells().size() == 25);
  for (std::size_t i = 0; i < 25; ++i) {
    CHECK(two.flat_index(two.cells()[i].index) == i);
    CHECK(two.cells()[i].feasible.empty());
  }
  CHECK(two.cells()[7].index == std::vector{1, 2});
  CHECK(Archive({{DimensionKind::Symmetry, 2}}).cells().size() == 2);
  CHECK(Archive({{DimensionKind::Symmetry, 3}, {DimensionKind::Linearity, 4}, {DimensionKind::MesoPatterns, 2}}).cells().size() == 24);
  CHECK_THROWS_AS(Archive({}), PreconditionError);
  CHECK_THROWS_AS(Archive(std::vector<DimensionDescriptor>(5, {DimensionKind::Symmetry, 2})), PreconditionError);
  CHECK(two.empty_elite_cells() == 25);
}

TEST_CASE("archive insert and trim") {
  const std::vector<DimensionDescriptor> dims{{DimensionKind::Symmetry, 2}};
  Archive a(dims);
  std::mt19937_64 rng(4);
  std::vector<Individual> pool;
  for (int i = 0; i < 60; ++i) pool.push_back(evaluated(oracle::random_room(rng, 5, 5, {0.2, 0.1, 0.1, 2}), dims));
  std::size_t inserted = 0;
  for (const auto& ind : pool) inserted += a.insert(ind);
  CHECK(a.individual_count() == inserted);
  CHECK_FALSE(a.insert(pool.front()));
  a.sort_and_trim(4);
  for (const auto& cell : a.cells()) {
    CHECK(cell.feasible.size() <= 4);
    CHECK(cell.infeasible.size() <= 4);
    for (std::size_t i = 1; i < cell.feasible.size(); ++i) CHECK(cell.feasible[i - 1].fitness >= cell.feasible[i].fitness);
  }
  const auto elites = a.elites();
  for (std::size_t i = 0; i < elites.size(); ++i) {
    CHECK(elites[i].has_value() == !a.cells()[i].feasible.empty());
  }
}

TEST_CASE("initial population") {
  SUBCASE("default size") {
    EngineConfig cfg;
    cfg.rng_seed = 3;
    const Engine e(cfg, default_target_room(13, 7));
    CHECK(e.archive().individual_count() <= 25 * 2 * 25);
    CHECK(e.archive().individual_count() > 25);
    CHECK(check::archive_violations(e.archive(), e.target(), 25, cfg.fitness, true).empty());
  }
  SUBCASE("one individual") {
    EngineConfig cfg;
    cfg.pop_size = 1;
    const Engine e(cfg, default_target_room(13, 7));
    CHECK(e.archive().individual_count() == 1);
    std::size_t populated = 0;
    for (const auto& cell : e.archive().cells()) populated += !cell.feasible.empty() + !cell.infeasible.empty();
    CHECK(populated == 1);
  }
  SUBCASE("all-wall target starts infeasible") {
    std::vector<TileKind> walls(13 * 7, TileKind::Wall);
    EngineConfig cfg = small_config(5);
    Engine e(cfg, Room::from_tiles(13, 7, walls));
    CHECK(e.archive().population_count(PopulationKind::Feasible) == 0);
    CHECK(e.archive().population_count(PopulationKind::Infeasible) > 0);
  }
}

TEST_CASE("tournament selection") {
  const std::vector<DimensionDescriptor> dims{{DimensionKind::Symmetry, 2}};
  EngineConfig cfg;
  Rng rng(12);

  SUBCASE("a lone individual always wins") {
    Archive a(dims);
    a.insert(evaluated(default_target_room(5, 5), dims));
    const auto kind = a.population_count(PopulationKind::Feasible) ? PopulationKind::Feasible : PopulationKind::Infeasible;
    const auto parents = tournament_select(a, kind, 50, cfg, rng);
    CHECK(parents.size() == 50);
    for (const auto& p : parents) CHECK(p.genotype.same_genotype(default_target_room(5, 5)));
  }
  SUBCASE("fittest member wins most often") {
    Archive a(dims);
    for (int i = 0; i < 5; ++i) {
      std::vector<TileKind> tiles(9, TileKind::Floor);
      tiles[static_cast<std::size_t>(i)] = TileKind::Wall;
      a.insert(Individual{Room::from_tiles(3, 3, tiles), 0.1 * (i + 1), true, {0.0}});
    }
    a.sort_and_trim(25);
    const auto parents = tournament_select(a, PopulationKind::Feasible, 10000, cfg, rng);
    std::map<double, int> wins;
    for (const auto& p : parents) ++wins[p.fitness];
    const int best = wins[0.5];
    for (const auto& [f, n] : wins) CHECK(best >= n);
    // Expected share of the best member: mean over sizes 2..5 of 1 - (4/5)^k.
    CHECK(best / 10000.0 == doctest::Approx((0.36 + 0.488 + 0.5904 + 0.67232) / 4).epsilon(0.05));
  }
  SUBCASE("empty pool yields no parents") {
    Archive a(dims);
    a.insert(Individual{Room(3, 3), 0.2, false, {0.0}});
    CHECK(tournament_select(a, PopulationKind::Feasible, 5, cfg, rng).empty());
    CHECK(tournament_select(a, PopulationKind::Infeasible, 5, cfg, rng).size() == 5);
  }
}

TEST_CASE("crossover and breeding") {
  const Room a = parse_room("4 3\nwwww\neeee\ntttt\n");
  const Room b = parse_room("4 3\nffff\nffff\nffff\n");
  SUBCASE("segment swap") {
    for (std::size_t lo = 0; lo <= 12; ++lo) {
      for (std::size_t hi = lo; hi <= 12; ++hi) {
        const auto [x, y] = two_point_crossover(a, b, lo, hi);
        for (std::size_t i = 0; i < 12; ++i) {
          const bool inside = i >= lo && i < hi;
          CHECK(x.tiles()[i] == (inside ? b : a).tiles()[i]);
          CHECK(y.tiles()[i] == (inside ? a : b).tiles()[i]);
        }
      }
    }
    CHECK_THROWS_AS(two_point_crossover(a, b, 5, 3), ContractError);
    CHECK_THROWS_AS(two_point_crossover(a, Room(3, 3), 0, 1), ContractError);
  }
  SUBCASE("identical parents without mutation") {
    EngineConfig cfg;
    cfg.mutation_chance = 0.0;
    Rng rng(2);
    const Room target = default_target_room(13, 7);
    const Individual p{target, 0.5, true, {}};
    const std::vector<Individual> parents(5, p);
    const auto kids = breed(parents, target, cfg, rng);
    CHECK(kids.size() == 6);
    for (const auto& k : kids) CHECK(k.genotype == target);
  }
  SUBCASE("mixed populations are refused") {
    EngineConfig cfg;
    Rng rng(2);
    const std::vector<Individual> parents{{b, 0.5, true, {}}, {b, 0.1, false, {}}};
    CHECK_THROWS_AS(breed(parents, b, cfg, rng), ContractError);
  }
  SUBCASE("locked tiles survive every breeding") {
    const Room target = locked_target();
    EngineConfig cfg;
    cfg.mutation_chance = 1.0;
    cfg.tile_mutation_rate = 0.5;
    Rng rng(99);
    std::mt19937_64 gen(1);
    std::size_t violations = 0;
    for (int trial = 0; trial < 10000; ++trial) {
      std::vector<Individual> parents;
      for (int i = 0; i < 2; ++i) {
        parents.push_back({conform_to_target(oracle::random_room(gen, 13, 7, {0.3, 0.1, 0.1, 0}), target), 0, true, {}});
      }
      for (const auto& kid : breed(parents, target, cfg, rng)) {
        for (std::size_t t = 0; t < target.size(); ++t) {
          if ((target.locks()[t] || target.tiles()[t] == TileKind::Door) && kid.genotype.tiles()[t] != target.tiles()[t]) ++violations;
        }
      }
    }
    CHECK(violations == 0);
  }
}

TEST_CASE("mutation") {
  const Room target = locked_target();
  Rng rng(7);
  const Room all = mutate(target, target, 1.0, rng);
  std::size_t changed = 0;
  for (std::size_t t = 0; t < target.size(); ++t) {
    if (target.locks()[t] || target.tiles()[t] == TileKind::Door) {
      CHECK(all.tiles()[t] == target.tiles()[t]);
    } else {
      CHECK(all.tiles()[t] != TileKind::Door);
      changed += all.tiles()[t] != target.tiles()[t];
    }
  }
  CHECK(changed > 40);
  CHECK(mutate(target, target, 0.0, rng) == target);
  CHECK_THROWS_AS(conform_to_target(Room(3, 3), target), ContractError);
}

TEST_CASE("generation step") {
  EngineConfig cfg = small_config(21);
  Engine e(cfg, locked_target());
  std::size_t observed = 0;
  e.set_breeding_observer([&](PopulationKind kind, std::span<const Individual> parents) {
    for (const auto& p : parents) CHECK(p.feasible == (kind == PopulationKind::Feasible));
    observed += parents.size();
  });
  auto before = best_feasible(e.archive());
  bool moved = false;
  for (int g = 0; g < 60; ++g) {
    const auto cells_before = genotypes_by_cell(e.archive());
    e.step();
    const auto after = best_feasible(e.archive());
    for (std::size_t i = 0; i < after.size(); ++i) {
      if (before[i]) {
        REQUIRE(after[i]);
        CHECK(*after[i] >= *before[i]);
      }
    }
    before = after;
    REQUIRE(check::archive_violations(e.archive(), e.target(), cfg.cell_capacity, cfg.fitness).empty());
    // New genotypes land in the cell their own dimensions select.
    for (const auto& [cell, genomes] : genotypes_by_cell(e.archive())) {
      for (const auto& g2 : genomes) {
        bool existed = false;
        for (const auto& [c, old] : cells_before) existed |= old.count(g2) > 0;
        if (!existed && !cells_before.count(cell)) moved = true;
      }
    }
  }
  CHECK(e.generation() == 60);
  CHECK(observed == 60 * 2 * cfg.parents_per_pop);
  CHECK(moved);
  CHECK(check::archive_violations(e.archive(), e.target(), cfg.cell_capacity, cfg.fitness, true).empty());
}

TEST_CASE("fixed point without variation") {
  EngineConfig cfg = small_config(2);
  cfg.mutation_chance = 0.0;
  cfg.tile_mutation_rate = 0.0;
  Engine e(cfg, default_target_room(13, 7));
  CHECK(e.archive().individual_count() == 1);
  const auto start = genotypes_by_cell(e.archive());
  for (int g = 0; g < 25; ++g) e.step();
  CHECK(genotypes_by_cell(e.archive()) == start);
}

TEST_CASE("dimension changes") {
  EngineConfig cfg = small_config(8);
  Engine e(cfg, default_target_room(13, 7));
  for (int g = 0; g < 20; ++g) e.step();

  SUBCASE("identical descriptors are a no-op") {
    const auto before = genotypes_by_cell(e.archive());
    e.set_dimensions(cfg.dims);
    CHECK(e.dimensions_pending());
    e.step();
    CHECK_FALSE(e.dimensions_pending());
    // Only the step's own offspring may differ; every previous genotype stays in place.
    const auto after = genotypes_by_cell(e.archive());
    std::size_t kept = 0, total = 0;
    for (const auto& [cell, genomes] : before) {
      for (const auto& g : genomes) {
        ++total;
        kept += after.count(cell) && after.at(cell).count(g);
      }
    }
    CHECK(total - kept <= 2 * 2 * cfg.parents_per_pop);
  }
  SUBCASE("coarser granularity rebins everyone") {
    const auto before = e.archive().individual_count();
    std::vector<DimensionDescriptor> coarse{{DimensionKind::SpatialPatterns, 2}, {DimensionKind::Symmetry, 2}};
    e.set_dimensions({{DimensionKind::Linearity, 3}});
    e.set_dimensions(coarse);
    e.step();
    CHECK(e.dimensions() == coarse);
    CHECK(e.archive().cells().size() == 4);
    CHECK(e.archive().individual_count() <= before + 4 * cfg.parents_per_pop);
    CHECK(check::archive_violations(e.archive(), e.target(), cfg.cell_capacity, cfg.fitness, true).empty());
  }
  SUBCASE("invalid descriptors are rejected eagerly") {
    CHECK_THROWS_AS(e.set_dimensions({}), PreconditionError);
    CHECK_THROWS_AS(e.set_dimensions({{DimensionKind::Symmetry, 1}}), PreconditionError);
    CHECK_FALSE(e.dimensions_pending());
  }
}

TEST_CASE("broadcast and reseed") {
  EngineConfig cfg = small_config(13);
  cfg.cell_capacity = 2;
  Engine e(cfg, locked_target());
  for (std::size_t g = 0; g < cfg.publish_gen; ++g) {
    CHECK_FALSE(e.broadcast_due());
    e.step();
  }
  REQUIRE(e.broadcast_due());
  const auto b = e.broadcast_and_reseed();
  CHECK_FALSE(e.broadcast_due());
  CHECK(b.generation == cfg.publish_gen);
  CHECK(b.target == e.target());
  REQUIRE(b.elites.size() == 25);
  std::size_t holes = 0;
  for (std::size_t i = 0; i < 25; ++i) {
    CHECK(b.indices[i] == e.archive().cells()[i].index);
    holes += !b.elites[i];
  }
  CHECK(holes > 0);  // some combinations are unreachable at this scale
  CHECK(contains_genotype(e.archive(), e.target()));
  CHECK(e.archive().individual_count() <= 25 * 2 * cfg.cell_capacity);
  CHECK(check::archive_violations(e.archive(), e.target(), cfg.cell_capacity, cfg.fitness, true).empty());
}

TEST_CASE("target pinned even in a full cell") {
  EngineConfig cfg = small_config(4);
  cfg.cell_capacity = 1;
  Engine e(cfg, default_target_room(13, 7));
  for (int round = 0; round < 5; ++round) {
    for (std::size_t g = 0; g < cfg.publish_gen; ++g) e.step();
    e.broadcast_and_reseed();
    CHECK(contains_genotype(e.archive(), e.target()));
  }
}

TEST_CASE("target updates") {
  EngineConfig cfg = small_config(6);
  Engine e(cfg, default_target_room(13, 7));
  for (int g = 0; g < 15; ++g) e.step();

  SUBCASE("same size conforms the archive") {
    const Room t = locked_target();
    e.update_target(t);
    CHECK(e.target() == t);
    CHECK(check::archive_violations(e.archive(), t, cfg.cell_capacity, cfg.fitness, true).empty());
    for (int g = 0; g < 15; ++g) e.step();
    const auto b = e.broadcast_and_reseed();
    CHECK(b.target == t);
    CHECK(contains_genotype(e.archive(), t));
  }
  SUBCASE("new size restarts from the new room") {
    const Room t = default_target_room(9, 9);
    e.update_target(t);
    CHECK(e.archive().individual_count() > 0);
    CHECK(check::archive_violations(e.archive(), t, cfg.cell_capacity, cfg.fitness, true).empty());
  }
}

TEST_CASE("engine runs are reproducible") {
  const auto run = [](bool parallel) {
    EngineConfig cfg = small_config(77);
    cfg.parallel_evaluation = parallel;
    Engine e(cfg, locked_target());
    std::vector<std::string> trace;
    for (int g = 0; g < 40; ++g) {
      if (g == 12) e.set_dimensions({{DimensionKind::Linearity, 4}, {DimensionKind::MesoPatterns, 3}});
      e.step();
      if (e.broadcast_due()) {
        const auto b = e.broadcast_and_reseed();
        for (const auto& el : b.elites) trace.push_back(el ? serialize_room(el->genotype) + std::to_string(el->fitness) : "-");
      }
    }
    return trace;
  };
  const auto a = run(true);
  CHECK(a.size() == 25 + 3 * 12);
  CHECK(a == run(true));
  CHECK(a == run(false));
}

TEST_CASE("configuration validation") {
  EngineConfig cfg;
  cfg.pop_size = 0;
  CHECK_THROWS_AS(validate(cfg), PreconditionError);
  cfg = {};
  cfg.mutation_chance = 1.5;
  CHECK_THROWS_AS(validate(cfg), PreconditionError);
  cfg = {};
  cfg.tournament_min = 4;
  cfg.tournament_max = 3;
  CHECK_THROWS_AS(validate(cfg), PreconditionError);
  cfg = {};
  cfg.dims.clear();
  CHECK_THROWS_AS(Engine(cfg, Room(5, 5)), PreconditionError);
}
