#include <random>

#include "doctest.h"
#include "edd/patterns.hpp"
#include "support/oracles.hpp"

using namespace edd;

namespace {

struct Rect {
  int top, left, h, w;
};

// Greedy chamber claim by brute-force rectangle enumeration.
std::vector<std::set<Position>> chambers_oracle(const Room& room) {
  std::vector<std::uint8_t> claimed(room.size(), 0);
  std::vector<std::set<Position>> out;
  const auto usable = [&](int r, int c) {
    const auto i = room.index({r, c});
    return is_passable(room.at({r, c})) && !claimed[i];
  };
  for (;;) {
    std::optional<Rect> best;
    for (int top = 0; top < room.height(); ++top)
      for (int left = 0; left < room.width(); ++left)
        for (int h = 3; top + h <= room.height(); ++h)
          for (int w = 3; left + w <= room.width(); ++w) {
            bool ok = true;
            for (int r = top; r < top + h && ok; ++r)
              for (int c = left; c < left + w && ok; ++c) ok = usable(r, c);
            if (!ok) continue;
            const Rect cand{top, left, h, w};
            const auto key = [](const Rect& x) { return std::tuple(-x.h * x.w, x.top, x.left, -x.w); };
            if (!best || key(cand) < key(*best)) best = cand;
          }
    if (!best) break;
    std::set<Position> tiles;
    for (int r = best->top; r < best->top + best->h; ++r)
      for (int c = best->left; c < best->left + best->w; ++c) {
        tiles.insert({r, c});
        claimed[room.index({r, c})] = 1;
      }
    out.push_back(tiles);
  }
  return out;
}

PatternGraph synthetic_graph(std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& edges,
                             const std::vector<std::size_t>& door_nodes) {
  PatternGraph g;
  g.nodes.resize(n);
  for (std::size_t i = 0; i < n; ++i) g.nodes[i].kind = PatternKind::Chamber;
  for (const auto d : door_nodes) g.nodes[d].doors.push_back({0, static_cast<int>(d)});
  g.edges = edges;
  std::sort(g.edges.begin(), g.edges.end());
  return g;
}

std::size_t meso_count(const PatternGraph& g, MesoKind k) {
  return static_cast<std::size_t>(std::count_if(g.meso.begin(), g.meso.end(), [&](const MesoPattern& m) { return m.kind == k; }));
}

}  // namespace

TEST_CASE("spatial pattern examples") {
  SUBCASE("open 3x3 is one chamber") {
    const auto g = detect_spatial_patterns(Room(3, 3));
    REQUIRE(g.nodes.size() == 1);
    CHECK(g.nodes[0].kind == PatternKind::Chamber);
    CHECK(g.edges.empty());
    CHECK(g.meso.empty());
  }
  SUBCASE("walled line is one corridor") {
    const auto g = detect_spatial_patterns(parse_room("7 3\nwwwwwww\nwfffffw\nwwwwwww\n"));
    REQUIRE(g.nodes.size() == 1);
    CHECK(g.nodes[0].kind == PatternKind::Corridor);
    CHECK(g.nodes[0].tiles.size() == 5);
    CHECK_FALSE(g.nodes[0].vertical);
  }
  SUBCASE("two chambers and a corridor") {
    const auto g = detect_spatial_patterns(parse_room("9 3\nfffwwwfff\nfffffffff\nfffwwwfff\n"));
    REQUIRE(g.nodes.size() == 3);
    CHECK(g.edges.size() == 2);
    CHECK(g.count(PatternKind::Chamber) == 2);
    CHECK(g.count(PatternKind::Corridor) == 1);
    CHECK(g.tile_count(PatternKind::Corridor) == 3);
  }
  SUBCASE("all walls give an empty graph") {
    const auto g = detect_spatial_patterns(parse_room("3 3\nwww\nwww\nwww\n"));
    CHECK(g.nodes.empty());
    CHECK(g.edges.empty());
  }
}

TEST_CASE("golden overlay") {
  const Room room = parse_room(
      "13 7\n"
      "wwwwwwdwwwwww\n"
      "wfffffffffffw\n"
      "wfwwwfwfwwwfw\n"
      "dfffffffffffd\n"
      "wfwwwfwfwwwfw\n"
      "wfffffffffffw\n"
      "wwwwwwdwwwwww\n");
  const auto g = detect_spatial_patterns(room);
  CHECK(pattern_overlay(g) ==
        "######.######\n"
        "#+---+++---+#\n"
        "#+###+#+###+#\n"
        ".+---+++---+.\n"
        "#+###+#+###+#\n"
        "#+---+++---+#\n"
        "######.######\n");
  const auto mixed = detect_spatial_patterns(parse_room("9 5\nfffwwwwww\nfffwwwwwf\nfffffffff\nwwwwfwwwf\nwwwwfwwww\n"));
  CHECK(pattern_overlay(mixed) ==
        "CCC######\n"
        "CCC#####.\n"
        "CCC++---+\n"
        "####|###.\n"
        "####|####\n");
  CHECK(mixed.count(PatternKind::Chamber) == 1);
  CHECK(mixed.count(PatternKind::Connector) == 3);
  CHECK(mixed.count(PatternKind::Corridor) == 2);
  CHECK(mixed.count(PatternKind::Nothing) == 2);
}

TEST_CASE("meso pattern rules") {
  const auto classify = [](std::string_view text) { return analyze_patterns(parse_room(text)); };
  SUBCASE("treasure room") {
    const auto g = classify("3 3\ntft\nfff\nfff\n");
    REQUIRE(g.meso.size() == 1);
    CHECK(g.meso[0].kind == MesoKind::TreasureRoom);
    CHECK(g.nodes[g.meso[0].chamber].kind == PatternKind::Chamber);
  }
  SUBCASE("guard room") {
    const auto g = classify("3 3\ntfe\nfff\nfff\n");
    REQUIRE(g.meso.size() == 1);
    CHECK(g.meso[0].kind == MesoKind::GuardRoom);
  }
  SUBCASE("ambush") {
    const auto g = classify("4 4\nfdff\nffff\nfeff\nffff\n");
    REQUIRE(g.meso.size() == 1);
    CHECK(g.meso[0].kind == MesoKind::Ambush);
  }
  SUBCASE("enemy too far from the door") {
    CHECK(classify("4 4\nfdff\nffff\nffff\nfffe\n").meso.empty());
  }
  SUBCASE("single treasure with no enemy") { CHECK(classify("3 3\ntff\nfff\nfff\n").meso.empty()); }
  SUBCASE("thresholds are configurable") {
    MesoRules rules;
    rules.treasure_room_min_treasures = 1;
    const auto g = analyze_patterns(parse_room("3 3\ntff\nfff\nfff\n"), rules);
    REQUIRE(g.meso.size() == 1);
    CHECK(g.meso[0].kind == MesoKind::TreasureRoom);
  }
  SUBCASE("one meso pattern per chamber") {
    const auto g = classify("7 3\ntetwtet\nfffwfff\nfffwfdf\n");
    CHECK(g.meso.size() == 2);
    CHECK(meso_count(g, MesoKind::GuardRoom) == 2);
  }
}

TEST_CASE("door path counting examples") {
  CHECK(count_door_paths(detect_spatial_patterns(parse_room("3 3\ndfd\nfff\nfff\n"))) == 0);
  CHECK(count_door_paths(synthetic_graph(3, {{0, 1}, {1, 2}}, {0, 2})) == 1);
  CHECK(count_door_paths(synthetic_graph(4, {{0, 1}, {1, 2}, {2, 3}, {0, 3}}, {0, 2})) == 2);
  CHECK(count_door_paths(synthetic_graph(4, {{0, 1}, {2, 3}}, {0, 3})) == 0);

  SUBCASE("saturates per pair") {
    std::vector<std::pair<std::size_t, std::size_t>> complete;
    for (std::size_t a = 0; a < 10; ++a)
      for (std::size_t b = a + 1; b < 10; ++b) complete.push_back({a, b});
    const auto g = synthetic_graph(10, complete, {0, 9});
    CHECK(oracle::door_paths_bitmask(g) == 109601);
    CHECK(count_door_paths(g) == kDoorPathCap);
    CHECK(count_door_paths(synthetic_graph(10, complete, {0, 5, 9})) == 3 * kDoorPathCap);
  }
}

TEST_CASE("door paths match subset enumeration on random graphs") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 2 + rng() % 9;
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = a + 1; b < n; ++b)
        if (rng() % 3 == 0) edges.push_back({a, b});
    std::vector<std::size_t> doors;
    for (std::size_t i = 0; i < n; ++i)
      if (rng() % 3 == 0) doors.push_back(i);
    const auto g = synthetic_graph(n, edges, doors);
    CHECK(count_door_paths(g, 1u << 30) == oracle::door_paths_bitmask(g));
  }
}

TEST_CASE("partition properties on random rooms") {
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<int> side(3, 14);
  int compared_paths = 0;
  for (int trial = 0; trial < 500; ++trial) {
    oracle::RandomRoomParams params;
    params.wall = std::uniform_real_distribution<double>(0.0, 0.5)(rng);
    params.doors = static_cast<int>(rng() % 5);
    const Room room = oracle::random_room(rng, side(rng), side(rng), params);
    const auto g = analyze_patterns(room);

    // Every passable tile in exactly one node; walls in none.
    std::vector<int> seen(room.size(), -1);
    for (std::size_t n = 0; n < g.nodes.size(); ++n) {
      REQUIRE_FALSE(g.nodes[n].tiles.empty());
      for (const auto p : g.nodes[n].tiles) {
        REQUIRE(seen[room.index(p)] == -1);
        seen[room.index(p)] = static_cast<int>(n);
      }
      for (const auto d : g.nodes[n].doors) CHECK(room.at(d) == TileKind::Door);
    }
    for (std::size_t i = 0; i < room.size(); ++i) {
      CHECK((seen[i] >= 0) == is_passable(room.tiles()[i]));
      CHECK(g.owner[i] == seen[i]);
    }

    // Edges exactly where tiles of two nodes touch.
    std::set<std::pair<std::size_t, std::size_t>> touching;
    for (std::size_t i = 0; i < room.size(); ++i) {
      if (seen[i] < 0) continue;
      for (const auto q : oracle::neighbors4(room, room.position(i))) {
        const int o = seen[room.index(q)];
        if (o >= 0 && o != seen[i]) touching.insert(std::minmax<std::size_t>(seen[i], o));
      }
    }
    CHECK(std::set(g.edges.begin(), g.edges.end()) == touching);

    // Chambers follow the greedy rectangle rule; corridors are straight runs.
    std::vector<std::set<Position>> chambers;
    for (const auto& node : g.nodes) {
      if (node.kind == PatternKind::Chamber) chambers.emplace_back(node.tiles.begin(), node.tiles.end());
      if (node.kind == PatternKind::Corridor) {
        CHECK(node.tiles.size() >= 2);
        for (std::size_t k = 1; k < node.tiles.size(); ++k) {
          const auto a = node.tiles[k - 1], b = node.tiles[k];
          CHECK((node.vertical ? (b.col == a.col && b.row == a.row + 1) : (b.row == a.row && b.col == a.col + 1)));
        }
      }
    }
    auto expected = chambers_oracle(room);
    std::sort(chambers.begin(), chambers.end());
    std::sort(expected.begin(), expected.end());
    CHECK(chambers == expected);

    // Meso patterns sit on chambers, at most one each.
    std::set<std::size_t> hosts;
    for (const auto& m : g.meso) {
      CHECK(g.nodes[m.chamber].kind == PatternKind::Chamber);
      CHECK(hosts.insert(m.chamber).second);
    }

    CHECK(pattern_overlay(analyze_patterns(room)) == pattern_overlay(g));
    CHECK(analyze_patterns(room).edges == g.edges);

    if (g.nodes.size() <= 14) {
      CHECK(count_door_paths(g, 1u << 30) == oracle::door_paths_bitmask(g));
      ++compared_paths;
    }
  }
  CHECK(compared_paths > 50);
}
