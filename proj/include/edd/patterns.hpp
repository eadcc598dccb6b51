#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "edd/room.hpp"

namespace edd {

enum class PatternKind { Chamber, Corridor, Connector, Nothing };
enum class MesoKind { TreasureRoom, GuardRoom, Ambush };

std::string_view pattern_name(PatternKind k) noexcept;
std::string_view meso_name(MesoKind k) noexcept;

struct SpatialPattern {
  PatternKind kind = PatternKind::Nothing;
  std::vector<Position> tiles;  // row-major
  std::vector<Position> doors;  // door tiles inside `tiles`
  bool vertical = false;        // corridors only
};

struct MesoPattern {
  MesoKind kind;
  std::size_t chamber;  // node index; always a Chamber
};

// Passable tiles partitioned into spatial patterns, with 4-adjacency edges.
struct PatternGraph {
  int width = 0;
  int height = 0;
  std::vector<SpatialPattern> nodes;
  std::vector<std::pair<std::size_t, std::size_t>> edges;  // first < second, sorted
  std::vector<MesoPattern> meso;
  std::vector<int> owner;  // per tile (row-major): node index, -1 for walls

  std::vector<std::vector<std::size_t>> adjacency() const;
  std::size_t count(PatternKind k) const noexcept;
  std::size_t tile_count(PatternKind k) const noexcept;
};

struct MesoRules {
  int treasure_room_min_treasures = 2;
  int guard_room_min_treasures = 1;
  int guard_room_min_enemies = 1;
  int ambush_radius = 2;  // Manhattan distance from a door
};

// Partition:
//  1. Chambers: greedily claim the largest all-passable rectangle with both
//     sides >= 3 (ties: topmost, leftmost, wider) until none fits.
//  2. Unclaimed tiles with unclaimed neighbors on both axes are junctions;
//     each 4-connected group of junctions is one Connector.
//  3. Remaining straight runs of >= 2 tiles are Corridors.
//  4. Leftover single tiles touching >= 2 patterns are Connectors, else Nothing.
PatternGraph detect_spatial_patterns(const Room& room);

// First matching rule per chamber: TreasureRoom, GuardRoom, Ambush.
PatternGraph detect_meso_patterns(const Room& room, PatternGraph graph, const MesoRules& rules = {});

inline PatternGraph analyze_patterns(const Room& room, const MesoRules& rules = {}) {
  return detect_meso_patterns(room, detect_spatial_patterns(room), rules);
}

inline constexpr std::size_t kDoorPathCap = 1000;

// Simple paths between every unordered pair of distinct door-bearing nodes,
// saturating at `cap_per_pair` per pair.
std::size_t count_door_paths(const PatternGraph& graph, std::size_t cap_per_pair = kDoorPathCap);

// Character map: '#' wall, 'C' chamber, '-'/'|' corridor, '+' connector, '.' nothing.
std::string pattern_overlay(const PatternGraph& graph);

}  // namespace edd
