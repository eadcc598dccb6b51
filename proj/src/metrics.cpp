#include "edd/metrics.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>

#include "edd/errors.hpp"

namespace edd {

namespace {

constexpr std::array<Position, 4> kSteps = {Position{-1, 0}, Position{0, -1}, Position{0, 1},
                                            Position{1, 0}};

// 4-connected passable components; -1 for walls.
std::vector<int> passable_components(const Room& room) {
  std::vector<int> label(room.size(), -1);
  int next = 0;
  for (std::size_t i = 0; i < room.size(); ++i) {
    if (label[i] >= 0 || !is_passable(room.tiles()[i])) continue;
    std::vector<std::size_t> stack{i};
    label[i] = next;
    while (!stack.empty()) {
      const auto k = stack.back();
      stack.pop_back();
      const Position p = room.position(k);
      for (const Position d : kSteps) {
        const Position q{p.row + d.row, p.col + d.col};
        if (!room.in_bounds(q)) continue;
        const auto j = room.index(q);
        if (label[j] < 0 && is_passable(room.tiles()[j])) {
          label[j] = next;
          stack.push_back(j);
        }
      }
    }
    ++next;
  }
  return label;
}

double normalized_distance(double value, double target) {
  return std::abs(value - target) / std::max(target, 1.0 - target);
}

}  // namespace

std::string_view dimension_name(DimensionKind k) noexcept {
  switch (k) {
    case DimensionKind::Symmetry: return "symmetry";
    case DimensionKind::Similarity: return "similarity";
    case DimensionKind::MesoPatterns: return "meso-patterns";
    case DimensionKind::SpatialPatterns: return "spatial-patterns";
    case DimensionKind::Linearity: return "linearity";
  }
  return "symmetry";
}

std::optional<DimensionKind> dimension_from_name(std::string_view name) noexcept {
  for (const auto k : kAllDimensions) {
    if (dimension_name(k) == name) return k;
  }
  return std::nullopt;
}

void validate(const DimensionDescriptor& d) {
  if (d.granularity < DimensionDescriptor::kMinGranularity ||
      d.granularity > DimensionDescriptor::kMaxGranularity) {
    throw PreconditionError("granularity " + std::to_string(d.granularity) + " for " +
                            std::string(dimension_name(d.kind)) + " outside [2, 20]");
  }
}

std::vector<DimensionDescriptor> parse_dimensions(std::string_view text) {
  std::vector<DimensionDescriptor> dims;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find(',', start);
    if (end == std::string_view::npos) end = text.size();
    const auto item = text.substr(start, end - start);
    const auto colon = item.find(':');
    const auto name = item.substr(0, colon);
    const auto kind = dimension_from_name(name);
    if (!kind) throw PreconditionError("unknown dimension '" + std::string(name) + "'");
    DimensionDescriptor d{*kind, 5};
    if (colon != std::string_view::npos) {
      const auto g = item.substr(colon + 1);
      auto [ptr, ec] = std::from_chars(g.data(), g.data() + g.size(), d.granularity);
      if (ec != std::errc() || ptr != g.data() + g.size()) {
        throw PreconditionError("bad granularity '" + std::string(g) + "'");
      }
    }
    validate(d);
    dims.push_back(d);
    if (end == text.size()) break;
    start = end + 1;
  }
  return dims;
}

std::string format_dimensions(std::span<const DimensionDescriptor> dims) {
  std::string out;
  for (const auto& d : dims) {
    if (!out.empty()) out += ',';
    out += std::string(dimension_name(d.kind)) + ":" + std::to_string(d.granularity);
  }
  return out;
}

RoomMetrics room_metrics(const Room& room, const PatternGraph& graph) {
  RoomMetrics m;
  m.width = room.width();
  m.height = room.height();
  m.meso_count = graph.meso.size();
  m.spatial_count = graph.nodes.size();
  m.max_chambers = static_cast<std::size_t>(room.width() / 3) * static_cast<std::size_t>(room.height() / 3);
  m.door_count = room.doors().size();
  m.door_path_count = count_door_paths(graph);
  for (const Position door : room.doors()) {
    for (const Position d : kSteps) {
      const Position q{door.row + d.row, door.col + d.col};
      if (room.in_bounds(q) && is_passable(room.at(q))) ++m.door_neighbor_count;
    }
  }
  return m;
}

std::optional<double> symmetry_along(const Room& room, MirrorAxis axis) {
  const int w = room.width();
  const int h = room.height();
  if ((axis == MirrorAxis::Backslash || axis == MirrorAxis::Slash) && w != h) return std::nullopt;
  const auto mirror = [&](Position p) -> Position {
    switch (axis) {
      case MirrorAxis::Vertical: return {p.row, w - 1 - p.col};
      case MirrorAxis::Horizontal: return {h - 1 - p.row, p.col};
      case MirrorAxis::Backslash: return {p.col, p.row};
      case MirrorAxis::Slash: return {w - 1 - p.col, h - 1 - p.row};
    }
    return p;
  };
  std::size_t solid = 0;
  std::size_t matched = 0;
  for (std::size_t i = 0; i < room.size(); ++i) {
    const TileKind k = room.tiles()[i];
    if (k == TileKind::Floor) continue;
    ++solid;
    if (room.at(mirror(room.position(i))) == k) ++matched;
  }
  if (solid == 0) return 1.0;
  return static_cast<double>(matched) / static_cast<double>(solid);
}

double symmetry(const Room& room) {
  double best = 0.0;
  for (const auto axis : {MirrorAxis::Vertical, MirrorAxis::Horizontal, MirrorAxis::Backslash, MirrorAxis::Slash}) {
    if (const auto v = symmetry_along(room, axis)) best = std::max(best, *v);
  }
  return best;
}

double similarity(const Room& room, const Room& target) {
  if (room.width() != target.width() || room.height() != target.height()) {
    throw PreconditionError("similarity needs equally sized rooms");
  }
  std::size_t equal = 0;
  for (std::size_t i = 0; i < room.size(); ++i) equal += room.tiles()[i] == target.tiles()[i] ? 1 : 0;
  return static_cast<double>(equal) / static_cast<double>(room.size());
}

double meso_pattern_dimension(const RoomMetrics& m) {
  return std::min(static_cast<double>(m.meso_count) / static_cast<double>(m.max_chambers), 1.0);
}

double spatial_pattern_dimension(const RoomMetrics& m) {
  const double side = static_cast<double>(std::max(m.width, m.height));
  return std::min(static_cast<double>(m.spatial_count) / (side * RoomMetrics::kSpatialScale), 1.0);
}

double linearity_dimension(const RoomMetrics& m) {
  if (m.door_count < 2) return 1.0;
  const double denom = static_cast<double>(m.spatial_count + m.door_neighbor_count);
  if (denom <= 0.0) return 1.0;
  return std::clamp(1.0 - static_cast<double>(m.door_path_count) / denom, 0.0, 1.0);
}

double meso_pattern_dimension(const Room& room) {
  return meso_pattern_dimension(room_metrics(room, analyze_patterns(room)));
}
double spatial_pattern_dimension(const Room& room) {
  return spatial_pattern_dimension(room_metrics(room, detect_spatial_patterns(room)));
}
double linearity_dimension(const Room& room) {
  return linearity_dimension(room_metrics(room, detect_spatial_patterns(room)));
}

std::string_view violation_name(RoomViolation v) noexcept {
  switch (v) {
    case RoomViolation::NoDoors: return "no-doors";
    case RoomViolation::DoorsDisconnected: return "doors-disconnected";
    case RoomViolation::UnreachableContent: return "unreachable-content";
    case RoomViolation::MissingInventory: return "missing-inventory";
  }
  return "no-doors";
}

RoomFeasibility room_feasible(const Room& room, const FitnessConfig& cfg) {
  RoomFeasibility out;
  const auto label = passable_components(room);
  const auto& doors = room.doors();

  std::vector<std::uint8_t> door_component(room.size() + 1, 0);
  for (const Position d : doors) door_component[static_cast<std::size_t>(label[room.index(d)])] = 1;

  std::size_t enemies = 0;
  std::size_t treasures = 0;
  bool unreachable = false;
  for (std::size_t i = 0; i < room.size(); ++i) {
    const TileKind k = room.tiles()[i];
    if (k != TileKind::Enemy && k != TileKind::Treasure) continue;
    (k == TileKind::Enemy ? enemies : treasures) += 1;
    if (!door_component[static_cast<std::size_t>(label[i])]) unreachable = true;
  }

  if (doors.empty()) {
    out.violations.push_back(RoomViolation::NoDoors);
  } else {
    const int first = label[room.index(doors.front())];
    if (std::any_of(doors.begin(), doors.end(), [&](Position d) { return label[room.index(d)] != first; })) {
      out.violations.push_back(RoomViolation::DoorsDisconnected);
    }
    if (unreachable) out.violations.push_back(RoomViolation::UnreachableContent);
  }
  if (cfg.require_inventory && (enemies == 0 || treasures == 0)) {
    out.violations.push_back(RoomViolation::MissingInventory);
  }
  out.feasible = out.violations.empty();
  return out;
}

FitnessBreakdown fitness_breakdown(const Room& room, const PatternGraph& graph, const FitnessConfig& cfg) {
  std::size_t passable = 0, enemies = 0, treasures = 0;
  for (const TileKind k : room.tiles()) {
    passable += is_passable(k) ? 1 : 0;
    enemies += k == TileKind::Enemy ? 1 : 0;
    treasures += k == TileKind::Treasure ? 1 : 0;
  }
  const double p = static_cast<double>(std::max<std::size_t>(passable, 1));

  FitnessBreakdown f;
  f.inventory = 1.0 - (normalized_distance(static_cast<double>(enemies) / p, cfg.target_enemy_frac) +
                       normalized_distance(static_cast<double>(treasures) / p, cfg.target_treasure_frac)) /
                          2.0;

  const auto corridor_tiles = graph.tile_count(PatternKind::Corridor) + graph.tile_count(PatternKind::Connector);
  f.corridor = 1.0 - normalized_distance(static_cast<double>(corridor_tiles) / p, cfg.target_corridor_frac);

  const auto chamber_tiles = graph.tile_count(PatternKind::Chamber);
  if (chamber_tiles == 0) {
    f.meso_coverage = 1.0;
  } else {
    std::size_t covered = 0;
    for (const auto& m : graph.meso) covered += graph.nodes[m.chamber].tiles.size();
    f.meso_coverage = static_cast<double>(covered) / static_cast<double>(chamber_tiles);
  }
  f.spatial = 0.5 * f.corridor + 0.5 * f.meso_coverage;
  f.total = 0.5 * f.inventory + 0.5 * f.spatial;
  return f;
}

double fitness_feasible(const Room& room, const FitnessConfig& cfg) {
  if (!room_feasible(room, cfg).feasible) throw ContractError("feasible fitness requested for an infeasible room");
  return fitness_breakdown(room, analyze_patterns(room, cfg.meso), cfg).total;
}

double fitness_infeasible(const Room& room) {
  const auto& doors = room.doors();
  if (doors.empty()) return 0.0;
  const auto label = passable_components(room);

  double door_term = 0.0;
  if (doors.size() >= 2) {
    std::size_t pairs = 0, connected = 0;
    for (std::size_t a = 0; a < doors.size(); ++a) {
      for (std::size_t b = a + 1; b < doors.size(); ++b) {
        ++pairs;
        connected += label[room.index(doors[a])] == label[room.index(doors[b])] ? 1 : 0;
      }
    }
    door_term = static_cast<double>(connected) / static_cast<double>(pairs);
  }

  std::vector<std::uint8_t> door_component(room.size() + 1, 0);
  for (const Position d : doors) door_component[static_cast<std::size_t>(label[room.index(d)])] = 1;
  std::size_t content = 0, reachable = 0;
  for (std::size_t i = 0; i < room.size(); ++i) {
    const TileKind k = room.tiles()[i];
    if (k != TileKind::Enemy && k != TileKind::Treasure) continue;
    ++content;
    reachable += door_component[static_cast<std::size_t>(label[i])] ? 1 : 0;
  }
  const double content_term = content ? static_cast<double>(reachable) / static_cast<double>(content) : 0.0;
  return 0.5 * door_term + 0.5 * content_term;
}

std::vector<double> dimension_values(const Room& room, std::span<const DimensionDescriptor> dims,
                                     const Room* target) {
  std::vector<double> out;
  out.reserve(dims.size());
  std::optional<RoomMetrics> metrics;
  const auto pattern_metrics = [&]() -> const RoomMetrics& {
    if (!metrics) metrics = room_metrics(room, analyze_patterns(room));
    return *metrics;
  };
  for (const auto& d : dims) {
    switch (d.kind) {
      case DimensionKind::Symmetry: out.push_back(symmetry(room)); break;
      case DimensionKind::Similarity:
        if (!target) throw PreconditionError("similarity dimension needs a target room");
        out.push_back(similarity(room, *target));
        break;
      case DimensionKind::MesoPatterns: out.push_back(meso_pattern_dimension(pattern_metrics())); break;
      case DimensionKind::SpatialPatterns: out.push_back(spatial_pattern_dimension(pattern_metrics())); break;
      case DimensionKind::Linearity: out.push_back(linearity_dimension(pattern_metrics())); break;
    }
  }
  return out;
}

}  // namespace edd
