#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "edd/patterns.hpp"
#include "edd/room.hpp"

namespace edd {

enum class DimensionKind { Symmetry, Similarity, MesoPatterns, SpatialPatterns, Linearity };

inline constexpr std::array<DimensionKind, 5> kAllDimensions = {
    DimensionKind::Symmetry, DimensionKind::Similarity, DimensionKind::MesoPatterns,
    DimensionKind::SpatialPatterns, DimensionKind::Linearity};

std::string_view dimension_name(DimensionKind k) noexcept;
std::optional<DimensionKind> dimension_from_name(std::string_view name) noexcept;

struct DimensionDescriptor {
  static constexpr int kMinGranularity = 2;
  static constexpr int kMaxGranularity = 20;

  DimensionKind kind = DimensionKind::Symmetry;
  int granularity = 5;

  friend bool operator==(const DimensionDescriptor&, const DimensionDescriptor&) = default;
};

// Throws PreconditionError unless granularity is in [2, 20].
void validate(const DimensionDescriptor& d);
// "name:granularity" pairs separated by commas, e.g. "spatial-patterns:5,symmetry:5".
std::vector<DimensionDescriptor> parse_dimensions(std::string_view text);
std::string format_dimensions(std::span<const DimensionDescriptor> dims);

// Raw counts behind the meso-pattern, spatial-pattern and linearity dimensions.
struct RoomMetrics {
  static constexpr double kSpatialScale = 4.0;  // K

  std::size_t meso_count = 0;
  std::size_t spatial_count = 0;
  std::size_t door_path_count = 0;
  std::size_t door_neighbor_count = 0;
  std::size_t max_chambers = 0;
  std::size_t door_count = 0;
  int width = 0;
  int height = 0;
};

RoomMetrics room_metrics(const Room& room, const PatternGraph& graph);

double symmetry(const Room& room);
// Symmetry along a single mirror axis; diagonal axes return nullopt for non-square rooms.
enum class MirrorAxis { Vertical, Horizontal, Backslash, Slash };
std::optional<double> symmetry_along(const Room& room, MirrorAxis axis);
double similarity(const Room& room, const Room& target);

double meso_pattern_dimension(const RoomMetrics& m);
double spatial_pattern_dimension(const RoomMetrics& m);
double linearity_dimension(const RoomMetrics& m);
double meso_pattern_dimension(const Room& room);
double spatial_pattern_dimension(const Room& room);
double linearity_dimension(const Room& room);

enum class RoomViolation { NoDoors, DoorsDisconnected, UnreachableContent, MissingInventory };
std::string_view violation_name(RoomViolation v) noexcept;

struct FitnessConfig {
  double target_enemy_frac = 0.10;
  double target_treasure_frac = 0.08;
  double target_corridor_frac = 0.40;
  bool require_inventory = true;
  MesoRules meso{};
};

struct RoomFeasibility {
  bool feasible = false;
  std::vector<RoomViolation> violations;
};

// Doors mutually reachable, every enemy/treasure reachable from a door, and
// (optionally) at least one enemy and one treasure.
RoomFeasibility room_feasible(const Room& room, const FitnessConfig& cfg = {});

struct FitnessBreakdown {
  double inventory = 0.0;  // f_inv
  double corridor = 0.0;   // 1 - normalized corridor-fraction distance
  double meso_coverage = 0.0;
  double spatial = 0.0;    // f_spatial
  double total = 0.0;
};

// Components for a room regardless of feasibility (used by tests and reports).
FitnessBreakdown fitness_breakdown(const Room& room, const PatternGraph& graph, const FitnessConfig& cfg);
// Throws ContractError for infeasible rooms.
double fitness_feasible(const Room& room, const FitnessConfig& cfg = {});
double fitness_infeasible(const Room& room);

// Evaluates each descriptor in order. Throws PreconditionError when Similarity
// is requested without a target.
std::vector<double> dimension_values(const Room& room, std::span<const DimensionDescriptor> dims,
                                     const Room* target);

}  // namespace edd
