#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "edd/room.hpp"

namespace edd {

using RoomId = std::string;

struct TileRef {
  RoomId room;
  Position pos;

  friend auto operator<=>(const TileRef&, const TileRef&) = default;
};

// Bi-directional link between two border tiles; both ends are Door tiles.
struct Connection {
  RoomId room_a;
  Position tile_a;
  RoomId room_b;
  Position tile_b;

  friend bool operator==(const Connection&, const Connection&) = default;
};

// Graph of rooms joined by door connections. Value type: every mutation
// returns a new dungeon.
class Dungeon {
 public:
  const std::map<RoomId, Room>& rooms() const noexcept { return rooms_; }
  const std::vector<Connection>& connections() const noexcept { return connections_; }
  const std::optional<RoomId>& initial_room() const noexcept { return initial_; }

  bool has_room(const RoomId& id) const { return rooms_.count(id) != 0; }
  const Room& room(const RoomId& id) const;
  // Index into connections() of the connection holding this endpoint, if any.
  std::optional<std::size_t> connection_at(const RoomId& id, Position p) const;

  // The room must carry a non-empty unique id and no Door tiles.
  Dungeon add_room(Room room) const;
  // Drops incident connections; peer Door tiles revert to Floor.
  Dungeon remove_room(const RoomId& id) const;
  Dungeon connect(const RoomId& a, Position tile_a, const RoomId& b, Position tile_b) const;
  Dungeon disconnect(std::size_t connection_index) const;
  Dungeon set_initial_room(const RoomId& id) const;
  // Replaces a room's content; the door layout must be unchanged.
  Dungeon replace_room(Room room) const;

  friend bool operator==(const Dungeon&, const Dungeon&) = default;

 private:
  std::map<RoomId, Room> rooms_;
  std::vector<Connection> connections_;
  std::optional<RoomId> initial_;
};

struct FeasibilityReport {
  bool feasible = true;
  std::vector<RoomId> unreachable_rooms;
  // Unreached passable tiles of rooms that are partially reachable.
  std::map<RoomId, std::vector<Position>> unreachable_tiles;
};

// Flood fill from the initial room across doors. The entry region is the
// initial room's largest 4-connected passable region (ties: first in row-major
// order). Throws PreconditionError without an initial room.
FeasibilityReport check_dungeon_feasibility(const Dungeon& dungeon);

enum class PathHeuristic { Fastest, Rewarding, LessDanger, MoreDanger };

std::string_view heuristic_name(PathHeuristic h) noexcept;
std::optional<PathHeuristic> heuristic_from_name(std::string_view name) noexcept;

// Entering an enemy tile costs this many extra steps under LessDanger.
inline constexpr long kEnemyPenalty = 10;

// 4-directional path including both endpoints. Fastest minimizes steps;
// Rewarding/MoreDanger minimize steps then maximize treasures/enemies entered;
// LessDanger minimizes steps + kEnemyPenalty * enemies entered. Ties resolve
// toward the lowest (row, col, room-id) predecessor.
std::vector<TileRef> find_path(const Dungeon& dungeon, const TileRef& from, const TileRef& to,
                               PathHeuristic heuristic);

// Manifest: one declaration per line, '#' starts a comment.
//   room <id> <file>
//   connect <roomA> <rowA> <colA> <roomB> <rowB> <colB>
//   initial <id>
// Door tiles in room files must be connection endpoints.
using RoomLoader = std::function<Room(const std::string& file, const RoomId& id)>;
Dungeon parse_manifest(std::string_view text, const RoomLoader& loader);
std::string serialize_manifest(const Dungeon& dungeon);

Dungeon load_dungeon(const std::string& manifest_path);
// Writes <dir>/dungeon.manifest and one <id>.room per room.
void save_dungeon(const Dungeon& dungeon, const std::string& dir);

}  // namespace edd
