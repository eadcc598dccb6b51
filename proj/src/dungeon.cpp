#include "edd/dungeon.hpp"

#include <algorithm>
#include <array>
#include <queue>
#include <tuple>

#include "edd/errors.hpp"

namespace edd {

namespace {

constexpr std::array<Position, 4> kSteps = {Position{-1, 0}, Position{0, -1}, Position{0, 1},
                                            Position{1, 0}};

std::string describe(const RoomId& id, Position p) {
  return id + "(" + std::to_string(p.row) + "," + std::to_string(p.col) + ")";
}

// Every passable tile of every room as one node; doors linked across connections.
struct FlatGraph {
  std::vector<const Room*> rooms;
  std::vector<RoomId> ids;
  std::vector<std::size_t> offset;
  std::vector<std::vector<std::size_t>> links;  // node -> nodes across connections

  explicit FlatGraph(const Dungeon& d) {
    std::size_t total = 0;
    for (const auto& [id, room] : d.rooms()) {
      rooms.push_back(&room);
      ids.push_back(id);
      offset.push_back(total);
      total += room.size();
    }
    links.resize(total);
    for (const auto& c : d.connections()) {
      const auto a = node(c.room_a, c.tile_a);
      const auto b = node(c.room_b, c.tile_b);
      links[a].push_back(b);
      links[b].push_back(a);
    }
  }

  std::size_t room_index(const RoomId& id) const {
    const auto it = std::lower_bound(ids.begin(), ids.end(), id);
    if (it == ids.end() || *it != id) throw NotFoundError("unknown room " + id);
    return static_cast<std::size_t>(it - ids.begin());
  }
  std::size_t node(const RoomId& id, Position p) const {
    const auto r = room_index(id);
    return offset[r] + rooms[r]->index(p);
  }
  std::size_t size() const { return links.size(); }
  std::size_t room_of(std::size_t n) const {
    return static_cast<std::size_t>(std::upper_bound(offset.begin(), offset.end(), n) - offset.begin()) - 1;
  }
  TileRef ref(std::size_t n) const {
    const auto r = room_of(n);
    return {ids[r], rooms[r]->position(n - offset[r])};
  }
  TileKind kind(std::size_t n) const {
    const auto r = room_of(n);
    return rooms[r]->tiles()[n - offset[r]];
  }

  template <typename F>
  void for_each_neighbor(std::size_t n, F&& f) const {
    const auto r = room_of(n);
    const Room& room = *rooms[r];
    const Position p = room.position(n - offset[r]);
    for (const Position d : kSteps) {
      const Position q{p.row + d.row, p.col + d.col};
      if (!room.in_bounds(q) || !is_passable(room.at(q))) continue;
      f(offset[r] + room.index(q));
    }
    for (const auto m : links[n]) f(m);
  }
};

}  // namespace

const Room& Dungeon::room(const RoomId& id) const {
  const auto it = rooms_.find(id);
  if (it == rooms_.end()) throw NotFoundError("unknown room " + id);
  return it->second;
}

std::optional<std::size_t> Dungeon::connection_at(const RoomId& id, Position p) const {
  for (std::size_t i = 0; i < connections_.size(); ++i) {
    const auto& c = connections_[i];
    if ((c.room_a == id && c.tile_a == p) || (c.room_b == id && c.tile_b == p)) return i;
  }
  return std::nullopt;
}

Dungeon Dungeon::add_room(Room room) const {
  if (room.id().empty()) throw PreconditionError("room needs an id to join a dungeon");
  if (rooms_.count(room.id())) throw PreconditionError("duplicate room id " + room.id());
  if (!room.doors().empty()) {
    throw PreconditionError("room " + room.id() + " has doors that are not connections");
  }
  Dungeon next = *this;
  auto id = room.id();
  next.rooms_.emplace(std::move(id), std::move(room));
  return next;
}

Dungeon Dungeon::remove_room(const RoomId& id) const {
  if (!rooms_.count(id)) throw NotFoundError("unknown room " + id);
  Dungeon next = *this;
  std::vector<Connection> kept;
  for (const auto& c : connections_) {
    if (c.room_a == id || c.room_b == id) {
      if (c.room_a != id) next.rooms_.at(c.room_a) = next.rooms_.at(c.room_a).without_door(c.tile_a);
      if (c.room_b != id) next.rooms_.at(c.room_b) = next.rooms_.at(c.room_b).without_door(c.tile_b);
    } else {
      kept.push_back(c);
    }
  }
  next.connections_ = std::move(kept);
  next.rooms_.erase(id);
  if (next.initial_ == id) next.initial_.reset();
  return next;
}

Dungeon Dungeon::connect(const RoomId& a, Position tile_a, const RoomId& b, Position tile_b) const {
  if (a == b) throw SelfLoopError("cannot connect room " + a + " to itself");
  const Room& ra = room(a);
  const Room& rb = room(b);
  for (const auto& [id, r, p] : {std::tuple<const RoomId&, const Room&, Position>{a, ra, tile_a},
                                 std::tuple<const RoomId&, const Room&, Position>{b, rb, tile_b}}) {
    if (!r.in_bounds(p)) throw InvalidEndpointError(describe(id, p) + " is outside the room");
    if (connection_at(id, p)) throw OccupiedEndpointError(describe(id, p) + " already holds a connection");
    if (!r.on_border(p)) throw InvalidEndpointError(describe(id, p) + " is not a border tile");
    if (!is_passable(r.at(p))) throw InvalidEndpointError(describe(id, p) + " is not passable");
  }
  Dungeon next = *this;
  next.rooms_.at(a) = ra.with_door(tile_a);
  next.rooms_.at(b) = rb.with_door(tile_b);
  next.connections_.push_back({a, tile_a, b, tile_b});
  return next;
}

Dungeon Dungeon::disconnect(std::size_t connection_index) const {
  if (connection_index >= connections_.size()) {
    throw NotFoundError("no connection #" + std::to_string(connection_index));
  }
  Dungeon next = *this;
  const Connection c = connections_[connection_index];
  next.rooms_.at(c.room_a) = next.rooms_.at(c.room_a).without_door(c.tile_a);
  next.rooms_.at(c.room_b) = next.rooms_.at(c.room_b).without_door(c.tile_b);
  next.connections_.erase(next.connections_.begin() + static_cast<std::ptrdiff_t>(connection_index));
  return next;
}

Dungeon Dungeon::set_initial_room(const RoomId& id) const {
  if (!rooms_.count(id)) throw NotFoundError("unknown room " + id);
  Dungeon next = *this;
  next.initial_ = id;
  return next;
}

Dungeon Dungeon::replace_room(Room room) const {
  const Room& current = this->room(room.id());
  if (room.doors() != current.doors()) {
    throw PreconditionError("replacement for room " + room.id() + " changes its doors");
  }
  Dungeon next = *this;
  next.rooms_.at(room.id()) = std::move(room);
  return next;
}

FeasibilityReport check_dungeon_feasibility(const Dungeon& dungeon) {
  if (!dungeon.initial_room()) throw PreconditionError("dungeon has no initial room");
  const FlatGraph g(dungeon);
  const auto init = g.room_index(*dungeon.initial_room());
  const Room& entry = *g.rooms[init];

  // Largest in-room passable region of the initial room seeds the search.
  std::vector<int> region(entry.size(), -1);
  std::size_t best_start = entry.size();
  std::size_t best_size = 0;
  for (std::size_t i = 0; i < entry.size(); ++i) {
    if (region[i] >= 0 || !is_passable(entry.tiles()[i])) continue;
    std::size_t count = 0;
    std::vector<std::size_t> stack{i};
    region[i] = static_cast<int>(i);
    while (!stack.empty()) {
      const auto k = stack.back();
      stack.pop_back();
      ++count;
      const Position p = entry.position(k);
      for (const Position d : kSteps) {
        const Position q{p.row + d.row, p.col + d.col};
        if (!entry.in_bounds(q)) continue;
        const auto j = entry.index(q);
        if (region[j] >= 0 || !is_passable(entry.tiles()[j])) continue;
        region[j] = static_cast<int>(i);
        stack.push_back(j);
      }
    }
    if (count > best_size) {
      best_size = count;
      best_start = i;
    }
  }

  std::vector<std::uint8_t> reached(g.size(), 0);
  std::queue<std::size_t> frontier;
  if (best_start < entry.size()) {
    for (std::size_t i = 0; i < entry.size(); ++i) {
      if (region[i] == static_cast<int>(best_start)) {
        reached[g.offset[init] + i] = 1;
        frontier.push(g.offset[init] + i);
      }
    }
  }
  while (!frontier.empty()) {
    const auto n = frontier.front();
    frontier.pop();
    g.for_each_neighbor(n, [&](std::size_t m) {
      if (!reached[m]) {
        reached[m] = 1;
        frontier.push(m);
      }
    });
  }

  FeasibilityReport report;
  for (std::size_t r = 0; r < g.rooms.size(); ++r) {
    const Room& room = *g.rooms[r];
    std::vector<Position> missing;
    bool any = false;
    for (std::size_t i = 0; i < room.size(); ++i) {
      if (reached[g.offset[r] + i]) {
        any = true;
      } else if (is_passable(room.tiles()[i])) {
        missing.push_back(room.position(i));
      }
    }
    if (!any) {
      report.unreachable_rooms.push_back(g.ids[r]);
    } else if (!missing.empty()) {
      report.unreachable_tiles.emplace(g.ids[r], std::move(missing));
    }
  }
  report.feasible = report.unreachable_rooms.empty() && report.unreachable_tiles.empty();
  return report;
}

std::string_view heuristic_name(PathHeuristic h) noexcept {
  switch (h) {
    case PathHeuristic::Fastest: return "fastest";
    case PathHeuristic::Rewarding: return "rewarding";
    case PathHeuristic::LessDanger: return "less-danger";
    case PathHeuristic::MoreDanger: return "more-danger";
  }
  return "fastest";
}

std::optional<PathHeuristic> heuristic_from_name(std::string_view name) noexcept {
  for (auto h : {PathHeuristic::Fastest, PathHeuristic::Rewarding, PathHeuristic::LessDanger,
                 PathHeuristic::MoreDanger}) {
    if (heuristic_name(h) == name) return h;
  }
  return std::nullopt;
}

std::vector<TileRef> find_path(const Dungeon& dungeon, const TileRef& from, const TileRef& to,
                               PathHeuristic heuristic) {
  const FlatGraph g(dungeon);
  for (const auto* end : {&from, &to}) {
    const Room& r = dungeon.room(end->room);
    if (!r.in_bounds(end->pos) || !is_passable(r.at(end->pos))) {
      throw PreconditionError("path endpoint " + describe(end->room, end->pos) + " is not passable");
    }
  }
  const auto source = g.node(from.room, from.pos);
  const auto target = g.node(to.room, to.pos);

  // Lexicographic (primary, secondary); every step adds >= 1 to primary.
  using Cost = std::pair<long, long>;
  const auto step_cost = [heuristic](TileKind entered) -> Cost {
    switch (heuristic) {
      case PathHeuristic::Fastest: return {1, 0};
      case PathHeuristic::Rewarding: return {1, entered == TileKind::Treasure ? -1 : 0};
      case PathHeuristic::LessDanger: return {1 + (entered == TileKind::Enemy ? kEnemyPenalty : 0), 0};
      case PathHeuristic::MoreDanger: return {1, entered == TileKind::Enemy ? -1 : 0};
    }
    return {1, 0};
  };
  // Tie-break key: (row, col, room order), room order follows sorted ids.
  const auto key = [&g](std::size_t n) {
    const auto r = g.room_of(n);
    const Position p = g.rooms[r]->position(n - g.offset[r]);
    return std::tuple{p.row, p.col, r};
  };

  constexpr std::size_t kNone = static_cast<std::size_t>(-1);
  std::vector<std::optional<Cost>> dist(g.size());
  std::vector<std::size_t> pred(g.size(), kNone);
  std::vector<std::uint8_t> done(g.size(), 0);
  using Entry = std::tuple<Cost, std::tuple<int, int, std::size_t>, std::size_t>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
  dist[source] = Cost{0, 0};
  open.push({Cost{0, 0}, key(source), source});
  while (!open.empty()) {
    const auto [cost, k, n] = open.top();
    open.pop();
    if (done[n]) continue;
    done[n] = 1;
    if (n == target) break;
    g.for_each_neighbor(n, [&, cost = cost, n = n](std::size_t m) {
      if (done[m]) return;
      const Cost step = step_cost(g.kind(m));
      const Cost next{cost.first + step.first, cost.second + step.second};
      if (!dist[m] || next < *dist[m] || (next == *dist[m] && key(n) < key(pred[m]))) {
        dist[m] = next;
        pred[m] = n;
        open.push({next, key(m), m});
      }
    });
  }
  if (!done[target]) {
    throw NoPathError("no path from " + describe(from.room, from.pos) + " to " +
                      describe(to.room, to.pos));
  }
  std::vector<TileRef> path;
  for (auto n = target; n != kNone; n = pred[n]) path.push_back(g.ref(n));
  std::reverse(path.begin(), path.end());
  return path;
}

}  // namespace edd
