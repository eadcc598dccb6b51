#include "edd/patterns.hpp"

#include <algorithm>
#include <array>
#include <functional>
#include <set>

namespace edd {

namespace {

constexpr std::array<Position, 4> kSteps = {Position{-1, 0}, Position{0, -1}, Position{0, 1},
                                            Position{1, 0}};

struct Rect {
  int top = 0, left = 0, height = 0, width = 0;
  int area() const { return height * width; }
};

// Candidate `a` beats `b`: larger area, then topmost, leftmost, wider.
bool better(const Rect& a, const Rect& b) {
  if (a.area() != b.area()) return a.area() > b.area();
  if (a.top != b.top) return a.top < b.top;
  if (a.left != b.left) return a.left < b.left;
  return a.width > b.width;
}

std::optional<Rect> largest_free_rectangle(const std::vector<std::uint8_t>& free, int w, int h) {
  // prefix[(r)*(w+1)+c] = free tiles in rows [0,r) x cols [0,c)
  std::vector<int> prefix(static_cast<std::size_t>((w + 1) * (h + 1)), 0);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      prefix[static_cast<std::size_t>((r + 1) * (w + 1) + c + 1)] =
          free[static_cast<std::size_t>(r * w + c)] + prefix[static_cast<std::size_t>(r * (w + 1) + c + 1)] +
          prefix[static_cast<std::size_t>((r + 1) * (w + 1) + c)] - prefix[static_cast<std::size_t>(r * (w + 1) + c)];
    }
  }
  const auto sum = [&](int top, int left, int rows, int cols) {
    const auto at = [&](int r, int c) { return prefix[static_cast<std::size_t>(r * (w + 1) + c)]; };
    return at(top + rows, left + cols) - at(top, left + cols) - at(top + rows, left) + at(top, left);
  };

  std::optional<Rect> best;
  for (int top = 0; top + 3 <= h; ++top) {
    for (int left = 0; left + 3 <= w; ++left) {
      for (int rows = 3; top + rows <= h; ++rows) {
        if (sum(top, left, rows, 3) != rows * 3) break;
        for (int cols = 3; left + cols <= w; ++cols) {
          if (sum(top, left, rows, cols) != rows * cols) break;
          const Rect cand{top, left, rows, cols};
          if (!best || better(cand, *best)) best = cand;
        }
      }
    }
  }
  return best;
}

}  // namespace

std::string_view pattern_name(PatternKind k) noexcept {
  switch (k) {
    case PatternKind::Chamber: return "chamber";
    case PatternKind::Corridor: return "corridor";
    case PatternKind::Connector: return "connector";
    case PatternKind::Nothing: return "nothing";
  }
  return "nothing";
}

std::string_view meso_name(MesoKind k) noexcept {
  switch (k) {
    case MesoKind::TreasureRoom: return "treasure-room";
    case MesoKind::GuardRoom: return "guard-room";
    case MesoKind::Ambush: return "ambush";
  }
  return "ambush";
}

std::vector<std::vector<std::size_t>> PatternGraph::adjacency() const {
  std::vector<std::vector<std::size_t>> adj(nodes.size());
  for (const auto& [a, b] : edges) {
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  for (auto& list : adj) std::sort(list.begin(), list.end());
  return adj;
}

std::size_t PatternGraph::count(PatternKind k) const noexcept {
  return static_cast<std::size_t>(
      std::count_if(nodes.begin(), nodes.end(), [k](const SpatialPattern& n) { return n.kind == k; }));
}

std::size_t PatternGraph::tile_count(PatternKind k) const noexcept {
  std::size_t total = 0;
  for (const auto& n : nodes) {
    if (n.kind == k) total += n.tiles.size();
  }
  return total;
}

PatternGraph detect_spatial_patterns(const Room& room) {
  const int w = room.width();
  const int h = room.height();
  const auto tiles = room.tiles();
  const auto n = tiles.size();

  PatternGraph g;
  g.width = w;
  g.height = h;
  g.owner.assign(n, -1);

  std::vector<std::uint8_t> free(n, 0);
  for (std::size_t i = 0; i < n; ++i) free[i] = is_passable(tiles[i]) ? 1 : 0;

  const auto add_node = [&](PatternKind kind, std::vector<std::size_t> members, bool vertical) {
    std::sort(members.begin(), members.end());
    SpatialPattern p;
    p.kind = kind;
    p.vertical = vertical;
    for (const auto i : members) {
      const Position pos = room.position(i);
      p.tiles.push_back(pos);
      if (tiles[i] == TileKind::Door) p.doors.push_back(pos);
      g.owner[i] = static_cast<int>(g.nodes.size());
      free[i] = 0;
    }
    g.nodes.push_back(std::move(p));
  };

  // 1. Chambers.
  while (const auto rect = largest_free_rectangle(free, w, h)) {
    std::vector<std::size_t> members;
    for (int r = rect->top; r < rect->top + rect->height; ++r) {
      for (int c = rect->left; c < rect->left + rect->width; ++c) members.push_back(room.index({r, c}));
    }
    add_node(PatternKind::Chamber, std::move(members), false);
  }

  // Neighbor structure among the unclaimed tiles.
  const auto unclaimed = [&](Position p) { return room.in_bounds(p) && free[room.index(p)] != 0; };
  std::vector<std::uint8_t> horiz(n, 0), vert(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    if (!free[i]) continue;
    const Position p = room.position(i);
    horiz[i] = unclaimed({p.row, p.col - 1}) || unclaimed({p.row, p.col + 1});
    vert[i] = unclaimed({p.row - 1, p.col}) || unclaimed({p.row + 1, p.col});
  }

  // 2. Connectors from junction groups.
  std::vector<std::uint8_t> junction(n, 0);
  for (std::size_t i = 0; i < n; ++i) junction[i] = free[i] && horiz[i] && vert[i];
  for (std::size_t i = 0; i < n; ++i) {
    if (!junction[i] || !free[i]) continue;
    std::vector<std::size_t> members;
    std::vector<std::size_t> stack{i};
    std::vector<std::uint8_t> seen(n, 0);
    seen[i] = 1;
    while (!stack.empty()) {
      const auto k = stack.back();
      stack.pop_back();
      members.push_back(k);
      const Position p = room.position(k);
      for (const Position d : kSteps) {
        const Position q{p.row + d.row, p.col + d.col};
        if (!room.in_bounds(q)) continue;
        const auto j = room.index(q);
        if (junction[j] && !seen[j]) {
          seen[j] = 1;
          stack.push_back(j);
        }
      }
    }
    add_node(PatternKind::Connector, std::move(members), false);
  }

  // 3. Corridors: straight runs of remaining tiles along their single axis.
  std::vector<std::size_t> singles;
  for (std::size_t i = 0; i < n; ++i) {
    if (!free[i]) continue;
    const Position p = room.position(i);
    const bool vertical = vert[i] && !horiz[i];
    std::vector<std::size_t> run{i};
    if (horiz[i] || vertical) {
      const Position step = vertical ? Position{1, 0} : Position{0, 1};
      for (Position q{p.row + step.row, p.col + step.col};
           room.in_bounds(q) && free[room.index(q)] && !junction[room.index(q)];
           q = {q.row + step.row, q.col + step.col}) {
        run.push_back(room.index(q));
      }
    }
    if (run.size() >= 2) {
      add_node(PatternKind::Corridor, std::move(run), vertical);
    } else {
      singles.push_back(i);
      free[i] = 0;  // keep later runs from starting here; re-owned below
    }
  }

  // 4. Single leftovers.
  for (const auto i : singles) {
    const Position p = room.position(i);
    std::set<int> touching;
    for (const Position d : kSteps) {
      const Position q{p.row + d.row, p.col + d.col};
      if (room.in_bounds(q) && g.owner[room.index(q)] >= 0) touching.insert(g.owner[room.index(q)]);
    }
    add_node(touching.size() >= 2 ? PatternKind::Connector : PatternKind::Nothing, {i}, false);
  }

  // Edges between orthogonally adjacent tiles of different nodes.
  std::set<std::pair<std::size_t, std::size_t>> edges;
  for (std::size_t i = 0; i < n; ++i) {
    if (g.owner[i] < 0) continue;
    const Position p = room.position(i);
    for (const Position q : {Position{p.row, p.col + 1}, Position{p.row + 1, p.col}}) {
      if (!room.in_bounds(q)) continue;
      const int a = g.owner[i];
      const int b = g.owner[room.index(q)];
      if (b < 0 || a == b) continue;
      edges.insert({static_cast<std::size_t>(std::min(a, b)), static_cast<std::size_t>(std::max(a, b))});
    }
  }
  g.edges.assign(edges.begin(), edges.end());
  return g;
}

PatternGraph detect_meso_patterns(const Room& room, PatternGraph graph, const MesoRules& rules) {
  graph.meso.clear();
  for (std::size_t i = 0; i < graph.nodes.size(); ++i) {
    const auto& node = graph.nodes[i];
    if (node.kind != PatternKind::Chamber) continue;
    int treasures = 0;
    int enemies = 0;
    bool enemy_near_door = false;
    for (const Position p : node.tiles) {
      const TileKind k = room.at(p);
      if (k == TileKind::Treasure) ++treasures;
      if (k != TileKind::Enemy) continue;
      ++enemies;
      for (const Position d : node.doors) {
        if (std::abs(d.row - p.row) + std::abs(d.col - p.col) <= rules.ambush_radius) enemy_near_door = true;
      }
    }
    if (treasures >= rules.treasure_room_min_treasures && enemies == 0) {
      graph.meso.push_back({MesoKind::TreasureRoom, i});
    } else if (treasures >= rules.guard_room_min_treasures && enemies >= rules.guard_room_min_enemies) {
      graph.meso.push_back({MesoKind::GuardRoom, i});
    } else if (!node.doors.empty() && enemy_near_door && treasures == 0) {
      graph.meso.push_back({MesoKind::Ambush, i});
    }
  }
  return graph;
}

std::size_t count_door_paths(const PatternGraph& graph, std::size_t cap_per_pair) {
  std::vector<std::size_t> door_nodes;
  for (std::size_t i = 0; i < graph.nodes.size(); ++i) {
    if (!graph.nodes[i].doors.empty()) door_nodes.push_back(i);
  }
  if (door_nodes.size() < 2) return 0;

  const auto adj = graph.adjacency();
  std::vector<int> component(graph.nodes.size(), -1);
  for (std::size_t s = 0; s < graph.nodes.size(); ++s) {
    if (component[s] >= 0) continue;
    std::vector<std::size_t> stack{s};
    component[s] = static_cast<int>(s);
    while (!stack.empty()) {
      const auto u = stack.back();
      stack.pop_back();
      for (const auto v : adj[u]) {
        if (component[v] < 0) {
          component[v] = static_cast<int>(s);
          stack.push_back(v);
        }
      }
    }
  }

  // Each expansion keeps only neighbors that can still reach `to` off the current path,
  // so every explored branch ends in at least one path and work is bounded by the cap.
  const std::size_t n = graph.nodes.size();
  std::vector<std::uint8_t> on_path(n, 0);
  std::vector<std::uint32_t> mark(n, 0);
  std::uint32_t epoch = 0;
  std::vector<std::size_t> queue;
  const auto reachable_from_target = [&](std::size_t to) {
    ++epoch;
    queue.assign(1, to);
    mark[to] = epoch;
    for (std::size_t head = 0; head < queue.size(); ++head) {
      for (const auto v : adj[queue[head]]) {
        if (mark[v] != epoch && !on_path[v]) {
          mark[v] = epoch;
          queue.push_back(v);
        }
      }
    }
    return epoch;
  };

  std::size_t total = 0;
  for (std::size_t a = 0; a < door_nodes.size(); ++a) {
    for (std::size_t b = a + 1; b < door_nodes.size(); ++b) {
      const auto from = door_nodes[a];
      const auto to = door_nodes[b];
      if (component[from] != component[to]) continue;
      std::size_t found = 0;
      std::function<void(std::size_t)> walk = [&](std::size_t u) {
        if (u == to) {
          ++found;
          return;
        }
        on_path[u] = 1;
        const auto live = reachable_from_target(to);
        std::vector<std::size_t> next;
        for (const auto v : adj[u]) {
          if (!on_path[v] && mark[v] == live) next.push_back(v);
        }
        for (const auto v : next) {
          if (found >= cap_per_pair) break;
          walk(v);
        }
        on_path[u] = 0;
      };
      walk(from);
      total += std::min(found, cap_per_pair);
    }
  }
  return total;
}

std::string pattern_overlay(const PatternGraph& graph) {
  std::string out;
  for (int r = 0; r < graph.height; ++r) {
    for (int c = 0; c < graph.width; ++c) {
      const int o = graph.owner[static_cast<std::size_t>(r * graph.width + c)];
      char ch = '#';
      if (o >= 0) {
        const auto& node = graph.nodes[static_cast<std::size_t>(o)];
        switch (node.kind) {
          case PatternKind::Chamber: ch = 'C'; break;
          case PatternKind::Corridor: ch = node.vertical ? '|' : '-'; break;
          case PatternKind::Connector: ch = '+'; break;
          case PatternKind::Nothing: ch = '.'; break;
        }
      }
      out.push_back(ch);
    }
    out.push_back('\n');
  }
  return out;
}

}  // namespace edd
