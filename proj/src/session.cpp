#include "edd/session.hpp"

#include <algorithm>
#include <future>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>

#include "json.hpp"

#include "edd/dungeon.hpp"
#include "edd/errors.hpp"
#include "edd/loop.hpp"
#include "schema_embed.hpp"

namespace edd {

using nlohmann::json;

std::string_view protocol_schema() { return kEmbeddedSchema; }

namespace {

class ProtocolError : public Error {
 public:
  using Error::Error;
};

[[noreturn]] void bad_payload(const std::string& message) { throw ProtocolError("invalid-payload", message); }

const json& field(const json& payload, const char* name) {
  const auto it = payload.find(name);
  if (it == payload.end()) bad_payload(std::string("missing field '") + name + "'");
  return *it;
}

std::string string_field(const json& payload, const char* name) {
  const auto& v = field(payload, name);
  if (!v.is_string()) bad_payload(std::string("field '") + name + "' must be a string");
  return v.get<std::string>();
}

long long integer_field(const json& payload, const char* name) {
  const auto& v = field(payload, name);
  if (!v.is_number_integer()) bad_payload(std::string("field '") + name + "' must be an integer");
  return v.get<long long>();
}

bool bool_field(const json& payload, const char* name, bool fallback) {
  const auto it = payload.find(name);
  if (it == payload.end()) return fallback;
  if (!it->is_boolean()) bad_payload(std::string("field '") + name + "' must be a boolean");
  return it->get<bool>();
}

Position position_from(const json& v, const char* name) {
  if (!v.is_array() || v.size() != 2 || !v[0].is_number_integer() || !v[1].is_number_integer()) {
    bad_payload(std::string("field '") + name + "' must be [row, col]");
  }
  return {v[0].get<int>(), v[1].get<int>()};
}

json position_json(Position p) { return json::array({p.row, p.col}); }

TileKind tile_field(const json& payload, const char* name) {
  const auto text = string_field(payload, name);
  const auto kind = tile_from_name(text);
  if (!kind) bad_payload("unknown tile kind '" + text + "'");
  return *kind;
}

json room_json(const Room& room) {
  std::vector<std::string> rows;
  std::istringstream in(serialize_room(room));
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) rows.push_back(line);
  return {{"id", room.id()}, {"width", room.width()}, {"height", room.height()}, {"rows", rows}};
}

Room room_from(const json& v, std::string id) {
  if (!v.is_object()) bad_payload("room must be an object");
  const auto width = integer_field(v, "width");
  const auto height = integer_field(v, "height");
  const auto& rows = field(v, "rows");
  if (!rows.is_array()) bad_payload("room rows must be an array of strings");
  std::string text = std::to_string(width) + " " + std::to_string(height) + "\n";
  for (const auto& row : rows) {
    if (!row.is_string()) bad_payload("room rows must be an array of strings");
    text += row.get<std::string>() + "\n";
  }
  if (id.empty() && v.contains("id") && v["id"].is_string()) id = v["id"].get<std::string>();
  return parse_room(text, std::move(id));
}

json dims_json(std::span<const DimensionDescriptor> dims) {
  json out = json::array();
  for (const auto& d : dims) out.push_back({{"kind", dimension_name(d.kind)}, {"granularity", d.granularity}});
  return out;
}

std::vector<DimensionDescriptor> dims_from(const json& v) {
  if (!v.is_array()) bad_payload("dims must be an array");
  std::vector<DimensionDescriptor> dims;
  for (const auto& d : v) {
    if (!d.is_object()) bad_payload("each dimension must be an object");
    const auto name = string_field(d, "kind");
    const auto kind = dimension_from_name(name);
    if (!kind) bad_payload("unknown dimension '" + name + "'");
    dims.push_back({*kind, static_cast<int>(integer_field(d, "granularity"))});
  }
  validate_dimensions(dims);
  return dims;
}

json elite_json(const std::vector<int>& index, const Individual& ind) {
  return {{"index", index}, {"fitness", ind.fitness}, {"dims", ind.dims}, {"room", room_json(ind.genotype)}};
}

json tile_ref_json(const TileRef& t) { return {{"room", t.room}, {"pos", position_json(t.pos)}}; }

TileRef tile_ref_from(const json& v, const char* name) {
  if (!v.is_object()) bad_payload(std::string("field '") + name + "' must be {room, pos}");
  return {string_field(v, "room"), position_from(field(v, "pos"), "pos")};
}

json connection_json(const Connection& c) {
  return {{"roomA", c.room_a}, {"tileA", position_json(c.tile_a)}, {"roomB", c.room_b}, {"tileB", position_json(c.tile_b)}};
}

bool same_elite(const std::optional<Individual>& a, const std::optional<Individual>& b) {
  if (a.has_value() != b.has_value()) return false;
  return !a || (a->fitness == b->fitness && a->genotype == b->genotype);
}

// The elite grid as last sent to the client.
struct PublishedGrid {
  bool valid = false;
  std::vector<DimensionDescriptor> dims;
  std::vector<std::vector<int>> indices;
  std::vector<std::optional<Individual>> elites;
};

}  // namespace

struct Session::Impl {
  using Handler = json (Impl::*)(const json&);

  SessionOptions options;
  Writer writer;

  std::mutex out_mutex;  // writer, event_seq, grid
  std::uint64_t event_seq = 0;
  PublishedGrid grid;
  std::vector<std::string> rejections;  // engine-side command failures not yet reported

  Dungeon dungeon;
  std::vector<DimensionDescriptor> dims;
  std::optional<RoomId> target_room;
  bool has_engine = false;
  bool running = false;
  std::unique_ptr<ContinuousRunner> runner;
  std::unique_ptr<EvolutionLoop> loop;

  Impl(SessionOptions opts, Writer w) : options(std::move(opts)), writer(std::move(w)), dims(options.engine.dims) {
    validate(options.engine);
  }

  static const std::map<std::string, Handler>& handlers() {
    static const std::map<std::string, Handler> table = {
        {"createRoom", &Impl::create_room},
        {"removeRoom", &Impl::remove_room},
        {"paintTiles", &Impl::paint},
        {"brush", &Impl::brush},
        {"bucketPaint", &Impl::bucket},
        {"connectRooms", &Impl::connect},
        {"disconnect", &Impl::disconnect},
        {"setInitialRoom", &Impl::set_initial},
        {"getDungeon", &Impl::get_dungeon},
        {"checkFeasibility", &Impl::check_feasibility},
        {"findPath", &Impl::path},
        {"updateTarget", &Impl::update_target},
        {"setDimensions", &Impl::set_dimensions},
        {"start", &Impl::start},
        {"stop", &Impl::stop},
        {"applySuggestion", &Impl::apply_suggestion},
        {"requestSnapshot", &Impl::snapshot},
        {"resync", &Impl::resync},
        {"suggestions", &Impl::suggestions},
    };
    return table;
  }

  // Output ------------------------------------------------------------------

  void write_locked(const json& doc) {
    if (writer) writer(doc.dump());
  }

  void emit_event_locked(const std::string& op, std::uint64_t generation, json payload) {
    if (!rejections.empty()) {
      payload["rejected"] = rejections;
      rejections.clear();
    }
    write_locked({{"kind", "event"},
                  {"seq", event_seq++},
                  {"op", op},
                  {"generation", generation},
                  {"payload", std::move(payload)}});
  }

  void respond(const json& seq, const std::string& op, json payload) {
    std::lock_guard lock(out_mutex);
    write_locked({{"kind", "response"}, {"seq", seq}, {"op", op}, {"ok", true}, {"payload", std::move(payload)}});
  }

  void respond_error(const json& seq, const std::string& op, const std::string& code, const std::string& message) {
    std::lock_guard lock(out_mutex);
    write_locked({{"kind", "response"},
                  {"seq", seq},
                  {"op", op},
                  {"ok", false},
                  {"error", {{"code", code}, {"message", message}}}});
  }

  json grid_cells_locked(bool only_changed, const std::vector<std::size_t>& changed) const {
    json cells = json::array();
    const auto add = [&](std::size_t i) {
      cells.push_back(grid.elites[i] ? elite_json(grid.indices[i], *grid.elites[i])
                                     : json{{"index", grid.indices[i]}, {"fitness", nullptr}});
    };
    if (only_changed) {
      for (const auto i : changed) add(i);
    } else {
      for (std::size_t i = 0; i < grid.indices.size(); ++i) add(i);
    }
    return cells;
  }

  void on_event(EngineEvent event) {
    std::lock_guard lock(out_mutex);
    if (auto* b = std::get_if<ElitesBroadcast>(&event)) {
      const bool full = !grid.valid || grid.dims != b->dims;
      std::vector<std::size_t> changed;
      for (std::size_t i = 0; i < b->elites.size(); ++i) {
        if (full || !same_elite(grid.elites[i], b->elites[i])) changed.push_back(i);
      }
      grid = PublishedGrid{true, b->dims, b->indices, b->elites};
      emit_event_locked("elites", b->generation,
                        {{"reason", "broadcast"},
                         {"full", full},
                         {"dims", dims_json(grid.dims)},
                         {"target", room_json(b->target)},
                         {"cells", grid_cells_locked(!full, changed)}});
    } else if (auto* u = std::get_if<CellUpdates>(&event)) {
      if (u->complete) {
        const Archive layout(u->dims);
        grid = PublishedGrid{true, u->dims, {}, std::vector<std::optional<Individual>>(layout.cells().size())};
        for (const auto& cell : layout.cells()) grid.indices.push_back(cell.index);
        for (auto& c : u->cells) grid.elites[layout.flat_index(c.index)] = std::move(c.elite);
        emit_event_locked("elites", u->generation,
                          {{"reason", "update"}, {"full", true}, {"dims", dims_json(grid.dims)},
                           {"cells", grid_cells_locked(false, {})}});
        return;
      }
      if (!grid.valid || grid.dims != u->dims) return;  // refers to a replaced layout
      const Archive layout(u->dims);
      std::vector<std::size_t> changed;
      for (auto& c : u->cells) {
        const auto i = layout.flat_index(c.index);
        grid.elites[i] = std::move(c.elite);
        changed.push_back(i);
      }
      emit_event_locked("elites", u->generation,
                        {{"reason", "update"}, {"full", false}, {"dims", dims_json(grid.dims)},
                         {"cells", grid_cells_locked(true, changed)}});
    } else if (auto* r = std::get_if<CommandRejected>(&event)) {
      // Reported with the next grid event so generations stay strictly increasing.
      rejections.push_back(r->message);
    }
  }

  // Engine plumbing -----------------------------------------------------------

  void submit(EngineCommand command) {
    if (runner) {
      runner->submit(std::move(command));
    } else if (loop) {
      loop->submit(std::move(command));
    }
  }

  void ensure_engine(const Room& target) {
    EngineConfig cfg = options.engine;
    cfg.dims = dims;
    auto sink = [this](EngineEvent e) { on_event(std::move(e)); };
    if (options.background) {
      runner = std::make_unique<ContinuousRunner>(std::move(cfg), target, sink);
    } else {
      loop = std::make_unique<EvolutionLoop>(std::move(cfg), target, sink);
    }
    has_engine = true;
  }

  Snapshot take_snapshot() {
    if (runner) return runner->request_snapshot().get();
    auto promise = std::make_shared<std::promise<Snapshot>>();
    auto future = promise->get_future();
    loop->submit(RequestSnapshot{promise});
    loop->apply_pending();
    return future.get();
  }

  void shutdown() {
    if (runner) runner->shutdown();
  }

  // Dungeon ops ---------------------------------------------------------------

  const Room& room_of(const json& payload, const char* name) { return dungeon.room(string_field(payload, name)); }

  json create_room(const json& p) {
    const auto id = string_field(p, "id");
    Room room = p.contains("room") ? room_from(p["room"], id)
                                   : Room(static_cast<int>(integer_field(p, "width")),
                                          static_cast<int>(integer_field(p, "height")), id);
    dungeon = dungeon.add_room(room);
    return {{"room", room_json(dungeon.room(id))}};
  }

  json remove_room(const json& p) {
    const auto id = string_field(p, "id");
    dungeon = dungeon.remove_room(id);
    if (target_room == id) target_room.reset();
    return json::object();
  }

  json replace(Room room) {
    dungeon = dungeon.replace_room(room);
    return {{"room", room_json(dungeon.room(room.id()))}};
  }

  json paint(const json& p) {
    const Room& room = room_of(p, "roomId");
    const auto& list = field(p, "tiles");
    if (!list.is_array()) bad_payload("field 'tiles' must be an array of [row, col]");
    std::vector<Position> cells;
    for (const auto& t : list) cells.push_back(position_from(t, "tiles"));
    return replace(paint_tiles(room, cells, tile_field(p, "kind"), bool_field(p, "lock", false)));
  }

  json brush(const json& p) {
    const Room& room = room_of(p, "roomId");
    const auto shape_name = p.contains("shape") ? string_field(p, "shape") : std::string("single");
    BrushShape shape;
    if (shape_name == "single") {
      shape = BrushShape::Single;
    } else if (shape_name == "cross") {
      shape = BrushShape::Cross;
    } else {
      bad_payload("unknown brush shape '" + shape_name + "'");
    }
    const Position center = position_from(field(p, "center"), "center");
    if (!room.in_bounds(center)) throw BoundsError("brush center outside the room");
    const auto cells = brush_cells(room, center, shape);
    return replace(paint_tiles(room, cells, tile_field(p, "kind"), bool_field(p, "lock", false)));
  }

  json bucket(const json& p) {
    const Room& room = room_of(p, "roomId");
    return replace(bucket_paint(room, position_from(field(p, "seed"), "seed"), tile_field(p, "kind")));
  }

  json connect(const json& p) {
    dungeon = dungeon.connect(string_field(p, "roomA"), position_from(field(p, "tileA"), "tileA"),
                              string_field(p, "roomB"), position_from(field(p, "tileB"), "tileB"));
    const auto index = dungeon.connections().size() - 1;
    return {{"index", index}, {"connection", connection_json(dungeon.connections().back())}};
  }

  json disconnect(const json& p) {
    const auto index = integer_field(p, "index");
    if (index < 0) throw NotFoundError("no connection " + std::to_string(index));
    dungeon = dungeon.disconnect(static_cast<std::size_t>(index));
    return json::object();
  }

  json set_initial(const json& p) {
    dungeon = dungeon.set_initial_room(string_field(p, "id"));
    return json::object();
  }

  json get_dungeon(const json&) {
    json rooms = json::array();
    for (const auto& [id, room] : dungeon.rooms()) rooms.push_back(room_json(room));
    json connections = json::array();
    for (const auto& c : dungeon.connections()) connections.push_back(connection_json(c));
    return {{"rooms", rooms},
            {"connections", connections},
            {"initialRoom", dungeon.initial_room() ? json(*dungeon.initial_room()) : json(nullptr)}};
  }

  json check_feasibility(const json& p) {
    if (p.contains("roomId")) {
      const auto report = room_feasible(room_of(p, "roomId"), options.engine.fitness);
      json violations = json::array();
      for (const auto v : report.violations) violations.push_back(violation_name(v));
      return {{"scope", "room"}, {"feasible", report.feasible}, {"violations", violations}};
    }
    const auto report = check_dungeon_feasibility(dungeon);
    json tiles = json::object();
    for (const auto& [id, list] : report.unreachable_tiles) {
      json arr = json::array();
      for (const auto pos : list) arr.push_back(position_json(pos));
      tiles[id] = arr;
    }
    return {{"scope", "dungeon"},
            {"feasible", report.feasible},
            {"unreachableRooms", report.unreachable_rooms},
            {"unreachableTiles", tiles}};
  }

  json path(const json& p) {
    const auto name = p.contains("heuristic") ? string_field(p, "heuristic") : std::string("fastest");
    const auto heuristic = heuristic_from_name(name);
    if (!heuristic) bad_payload("unknown heuristic '" + name + "'");
    const auto tiles = find_path(dungeon, tile_ref_from(field(p, "from"), "from"), tile_ref_from(field(p, "to"), "to"),
                                 *heuristic);
    json out = json::array();
    for (const auto& t : tiles) out.push_back(tile_ref_json(t));
    return {{"heuristic", name}, {"steps", tiles.size() - 1}, {"path", out}};
  }

  // Evolution ops -------------------------------------------------------------

  json update_target(const json& p) {
    std::optional<RoomId> origin;
    Room target = [&] {
      if (p.contains("roomId")) {
        origin = string_field(p, "roomId");
        return dungeon.room(*origin);
      }
      return room_from(field(p, "room"), "");
    }();
    if (!has_engine) {
      ensure_engine(target);
      if (running) submit(Start{});
    } else {
      submit(UpdateTarget{target});
    }
    target_room = origin;
    return {{"target", room_json(target)}};
  }

  json set_dimensions(const json& p) {
    dims = dims_from(field(p, "dims"));
    if (has_engine) submit(SetDimensions{dims});
    return {{"dims", dims_json(dims)}};
  }

  json start(const json&) {
    if (!has_engine) throw ProtocolError("no-target", "set a target room before starting evolution");
    running = true;
    submit(Start{});
    return {{"running", true}};
  }

  json stop(const json&) {
    running = false;
    submit(Stop{});
    return {{"running", false}};
  }

  json apply_suggestion(const json& p) {
    const auto& raw = field(p, "index");
    if (!raw.is_array()) bad_payload("field 'index' must be an array of interval indices");
    std::vector<int> index;
    for (const auto& v : raw) {
      if (!v.is_number_integer()) bad_payload("field 'index' must be an array of interval indices");
      index.push_back(v.get<int>());
    }
    std::optional<Individual> elite;
    {
      std::lock_guard lock(out_mutex);
      if (!grid.valid) throw ProtocolError("empty-cell", "no suggestions have been published yet");
      const auto it = std::find(grid.indices.begin(), grid.indices.end(), index);
      if (it == grid.indices.end()) throw BoundsError("cell index outside the current grid");
      elite = grid.elites[static_cast<std::size_t>(it - grid.indices.begin())];
    }
    if (!elite) throw ProtocolError("empty-cell", "the selected cell holds no feasible room");

    std::optional<RoomId> replaced = target_room;
    if (p.contains("roomId")) replaced = string_field(p, "roomId");
    if (replaced) {
      dungeon = dungeon.replace_room(elite->genotype.with_id(*replaced));
    }
    submit(UpdateTarget{elite->genotype});
    target_room = replaced;
    json out = {{"room", room_json(replaced ? dungeon.room(*replaced) : elite->genotype)}, {"fitness", elite->fitness}};
    out["roomId"] = replaced ? json(*replaced) : json(nullptr);
    return out;
  }

  json snapshot(const json&) {
    if (!has_engine) {
      return {{"generation", 0}, {"running", false}, {"dims", dims_json(dims)}, {"target", nullptr},
              {"cells", json::array()}};
    }
    const Snapshot snap = take_snapshot();
    json cells = json::array();
    for (const auto& cell : snap.archive.cells()) {
      json c = {{"index", cell.index}, {"feasible", cell.feasible.size()}, {"infeasible", cell.infeasible.size()}};
      c["elite"] = cell.feasible.empty() ? json(nullptr) : elite_json(cell.index, cell.feasible.front());
      cells.push_back(std::move(c));
    }
    return {{"generation", snap.generation},
            {"running", snap.running},
            {"dims", dims_json(snap.archive.dimensions())},
            {"target", room_json(snap.target)},
            {"cells", cells}};
  }

  json resync(const json&) {
    std::lock_guard lock(out_mutex);
    if (!grid.valid) return {{"dims", dims_json(dims)}, {"cells", json::array()}};
    return {{"dims", dims_json(grid.dims)}, {"cells", grid_cells_locked(false, {})}};
  }

  json suggestions(const json& p) {
    const auto count = p.contains("count") ? integer_field(p, "count") : 6;
    if (count < 0) bad_payload("field 'count' must be non-negative");
    std::lock_guard lock(out_mutex);
    std::vector<std::size_t> order;
    for (std::size_t i = 0; i < grid.elites.size(); ++i) {
      if (grid.elites[i]) order.push_back(i);
    }
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return grid.elites[a]->fitness > grid.elites[b]->fitness; });
    if (order.size() > static_cast<std::size_t>(count)) order.resize(static_cast<std::size_t>(count));
    json out = json::array();
    for (const auto i : order) out.push_back(elite_json(grid.indices[i], *grid.elites[i]));
    return {{"suggestions", out}};
  }

  // Dispatch ------------------------------------------------------------------

  void handle(std::string_view line) {
    json request;
    try {
      request = json::parse(line);
    } catch (const json::exception& e) {
      respond_error(nullptr, "", "malformed", std::string("not valid JSON: ") + e.what());
      return;
    }
    json seq = nullptr;
    std::string op;
    if (request.is_object()) {
      if (auto it = request.find("seq"); it != request.end() && it->is_number_unsigned()) seq = *it;
      if (auto it = request.find("op"); it != request.end() && it->is_string()) op = it->get<std::string>();
    }
    if (!request.is_object() || seq.is_null() || op.empty() ||
        (request.contains("kind") && request["kind"] != "request") ||
        (request.contains("payload") && !request["payload"].is_object())) {
      respond_error(seq, op, "malformed", "expected {\"kind\":\"request\",\"seq\":n,\"op\":name,\"payload\":{}}");
      return;
    }
    const auto it = handlers().find(op);
    if (it == handlers().end()) {
      respond_error(seq, op, "unknown-op", "unknown operation '" + op + "'");
      return;
    }
    const json payload = request.contains("payload") ? request["payload"] : json::object();
    try {
      respond(seq, op, (this->*(it->second))(payload));
    } catch (const Error& e) {
      respond_error(seq, op, e.code(), e.what());
    } catch (const json::exception& e) {
      respond_error(seq, op, "invalid-payload", e.what());
    } catch (const std::exception& e) {
      respond_error(seq, op, "internal", e.what());
    }
  }
};

Session::Session(SessionOptions options, Writer writer)
    : impl_(std::make_unique<Impl>(std::move(options), std::move(writer))) {}

Session::~Session() { close(); }

void Session::open() {
  std::lock_guard lock(impl_->out_mutex);
  json ops = json::array();
  for (const auto& op : operations()) ops.push_back(op);
  impl_->emit_event_locked("hello", 0,
                           {{"protocol", kProtocolName},
                            {"schemaVersion", kSchemaVersion},
                            {"operations", ops},
                            {"dims", dims_json(impl_->dims)}});
}

void Session::handle(std::string_view line) { impl_->handle(line); }

bool Session::tick() {
  if (impl_->options.background) throw PreconditionError("tick() drives foreground sessions only");
  return impl_->loop ? impl_->loop->tick() : false;
}

void Session::close() { impl_->shutdown(); }

const std::vector<std::string>& Session::operations() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& [name, handler] : Impl::handlers()) out.push_back(name);
    return out;
  }();
  return names;
}

}  // namespace edd
