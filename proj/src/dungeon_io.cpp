#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "edd/dungeon.hpp"
#include "edd/errors.hpp"

namespace edd {

namespace {

struct Token {
  std::string_view text;
  std::size_t column;  // 1-based
};

std::vector<Token> tokenize(std::string_view line) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    if (i >= line.size() || line[i] == '#') break;
    const auto start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '#') ++i;
    out.push_back({line.substr(start, i - start), start + 1});
  }
  return out;
}

int parse_int(const Token& t, std::size_t line_no) {
  int value = 0;
  const auto* first = t.text.data();
  const auto* last = first + t.text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) throw ParseError(line_no, t.column, "expected an integer");
  return value;
}

struct PendingConnection {
  RoomId a;
  Position pa;
  RoomId b;
  Position pb;
  std::size_t line;
};

}  // namespace

Dungeon parse_manifest(std::string_view text, const RoomLoader& loader) {
  std::map<RoomId, Room> loaded;
  std::vector<RoomId> order;
  std::map<RoomId, std::size_t> room_line;
  std::vector<PendingConnection> pending;
  std::optional<std::pair<RoomId, std::size_t>> initial;

  std::size_t line_no = 0;
  for (std::size_t start = 0; start <= text.size();) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    auto line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    start = end + 1;
    ++line_no;

    const auto tokens = tokenize(line);
    if (tokens.empty()) continue;
    const auto& head = tokens[0];
    if (head.text == "room") {
      if (tokens.size() != 3) throw ParseError(line_no, head.column, "expected: room <id> <file>");
      RoomId id(tokens[1].text);
      if (loaded.count(id)) throw ParseError(line_no, tokens[1].column, "duplicate room id " + id);
      loaded.emplace(id, loader(std::string(tokens[2].text), id).with_id(id));
      room_line[id] = line_no;
      order.push_back(std::move(id));
    } else if (head.text == "connect") {
      if (tokens.size() != 7) {
        throw ParseError(line_no, head.column,
                         "expected: connect <roomA> <rowA> <colA> <roomB> <rowB> <colB>");
      }
      pending.push_back({RoomId(tokens[1].text),
                         {parse_int(tokens[2], line_no), parse_int(tokens[3], line_no)},
                         RoomId(tokens[4].text),
                         {parse_int(tokens[5], line_no), parse_int(tokens[6], line_no)},
                         line_no});
    } else if (head.text == "initial") {
      if (tokens.size() != 2) throw ParseError(line_no, head.column, "expected: initial <id>");
      initial = {RoomId(tokens[1].text), line_no};
    } else {
      throw ParseError(line_no, head.column, "unknown declaration '" + std::string(head.text) + "'");
    }
    if (end == text.size()) break;
  }

  // Doors in room files must be claimed by a connection; they are re-created by connect().
  for (const auto& [id, room] : loaded) {
    for (const Position p : room.doors()) {
      const bool claimed = std::any_of(pending.begin(), pending.end(), [&](const PendingConnection& c) {
        return (c.a == id && c.pa == p) || (c.b == id && c.pb == p);
      });
      if (!claimed) {
        throw ParseError(room_line.at(id), 1, "room " + id + " has a door at (" + std::to_string(p.row) + "," +
                                   std::to_string(p.col) + ") without a connection");
      }
    }
  }

  Dungeon d;
  for (const auto& id : order) {
    Room room = loaded.at(id);
    const auto doors = room.doors();
    for (const Position p : doors) room = room.without_door(p);
    d = d.add_room(std::move(room));
  }
  for (const auto& c : pending) {
    try {
      d = d.connect(c.a, c.pa, c.b, c.pb);
    } catch (const Error& e) {
      throw ParseError(c.line, 1, e.what());
    }
  }
  if (initial) {
    try {
      d = d.set_initial_room(initial->first);
    } catch (const Error& e) {
      throw ParseError(initial->second, 1, e.what());
    }
  }
  return d;
}

std::string serialize_manifest(const Dungeon& dungeon) {
  std::ostringstream out;
  out << "# dungeon manifest\n";
  for (const auto& [id, room] : dungeon.rooms()) out << "room " << id << ' ' << id << ".room\n";
  for (const auto& c : dungeon.connections()) {
    out << "connect " << c.room_a << ' ' << c.tile_a.row << ' ' << c.tile_a.col << ' ' << c.room_b
        << ' ' << c.tile_b.row << ' ' << c.tile_b.col << '\n';
  }
  if (dungeon.initial_room()) out << "initial " << *dungeon.initial_room() << '\n';
  return out.str();
}

Dungeon load_dungeon(const std::string& manifest_path) {
  std::ifstream in(manifest_path, std::ios::binary);
  if (!in) throw IoError("cannot open manifest " + manifest_path);
  std::ostringstream buf;
  buf << in.rdbuf();
  const auto base = std::filesystem::path(manifest_path).parent_path();
  return parse_manifest(buf.str(), [&base](const std::string& file, const RoomId& id) {
    return load_room_file((base / file).string(), id);
  });
}

void save_dungeon(const Dungeon& dungeon, const std::string& dir) {
  std::filesystem::create_directories(dir);
  for (const auto& [id, room] : dungeon.rooms()) {
    save_room_file(room, (std::filesystem::path(dir) / (id + ".room")).string());
  }
  std::ofstream out(std::filesystem::path(dir) / "dungeon.manifest", std::ios::binary);
  if (!out) throw IoError("cannot write manifest in " + dir);
  out << serialize_manifest(dungeon);
}

}  // namespace edd
