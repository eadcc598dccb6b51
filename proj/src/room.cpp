#include "edd/room.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>
#include <tuple>

#include "edd/errors.hpp"

namespace edd {

namespace {

constexpr std::array<std::string_view, 5> kTileNames = {"floor", "wall", "enemy", "treasure",
                                                        "door"};
constexpr std::array<char, 5> kTileLetters = {'f', 'w', 'e', 't', 'd'};

void check_side(int value, const char* name) {
  if (value < Room::kMinSide || value > Room::kMaxSide) {
    throw BoundsError(std::string("room ") + name + " " + std::to_string(value) +
                      " outside [" + std::to_string(Room::kMinSide) + ", " +
                      std::to_string(Room::kMaxSide) + "]");
  }
}

std::string describe(Position p) {
  return "(" + std::to_string(p.row) + "," + std::to_string(p.col) + ")";
}

void check_in_bounds(const Room& room, Position p) {
  if (!room.in_bounds(p)) {
    throw BoundsError("position " + describe(p) + " outside " + std::to_string(room.width()) +
                      "x" + std::to_string(room.height()) + " room");
  }
}

}  // namespace

std::string_view tile_name(TileKind k) noexcept {
  return kTileNames[static_cast<std::size_t>(k)];
}

std::optional<TileKind> tile_from_name(std::string_view name) noexcept {
  for (std::size_t i = 0; i < kTileNames.size(); ++i) {
    if (kTileNames[i] == name) return static_cast<TileKind>(i);
  }
  return std::nullopt;
}

Room::Room(int width, int height, std::string id) : id_(std::move(id)) {
  check_side(width, "width");
  check_side(height, "height");
  width_ = width;
  height_ = height;
  tiles_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height),
                TileKind::Floor);
  locks_.assign(tiles_.size(), 0);
}

Room Room::from_tiles(int width, int height, std::vector<TileKind> tiles,
                      std::vector<std::uint8_t> locks, std::string id) {
  check_side(width, "width");
  check_side(height, "height");
  const auto n = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  if (tiles.size() != n) {
    throw PreconditionError("tile count " + std::to_string(tiles.size()) + " does not match " +
                            std::to_string(width) + "x" + std::to_string(height));
  }
  if (locks.empty()) locks.assign(n, 0);
  if (locks.size() != n) {
    throw PreconditionError("lock mask length " + std::to_string(locks.size()) +
                            " does not match tile count " + std::to_string(n));
  }
  Room room;
  room.id_ = std::move(id);
  room.width_ = width;
  room.height_ = height;
  room.tiles_ = std::move(tiles);
  room.locks_ = std::move(locks);
  room.validate_and_index();
  return room;
}

void Room::validate_and_index() {
  doors_.clear();
  for (std::size_t i = 0; i < tiles_.size(); ++i) {
    const auto k = static_cast<std::uint8_t>(tiles_[i]);
    if (k > static_cast<std::uint8_t>(TileKind::Door)) {
      throw PreconditionError("invalid tile value " + std::to_string(k));
    }
    locks_[i] = locks_[i] ? 1 : 0;
    if (tiles_[i] == TileKind::Door) {
      const Position p = position(i);
      if (!on_border(p)) throw InvalidEndpointError("door at " + describe(p) + " is not on the border");
      if (locks_[i]) throw PreconditionError("door at " + describe(p) + " cannot be locked");
      doors_.push_back(p);
    }
  }
}

Room Room::with_id(std::string id) const {
  Room copy = *this;
  copy.id_ = std::move(id);
  return copy;
}

std::size_t Room::locked_count() const noexcept {
  return static_cast<std::size_t>(std::count(locks_.begin(), locks_.end(), std::uint8_t{1}));
}

Room Room::with_door(Position p) const {
  if (!in_bounds(p)) throw BoundsError("door position " + describe(p) + " out of bounds");
  if (!on_border(p)) throw InvalidEndpointError("door position " + describe(p) + " is not a border tile");
  const auto i = index(p);
  if (!is_passable(tiles_[i])) {
    throw InvalidEndpointError("door position " + describe(p) + " is not passable");
  }
  Room copy = *this;
  copy.tiles_[i] = TileKind::Door;
  copy.locks_[i] = 0;
  copy.validate_and_index();
  return copy;
}

Room Room::without_door(Position p) const {
  check_in_bounds(*this, p);
  const auto i = index(p);
  if (tiles_[i] != TileKind::Door) throw PreconditionError("no door at " + describe(p));
  Room copy = *this;
  copy.tiles_[i] = TileKind::Floor;
  copy.validate_and_index();
  return copy;
}

std::vector<Position> brush_cells(const Room& room, Position center, BrushShape shape) {
  std::vector<Position> cells;
  if (room.in_bounds(center)) cells.push_back(center);
  if (shape == BrushShape::Cross) {
    for (const Position d : {Position{-1, 0}, Position{1, 0}, Position{0, -1}, Position{0, 1}}) {
      const Position p{center.row + d.row, center.col + d.col};
      if (room.in_bounds(p)) cells.push_back(p);
    }
  }
  return cells;
}

Room paint_tiles(const Room& room, std::span<const Position> cells, TileKind kind, bool lock) {
  if (kind == TileKind::Door) throw InvalidBrushError("doors are placed by connections, not brushes");
  for (const Position p : cells) check_in_bounds(room, p);

  std::vector<TileKind> tiles(room.tiles().begin(), room.tiles().end());
  std::vector<std::uint8_t> locks(room.locks().begin(), room.locks().end());
  for (const Position p : cells) {
    const auto i = room.index(p);
    if (locks[i] || tiles[i] == TileKind::Door) continue;
    tiles[i] = kind;
    if (lock) locks[i] = 1;
  }
  return Room::from_tiles(room.width(), room.height(), std::move(tiles), std::move(locks),
                          room.id());
}

Room bucket_paint(const Room& room, Position seed, TileKind kind) {
  if (kind == TileKind::Door) throw InvalidBrushError("doors are placed by connections, not brushes");
  check_in_bounds(room, seed);

  const TileKind original = room.at(seed);
  std::vector<TileKind> tiles(room.tiles().begin(), room.tiles().end());
  std::vector<std::uint8_t> seen(tiles.size(), 0);
  std::vector<Position> stack{seed};
  seen[room.index(seed)] = 1;
  while (!stack.empty()) {
    const Position p = stack.back();
    stack.pop_back();
    const auto i = room.index(p);
    if (!room.locks()[i] && tiles[i] != TileKind::Door) tiles[i] = kind;
    for (const Position d : {Position{-1, 0}, Position{1, 0}, Position{0, -1}, Position{0, 1}}) {
      const Position q{p.row + d.row, p.col + d.col};
      if (!room.in_bounds(q)) continue;
      const auto j = room.index(q);
      if (seen[j] || room.tiles()[j] != original) continue;
      seen[j] = 1;
      stack.push_back(q);
    }
  }
  return Room::from_tiles(room.width(), room.height(), std::move(tiles),
                          std::vector<std::uint8_t>(room.locks().begin(), room.locks().end()),
                          room.id());
}

std::string serialize_room(const Room& room) {
  std::string out = std::to_string(room.width()) + " " + std::to_string(room.height()) + "\n";
  out.reserve(out.size() + room.size() + static_cast<std::size_t>(room.height()));
  for (int r = 0; r < room.height(); ++r) {
    for (int c = 0; c < room.width(); ++c) {
      const Position p{r, c};
      char ch = kTileLetters[static_cast<std::size_t>(room.at(p))];
      if (room.locked(p)) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
      out.push_back(ch);
    }
    out.push_back('\n');
  }
  return out;
}

Room parse_room(std::string_view text, std::string id) {
  std::vector<std::string_view> lines;
  for (std::size_t start = 0; start < text.size();) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    auto line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    start = end + 1;
  }
  if (lines.empty()) throw ParseError(1, 1, "empty room text");

  // Header: "<width> <height>"
  const auto header = lines[0];
  int dims[2] = {0, 0};
  std::size_t pos = 0;
  for (int k = 0; k < 2; ++k) {
    if (k == 1) {
      if (pos >= header.size() || header[pos] != ' ') throw ParseError(1, pos + 1, "expected ' ' between width and height");
      ++pos;
    }
    const auto* first = header.data() + pos;
    const auto* last = header.data() + header.size();
    auto [ptr, ec] = std::from_chars(first, last, dims[k]);
    if (ec != std::errc() || ptr == first) {
      throw ParseError(1, pos + 1, k == 0 ? "expected width" : "expected height");
    }
    pos = static_cast<std::size_t>(ptr - header.data());
  }
  if (pos != header.size()) throw ParseError(1, pos + 1, "unexpected trailing characters in header");
  const int width = dims[0];
  const int height = dims[1];
  for (const auto& [value, name, col] :
       {std::tuple{width, "width", std::size_t{1}}, std::tuple{height, "height", header.find(' ') + 2}}) {
    if (value < Room::kMinSide || value > Room::kMaxSide) {
      throw ParseError(1, col, std::string(name) + " " + std::to_string(value) + " outside [3, 20]");
    }
  }

  // Trailing empty lines (the final newline) are fine; anything else past the body is not.
  std::size_t body_end = lines.size();
  while (body_end > 1 && lines[body_end - 1].empty()) --body_end;
  const std::size_t body_lines = body_end - 1;
  if (body_lines != static_cast<std::size_t>(height)) {
    throw ParseError(std::min(body_end, static_cast<std::size_t>(height) + 1) + 1, 1,
                     "header declares " + std::to_string(height) + " rows but body has " +
                         std::to_string(body_lines));
  }

  const auto n = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  std::vector<TileKind> tiles;
  std::vector<std::uint8_t> locks;
  tiles.reserve(n);
  locks.reserve(n);
  for (int r = 0; r < height; ++r) {
    const auto line = lines[static_cast<std::size_t>(r) + 1];
    const std::size_t line_no = static_cast<std::size_t>(r) + 2;
    if (line.size() != static_cast<std::size_t>(width)) {
      throw ParseError(line_no, std::min(line.size(), static_cast<std::size_t>(width)) + 1,
                       "row has " + std::to_string(line.size()) + " tiles, header declares " +
                           std::to_string(width));
    }
    for (int c = 0; c < width; ++c) {
      const char ch = line[static_cast<std::size_t>(c)];
      const char lower = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
      const auto it = std::find(kTileLetters.begin(), kTileLetters.end(), lower);
      if (it == kTileLetters.end()) {
        throw ParseError(line_no, static_cast<std::size_t>(c) + 1,
                         std::string("unknown tile '") + ch + "'");
      }
      const auto kind = static_cast<TileKind>(it - kTileLetters.begin());
      const bool locked = ch != lower;
      const bool border = r == 0 || c == 0 || r == height - 1 || c == width - 1;
      if (kind == TileKind::Door && !border) {
        throw ParseError(line_no, static_cast<std::size_t>(c) + 1, "door not on the room border");
      }
      if (kind == TileKind::Door && locked) {
        throw ParseError(line_no, static_cast<std::size_t>(c) + 1, "doors cannot be locked");
      }
      tiles.push_back(kind);
      locks.push_back(locked ? 1 : 0);
    }
  }
  return Room::from_tiles(width, height, std::move(tiles), std::move(locks), std::move(id));
}

Room load_room_file(const std::string& path, std::string id) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open room file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_room(buf.str(), std::move(id));
}

void save_room_file(const Room& room, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write room file " + path);
  out << serialize_room(room);
  if (!out) throw IoError("failed writing room file " + path);
}

}  // namespace edd
