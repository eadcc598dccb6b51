#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace edd {

enum class TileKind : std::uint8_t { Floor = 0, Wall = 1, Enemy = 2, Treasure = 3, Door = 4 };

inline constexpr bool is_passable(TileKind k) noexcept { return k != TileKind::Wall; }

std::string_view tile_name(TileKind k) noexcept;
std::optional<TileKind> tile_from_name(std::string_view name) noexcept;

struct Position {
  int row = 0;
  int col = 0;

  friend auto operator<=>(const Position&, const Position&) = default;
};

// Rectangular tile grid with a lock mask. Rooms are values: every edit
// returns a new room. Door tiles live only on the border and are never locked.
class Room {
 public:
  static constexpr int kMinSide = 3;
  static constexpr int kMaxSide = 20;

  // All-floor room, no doors, no locks. Throws BoundsError naming the bad side.
  Room(int width, int height, std::string id = {});

  // Validates sizes, door placement and lock mask. `locks` may be empty (= none).
  static Room from_tiles(int width, int height, std::vector<TileKind> tiles,
                         std::vector<std::uint8_t> locks = {}, std::string id = {});

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t size() const noexcept { return tiles_.size(); }
  const std::string& id() const noexcept { return id_; }
  Room with_id(std::string id) const;

  bool in_bounds(Position p) const noexcept {
    return p.row >= 0 && p.col >= 0 && p.row < height_ && p.col < width_;
  }
  bool on_border(Position p) const noexcept {
    return in_bounds(p) && (p.row == 0 || p.col == 0 || p.row == height_ - 1 || p.col == width_ - 1);
  }
  std::size_t index(Position p) const noexcept {
    return static_cast<std::size_t>(p.row) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(p.col);
  }
  Position position(std::size_t index) const noexcept {
    return {static_cast<int>(index / static_cast<std::size_t>(width_)),
            static_cast<int>(index % static_cast<std::size_t>(width_))};
  }

  TileKind at(Position p) const { return tiles_.at(index(p)); }
  bool locked(Position p) const { return locks_.at(index(p)) != 0; }

  std::span<const TileKind> tiles() const noexcept { return tiles_; }
  std::span<const std::uint8_t> locks() const noexcept { return locks_; }
  // Row-major order.
  const std::vector<Position>& doors() const noexcept { return doors_; }
  std::size_t locked_count() const noexcept;

  // Marks a passable border tile as Door. Throws InvalidEndpointError otherwise.
  Room with_door(Position p) const;
  // Reverts a Door tile to Floor.
  Room without_door(Position p) const;

  // Tile-by-tile equality ignoring locks and id (genotype identity).
  bool same_genotype(const Room& other) const noexcept {
    return width_ == other.width_ && height_ == other.height_ && tiles_ == other.tiles_;
  }

  // Size, tiles and locks; the id is a label and does not participate.
  friend bool operator==(const Room& a, const Room& b) noexcept {
    return a.same_genotype(b) && a.locks_ == b.locks_;
  }

 private:
  Room() = default;
  void validate_and_index();

  std::string id_;
  int width_ = 0;
  int height_ = 0;
  std::vector<TileKind> tiles_;
  std::vector<std::uint8_t> locks_;
  std::vector<Position> doors_;
};

inline Room create_room(int width, int height, std::string id = {}) {
  return Room(width, height, std::move(id));
}

enum class BrushShape { Single, Cross };

// Cells covered by a brush centered at `center`; out-of-bounds cells are dropped.
std::vector<Position> brush_cells(const Room& room, Position center, BrushShape shape);

// Paints `kind` on every listed cell that is neither locked nor a Door. With
// `lock`, the painted cells are also locked. Throws InvalidBrushError for
// Door and BoundsError for out-of-range cells.
Room paint_tiles(const Room& room, std::span<const Position> cells, TileKind kind, bool lock);

// Flood-fills the 4-connected region sharing the seed's kind, skipping locked
// and Door tiles.
Room bucket_paint(const Room& room, Position seed, TileKind kind);

// Text format: "<width> <height>\n" then `height` lines of tile letters
// (f w e t d, uppercase = locked).
std::string serialize_room(const Room& room);
Room parse_room(std::string_view text, std::string id = {});

Room load_room_file(const std::string& path, std::string id = {});
void save_room_file(const Room& room, const std::string& path);

}  // namespace edd
