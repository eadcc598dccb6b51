#include <random>

#include "doctest.h"
#include "edd/errors.hpp"
#include "edd/room.hpp"
#include "support/oracles.hpp"

using namespace edd;

namespace {

std::size_t count_kind(const Room& r, TileKind k) {
  return static_cast<std::size_t>(std::count(r.tiles().begin(), r.tiles().end(), k));
}

}  // namespace

TEST_CASE("createRoom sizes") {
  const Room small(3, 3);
  CHECK(count_kind(small, TileKind::Floor) == 9);
  CHECK(small.doors().empty());
  CHECK(small.locked_count() == 0);

  CHECK(count_kind(Room(13, 7), TileKind::Floor) == 91);

  try {
    Room(2, 5);
    FAIL("expected bounds error");
  } catch (const BoundsError& e) {
    CHECK(std::string(e.what()).find("width") != std::string::npos);
  }
  CHECK_THROWS_AS(Room(5, 21), BoundsError);
  CHECK_THROWS_WITH_AS(Room(5, 21), doctest::Contains("height"), BoundsError);
}

TEST_CASE("paintTiles") {
  const Room empty(3, 3);
  const std::vector<Position> corner{{0, 0}};

  SUBCASE("single tile") {
    const Room r = paint_tiles(empty, corner, TileKind::Wall, false);
    CHECK(r.at({0, 0}) == TileKind::Wall);
    CHECK(count_kind(r, TileKind::Floor) == 8);
  }
  SUBCASE("locked cells are untouched") {
    const Room locked = paint_tiles(empty, corner, TileKind::Wall, true);
    CHECK(locked.locked({0, 0}));
    const Room r = paint_tiles(locked, corner, TileKind::Enemy, false);
    CHECK(r.at({0, 0}) == TileKind::Wall);
  }
  SUBCASE("five-tile cross") {
    const auto cells = brush_cells(empty, {1, 1}, BrushShape::Cross);
    CHECK(cells.size() == 5);
    const Room r = paint_tiles(empty, cells, TileKind::Treasure, false);
    for (const Position p : {Position{1, 1}, Position{0, 1}, Position{2, 1}, Position{1, 0}, Position{1, 2}}) {
      CHECK(r.at(p) == TileKind::Treasure);
    }
    CHECK(count_kind(r, TileKind::Treasure) == 5);
  }
  SUBCASE("cross at a corner drops outside cells") {
    CHECK(brush_cells(empty, {0, 0}, BrushShape::Cross).size() == 3);
  }
  SUBCASE("doors are not paintable") {
    CHECK_THROWS_AS(paint_tiles(empty, corner, TileKind::Door, false), InvalidBrushError);
    const Room door = empty.with_door({0, 1});
    const std::vector<Position> on_door{{0, 1}};
    const Room r = paint_tiles(door, on_door, TileKind::Wall, true);
    CHECK(r.at({0, 1}) == TileKind::Door);
    CHECK_FALSE(r.locked({0, 1}));
  }
  SUBCASE("out of bounds") {
    const std::vector<Position> outside{{3, 0}};
    CHECK_THROWS_AS(paint_tiles(empty, outside, TileKind::Wall, false), BoundsError);
  }
}

TEST_CASE("bucketPaint") {
  SUBCASE("single region") {
    const Room r = bucket_paint(Room(3, 3), {1, 1}, TileKind::Wall);
    CHECK(count_kind(r, TileKind::Wall) == 9);
  }
  SUBCASE("region of one") {
    const std::vector<Position> center{{1, 1}};
    const Room walled = paint_tiles(Room(3, 3), center, TileKind::Wall, false);
    const Room r = bucket_paint(walled, {1, 1}, TileKind::Floor);
    CHECK(count_kind(r, TileKind::Floor) == 9);
  }
  SUBCASE("locked tile inside the region, checked against a recursive flood") {
    // 5x5: a wall ring splitting an inner 3x3 floor patch, with one locked tile.
    Room r = parse_room(
        "5 5\n"
        "fwwwf\n"
        "wfffw\n"
        "wfFfw\n"
        "wfffw\n"
        "fwwwf\n");
    const auto region = oracle::same_kind_region(r, {1, 1});
    CHECK(region.size() == 9);
    const Room painted = bucket_paint(r, {1, 1}, TileKind::Treasure);
    for (int row = 0; row < 5; ++row) {
      for (int col = 0; col < 5; ++col) {
        const Position p{row, col};
        const bool expect_painted = region.count(p) && !r.locked(p);
        CHECK((painted.at(p) == TileKind::Treasure) == expect_painted);
      }
    }
    CHECK(painted.at({2, 2}) == TileKind::Floor);
  }
  SUBCASE("Door brush rejected") {
    CHECK_THROWS_AS(bucket_paint(Room(3, 3), {1, 1}, TileKind::Door), InvalidBrushError);
  }
}

TEST_CASE("serialization format") {
  CHECK(serialize_room(Room(3, 3)) == "3 3\nfff\nfff\nfff\n");

  const std::string sample =
      "7 5\n"
      "wwwdwww\n"
      "wfffeTw\n"
      "dfWWfft\n"
      "wffffEw\n"
      "wwwwwww\n";
  const Room r = parse_room(sample);
  CHECK(serialize_room(r) == sample);
  CHECK(r.doors() == std::vector<Position>{{0, 3}, {2, 0}});
  CHECK(r.locked({1, 5}));
  CHECK(r.at({1, 5}) == TileKind::Treasure);

  SUBCASE("door off the border") {
    try {
      parse_room("3 3\nfff\nfdf\nfff\n");
      FAIL("expected parse error");
    } catch (const ParseError& e) {
      CHECK(e.line() == 3);
      CHECK(e.column() == 2);
    }
  }
  SUBCASE("dimension mismatch") {
    CHECK_THROWS_AS(parse_room("4 3\nfff\nfff\nfff\n"), ParseError);
    CHECK_THROWS_AS(parse_room("3 4\nfff\nfff\nfff\n"), ParseError);
    CHECK_THROWS_AS(parse_room("3 2\nfff\nfff\n"), ParseError);
  }
  SUBCASE("unknown tile letter") {
    try {
      parse_room("3 3\nfff\nfxf\nfff\n");
      FAIL("expected parse error");
    } catch (const ParseError& e) {
      CHECK(e.line() == 3);
      CHECK(e.column() == 2);
    }
  }
}

TEST_CASE("round trip and edit invariants over random rooms") {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> side(3, 20);
  std::uniform_int_distribution<int> coin(0, 1);
  for (int trial = 0; trial < 1000; ++trial) {
    const int w = side(rng), h = side(rng);
    Room r = oracle::random_room(rng, w, h, {0.3, 0.1, 0.1, 3});
    // Random locks on non-door tiles.
    std::vector<Position> lock_cells;
    for (int i = 0; i < 4; ++i) {
      lock_cells.push_back({std::uniform_int_distribution<int>(0, h - 1)(rng), std::uniform_int_distribution<int>(0, w - 1)(rng)});
    }
    r = paint_tiles(r, lock_cells, TileKind::Wall, true);
    REQUIRE(parse_room(serialize_room(r)) == r);

    // A handful of random edits never alter locked tiles or doors.
    Room edited = r;
    for (int e = 0; e < 5; ++e) {
      const Position p{std::uniform_int_distribution<int>(0, h - 1)(rng), std::uniform_int_distribution<int>(0, w - 1)(rng)};
      const auto kind = static_cast<TileKind>(std::uniform_int_distribution<int>(0, 3)(rng));
      if (coin(rng)) {
        edited = bucket_paint(edited, p, kind);
      } else {
        const auto cells = brush_cells(edited, p, coin(rng) ? BrushShape::Cross : BrushShape::Single);
        edited = paint_tiles(edited, cells, kind, false);
      }
    }
    CHECK(edited.doors() == r.doors());
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (r.locks()[i]) CHECK(edited.tiles()[i] == r.tiles()[i]);
    }
  }
}
