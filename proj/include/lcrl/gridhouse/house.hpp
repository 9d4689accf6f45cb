#pragma once

#include <compare>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "lcrl/gridhouse/semantic.hpp"

namespace lcrl::gridhouse {

struct Tile {
  int x = 0;
  int y = 0;
  auto operator<=>(const Tile&) const = default;
};

inline int chebyshev(Tile a, Tile b) {
  const int dx = a.x > b.x ? a.x - b.x : b.x - a.x;
  const int dy = a.y > b.y ? a.y - b.y : b.y - a.y;
  return dx > dy ? dx : dy;
}

struct Room {
  RoomType type = RoomType::kBedroom;
  std::vector<Tile> tiles;
};

struct PlacedObject {
  int object = 0;
  Tile tile;
};

struct HouseConfig {
  int width = 9;
  int height = 9;
  int min_rooms = 2;
  int max_rooms = 4;
  int num_objects = 3;
  int max_retries = 64;
};

struct House {
  int house_id = 0;
  std::uint64_t seed = 0;
  int width = 0;
  int height = 0;
  /// Row-major ground classes, index y * width + x.
  std::vector<SemanticClass> grid;
  std::vector<Room> rooms;
  /// Candidate object tiles, parallel to `rooms`.
  std::vector<std::vector<Tile>> object_slots;
  /// Static objects; object classes are unique within a house.
  std::vector<PlacedObject> objects;

  bool in_bounds(Tile t) const {
    return t.x >= 0 && t.y >= 0 && t.x < width && t.y < height;
  }
  SemanticClass at(Tile t) const {
    return grid[static_cast<std::size_t>(t.y * width + t.x)];
  }
  bool walkable(Tile t) const { return in_bounds(t) && is_walkable(at(t)); }
  /// Index into `rooms`, or -1 for doors, walls and out-of-bounds tiles.
  int room_of(Tile t) const;
  int room_index(RoomType type) const;
  const PlacedObject* find_object(int object) const;
};

class GenerationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Rooms are carved by recursive wall splits with one door per split wall.
/// Deterministic in (seed, cfg); throws GenerationError rather than return a
/// house that breaks an invariant.
House generate_house(std::uint64_t seed, const HouseConfig& cfg,
                     int house_id = 0);

/// Throws GenerationError naming the first broken invariant.
void validate_house(const House& house);

}  // namespace lcrl::gridhouse
