#include "lcrl/gridhouse/house.hpp"

#include <algorithm>
#include <array>
#include <numeric>
#include <optional>
#include <queue>
#include <set>
#include <string>

#include "lcrl/common/rng.hpp"

namespace lcrl::gridhouse {

int House::room_of(Tile t) const {
  if (!in_bounds(t)) return -1;
  for (std::size_t r = 0; r < rooms.size(); ++r) {
    if (std::binary_search(rooms[r].tiles.begin(), rooms[r].tiles.end(), t)) {
      return static_cast<int>(r);
    }
  }
  return -1;
}

int House::room_index(RoomType type) const {
  for (std::size_t r = 0; r < rooms.size(); ++r) {
    if (rooms[r].type == type) return static_cast<int>(r);
  }
  return -1;
}

const PlacedObject* House::find_object(int object) const {
  for (const auto& o : objects) {
    if (o.object == object) return &o;
  }
  return nullptr;
}

namespace {

struct Rect {
  int x0, y0, x1, y1;  // inclusive
  int width() const { return x1 - x0 + 1; }
  int height() const { return y1 - y0 + 1; }
  int area() const { return width() * height(); }
};

struct Split {
  bool vertical;  // wall is a column
  int line;
  int door;
};

// Wall positions whose ends do not butt against an existing door.
std::vector<Split> split_candidates(const Rect& r, const std::set<Tile>& doors) {
  std::vector<Split> out;
  for (int x = r.x0 + 2; x <= r.x1 - 2; ++x) {
    if (doors.contains({x, r.y0 - 1}) || doors.contains({x, r.y1 + 1})) continue;
    out.push_back({true, x, 0});
  }
  for (int y = r.y0 + 2; y <= r.y1 - 2; ++y) {
    if (doors.contains({r.x0 - 1, y}) || doors.contains({r.x1 + 1, y})) continue;
    out.push_back({false, y, 0});
  }
  return out;
}

std::optional<House> try_generate(Rng& rng, const HouseConfig& cfg) {
  const int target = rng.range(cfg.min_rooms, cfg.max_rooms);
  std::vector<Rect> regions{{1, 1, cfg.width - 2, cfg.height - 2}};
  std::set<Tile> doors;
  std::set<Tile> walls;

  while (static_cast<int>(regions.size()) < target) {
    // Largest splittable region first.
    std::vector<std::size_t> order(regions.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) {
      return regions[a].area() > regions[b].area();
    });
    bool split_done = false;
    for (auto ri : order) {
      const Rect r = regions[ri];
      auto cands = split_candidates(r, doors);
      if (cands.empty()) continue;
      Split s = cands[rng.below(cands.size())];
      Rect a = r, b = r;
      if (s.vertical) {
        s.door = rng.range(r.y0, r.y1);
        for (int y = r.y0; y <= r.y1; ++y) walls.insert({s.line, y});
        doors.insert({s.line, s.door});
        a.x1 = s.line - 1;
        b.x0 = s.line + 1;
      } else {
        s.door = rng.range(r.x0, r.x1);
        for (int x = r.x0; x <= r.x1; ++x) walls.insert({x, s.line});
        doors.insert({s.door, s.line});
        a.y1 = s.line - 1;
        b.y0 = s.line + 1;
      }
      regions[ri] = a;
      regions.push_back(b);
      split_done = true;
      break;
    }
    if (!split_done) return std::nullopt;
  }

  House h;
  h.width = cfg.width;
  h.height = cfg.height;
  h.grid.assign(static_cast<std::size_t>(cfg.width * cfg.height),
                SemanticClass::kWall);
  std::array<RoomType, kNumRoomTypes> types = {
      RoomType::kBedroom, RoomType::kKitchen, RoomType::kBathroom,
      RoomType::kLivingroom};
  rng.shuffle(std::span<RoomType>(types));
  for (std::size_t i = 0; i < regions.size(); ++i) {
    Room room;
    room.type = types[i];
    const auto& r = regions[i];
    for (int y = r.y0; y <= r.y1; ++y) {
      for (int x = r.x0; x <= r.x1; ++x) {
        room.tiles.push_back({x, y});
        h.grid[static_cast<std::size_t>(y * h.width + x)] = floor_class(room.type);
      }
    }
    std::sort(room.tiles.begin(), room.tiles.end());
    h.rooms.push_back(std::move(room));
  }
  for (const auto& d : doors) {
    h.grid[static_cast<std::size_t>(d.y * h.width + d.x)] = SemanticClass::kDoor;
  }

  auto near_door = [&](Tile t) {
    for (Tile d : doors) {
      if (std::abs(d.x - t.x) + std::abs(d.y - t.y) <= 1) return true;
    }
    return false;
  };
  for (const auto& room : h.rooms) {
    std::vector<Tile> slots;
    for (Tile t : room.tiles) {
      if (!near_door(t)) slots.push_back(t);
    }
    h.object_slots.push_back(std::move(slots));
  }

  std::array<int, kNumObjects> ids{};
  std::iota(ids.begin(), ids.end(), 0);
  rng.shuffle(std::span<int>(ids));
  std::vector<std::size_t> room_order(h.rooms.size());
  std::iota(room_order.begin(), room_order.end(), 0);
  rng.shuffle(std::span<std::size_t>(room_order));
  for (int k = 0; k < cfg.num_objects; ++k) {
    bool placed = false;
    for (std::size_t attempt = 0; attempt < room_order.size() && !placed;
         ++attempt) {
      const auto ri = room_order[(static_cast<std::size_t>(k) + attempt) %
                                 room_order.size()];
      std::vector<Tile> free;
      for (Tile t : h.object_slots[ri]) {
        bool ok = true;
        for (const auto& o : h.objects) ok = ok && chebyshev(o.tile, t) >= 2;
        if (ok) free.push_back(t);
      }
      if (free.empty()) continue;
      h.objects.push_back({ids[static_cast<std::size_t>(k)],
                           free[rng.below(free.size())]});
      placed = true;
    }
    if (!placed) return std::nullopt;
  }
  return h;
}

}  // namespace

House generate_house(std::uint64_t seed, const HouseConfig& cfg, int house_id) {
  if (cfg.width < 7 || cfg.height < 7) {
    throw GenerationError("house must be at least 7x7, got " +
                          std::to_string(cfg.width) + "x" +
                          std::to_string(cfg.height));
  }
  if (cfg.min_rooms < 2 || cfg.max_rooms > 4 || cfg.min_rooms > cfg.max_rooms) {
    throw GenerationError("room count range must lie within 2..4");
  }
  if (cfg.num_objects < 1 || cfg.num_objects > kNumObjects) {
    throw GenerationError("object count must lie within 1..10");
  }
  Rng rng(derive_seed(seed, 0x486f757365ULL));
  for (int attempt = 0; attempt < cfg.max_retries; ++attempt) {
    auto h = try_generate(rng, cfg);
    if (!h) continue;
    h->house_id = house_id;
    h->seed = seed;
    try {
      validate_house(*h);
    } catch (const GenerationError&) {
      continue;
    }
    return std::move(*h);
  }
  throw GenerationError("no valid house after " +
                        std::to_string(cfg.max_retries) + " attempts for " +
                        std::to_string(cfg.width) + "x" +
                        std::to_string(cfg.height) + " with " +
                        std::to_string(cfg.min_rooms) + ".." +
                        std::to_string(cfg.max_rooms) + " rooms");
}

void validate_house(const House& h) {
  if (h.width < 7 || h.height < 7 ||
      h.grid.size() != static_cast<std::size_t>(h.width * h.height)) {
    throw GenerationError("bad house dimensions");
  }
  if (h.rooms.size() < 2 || h.rooms.size() > 4) {
    throw GenerationError("room count " + std::to_string(h.rooms.size()) +
                          " outside 2..4");
  }
  for (int x = 0; x < h.width; ++x) {
    if (h.at({x, 0}) != SemanticClass::kWall ||
        h.at({x, h.height - 1}) != SemanticClass::kWall) {
      throw GenerationError("boundary tile is not wall");
    }
  }
  for (int y = 0; y < h.height; ++y) {
    if (h.at({0, y}) != SemanticClass::kWall ||
        h.at({h.width - 1, y}) != SemanticClass::kWall) {
      throw GenerationError("boundary tile is not wall");
    }
  }

  std::vector<Tile> walkable;
  for (int y = 0; y < h.height; ++y)
    for (int x = 0; x < h.width; ++x)
      if (h.walkable({x, y})) walkable.push_back({x, y});
  if (walkable.empty()) throw GenerationError("house has no floor");
  std::vector<char> seen(h.grid.size(), 0);
  std::queue<Tile> q;
  q.push(walkable.front());
  seen[static_cast<std::size_t>(walkable.front().y * h.width +
                                walkable.front().x)] = 1;
  std::size_t reached = 0;
  constexpr std::array<Tile, 4> kSteps = {{{1, 0}, {-1, 0}, {0, 1}, {0, -1}}};
  while (!q.empty()) {
    Tile t = q.front();
    q.pop();
    ++reached;
    for (Tile d : kSteps) {
      Tile n{t.x + d.x, t.y + d.y};
      if (!h.walkable(n)) continue;
      auto& s = seen[static_cast<std::size_t>(n.y * h.width + n.x)];
      if (!s) {
        s = 1;
        q.push(n);
      }
    }
  }
  if (reached != walkable.size()) {
    throw GenerationError("floor is not connected");
  }

  for (const auto& room : h.rooms) {
    bool has_door = false;
    for (Tile t : room.tiles) {
      for (Tile d : kSteps) {
        Tile n{t.x + d.x, t.y + d.y};
        has_door = has_door ||
                   (h.in_bounds(n) && h.at(n) == SemanticClass::kDoor);
      }
    }
    if (!has_door) {
      throw GenerationError(std::string("room ") +
                            std::string(room_type_name(room.type)) +
                            " has no door");
    }
  }

  std::set<int> ids;
  for (const auto& o : h.objects) {
    if (!ids.insert(o.object).second) {
      throw GenerationError("duplicate object class in house");
    }
    if (h.room_of(o.tile) < 0) throw GenerationError("object not on room floor");
  }
}

}  // namespace lcrl::gridhouse
