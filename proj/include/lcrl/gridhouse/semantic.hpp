#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace lcrl::gridhouse {

enum class SemanticClass : std::uint8_t {
  kWall = 0,
  kFloorGeneric,
  kDoor,
  kFloorBedroom,
  kFloorKitchen,
  kFloorBathroom,
  kFloorLivingroom,
  kObject0,  // kObject0 + i for object i in [0, kNumObjects)
  kHeldMarker = kObject0 + 10,
  kOutOfBounds,
};

inline constexpr int kNumClasses = 19;
inline constexpr int kNumObjects = 10;
inline constexpr int kNumRoomTypes = 4;
inline constexpr std::uint8_t kNoOverlay = 0xff;

static_assert(static_cast<int>(SemanticClass::kOutOfBounds) + 1 == kNumClasses);

enum class RoomType : std::uint8_t { kBedroom, kKitchen, kBathroom, kLivingroom };

SemanticClass floor_class(RoomType type);
SemanticClass object_class(int object);
bool is_walkable(SemanticClass c);
std::string_view room_type_name(RoomType type);
RoomType room_type_from_name(std::string_view name);

/// Command tokens. Objects and rooms map to single words; the mapping is
/// part of the dataset manifest.
struct Vocabulary {
  std::vector<std::string> words;
  std::array<int, kNumObjects> object_token{};
  std::array<int, kNumRoomTypes> room_token{};
  int go = 0, to = 0, the = 0, move = 0;

  int size() const { return static_cast<int>(words.size()); }
  int id(std::string_view word) const;
  std::string render(const std::vector<int>& tokens) const;
};

/// Token order: go, to, the, move, the four room words, then object words.
Vocabulary make_vocabulary(const std::array<std::string, kNumObjects>& object_words);
Vocabulary default_vocabulary();

}  // namespace lcrl::gridhouse
