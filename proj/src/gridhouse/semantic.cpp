#include "lcrl/gridhouse/semantic.hpp"

#include <algorithm>
#include <stdexcept>

namespace lcrl::gridhouse {

SemanticClass floor_class(RoomType type) {
  return static_cast<SemanticClass>(
      static_cast<int>(SemanticClass::kFloorBedroom) + static_cast<int>(type));
}

SemanticClass object_class(int object) {
  if (object < 0 || object >= kNumObjects) {
    throw std::out_of_range("object id " + std::to_string(object));
  }
  return static_cast<SemanticClass>(static_cast<int>(SemanticClass::kObject0) +
                                    object);
}

bool is_walkable(SemanticClass c) {
  return c == SemanticClass::kFloorGeneric || c == SemanticClass::kDoor ||
         (c >= SemanticClass::kFloorBedroom &&
          c <= SemanticClass::kFloorLivingroom);
}

namespace {
constexpr std::array<std::string_view, kNumRoomTypes> kRoomNames = {
    "bedroom", "kitchen", "bathroom", "livingroom"};
}

std::string_view room_type_name(RoomType type) {
  return kRoomNames.at(static_cast<std::size_t>(type));
}

RoomType room_type_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kRoomNames.size(); ++i) {
    if (kRoomNames[i] == name) return static_cast<RoomType>(i);
  }
  throw std::invalid_argument("unknown room type '" + std::string(name) + "'");
}

int Vocabulary::id(std::string_view word) const {
  auto it = std::find(words.begin(), words.end(), word);
  if (it == words.end()) {
    throw std::invalid_argument("word '" + std::string(word) +
                                "' not in vocabulary");
  }
  return static_cast<int>(it - words.begin());
}

std::string Vocabulary::render(const std::vector<int>& tokens) const {
  std::string out;
  for (int t : tokens) {
    if (!out.empty()) out += ' ';
    out += words.at(static_cast<std::size_t>(t));
  }
  return out;
}

Vocabulary make_vocabulary(
    const std::array<std::string, kNumObjects>& object_words) {
  Vocabulary v;
  v.words = {"go", "to", "the", "move"};
  v.go = 0;
  v.to = 1;
  v.the = 2;
  v.move = 3;
  for (int r = 0; r < kNumRoomTypes; ++r) {
    v.room_token[r] = static_cast<int>(v.words.size());
    v.words.emplace_back(kRoomNames[r]);
  }
  for (int o = 0; o < kNumObjects; ++o) {
    if (std::find(v.words.begin(), v.words.end(), object_words[o]) !=
        v.words.end()) {
      throw std::invalid_argument("duplicate vocabulary word '" +
                                  object_words[o] + "'");
    }
    v.object_token[o] = static_cast<int>(v.words.size());
    v.words.push_back(object_words[o]);
  }
  return v;
}

Vocabulary default_vocabulary() {
  return make_vocabulary({"cup", "vase", "laptop", "lamp", "plant", "book",
                          "bowl", "clock", "pillow", "television"});
}

}  // namespace lcrl::gridhouse
