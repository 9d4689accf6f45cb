#pragma once

#include <vector>

#include "lcrl/common/rng.hpp"
#include "lcrl/gridhouse/house.hpp"

namespace lcrl::gridhouse {

enum class TaskKind { kNav, kPick };
enum class NavTarget { kObject, kRoom };

struct TaskSpec {
  int task_id = 0;
  TaskKind kind = TaskKind::kNav;
  int house_id = 0;
  NavTarget nav_target = NavTarget::kObject;
  /// NAV object target or the PICK object; -1 for NAV room tasks.
  int object = -1;
  /// NAV room target or PICK destination room type.
  RoomType room = RoomType::kBedroom;
  /// PICK only.
  Tile source;
  Tile destination;
  std::vector<int> command;
};

/// NAV tasks for every placed object and every room, PICK tasks for every
/// (object, other room) pair with one destination slot each. Task ids are
/// house_id * 1000 + local index. Throws GenerationError if the house has no
/// placeable slot.
std::vector<TaskSpec> make_tasks(const House& house, const Vocabulary& vocab,
                                 Rng& rng);

/// (object, room) key used for split hygiene; -1 marks an absent component.
struct TaskTarget {
  int house_id;
  int object;
  int room;
  auto operator<=>(const TaskTarget&) const = default;
};
TaskTarget task_target(const TaskSpec& task);

}  // namespace lcrl::gridhouse
