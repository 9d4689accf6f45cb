#include "lcrl/gridhouse/task.hpp"

namespace lcrl::gridhouse {

std::vector<TaskSpec> make_tasks(const House& house, const Vocabulary& vocab,
                                 Rng& rng) {
  bool any_slot = false;
  for (const auto& slots : house.object_slots) any_slot = any_slot || !slots.empty();
  if (!any_slot || house.objects.empty()) {
    throw GenerationError("house " + std::to_string(house.house_id) +
                          " has no placeable object slot");
  }
  std::vector<TaskSpec> tasks;
  auto next_id = [&] {
    return house.house_id * 1000 + static_cast<int>(tasks.size());
  };

  for (const auto& obj : house.objects) {
    TaskSpec t;
    t.task_id = next_id();
    t.kind = TaskKind::kNav;
    t.house_id = house.house_id;
    t.nav_target = NavTarget::kObject;
    t.object = obj.object;
    t.room = house.rooms[static_cast<std::size_t>(house.room_of(obj.tile))].type;
    t.command = {vocab.go, vocab.to, vocab.the, vocab.object_token[obj.object]};
    tasks.push_back(std::move(t));
  }
  for (const auto& room : house.rooms) {
    TaskSpec t;
    t.task_id = next_id();
    t.kind = TaskKind::kNav;
    t.house_id = house.house_id;
    t.nav_target = NavTarget::kRoom;
    t.room = room.type;
    t.command = {vocab.go, vocab.to, vocab.the,
                 vocab.room_token[static_cast<int>(room.type)]};
    tasks.push_back(std::move(t));
  }
  for (const auto& obj : house.objects) {
    const int src_room = house.room_of(obj.tile);
    for (std::size_t r = 0; r < house.rooms.size(); ++r) {
      if (static_cast<int>(r) == src_room) continue;
      std::vector<Tile> free;
      for (Tile s : house.object_slots[r]) {
        bool ok = true;
        for (const auto& o : house.objects) ok = ok && chebyshev(o.tile, s) >= 2;
        if (ok) free.push_back(s);
      }
      if (free.empty()) continue;
      TaskSpec t;
      t.task_id = next_id();
      t.kind = TaskKind::kPick;
      t.house_id = house.house_id;
      t.object = obj.object;
      t.room = house.rooms[r].type;
      t.source = obj.tile;
      t.destination = free[rng.below(free.size())];
      t.command = {vocab.move, vocab.the, vocab.object_token[obj.object],
                   vocab.to, vocab.the,
                   vocab.room_token[static_cast<int>(t.room)]};
      tasks.push_back(std::move(t));
    }
  }
  return tasks;
}

TaskTarget task_target(const TaskSpec& task) {
  if (task.kind == TaskKind::kNav && task.nav_target == NavTarget::kObject) {
    return {task.house_id, task.object, -1};
  }
  if (task.kind == TaskKind::kNav) {
    return {task.house_id, -1, static_cast<int>(task.room)};
  }
  return {task.house_id, task.object, static_cast<int>(task.room)};
}

}  // namespace lcrl::gridhouse
