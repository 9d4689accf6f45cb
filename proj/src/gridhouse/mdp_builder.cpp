#include "lcrl/gridhouse/mdp_builder.hpp"

#include <array>
#include <map>
#include <queue>
#include <string>
#include <unordered_map>

#include "lcrl/common/rng.hpp"

namespace lcrl::gridhouse {
namespace {

constexpr std::array<Tile, 4> kHeading = {{{0, -1}, {1, 0}, {0, 1}, {-1, 0}}};

// View order N, S, E, W: forward and rightward unit vectors.
constexpr std::array<Tile, kNumViews> kViewForward = {
    {{0, -1}, {0, 1}, {1, 0}, {-1, 0}}};
constexpr std::array<Tile, kNumViews> kViewRight = {
    {{1, 0}, {-1, 0}, {0, 1}, {0, -1}}};

}  // namespace

Observation render_observation(const House& house, const TaskSpec& task,
                               Tile position, ObjectStatus status) {
  // Overlay map for the task at this object status.
  std::map<Tile, std::uint8_t> overlays;
  for (const auto& o : house.objects) {
    if (task.kind == TaskKind::kPick && o.object == task.object) continue;
    overlays[o.tile] = static_cast<std::uint8_t>(object_class(o.object));
  }
  if (task.kind == TaskKind::kPick) {
    if (status == ObjectStatus::kAtSource) {
      overlays[task.source] = static_cast<std::uint8_t>(object_class(task.object));
    } else if (status == ObjectStatus::kAtDestination) {
      overlays[task.destination] =
          static_cast<std::uint8_t>(object_class(task.object));
    }
  }
  const bool held =
      task.kind == TaskKind::kPick && status == ObjectStatus::kHeld;

  Observation obs;
  for (int v = 0; v < kNumViews; ++v) {
    for (int row = 0; row < kViewSize; ++row) {
      for (int col = 0; col < kViewSize; ++col) {
        const int depth = kViewSize - 1 - row;
        const int lateral = col - kViewSize / 2;
        const Tile t{position.x + kViewForward[v].x * depth +
                         kViewRight[v].x * lateral,
                     position.y + kViewForward[v].y * depth +
                         kViewRight[v].y * lateral};
        const std::size_t cell =
            static_cast<std::size_t>(v * kViewCells + row * kViewSize + col);
        obs.ground[cell] = static_cast<std::uint8_t>(
            house.in_bounds(t) ? house.at(t) : SemanticClass::kOutOfBounds);
        obs.overlay[cell] = kNoOverlay;
        if (held && depth == 0 && lateral == 0) {
          obs.overlay[cell] = static_cast<std::uint8_t>(SemanticClass::kHeldMarker);
        } else if (auto it = overlays.find(t); it != overlays.end()) {
          obs.overlay[cell] = it->second;
        }
      }
    }
  }
  obs.rehash();
  return obs;
}

solver::TabularMDP build_mdp(const House& house, const TaskSpec& task,
                             const MdpOptions& opts) {
  if (task.house_id != house.house_id) {
    throw std::invalid_argument("task " + std::to_string(task.task_id) +
                                " does not belong to house " +
                                std::to_string(house.house_id));
  }
  std::vector<Tile> tiles;
  std::vector<int> tile_index(house.grid.size(), -1);
  for (int y = 0; y < house.height; ++y) {
    for (int x = 0; x < house.width; ++x) {
      if (!house.walkable({x, y})) continue;
      tile_index[static_cast<std::size_t>(y * house.width + x)] =
          static_cast<int>(tiles.size());
      tiles.push_back({x, y});
    }
  }
  const bool pick = task.kind == TaskKind::kPick;
  const int statuses = pick ? 3 : 1;
  const int num_tiles = static_cast<int>(tiles.size());

  Tile nav_object{};
  int nav_room = -1;
  if (!pick) {
    if (task.nav_target == NavTarget::kObject) {
      const auto* o = house.find_object(task.object);
      if (!o) throw std::invalid_argument("NAV target object not in house");
      nav_object = o->tile;
    } else {
      nav_room = house.room_index(task.room);
      if (nav_room < 0) throw std::invalid_argument("NAV target room not in house");
    }
  } else {
    if (task.source == task.destination || !house.walkable(task.source) ||
        !house.walkable(task.destination)) {
      throw std::invalid_argument("PICK source/destination invalid");
    }
  }

  solver::TabularMDP mdp;
  mdp.num_states = num_tiles * 4 * statuses + 1;
  mdp.sink = mdp.num_states - 1;
  mdp.horizon = opts.horizon;
  mdp.gamma = opts.gamma;
  mdp.next.assign(mdp.table_size(), mdp.sink);
  mdp.ground_truth_reward.assign(mdp.table_size(), 0.0);
  mdp.success.assign(static_cast<std::size_t>(mdp.num_states), 0);
  mdp.obs_index.assign(static_cast<std::size_t>(mdp.num_states), -1);
  mdp.states.resize(static_cast<std::size_t>(mdp.num_states));

  auto state_id = [&](int status, int tile, int orient) {
    return (status * num_tiles + tile) * 4 + orient;
  };

  std::unordered_map<std::uint64_t, int> key_to_obs;
  for (int st = 0; st < statuses; ++st) {
    for (int w = 0; w < num_tiles; ++w) {
      const Tile tile = tiles[static_cast<std::size_t>(w)];
      Observation obs =
          render_observation(house, task, tile, static_cast<ObjectStatus>(st));
      auto [it, inserted] =
          key_to_obs.try_emplace(obs.key, static_cast<int>(mdp.observations.size()));
      if (inserted) mdp.observations.push_back(obs);

      bool is_success;
      if (pick) {
        is_success = st == static_cast<int>(ObjectStatus::kAtDestination);
      } else if (nav_room >= 0) {
        is_success = house.room_of(tile) == nav_room;
      } else {
        is_success = chebyshev(tile, nav_object) <= 1;
      }

      for (int o = 0; o < 4; ++o) {
        const int s = state_id(st, w, o);
        mdp.states[static_cast<std::size_t>(s)] = {tile.x, tile.y, o, st};
        mdp.obs_index[static_cast<std::size_t>(s)] = it->second;
        mdp.success[static_cast<std::size_t>(s)] = is_success;
        auto row = static_cast<std::size_t>(s) * solver::kNumActions;
        if (is_success) {
          for (int a = 0; a < solver::kNumActions; ++a) {
            mdp.next[row + a] = mdp.sink;
            mdp.ground_truth_reward[row + a] = opts.success_reward;
          }
          continue;
        }
        const Tile ahead{tile.x + kHeading[o].x, tile.y + kHeading[o].y};
        mdp.next[row + solver::kForward] =
            house.walkable(ahead)
                ? state_id(st, tile_index[static_cast<std::size_t>(
                                   ahead.y * house.width + ahead.x)],
                           o)
                : s;
        mdp.next[row + solver::kTurnLeft] = state_id(st, w, (o + 3) % 4);
        mdp.next[row + solver::kTurnRight] = state_id(st, w, (o + 1) % 4);
        int after = st;
        if (pick) {
          const auto status = static_cast<ObjectStatus>(st);
          if (status == ObjectStatus::kAtSource &&
              chebyshev(tile, task.source) <= 1) {
            after = static_cast<int>(ObjectStatus::kHeld);
          } else if (status == ObjectStatus::kHeld &&
                     chebyshev(tile, task.destination) <= 1) {
            after = static_cast<int>(ObjectStatus::kAtDestination);
          } else if (status == ObjectStatus::kHeld &&
                     chebyshev(tile, task.source) <= 1) {
            after = static_cast<int>(ObjectStatus::kAtSource);
          }
        }
        mdp.next[row + solver::kInteract] = state_id(after, w, o);
      }
    }
  }
  const auto sink_row = static_cast<std::size_t>(mdp.sink) * solver::kNumActions;
  for (int a = 0; a < solver::kNumActions; ++a) mdp.next[sink_row + a] = mdp.sink;
  mdp.states[static_cast<std::size_t>(mdp.sink)] = {-1, -1, 0, 0};

  const auto dist = distance_to_success(mdp);
  std::vector<int> starts;
  for (int w = 0; w < num_tiles; ++w) {
    for (int o = 0; o < 4; ++o) {
      const int s = state_id(0, w, o);
      const int d = dist[static_cast<std::size_t>(s)];
      if (d >= 1 && d <= mdp.horizon) starts.push_back(s);
    }
  }
  if (starts.empty()) {
    throw UnsolvableTask("task " + std::to_string(task.task_id) +
                         ": no start state reaches the goal within " +
                         std::to_string(mdp.horizon) + " steps");
  }
  Rng rng(derive_seed(static_cast<std::uint64_t>(task.task_id), 0x5374617274ULL));
  mdp.initial_state = starts[rng.below(starts.size())];
  solver::validate_mdp(mdp);
  return mdp;
}

std::vector<int> distance_to_success(const solver::TabularMDP& mdp) {
  std::vector<std::vector<int>> preds(static_cast<std::size_t>(mdp.num_states));
  for (int s = 0; s < mdp.num_states; ++s) {
    for (int a = 0; a < solver::kNumActions; ++a) {
      const int n = mdp.successor(s, a);
      if (n != s) preds[static_cast<std::size_t>(n)].push_back(s);
    }
  }
  std::vector<int> dist(static_cast<std::size_t>(mdp.num_states), -1);
  std::queue<int> q;
  for (int s = 0; s < mdp.num_states; ++s) {
    if (mdp.success[static_cast<std::size_t>(s)]) {
      dist[static_cast<std::size_t>(s)] = 0;
      q.push(s);
    }
  }
  while (!q.empty()) {
    const int s = q.front();
    q.pop();
    for (int p : preds[static_cast<std::size_t>(s)]) {
      if (dist[static_cast<std::size_t>(p)] >= 0) continue;
      dist[static_cast<std::size_t>(p)] = dist[static_cast<std::size_t>(s)] + 1;
      q.push(p);
    }
  }
  return dist;
}

}  // namespace lcrl::gridhouse
