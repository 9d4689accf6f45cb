#pragma once

#include <stdexcept>

#include "lcrl/gridhouse/house.hpp"
#include "lcrl/gridhouse/observation.hpp"
#include "lcrl/gridhouse/task.hpp"
#include "lcrl/solver/mdp.hpp"

namespace lcrl::gridhouse {

enum class ObjectStatus : int { kAtSource = 0, kHeld = 1, kAtDestination = 2 };

struct MdpOptions {
  int horizon = 30;
  double gamma = 0.99;
  double success_reward = 10.0;
};

class UnsolvableTask : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Renders the panorama at `position`. Static house objects are drawn where
/// they stand; a PICK object is drawn at its source or destination tile, or
/// as the held marker on the agent's own cell.
Observation render_observation(const House& house, const TaskSpec& task,
                               Tile position, ObjectStatus status);

/// Tabular MDP over (tile, orientation[, object status]) plus an absorbing
/// sink. Success states carry the task reward and lead to the sink.
/// Throws UnsolvableTask if no success state is reachable within the horizon.
solver::TabularMDP build_mdp(const House& house, const TaskSpec& task,
                             const MdpOptions& opts = {});

/// Shortest number of steps from every state to a success state (-1 when
/// unreachable). Breadth-first over the transition table.
std::vector<int> distance_to_success(const solver::TabularMDP& mdp);

}  // namespace lcrl::gridhouse
