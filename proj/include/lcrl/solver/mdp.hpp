#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "lcrl/gridhouse/observation.hpp"

namespace lcrl::solver {

inline constexpr int kNumActions = 4;

enum Action : int { kForward = 0, kTurnLeft = 1, kTurnRight = 2, kInteract = 3 };

/// Grid coordinates of a state; absent for synthetic MDPs.
struct StateInfo {
  int x = 0;
  int y = 0;
  int orientation = 0;  // 0 N, 1 E, 2 S, 3 W
  int status = 0;       // ObjectStatus for PICK tasks, 0 for NAV
};

/// Deterministic finite-horizon MDP whose rewards are defined on
/// observations. Decisions happen at t = 0..horizon.
struct TabularMDP {
  int num_states = 0;
  std::vector<int> next;                     // [s * kNumActions + a]
  std::vector<double> ground_truth_reward;   // [s * kNumActions + a]
  int horizon = 30;
  double gamma = 0.99;
  int initial_state = 0;
  std::vector<std::uint8_t> success;         // [s]
  int sink = -1;
  /// Index into `observations`; -1 for the sink's reserved zero observation.
  std::vector<int> obs_index;
  std::vector<gridhouse::Observation> observations;
  std::vector<StateInfo> states;

  int successor(int s, int a) const {
    return next[static_cast<std::size_t>(s * kNumActions + a)];
  }
  std::size_t table_size() const {
    return static_cast<std::size_t>(num_states) * kNumActions;
  }
};

class MdpError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Checks table sizes, successor ranges and sink absorption.
void validate_mdp(const TabularMDP& mdp);

}  // namespace lcrl::solver
