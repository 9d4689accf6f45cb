#include <algorithm>

#include "lcrl/solver/solver.hpp"

namespace lcrl::solver {

Demonstration sample_trajectory(const TabularMDP& mdp, const Policy& policy,
                                Rng& rng) {
  Demonstration d;
  d.states.reserve(static_cast<std::size_t>(mdp.horizon + 1));
  d.actions.reserve(static_cast<std::size_t>(mdp.horizon + 1));
  int s = mdp.initial_state;
  for (int t = 0; t <= mdp.horizon; ++t) {
    const auto row = policy.row(t, s);
    const double u = rng.uniform();
    double acc = 0.0;
    int a = kNumActions - 1;
    for (int k = 0; k < kNumActions; ++k) {
      acc += row[static_cast<std::size_t>(k)];
      if (u < acc) {
        a = k;
        break;
      }
    }
    // Guard against rounding leaving `u` past the last positive entry.
    while (a > 0 && row[static_cast<std::size_t>(a)] == 0.0) --a;
    d.states.push_back(s);
    d.actions.push_back(a);
    s = mdp.successor(s, a);
  }
  return d;
}

bool evaluate_success(const TabularMDP& mdp, const Policy& policy) {
  int s = mdp.initial_state;
  for (int t = 0; t <= mdp.horizon; ++t) {
    if (mdp.success[static_cast<std::size_t>(s)]) return true;
    if (t == mdp.horizon) break;
    const auto row = policy.row(t, s);
    int best = 0;
    for (int a = 1; a < kNumActions; ++a) {
      if (row[static_cast<std::size_t>(a)] > row[static_cast<std::size_t>(best)]) best = a;
    }
    s = mdp.successor(s, best);
  }
  return false;
}

double success_rate(const std::vector<bool>& outcomes) {
  if (outcomes.empty()) return 0.0;
  return static_cast<double>(std::count(outcomes.begin(), outcomes.end(), true)) /
         static_cast<double>(outcomes.size());
}

}  // namespace lcrl::solver
