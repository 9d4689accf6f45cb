#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "lcrl/reoptimize/reoptimize.hpp"
#include "lcrl/solver/solver.hpp"

namespace lcrl::reoptimize {

using solver::kNumActions;

namespace {

void check_potential(const solver::TabularMDP& mdp, std::span<const double> potential) {
  if (potential.size() != static_cast<std::size_t>(mdp.num_states)) {
    throw std::invalid_argument("potential needs one value per state");
  }
  for (double p : potential) {
    if (!std::isfinite(p)) throw std::invalid_argument("potential is not finite");
  }
}

/// Number of (t, s) whose argmax sets differ between two Q tables.
int argmax_mismatches(std::span<const double> q1, std::span<const double> q2, int rows) {
  int bad = 0;
  for (int i = 0; i < rows; ++i) {
    const auto base = static_cast<std::size_t>(i) * kNumActions;
    const auto m1 = *std::max_element(q1.begin() + base, q1.begin() + base + kNumActions);
    const auto m2 = *std::max_element(q2.begin() + base, q2.begin() + base + kNumActions);
    const double tol1 = 1e-9 * (1.0 + std::abs(m1)), tol2 = 1e-9 * (1.0 + std::abs(m2));
    for (int a = 0; a < kNumActions; ++a) {
      const bool in1 = q1[base + static_cast<std::size_t>(a)] >= m1 - tol1;
      const bool in2 = q2[base + static_cast<std::size_t>(a)] >= m2 - tol2;
      if (in1 != in2) {
        ++bad;
        break;
      }
    }
  }
  return bad;
}

}  // namespace

std::vector<double> value_potential(const solver::TabularMDP& mdp,
                                    std::span<const double> reward) {
  const auto sol = solver::soft_q_iteration(mdp, reward);
  return {sol.v.begin(), sol.v.begin() + mdp.num_states};
}

std::vector<double> shaped_reward(const solver::TabularMDP& mdp,
                                  std::span<const double> reward,
                                  std::span<const double> potential) {
  check_potential(mdp, potential);
  std::vector<double> out(reward.begin(), reward.end());
  for (int s = 0; s < mdp.num_states; ++s) {
    for (int a = 0; a < kNumActions; ++a) {
      const auto i = static_cast<std::size_t>(s) * kNumActions + static_cast<std::size_t>(a);
      out[i] += mdp.gamma * potential[static_cast<std::size_t>(mdp.successor(s, a))] -
                potential[static_cast<std::size_t>(s)];
    }
  }
  return out;
}

std::vector<double> hard_q_iteration(const solver::TabularMDP& mdp,
                                     std::span<const double> reward,
                                     std::span<const double> terminal_value) {
  const auto S = static_cast<std::size_t>(mdp.num_states);
  const int H = mdp.horizon;
  if (reward.size() != mdp.table_size()) throw std::invalid_argument("reward has the wrong size");
  if (!terminal_value.empty() && terminal_value.size() != S) {
    throw std::invalid_argument("terminal value has the wrong size");
  }
  std::vector<double> q(static_cast<std::size_t>(H + 1) * S * kNumActions);
  std::vector<double> v_next(S, 0.0), v(S);
  if (!terminal_value.empty()) std::copy(terminal_value.begin(), terminal_value.end(), v_next.begin());
  for (int t = H; t >= 0; --t) {
    double* qt = q.data() + static_cast<std::size_t>(t) * S * kNumActions;
    for (std::size_t s = 0; s < S; ++s) {
      double best = -std::numeric_limits<double>::infinity();
      for (int a = 0; a < kNumActions; ++a) {
        const auto i = s * kNumActions + static_cast<std::size_t>(a);
        qt[i] = reward[i] + mdp.gamma * v_next[static_cast<std::size_t>(mdp.next[i])];
        best = std::max(best, qt[i]);
      }
      v[s] = best;
    }
    v_next.swap(v);
  }
  return q;
}

ShapingReport shaping_invariance_check(const solver::TabularMDP& mdp,
                                       std::span<const double> reward,
                                       std::span<const double> potential) {
  const auto shaped = shaped_reward(mdp, reward, potential);
  std::vector<double> terminal(potential.size());
  for (std::size_t i = 0; i < terminal.size(); ++i) terminal[i] = -potential[i];
  const int rows = (mdp.horizon + 1) * mdp.num_states;

  ShapingReport rep;
  const auto soft = solver::soft_q_iteration(mdp, reward);
  const auto soft_shaped = solver::soft_q_iteration(mdp, shaped, terminal);
  rep.soft_mismatches = argmax_mismatches(soft.q, soft_shaped.q, rows);
  rep.hard_mismatches = argmax_mismatches(hard_q_iteration(mdp, reward),
                                          hard_q_iteration(mdp, shaped, terminal), rows);
  return rep;
}

}  // namespace lcrl::reoptimize
