#include <algorithm>
#include <cmath>
#include <string>

#include "lcrl/solver/solver.hpp"

namespace lcrl::solver {

void validate_mdp(const TabularMDP& mdp) {
  if (mdp.num_states <= 0) throw MdpError("MDP has no states");
  const auto n = mdp.table_size();
  if (mdp.next.size() != n || mdp.ground_truth_reward.size() != n ||
      mdp.success.size() != static_cast<std::size_t>(mdp.num_states) ||
      mdp.obs_index.size() != static_cast<std::size_t>(mdp.num_states)) {
    throw MdpError("MDP table sizes disagree with state count");
  }
  for (int s : mdp.next) {
    if (s < 0 || s >= mdp.num_states) {
      throw MdpError("successor " + std::to_string(s) + " out of range");
    }
  }
  if (mdp.sink >= 0) {
    for (int a = 0; a < kNumActions; ++a) {
      if (mdp.successor(mdp.sink, a) != mdp.sink) {
        throw MdpError("sink is not absorbing");
      }
    }
  }
  if (mdp.initial_state < 0 || mdp.initial_state >= mdp.num_states) {
    throw MdpError("initial state out of range");
  }
  if (mdp.horizon < 0) throw MdpError("negative horizon");
}

SoftSolution soft_q_iteration(const TabularMDP& mdp, std::span<const double> reward,
                              std::span<const double> terminal_value) {
  const int S = mdp.num_states;
  const int H = mdp.horizon;
  if (reward.size() != mdp.table_size()) {
    throw SolverError("reward has " + std::to_string(reward.size()) +
                      " entries, MDP needs " + std::to_string(mdp.table_size()));
  }
  for (double r : reward) {
    if (!std::isfinite(r)) throw SolverError("non-finite reward");
  }
  if (!terminal_value.empty() &&
      terminal_value.size() != static_cast<std::size_t>(S)) {
    throw SolverError("terminal value must have one entry per state");
  }

  SoftSolution sol;
  sol.horizon = H;
  sol.num_states = S;
  sol.q.resize(static_cast<std::size_t>(H + 1) * S * kNumActions);
  sol.v.resize(static_cast<std::size_t>(H + 1) * S);
  std::vector<double> v_next(static_cast<std::size_t>(S), 0.0);
  if (!terminal_value.empty()) v_next.assign(terminal_value.begin(), terminal_value.end());

  for (int t = H; t >= 0; --t) {
    double* q = sol.q.data() + static_cast<std::size_t>(t) * S * kNumActions;
    double* v = sol.v.data() + static_cast<std::size_t>(t) * S;
    for (int s = 0; s < S; ++s) {
      const std::size_t row = static_cast<std::size_t>(s) * kNumActions;
      double mx = -INFINITY;
      for (int a = 0; a < kNumActions; ++a) {
        const double qa = reward[row + a] + mdp.gamma * v_next[mdp.next[row + a]];
        q[row + a] = qa;
        mx = std::max(mx, qa);
      }
      double z = 0.0;
      for (int a = 0; a < kNumActions; ++a) z += std::exp(q[row + a] - mx);
      v[s] = mx + std::log(z);
    }
    v_next.assign(v, v + S);
  }
  sol.log_z = sol.v_at(0, mdp.initial_state);
  return sol;
}

Policy soft_policy(const SoftSolution& sol) {
  Policy p;
  p.horizon = sol.horizon;
  p.num_states = sol.num_states;
  p.prob.resize(sol.q.size());
  for (int t = 0; t <= sol.horizon; ++t) {
    for (int s = 0; s < sol.num_states; ++s) {
      const double v = sol.v_at(t, s);
      for (int a = 0; a < kNumActions; ++a) {
        const auto i = (static_cast<std::size_t>(t) * sol.num_states + s) * kNumActions + a;
        p.prob[i] = std::exp(sol.q[i] - v);
      }
    }
  }
  return p;
}

Policy greedy_policy(const SoftSolution& sol) {
  Policy p;
  p.horizon = sol.horizon;
  p.num_states = sol.num_states;
  p.prob.assign(sol.q.size(), 0.0);
  for (int t = 0; t <= sol.horizon; ++t) {
    for (int s = 0; s < sol.num_states; ++s) {
      int best = 0;
      for (int a = 1; a < kNumActions; ++a) {
        if (sol.q_at(t, s, a) > sol.q_at(t, s, best)) best = a;
      }
      p.prob[(static_cast<std::size_t>(t) * sol.num_states + s) * kNumActions + best] = 1.0;
    }
  }
  return p;
}

double demo_log_likelihood(const SoftSolution& sol, const Demonstration& demo) {
  double ll = 0.0;
  const auto steps = std::min<std::size_t>(demo.states.size(),
                                           static_cast<std::size_t>(sol.horizon + 1));
  for (std::size_t t = 0; t < steps; ++t) {
    const int ti = static_cast<int>(t);
    ll += sol.q_at(ti, demo.states[t], demo.actions[t]) - sol.v_at(ti, demo.states[t]);
  }
  return ll;
}

}  // namespace lcrl::solver
