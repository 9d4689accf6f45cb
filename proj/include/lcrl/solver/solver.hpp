#pragma once

#include <span>
#include <stdexcept>
#include <vector>

#include "lcrl/common/rng.hpp"
#include "lcrl/solver/mdp.hpp"

namespace lcrl::solver {

/// Time-indexed soft (MaxEnt) values for t = 0..H.
struct SoftSolution {
  int horizon = 0;
  int num_states = 0;
  std::vector<double> q;  // [(t * S + s) * A + a]
  std::vector<double> v;  // [t * S + s]
  double log_z = 0.0;     // v at (0, initial state)

  double q_at(int t, int s, int a) const {
    return q[(static_cast<std::size_t>(t) * num_states + s) * kNumActions + a];
  }
  double v_at(int t, int s) const {
    return v[static_cast<std::size_t>(t) * num_states + s];
  }
};

/// Non-stationary policy pi_t(a | s) for t = 0..H.
struct Policy {
  int horizon = 0;
  int num_states = 0;
  std::vector<double> prob;  // [(t * S + s) * A + a]

  double at(int t, int s, int a) const {
    return prob[(static_cast<std::size_t>(t) * num_states + s) * kNumActions + a];
  }
  std::span<const double> row(int t, int s) const {
    return std::span(prob).subspan(
        (static_cast<std::size_t>(t) * num_states + s) * kNumActions, kNumActions);
  }
};

struct Occupancy {
  enum class Kind { kPolicy, kEmpirical };
  Kind kind = Kind::kPolicy;
  std::vector<double> rho;  // [s * A + a], discounted visitation mass

  double total() const;
};

/// One rollout: H+1 (state, action) pairs, continuing inside the sink once
/// the episode is over.
struct Demonstration {
  std::vector<int> states;
  std::vector<int> actions;
};

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Backward recursion with V_{H+1} = 0:
///   Q_t(s,a) = r(s,a) + gamma * V_{t+1}(next(s,a)),  V_t(s) = logsumexp_a Q_t(s,a).
/// `terminal_value`, when given, replaces the zero V_{H+1} (one value per state).
SoftSolution soft_q_iteration(const TabularMDP& mdp, std::span<const double> reward,
                              std::span<const double> terminal_value = {});

/// pi_t(a|s) = exp(Q_t(s,a) - V_t(s)).
Policy soft_policy(const SoftSolution& sol);

/// Argmax of Q_t under strict '>' so ties go to the lowest action id.
Policy greedy_policy(const SoftSolution& sol);

/// Forward algorithm: P_0 = delta(s0), P_{t+1}(s') = sum P_t(s) pi_t(a|s)
/// [next(s,a) = s'], rho(s,a) = sum_t gamma^t P_t(s) pi_t(a|s).
/// Throws SolverError when a policy row does not sum to one.
Occupancy occupancy_forward(const TabularMDP& mdp, const Policy& policy);

/// rho(s,a) = (1/N) sum_demos sum_t gamma^t [s_t = s, a_t = a].
Occupancy empirical_occupancy(const TabularMDP& mdp,
                              std::span<const Demonstration> demos);

Demonstration sample_trajectory(const TabularMDP& mdp, const Policy& policy,
                                Rng& rng);

/// sum_t log pi_t(a_t | s_t) under the soft policy of `sol`.
double demo_log_likelihood(const SoftSolution& sol, const Demonstration& demo);

/// Rolls the policy's most likely action (lowest id on ties) from s0 for up
/// to H steps; true iff a success state is visited.
bool evaluate_success(const TabularMDP& mdp, const Policy& policy);

/// Fraction of true entries; 0 for an empty batch.
double success_rate(const std::vector<bool>& outcomes);

}  // namespace lcrl::solver
