#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "lcrl/gridhouse/observation.hpp"
#include "lcrl/solver/mdp.hpp"

namespace lcrl::reoptimize {

/// Step interface over a tabular MDP. A learner sees state ids, their
/// observations and episode ends, never the transition table.
class BlackBoxEnv {
 public:
  struct Step {
    int state;
    bool done;  // the episode entered the absorbing sink
  };

  explicit BlackBoxEnv(const solver::TabularMDP& mdp) : mdp_(&mdp) {}

  int reset();
  Step step(int action);
  int state() const { return state_; }
  int num_states() const { return mdp_->num_states; }
  int horizon() const { return mdp_->horizon; }
  double gamma() const { return mdp_->gamma; }
  /// Observation of state `s`; nullptr for the sink.
  const gridhouse::Observation* observation(int s) const;
  /// True iff `s` is a success state; used only to score episodes.
  bool is_success(int s) const;

 private:
  const solver::TabularMDP* mdp_;
  int state_ = 0;
};

/// Learned reward as a function of (observation, action); observation is
/// nullptr for the sink.
using ObservationReward = std::function<double(const gridhouse::Observation*, int)>;

/// Table lookup over an MDP's distinct observations, [obs * A + a].
ObservationReward table_reward(const solver::TabularMDP& mdp, std::span<const double> reward);

struct QLearnConfig {
  int episodes = 2000;
  double alpha = 0.1;
  double epsilon_start = 1.0;
  double epsilon_end = 0.05;
  /// Linear decay length; negative means half of `episodes`.
  int epsilon_decay_episodes = -1;
  bool shaping = false;
  /// Greedy evaluation every this many episodes (0 disables the curve).
  int eval_every = 100;
  std::uint64_t seed = 0;
};

struct QLearnResult {
  std::vector<double> q;  // [s * A + a]
  /// Greedy success at each interleaved evaluation.
  std::vector<std::uint8_t> eval_curve;
  bool success = false;
};

/// One-step Q-learning on r(o(s), a) + [shaping: gamma Phi(s') - Phi(s)],
/// epsilon-greedy behaviour, episodes truncated after H+1 decisions with no
/// bootstrap on the last one. `potential` is required when shaping is on.
QLearnResult q_learning(BlackBoxEnv& env, const ObservationReward& reward,
                        const QLearnConfig& cfg, std::span<const double> potential = {});

/// Greedy rollout of a stationary Q table from the reset state.
bool greedy_success(BlackBoxEnv& env, std::span<const double> q);

/// Phi(s) = V_0(s), the soft value of `reward` from the exact solver.
std::vector<double> value_potential(const solver::TabularMDP& mdp,
                                    std::span<const double> reward);

/// r'(s,a) = r(s,a) + gamma Phi(next(s,a)) - Phi(s).
std::vector<double> shaped_reward(const solver::TabularMDP& mdp,
                                  std::span<const double> reward,
                                  std::span<const double> potential);

struct ShapingReport {
  /// (t, s) pairs whose argmax action sets differ, soft and hard backups.
  int soft_mismatches = 0;
  int hard_mismatches = 0;
  bool invariant() const { return soft_mismatches == 0 && hard_mismatches == 0; }
};

/// Compares per-step argmax sets under the shaped and unshaped reward. The
/// shaped problem uses terminal value -Phi, which makes Q' = Q - Phi(s)
/// exactly; sets are compared with tolerance 1e-9 (1 + |max Q|).
ShapingReport shaping_invariance_check(const solver::TabularMDP& mdp,
                                       std::span<const double> reward,
                                       std::span<const double> potential);

/// Hard (max) finite-horizon Q iteration with optional terminal values,
/// laid out like SoftSolution::q.
std::vector<double> hard_q_iteration(const solver::TabularMDP& mdp,
                                     std::span<const double> reward,
                                     std::span<const double> terminal_value = {});

}  // namespace lcrl::reoptimize
