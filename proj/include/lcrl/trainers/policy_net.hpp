#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "lcrl/reward/reward_net.hpp"
#include "lcrl/solver/solver.hpp"
#include "lcrl/trainers/common.hpp"

namespace lcrl::trainers {

/// Language-conditioned policy for cloning: the reward trunk plus
/// orientation and held-object embeddings, gated multiplicatively,
/// FC 32 -> relu 32 -> 4 and a softmax.
class PolicyNet {
 public:
  struct Bound {
    reward::Trunk::Bound trunk;
    ad::Tensor orientation_embedding, held_embedding, fc1_w, fc1_b, fc2_w, fc2_b;
  };

  PolicyNet(int vocab_size, std::uint64_t seed, reward::NetOptions opts = {});

  ad::ParamStore& params() { return store_; }
  const ad::ParamStore& params() const { return store_; }
  const reward::Trunk& trunk() const { return trunk_; }

  Bound bind(ad::Tape& tape);
  Bound bind(ad::Tape& tape) const;

  /// Log-probabilities [rows, 4] for (image row, orientation, held) triples.
  ad::Tensor head_forward(const Bound& b, const ad::Tensor& e_image,
                          const ad::Tensor& e_language, std::span<const int> image_rows,
                          std::span<const int> orientations,
                          std::span<const int> held) const;

 private:
  ad::ParamStore store_;
  reward::Trunk trunk_;
};

/// 1 when the task object is held in state `s`.
int held_flag(const solver::TabularMDP& mdp, int s);

/// pi(a | s) for every state, replicated over time steps so it plugs into
/// the solver's evaluation. The sink row is uniform.
solver::Policy policy_table(const PolicyNet& net, const solver::TabularMDP& mdp,
                            std::span<const int> command);

/// Stationary cloning target pi_bar(a|s) = rho(s,a) / sum_a rho(s,a) and the
/// state weights sum_a rho(s,a), from the soft-optimal policy of the
/// ground-truth reward. Rows of unvisited states are uniform.
struct CloningTarget {
  std::vector<double> prob;    // [s * A + a]
  std::vector<double> weight;  // [s]
};
CloningTarget cloning_target(const solver::TabularMDP& mdp);

/// Occupancy-weighted cross-entropy against the cloning target over non-sink
/// states, weights normalised to sum to one. Accumulates the gradient and
/// returns the loss.
double cloning_gradient(PolicyNet& net, const TrainTask& task, const CloningTarget& target);

std::vector<CurvePoint> cloning_train(PolicyNet& net, std::span<const TrainTask> tasks,
                                      const TrainConfig& cfg);

/// Rolls the network's most likely action (lowest id on ties) from s0,
/// evaluating it on the current state at each step; true iff a success
/// state is visited within the horizon.
bool policy_rollout(const PolicyNet& net, const solver::TabularMDP& mdp,
                    std::span<const int> command);

}  // namespace lcrl::trainers
