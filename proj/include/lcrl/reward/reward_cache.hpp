#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

#include "lcrl/reward/reward_net.hpp"
#include "lcrl/solver/mdp.hpp"

namespace lcrl::reward {

struct CacheStats {
  std::uint64_t hits = 0;
  std::uint64_t misses = 0;
  /// Panorama encodings run through the CNN.
  std::uint64_t cnn_forwards = 0;
};

/// Per-network memo of panorama embeddings and rewards. Entries are dropped
/// whenever the network's parameters change.
class RewardCache {
 public:
  const CacheStats& stats() const { return stats_; }
  std::size_t image_entries() const { return images_.size(); }
  std::size_t reward_entries() const { return rewards_.size(); }
  void clear();

 private:
  friend std::vector<double> reward_all(const RewardNet&, const solver::TabularMDP&,
                                        std::span<const int>, RewardCache*);
  struct RewardKey {
    std::uint64_t obs;
    int action;
    std::uint64_t task;
    bool operator==(const RewardKey&) const = default;
  };
  struct RewardKeyHash {
    std::size_t operator()(const RewardKey& k) const;
  };

  void sync(const RewardNet& net);

  const ad::ParamStore* owner_ = nullptr;
  std::uint64_t version_ = 0;
  std::unordered_map<std::uint64_t, std::array<double, kEmbed>> images_;
  std::unordered_map<RewardKey, double, RewardKeyHash> rewards_;
  CacheStats stats_;
};

/// Learned reward for every (state, action), sink forced to 0. Without a
/// cache every pair is evaluated on its own; with one, each distinct
/// observation is encoded once. Both paths give bit-identical arrays.
std::vector<double> reward_all(const RewardNet& net, const solver::TabularMDP& mdp,
                               std::span<const int> tokens, RewardCache* cache = nullptr);

/// Differentiable rewards for a whole MDP on one tape: one row per
/// (distinct observation, action).
class RewardGraph {
 public:
  RewardGraph(RewardNet& net, const solver::TabularMDP& mdp, std::span<const int> tokens,
              CacheStats* stats = nullptr);

  /// [s * A + a], sink 0.
  const std::vector<double>& rewards() const { return rewards_; }

  /// Accumulates sum_{s,a} coeffs(s,a) * grad r(o(s), a) into the network's
  /// parameter gradients. Coefficients are first summed over states sharing
  /// an observation; sink coefficients are ignored. Single use.
  void backward(std::span<const double> coeffs);

  /// Same, with coefficients already aggregated per (observation, action),
  /// laid out [obs * A + a].
  void backward_rows(std::span<const double> row_coeffs);

  /// Sums per-state coefficients into rows [obs * A + a].
  std::vector<double> aggregate(std::span<const double> coeffs) const;
  std::size_t num_rows() const { return row_values_.size(); }
  std::span<const double> row_values() const { return row_values_; }

 private:
  const solver::TabularMDP& mdp_;
  ad::Tape tape_;
  ad::Tensor out_;
  std::vector<double> row_values_;
  std::vector<double> rewards_;
  bool used_ = false;
};

/// One-shot form of RewardGraph::backward.
void reward_backward_weighted(RewardNet& net, const solver::TabularMDP& mdp,
                              std::span<const int> tokens, std::span<const double> coeffs,
                              CacheStats* stats = nullptr);

}  // namespace lcrl::reward
