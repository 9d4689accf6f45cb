#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "lcrl/reward/reward_cache.hpp"
#include "lcrl/reward/reward_net.hpp"
#include "lcrl/trainers/common.hpp"

namespace lcrl::trainers {

/// Average demonstration log-likelihood under the soft-optimal policy of the
/// network's reward.
double demo_log_likelihood(const reward::RewardNet& net, const TrainTask& task);

/// Accumulates the gradient of the negative average demo log-likelihood,
/// -(rho_D - rho*) . grad r, into the network's parameter gradients and
/// returns the log-likelihood before the update. Throws TrainError when the
/// task has no demonstrations.
double lcrl_gradient(reward::RewardNet& net, const TrainTask& task);

/// LC-RL: one task per step, likelihood ascent with Adam.
std::vector<CurvePoint> lcrl_train(reward::RewardNet& net, std::span<const TrainTask> tasks,
                                   const TrainConfig& cfg);

/// States reachable from the initial state under some action sequence.
std::vector<std::uint8_t> reachable_states(const solver::TabularMDP& mdp);

/// Mean squared error over (distinct observation, action) rows seen from
/// reachable states; the target of a row is the mean ground-truth reward of
/// the reachable states sharing it.
/// Accumulates the gradient and returns the loss.
double regression_gradient(reward::RewardNet& net, const TrainTask& task);

std::vector<CurvePoint> reward_regression_train(reward::RewardNet& net,
                                                std::span<const TrainTask> tasks,
                                                const TrainConfig& cfg);

inline constexpr double kGailLogitClamp = 10.0;

/// Discriminator logits clamped to [-10, 10], sink 0. This is also the
/// reward log D - log(1 - D) handed to solvers at evaluation time.
std::vector<double> gail_logits(const reward::RewardNet& disc, const solver::TabularMDP& mdp,
                                std::span<const int> command,
                                reward::RewardCache* cache = nullptr);

/// Policy-step reward -log(1 - D) = softplus(logit), sink 0.
std::vector<double> gail_policy_reward(std::span<const double> logits,
                                       const solver::TabularMDP& mdp);

/// One GAIL-Exact iteration on a task: exact soft policy for the current
/// policy reward, then the logistic loss with demonstration occupancy as
/// positives and policy occupancy as negatives, each normalised to unit
/// mass. Accumulates the discriminator gradient and returns the loss.
double gail_gradient(reward::RewardNet& disc, const TrainTask& task);

std::vector<CurvePoint> gail_exact_train(reward::RewardNet& disc,
                                         std::span<const TrainTask> tasks,
                                         const TrainConfig& cfg);

}  // namespace lcrl::trainers
