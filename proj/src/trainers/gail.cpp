#include <algorithm>
#include <cmath>
#include <string>

#include "lcrl/trainers/reward_trainers.hpp"

namespace lcrl::trainers {

namespace {

double clamp_logit(double x) { return std::clamp(x, -kGailLogitClamp, kGailLogitClamp); }

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double softplus(double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

}  // namespace

std::vector<double> gail_logits(const reward::RewardNet& disc, const solver::TabularMDP& mdp,
                                std::span<const int> command, reward::RewardCache* cache) {
  auto r = reward::reward_all(disc, mdp, command, cache);
  for (auto& x : r) x = clamp_logit(x);
  return r;
}

std::vector<double> gail_policy_reward(std::span<const double> logits,
                                       const solver::TabularMDP& mdp) {
  std::vector<double> r(logits.size(), 0.0);
  for (int s = 0; s < mdp.num_states; ++s) {
    if (mdp.obs_index[static_cast<std::size_t>(s)] < 0) continue;
    for (int a = 0; a < solver::kNumActions; ++a) {
      const auto i = static_cast<std::size_t>(s) * solver::kNumActions + a;
      r[i] = softplus(logits[i]);
    }
  }
  return r;
}

double gail_gradient(reward::RewardNet& disc, const TrainTask& task) {
  if (task.demos.empty()) {
    throw TrainError("task " + std::to_string(task.task_id) + " has no demonstrations");
  }
  const auto& mdp = task.mdp;
  reward::RewardGraph graph(disc, mdp, task.command);
  const auto raw = graph.row_values();

  std::vector<double> logits(graph.rewards());
  for (auto& x : logits) x = clamp_logit(x);
  const auto sol = solver::soft_q_iteration(mdp, gail_policy_reward(logits, mdp));
  const auto rho_pi = solver::occupancy_forward(mdp, solver::soft_policy(sol));
  const auto rho_d = solver::empirical_occupancy(mdp, task.demos);

  const auto pos = graph.aggregate(rho_d.rho);
  const auto neg = graph.aggregate(rho_pi.rho);
  double pos_mass = 0.0, neg_mass = 0.0;
  for (std::size_t i = 0; i < pos.size(); ++i) {
    pos_mass += pos[i];
    neg_mass += neg[i];
  }
  if (!(pos_mass > 0.0) || !(neg_mass > 0.0)) {
    throw TrainError("task " + std::to_string(task.task_id) +
                     ": demonstrations or policy never leave the sink");
  }

  std::vector<double> coeffs(raw.size(), 0.0);
  double loss = 0.0;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const double wp = pos[i] / pos_mass, wn = neg[i] / neg_mass;
    if (wp == 0.0 && wn == 0.0) continue;
    const double z = clamp_logit(raw[i]);
    // -log D = softplus(-z), -log(1 - D) = softplus(z).
    loss += wp * softplus(-z) + wn * softplus(z);
    if (std::abs(raw[i]) < kGailLogitClamp) {
      const double d = sigmoid(z);
      coeffs[i] = wp * (d - 1.0) + wn * d;
    }
  }
  graph.backward_rows(coeffs);
  return loss;
}

std::vector<CurvePoint> gail_exact_train(reward::RewardNet& disc,
                                         std::span<const TrainTask> tasks,
                                         const TrainConfig& cfg) {
  return run_training(cfg, tasks, disc.params(),
                      [&](const TrainTask& t) { return gail_gradient(disc, t); });
}

}  // namespace lcrl::trainers
