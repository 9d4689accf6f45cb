#include <deque>

#include "lcrl/trainers/reward_trainers.hpp"

namespace lcrl::trainers {

std::vector<std::uint8_t> reachable_states(const solver::TabularMDP& mdp) {
  std::vector<std::uint8_t> seen(static_cast<std::size_t>(mdp.num_states), 0);
  std::deque<int> queue{mdp.initial_state};
  seen[static_cast<std::size_t>(mdp.initial_state)] = 1;
  while (!queue.empty()) {
    const int s = queue.front();
    queue.pop_front();
    for (int a = 0; a < solver::kNumActions; ++a) {
      const int n = mdp.successor(s, a);
      if (!seen[static_cast<std::size_t>(n)]) {
        seen[static_cast<std::size_t>(n)] = 1;
        queue.push_back(n);
      }
    }
  }
  return seen;
}

double regression_gradient(reward::RewardNet& net, const TrainTask& task) {
  const auto& mdp = task.mdp;
  reward::RewardGraph graph(net, mdp, task.command);
  const auto reach = reachable_states(mdp);
  std::vector<double> target(mdp.table_size(), 0.0), mask(mdp.table_size(), 0.0);
  for (std::size_t i = 0; i < target.size(); ++i) {
    if (!reach[i / solver::kNumActions]) continue;
    target[i] = mdp.ground_truth_reward[i];
    mask[i] = 1.0;
  }
  const auto target_sum = graph.aggregate(target);
  const auto count = graph.aggregate(mask);
  const auto values = graph.row_values();
  double n = 0.0;
  for (double c : count) n += c > 0.0 ? 1.0 : 0.0;
  std::vector<double> coeffs(values.size(), 0.0);
  double loss = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (count[i] == 0.0) continue;
    const double diff = values[i] - target_sum[i] / count[i];
    loss += diff * diff / n;
    coeffs[i] = 2.0 * diff / n;
  }
  graph.backward_rows(coeffs);
  return loss;
}

std::vector<CurvePoint> reward_regression_train(reward::RewardNet& net,
                                                std::span<const TrainTask> tasks,
                                                const TrainConfig& cfg) {
  return run_training(cfg, tasks, net.params(),
                      [&](const TrainTask& t) { return regression_gradient(net, t); });
}

}  // namespace lcrl::trainers
