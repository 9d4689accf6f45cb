#include <string>

#include "lcrl/trainers/reward_trainers.hpp"

namespace lcrl::trainers {

namespace {

void require_demos(const TrainTask& task) {
  if (task.demos.empty()) {
    throw TrainError("task " + std::to_string(task.task_id) + " has no demonstrations");
  }
}

double average_log_likelihood(const solver::SoftSolution& sol, const TrainTask& task) {
  double ll = 0.0;
  for (const auto& d : task.demos) ll += solver::demo_log_likelihood(sol, d);
  return ll / static_cast<double>(task.demos.size());
}

}  // namespace

double demo_log_likelihood(const reward::RewardNet& net, const TrainTask& task) {
  require_demos(task);
  const auto r = reward::reward_all(net, task.mdp, task.command);
  return average_log_likelihood(solver::soft_q_iteration(task.mdp, r), task);
}

double lcrl_gradient(reward::RewardNet& net, const TrainTask& task) {
  require_demos(task);
  reward::RewardGraph graph(net, task.mdp, task.command);
  const auto sol = solver::soft_q_iteration(task.mdp, graph.rewards());
  const auto rho = solver::occupancy_forward(task.mdp, solver::soft_policy(sol));
  const auto rho_d = solver::empirical_occupancy(task.mdp, task.demos);
  std::vector<double> coeffs(rho.rho.size());
  for (std::size_t i = 0; i < coeffs.size(); ++i) coeffs[i] = rho.rho[i] - rho_d.rho[i];
  graph.backward(coeffs);
  return average_log_likelihood(sol, task);
}

std::vector<CurvePoint> lcrl_train(reward::RewardNet& net, std::span<const TrainTask> tasks,
                                   const TrainConfig& cfg) {
  for (const auto& t : tasks) require_demos(t);
  return run_training(cfg, tasks, net.params(),
                      [&](const TrainTask& t) { return lcrl_gradient(net, t); });
}

}  // namespace lcrl::trainers
