#include <cmath>

#include "lcrl/trainers/policy_net.hpp"

namespace lcrl::trainers {

using solver::kNumActions;

CloningTarget cloning_target(const solver::TabularMDP& mdp) {
  const auto sol = solver::soft_q_iteration(mdp, mdp.ground_truth_reward);
  const auto occ = solver::occupancy_forward(mdp, solver::soft_policy(sol));
  CloningTarget t;
  t.prob.assign(mdp.table_size(), 1.0 / kNumActions);
  t.weight.assign(static_cast<std::size_t>(mdp.num_states), 0.0);
  for (int s = 0; s < mdp.num_states; ++s) {
    const auto base = static_cast<std::size_t>(s) * kNumActions;
    double w = 0.0;
    for (int a = 0; a < kNumActions; ++a) w += occ.rho[base + static_cast<std::size_t>(a)];
    t.weight[static_cast<std::size_t>(s)] = w;
    if (w > 0.0) {
      for (int a = 0; a < kNumActions; ++a) {
        t.prob[base + static_cast<std::size_t>(a)] = occ.rho[base + static_cast<std::size_t>(a)] / w;
      }
    }
  }
  return t;
}

double cloning_gradient(PolicyNet& net, const TrainTask& task, const CloningTarget& target) {
  const auto& mdp = task.mdp;
  std::vector<int> states, rows, orient, held;
  double total = 0.0;
  for (int s = 0; s < mdp.num_states; ++s) {
    const int oi = mdp.obs_index[static_cast<std::size_t>(s)];
    const double w = target.weight[static_cast<std::size_t>(s)];
    if (oi < 0 || w == 0.0) continue;
    states.push_back(s);
    rows.push_back(oi);
    orient.push_back(mdp.states.empty() ? 0 : mdp.states[static_cast<std::size_t>(s)].orientation);
    held.push_back(held_flag(mdp, s));
    total += w;
  }
  if (states.empty()) throw TrainError("cloning target has no visited states");

  ad::Tape tape;
  auto b = net.bind(tape);
  std::vector<const gridhouse::Observation*> list;
  for (const auto& o : mdp.observations) list.push_back(&o);
  ad::Tensor e_image = net.trunk().encode_panoramas(tape, b.trunk, list);
  ad::Tensor e_lang = net.trunk().encode_language(tape, b.trunk, task.command);
  ad::Tensor logp = net.head_forward(b, e_image, e_lang, rows, orient, held);

  std::vector<double> c(states.size() * kNumActions);
  for (std::size_t i = 0; i < states.size(); ++i) {
    const auto s = static_cast<std::size_t>(states[i]);
    for (int a = 0; a < kNumActions; ++a) {
      c[i * kNumActions + static_cast<std::size_t>(a)] =
          -target.weight[s] / total * target.prob[s * kNumActions + static_cast<std::size_t>(a)];
    }
  }
  ad::Tensor loss = ad::sum(ad::mul(logp, tape.constant(logp.shape(), std::move(c))));
  const double value = loss.item();
  tape.backward(loss);
  return value;
}

std::vector<CurvePoint> cloning_train(PolicyNet& net, std::span<const TrainTask> tasks,
                                      const TrainConfig& cfg) {
  std::vector<CloningTarget> targets;
  targets.reserve(tasks.size());
  for (const auto& t : tasks) targets.push_back(cloning_target(t.mdp));
  const TrainTask* base = tasks.data();
  return run_training(cfg, tasks, net.params(), [&](const TrainTask& t) {
    return cloning_gradient(net, t, targets[static_cast<std::size_t>(&t - base)]);
  });
}

}  // namespace lcrl::trainers
