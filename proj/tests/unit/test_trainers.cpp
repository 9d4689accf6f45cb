#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "fd.hpp"
#include "lcrl/autodiff/serialize.hpp"
#include "lcrl/trainers/policy_net.hpp"
#include "lcrl/trainers/reward_trainers.hpp"
#include "micro.hpp"

using namespace lcrl;
using namespace lcrl::trainers;

namespace {

constexpr int kVocab = 18;

TrainTask micro_task(std::uint64_t seed, int demos, testing::MicroOptions opt = {}) {
  Rng rng(seed);
  TrainTask t;
  t.task_id = static_cast<int>(seed);
  t.command = {0, 1, 2, 8 + static_cast<int>(seed % 10)};
  t.mdp = testing::micro_mdp(rng, opt);
  t.demos = sample_demos(t.mdp, demos, seed + 100);
  return t;
}

std::vector<double> flat_grad(const ad::ParamStore& store) {
  std::vector<double> out;
  for (const auto& p : store.params()) {
    if (p.grad.empty()) out.insert(out.end(), p.value.size(), 0.0);
    else out.insert(out.end(), p.grad.begin(), p.grad.end());
  }
  return out;
}

struct Probe {
  std::size_t param;
  std::size_t index;
  std::size_t flat;
};

std::vector<Probe> probes(const ad::ParamStore& store, Rng& rng, int n) {
  std::vector<std::size_t> offset;
  std::size_t total = 0;
  for (const auto& p : store.params()) {
    offset.push_back(total);
    total += p.value.size();
  }
  std::vector<Probe> out;
  for (int k = 0; k < n; ++k) {
    const auto pi = rng.below(store.params().size());
    const auto i = rng.below(store.params()[pi].value.size());
    out.push_back({pi, i, offset[pi] + i});
  }
  return out;
}

double l1(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d += std::abs(a[i] - b[i]);
  return d;
}

std::vector<double> moment_gap(const reward::RewardNet& net, const TrainTask& t) {
  const auto r = reward::reward_all(net, t.mdp, t.command);
  const auto rho = solver::occupancy_forward(t.mdp, solver::soft_policy(solver::soft_q_iteration(t.mdp, r)));
  const auto rho_d = solver::empirical_occupancy(t.mdp, t.demos);
  std::vector<double> gap(rho.rho.size());
  for (std::size_t i = 0; i < gap.size(); ++i) gap[i] = rho.rho[i] - rho_d.rho[i];
  return gap;
}

}  // namespace

TEST_CASE("method names round trip") {
  for (auto m : {Method::kLcrl, Method::kRegression, Method::kGail, Method::kCloning})
    CHECK(method_from_name(method_name(m)) == m);
  CHECK_THROWS(method_from_name("dqn"));
}

TEST_CASE("LC-RL update is the gradient of the demo log-likelihood") {
  testing::MicroOptions opt;
  opt.horizon = 5;
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const auto task = micro_task(seed, 10, opt);
    reward::RewardNet net(kVocab, seed);
    net.params().zero_grad();
    lcrl_gradient(net, task);
    const auto g = flat_grad(net.params());
    Rng rng(seed + 50);
    for (const auto& p : probes(net.params(), rng, 8)) {
      auto& v = net.params().params()[p.param].value;
      std::vector<double> x{v[p.index]};
      const auto fd = testing::fd_gradient(x, [&] {
        v[p.index] = x[0];
        return -demo_log_likelihood(net, task);
      });
      v[p.index] = x[0];
      CHECK(testing::rel_err(g[p.flat], fd[0], 1e-7) < 1e-4);
    }
  }
}

TEST_CASE("LC-RL gradient vanishes at the moment-matching fixed point") {
  auto task = micro_task(4, 1);
  reward::RewardNet net(kVocab, 4);
  const auto r = reward::reward_all(net, task.mdp, task.command);
  const auto pi = solver::soft_policy(solver::soft_q_iteration(task.mdp, r));
  // Demonstrations whose occupancy is the model's own: every trajectory,
  // weighted by its probability, approximated by many samples.
  Rng rng(5);
  task.demos.clear();
  for (int i = 0; i < 20000; ++i) task.demos.push_back(solver::sample_trajectory(task.mdp, pi, rng));
  net.params().zero_grad();
  lcrl_gradient(net, task);
  double gmax = 0.0;
  for (double x : flat_grad(net.params())) gmax = std::max(gmax, std::abs(x));

  auto far = task;
  far.demos = {far.demos.front()};
  net.params().zero_grad();
  lcrl_gradient(net, far);
  double gfar = 0.0;
  for (double x : flat_grad(net.params())) gfar = std::max(gfar, std::abs(x));
  CHECK(gmax < 0.1 * gfar);
}

TEST_CASE("LC-RL likelihood rises on one task and matches moments") {
  auto task = micro_task(6, 10);
  reward::RewardNet net(kVocab, 6);
  TrainConfig cfg;
  cfg.steps = 1;
  double prev = demo_log_likelihood(net, task);
  for (int k = 0; k < 100; ++k) {
    lcrl_train(net, std::span(&task, 1), cfg);
    const double ll = demo_log_likelihood(net, task);
    CHECK(ll >= prev - 1e-12);
    prev = ll;
  }

  testing::MicroOptions opt;
  opt.observations = opt.states;
  auto fit = micro_task(7, 50, opt);
  reward::RewardNet net2(kVocab, 7);
  const double before = l1(moment_gap(net2, fit), std::vector<double>(fit.mdp.table_size(), 0.0));
  cfg.steps = 1500;
  cfg.lr = 1e-2;
  lcrl_train(net2, std::span(&fit, 1), cfg);
  const double after = l1(moment_gap(net2, fit), std::vector<double>(fit.mdp.table_size(), 0.0));
  CHECK(after * 10 <= before);
}

TEST_CASE("tasks without demonstrations are rejected") {
  auto task = micro_task(8, 0);
  reward::RewardNet net(kVocab, 8);
  CHECK_THROWS_AS(lcrl_gradient(net, task), TrainError);
  CHECK_THROWS_AS(gail_gradient(net, task), TrainError);
  CHECK_THROWS_AS(lcrl_train(net, std::span(&task, 1), {}), TrainError);
}

TEST_CASE("training loop validates input and aborts on non-finite values") {
  auto task = micro_task(9, 2);
  ad::ParamStore store;
  store.add("w", {1}, {0.0});
  TrainConfig cfg;
  cfg.steps = 3;
  CHECK_THROWS_AS(run_training(cfg, std::span<const TrainTask>{}, store, [](const TrainTask&) { return 0.0; }),
                  TrainError);
  CHECK_THROWS_AS(run_training(cfg, std::span(&task, 1), store, [](const TrainTask&) { return NAN; }),
                  TrainError);
  cfg.lr = 0.0;
  CHECK_THROWS_AS(run_training(cfg, std::span(&task, 1), store, [](const TrainTask&) { return 0.0; }),
                  TrainError);
  cfg.lr = 1e-3;
  cfg.checkpoint_every = 1;
  CHECK_THROWS_AS(run_training(cfg, std::span(&task, 1), store, [](const TrainTask&) { return 0.0; }),
                  TrainError);
}

TEST_CASE("identical seeds give bitwise identical checkpoints") {
  std::vector<TrainTask> tasks{micro_task(10, 5), micro_task(11, 5)};
  const auto root = std::filesystem::temp_directory_path() / "lcrl_test_ckpt";
  std::filesystem::remove_all(root);
  auto run = [&](const std::string& name) {
    reward::RewardNet net(kVocab, 3);
    TrainConfig cfg;
    cfg.steps = 20;
    cfg.seed = 3;
    cfg.checkpoint_every = 10;
    cfg.checkpoint_dir = root / name;
    lcrl_train(net, tasks, cfg);
  };
  run("a");
  run("b");
  auto slurp = [](const std::filesystem::path& p) {
    std::ifstream f(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(f), {});
  };
  for (const char* step : {"step_10", "step_20"}) {
    const auto a = slurp(root / "a" / (std::string(step) + ".bin"));
    CHECK(!a.empty());
    CHECK(a == slurp(root / "b" / (std::string(step) + ".bin")));
  }
}

TEST_CASE("regression starts at zero loss for a zero reward and fits a micro task") {
  auto zero = micro_task(12, 1);
  std::fill(zero.mdp.ground_truth_reward.begin(), zero.mdp.ground_truth_reward.end(), 0.0);
  reward::RewardNet flat(kVocab, 12, {.zero_head = true});
  CHECK(regression_gradient(flat, zero) == 0.0);

  testing::MicroOptions opt;
  opt.observations = opt.states;
  auto task = micro_task(13, 1, opt);
  reward::RewardNet net(kVocab, 13);
  TrainConfig cfg;
  cfg.steps = 5000;
  const auto curve = reward_regression_train(net, std::span(&task, 1), cfg);
  net.params().zero_grad();
  CHECK(regression_gradient(net, task) < 1e-3);
  net.params().zero_grad();
  const auto r = reward::reward_all(net, task.mdp, task.command);
  CHECK(solver::evaluate_success(task.mdp, solver::greedy_policy(solver::soft_q_iteration(task.mdp, r))));
}

TEST_CASE("regression ignores unreachable states") {
  auto task = micro_task(14, 1);
  const auto reach = reachable_states(task.mdp);
  CHECK(reach[static_cast<std::size_t>(task.mdp.initial_state)]);
  CHECK(reach[static_cast<std::size_t>(task.mdp.sink)] == 1);
  task.mdp.num_states += 1;
  task.mdp.next.insert(task.mdp.next.end(), 4, task.mdp.sink);
  task.mdp.ground_truth_reward.insert(task.mdp.ground_truth_reward.end(), 4, 1000.0);
  task.mdp.success.push_back(0);
  task.mdp.obs_index.push_back(0);
  task.mdp.states.push_back({});
  CHECK_FALSE(reachable_states(task.mdp).back());
  reward::RewardNet net(kVocab, 14, {.zero_head = true});
  auto base = task;
  base.mdp.ground_truth_reward.back() = 0.0;
  CHECK(regression_gradient(net, task) == doctest::Approx(regression_gradient(net, base)));
}

TEST_CASE("GAIL rewards at D = 1/2") {
  const auto task = micro_task(15, 3);
  reward::RewardNet disc(kVocab, 15, {.zero_head = true});
  const auto logits = gail_logits(disc, task.mdp, task.command);
  for (double z : logits) CHECK(z == 0.0);
  const auto r = gail_policy_reward(logits, task.mdp);
  for (int s = 0; s < task.mdp.num_states; ++s)
    for (int a = 0; a < 4; ++a)
      CHECK(r[static_cast<std::size_t>(s) * 4 + a] == doctest::Approx(s == task.mdp.sink ? 0.0 : std::log(2.0)));
  auto flat = task.mdp;
  for (int a = 0; a < 4; ++a)
    for (int s = 0; s < flat.num_states; ++s) flat.next[static_cast<std::size_t>(s) * 4 + a] = flat.next[static_cast<std::size_t>(s) * 4];
  const auto pi = solver::soft_policy(solver::soft_q_iteration(flat, r));
  for (double p : pi.prob) CHECK(p == doctest::Approx(0.25).epsilon(1e-12));

  auto& bias = disc.params().get("fc2_b").value;
  bias[0] = 50.0;
  disc.params().touch();
  for (double z : gail_logits(disc, task.mdp, task.command)) CHECK(std::abs(z) <= kGailLogitClamp);
}

TEST_CASE("GAIL discriminator gradient matches finite differences") {
  const auto task = micro_task(16, 10);
  reward::RewardNet disc(kVocab, 16);
  // Occupancy weights of the current policy, held fixed for the check.
  std::vector<double> wp, wn;
  {
    reward::RewardGraph g(disc, task.mdp, task.command);
    std::vector<double> logits(g.rewards());
    for (auto& x : logits) x = std::clamp(x, -kGailLogitClamp, kGailLogitClamp);
    const auto rho_pi = solver::occupancy_forward(
        task.mdp, solver::soft_policy(solver::soft_q_iteration(task.mdp, gail_policy_reward(logits, task.mdp))));
    wp = g.aggregate(solver::empirical_occupancy(task.mdp, task.demos).rho);
    wn = g.aggregate(rho_pi.rho);
    double sp = 0, sn = 0;
    for (std::size_t i = 0; i < wp.size(); ++i) {
      sp += wp[i];
      sn += wn[i];
    }
    for (auto& x : wp) x /= sp;
    for (auto& x : wn) x /= sn;
  }
  auto softplus = [](double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); };
  auto loss = [&] {
    reward::RewardGraph g(disc, task.mdp, task.command);
    double l = 0.0;
    const auto z = g.row_values();
    for (std::size_t i = 0; i < z.size(); ++i) l += wp[i] * softplus(-z[i]) + wn[i] * softplus(z[i]);
    return l;
  };
  disc.params().zero_grad();
  const double reported = gail_gradient(disc, task);
  CHECK(reported == doctest::Approx(loss()).epsilon(1e-12));
  const auto g = flat_grad(disc.params());
  Rng rng(17);
  for (const auto& p : probes(disc.params(), rng, 10)) {
    auto& v = disc.params().params()[p.param].value;
    std::vector<double> x{v[p.index]};
    const auto fd = testing::fd_gradient(x, [&] {
      v[p.index] = x[0];
      return loss();
    });
    v[p.index] = x[0];
    CHECK(testing::rel_err(g[p.flat], fd[0], 1e-7) < 1e-4);
  }
}

TEST_CASE("cloning loss at a uniform policy is log 4 and bounded by the target entropy") {
  const auto task = micro_task(18, 1);
  const auto target = cloning_target(task.mdp);
  PolicyNet uniform(kVocab, 18, {.zero_head = true});
  CHECK(cloning_gradient(uniform, task, target) == doctest::Approx(std::log(4.0)).epsilon(1e-12));

  double total = 0.0, entropy = 0.0;
  for (int s = 0; s < task.mdp.num_states; ++s) {
    if (s == task.mdp.sink) continue;
    const double w = target.weight[static_cast<std::size_t>(s)];
    total += w;
    double row = 0.0;
    for (int a = 0; a < 4; ++a) {
      const double p = target.prob[static_cast<std::size_t>(s) * 4 + a];
      row += p > 0 ? -p * std::log(p) : 0.0;
    }
    entropy += w * row;
  }
  entropy /= total;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    PolicyNet net(kVocab, seed);
    CHECK(cloning_gradient(net, task, target) >= entropy - 1e-12);
  }
  for (int s = 0; s < task.mdp.num_states; ++s) {
    double z = 0.0;
    for (int a = 0; a < 4; ++a) z += target.prob[static_cast<std::size_t>(s) * 4 + a];
    CHECK(z == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("cloned policy solves a memorised micro task") {
  testing::MicroOptions opt;
  opt.observations = opt.states;
  auto task = micro_task(19, 1, opt);
  PolicyNet net(kVocab, 19);
  TrainConfig cfg;
  cfg.steps = 3000;
  cfg.lr = 5e-3;
  cloning_train(net, std::span(&task, 1), cfg);
  CHECK(policy_rollout(net, task.mdp, task.command));
}

TEST_CASE("policy rollout agrees with the tabulated policy") {
  for (std::uint64_t seed = 20; seed < 26; ++seed) {
    testing::MicroOptions opt;
    opt.horizon = 6;
    auto task = micro_task(seed, 1, opt);
    PolicyNet net(kVocab, seed);
    const auto table = policy_table(net, task.mdp, task.command);
    for (int s = 0; s < task.mdp.num_states; ++s) {
      double z = 0.0;
      for (int a = 0; a < 4; ++a) z += table.at(0, s, a);
      CHECK(z == doctest::Approx(1.0).epsilon(1e-12));
    }
    CHECK(policy_rollout(net, task.mdp, task.command) == solver::evaluate_success(task.mdp, table));
    CHECK(policy_rollout(net, task.mdp, task.command) == policy_rollout(net, task.mdp, task.command));
  }
}

TEST_CASE("an all-forward policy stays put against a wall") {
  testing::MicroOptions opt;
  auto task = micro_task(27, 1, opt);
  // State 0 faces a wall: forward is a self-transition.
  task.mdp.next[0] = 0;
  PolicyNet net(kVocab, 27, {.zero_head = true});
  net.params().get("fc2_b").value = {5.0, 0.0, 0.0, 0.0};
  const auto table = policy_table(net, task.mdp, task.command);
  for (int s = 0; s < task.mdp.num_states; ++s)
    if (s != task.mdp.sink) CHECK(table.at(0, s, 0) > 0.9);
  CHECK_FALSE(policy_rollout(net, task.mdp, task.command));
}
