#include <algorithm>
#include <stdexcept>
#include <string>
#include <unordered_map>

#include "lcrl/common/rng.hpp"
#include "lcrl/reoptimize/reoptimize.hpp"

namespace lcrl::reoptimize {

using solver::kNumActions;

int BlackBoxEnv::reset() {
  state_ = mdp_->initial_state;
  return state_;
}

BlackBoxEnv::Step BlackBoxEnv::step(int action) {
  if (action < 0 || action >= kNumActions) {
    throw std::out_of_range("action id " + std::to_string(action) + " outside 0..3");
  }
  state_ = mdp_->successor(state_, action);
  return {state_, state_ == mdp_->sink};
}

const gridhouse::Observation* BlackBoxEnv::observation(int s) const {
  const int oi = mdp_->obs_index.at(static_cast<std::size_t>(s));
  return oi < 0 ? nullptr : &mdp_->observations[static_cast<std::size_t>(oi)];
}

bool BlackBoxEnv::is_success(int s) const {
  return mdp_->success.at(static_cast<std::size_t>(s)) != 0;
}

ObservationReward table_reward(const solver::TabularMDP& mdp, std::span<const double> reward) {
  if (reward.size() != mdp.observations.size() * kNumActions) {
    throw std::invalid_argument("observation reward table has the wrong size");
  }
  std::unordered_map<std::uint64_t, std::size_t> row;
  for (std::size_t i = 0; i < mdp.observations.size(); ++i) row.emplace(mdp.observations[i].key, i);
  std::vector<double> values(reward.begin(), reward.end());
  return [row = std::move(row), values = std::move(values)](
             const gridhouse::Observation* o, int a) -> double {
    if (o == nullptr) return 0.0;
    return values[row.at(o->key) * kNumActions + static_cast<std::size_t>(a)];
  };
}

namespace {

int argmax(std::span<const double> q, int s) {
  const auto base = static_cast<std::size_t>(s) * kNumActions;
  int best = 0;
  for (int a = 1; a < kNumActions; ++a) {
    if (q[base + static_cast<std::size_t>(a)] > q[base + static_cast<std::size_t>(best)]) best = a;
  }
  return best;
}

double max_q(std::span<const double> q, int s) {
  return q[static_cast<std::size_t>(s) * kNumActions + static_cast<std::size_t>(argmax(q, s))];
}

}  // namespace

bool greedy_success(BlackBoxEnv& env, std::span<const double> q) {
  int s = env.reset();
  for (int t = 0; t <= env.horizon(); ++t) {
    if (env.is_success(s)) return true;
    if (t == env.horizon()) break;
    const auto r = env.step(argmax(q, s));
    if (r.done) return false;
    s = r.state;
  }
  return false;
}

QLearnResult q_learning(BlackBoxEnv& env, const ObservationReward& reward,
                        const QLearnConfig& cfg, std::span<const double> potential) {
  if (cfg.episodes < 0) throw std::invalid_argument("negative episode count");
  if (!(cfg.alpha > 0.0 && cfg.alpha <= 1.0)) throw std::invalid_argument("alpha outside (0, 1]");
  for (double e : {cfg.epsilon_start, cfg.epsilon_end}) {
    if (!(e >= 0.0 && e <= 1.0)) throw std::invalid_argument("epsilon outside [0, 1]");
  }
  const auto S = static_cast<std::size_t>(env.num_states());
  if (cfg.shaping && potential.size() != S) {
    throw std::invalid_argument("shaping needs one potential value per state");
  }
  const int decay = cfg.epsilon_decay_episodes < 0 ? cfg.episodes / 2 : cfg.epsilon_decay_episodes;
  const double gamma = env.gamma();
  const int H = env.horizon();

  // Rewards are memoised per state; the learner only ever sees observations.
  std::vector<double> r_memo(S * kNumActions, 0.0);
  std::vector<std::uint8_t> known(S, 0);
  auto r_of = [&](int s, int a) {
    if (!known[static_cast<std::size_t>(s)]) {
      const auto* o = env.observation(s);
      for (int b = 0; b < kNumActions; ++b) {
        r_memo[static_cast<std::size_t>(s) * kNumActions + static_cast<std::size_t>(b)] = reward(o, b);
      }
      known[static_cast<std::size_t>(s)] = 1;
    }
    return r_memo[static_cast<std::size_t>(s) * kNumActions + static_cast<std::size_t>(a)];
  };

  QLearnResult res;
  res.q.assign(S * kNumActions, 0.0);
  Rng rng(derive_seed(cfg.seed, 0x91e));
  for (int ep = 0; ep < cfg.episodes; ++ep) {
    const double frac = decay > 0 ? std::min(1.0, static_cast<double>(ep) / decay) : 1.0;
    const double eps = cfg.epsilon_start + (cfg.epsilon_end - cfg.epsilon_start) * frac;
    int s = env.reset();
    for (int t = 0; t <= H; ++t) {
      const int a = rng.uniform() < eps ? static_cast<int>(rng.below(kNumActions)) : argmax(res.q, s);
      const auto step = env.step(a);
      const int s2 = step.state;
      double target = r_of(s, a);
      if (cfg.shaping) {
        target += gamma * potential[static_cast<std::size_t>(s2)] - potential[static_cast<std::size_t>(s)];
      }
      if (!step.done && t < H) target += gamma * max_q(res.q, s2);
      double& q = res.q[static_cast<std::size_t>(s) * kNumActions + static_cast<std::size_t>(a)];
      q += cfg.alpha * (target - q);
      if (step.done) break;
      s = s2;
    }
    if (cfg.eval_every > 0 && (ep + 1) % cfg.eval_every == 0) {
      res.eval_curve.push_back(greedy_success(env, res.q) ? 1 : 0);
    }
  }
  res.success = greedy_success(env, res.q);
  return res;
}

}  // namespace lcrl::reoptimize
