#include "lcrl/reward/reward_cache.hpp"

#include <stdexcept>
#include <string>

#include "lcrl/common/rng.hpp"

namespace lcrl::reward {

using solver::kNumActions;

namespace {

std::uint64_t token_hash(std::span<const int> tokens) {
  auto bytes = std::as_bytes(tokens);
  return fnv1a(std::span(reinterpret_cast<const std::uint8_t*>(bytes.data()), bytes.size()));
}

std::vector<const gridhouse::Observation*> observation_list(const solver::TabularMDP& mdp) {
  std::vector<const gridhouse::Observation*> list;
  list.reserve(mdp.observations.size());
  for (const auto& o : mdp.observations) list.push_back(&o);
  return list;
}

void check_obs_index(const solver::TabularMDP& mdp) {
  if (mdp.obs_index.size() != static_cast<std::size_t>(mdp.num_states)) {
    throw solver::MdpError("obs_index has " + std::to_string(mdp.obs_index.size()) +
                           " entries for " + std::to_string(mdp.num_states) + " states");
  }
}

}  // namespace

std::size_t RewardCache::RewardKeyHash::operator()(const RewardKey& k) const {
  return static_cast<std::size_t>(splitmix64(k.obs ^ splitmix64(k.task + 0x9e37u * static_cast<std::uint64_t>(k.action + 1))));
}

void RewardCache::clear() {
  images_.clear();
  rewards_.clear();
}

void RewardCache::sync(const RewardNet& net) {
  if (owner_ != &net.params() || version_ != net.params().version()) {
    clear();
    owner_ = &net.params();
    version_ = net.params().version();
  }
}

std::vector<double> reward_all(const RewardNet& net, const solver::TabularMDP& mdp,
                               std::span<const int> tokens, RewardCache* cache) {
  check_obs_index(mdp);
  std::vector<double> r(mdp.table_size(), 0.0);

  if (cache == nullptr) {
    for (int s = 0; s < mdp.num_states; ++s) {
      const int oi = mdp.obs_index[static_cast<std::size_t>(s)];
      if (oi < 0) continue;
      for (int a = 0; a < kNumActions; ++a) {
        r[static_cast<std::size_t>(s) * kNumActions + a] =
            reward_value(net, mdp.observations[static_cast<std::size_t>(oi)], a, tokens);
      }
    }
    return r;
  }

  cache->sync(net);
  const std::uint64_t task = token_hash(tokens);
  const std::size_t n_obs = mdp.observations.size();

  // Rewards already memoised for every action of an observation need no work.
  std::vector<std::array<double, kNumActions>> obs_reward(n_obs);
  std::vector<int> todo;
  for (std::size_t i = 0; i < n_obs; ++i) {
    bool all = true;
    for (int a = 0; a < kNumActions; ++a) {
      auto it = cache->rewards_.find({mdp.observations[i].key, a, task});
      if (it == cache->rewards_.end()) {
        all = false;
        break;
      }
      obs_reward[i][static_cast<std::size_t>(a)] = it->second;
    }
    if (all) {
      cache->stats_.hits += kNumActions;
    } else {
      cache->stats_.misses += kNumActions;
      todo.push_back(static_cast<int>(i));
    }
  }

  if (!todo.empty()) {
    ad::Tape tape;
    auto b = net.bind(tape);
    std::vector<const gridhouse::Observation*> fresh;
    for (int i : todo) {
      const auto& o = mdp.observations[static_cast<std::size_t>(i)];
      if (!cache->images_.contains(o.key)) fresh.push_back(&o);
    }
    if (!fresh.empty()) {
      ad::Tensor enc = net.trunk().encode_panoramas(tape, b.trunk, fresh);
      cache->stats_.cnn_forwards += fresh.size();
      auto v = enc.data();
      for (std::size_t j = 0; j < fresh.size(); ++j) {
        std::array<double, kEmbed> e;
        std::copy_n(v.begin() + static_cast<std::ptrdiff_t>(j * kEmbed), kEmbed, e.begin());
        cache->images_.emplace(fresh[j]->key, e);
      }
    }
    std::vector<double> images;
    images.reserve(todo.size() * kEmbed);
    for (int i : todo) {
      const auto& e = cache->images_.at(mdp.observations[static_cast<std::size_t>(i)].key);
      images.insert(images.end(), e.begin(), e.end());
    }
    ad::Tensor e_image = tape.constant({todo.size(), kEmbed}, std::move(images));
    ad::Tensor e_lang = net.trunk().encode_language(tape, b.trunk, tokens);
    std::vector<int> rows, acts;
    for (std::size_t j = 0; j < todo.size(); ++j) {
      for (int a = 0; a < kNumActions; ++a) {
        rows.push_back(static_cast<int>(j));
        acts.push_back(a);
      }
    }
    auto out = net.head_forward(b, e_image, e_lang, rows, acts).data();
    for (std::size_t j = 0; j < todo.size(); ++j) {
      const auto i = static_cast<std::size_t>(todo[j]);
      for (int a = 0; a < kNumActions; ++a) {
        const double v = out[j * kNumActions + static_cast<std::size_t>(a)];
        obs_reward[i][static_cast<std::size_t>(a)] = v;
        cache->rewards_[{mdp.observations[i].key, a, task}] = v;
      }
    }
  }

  for (int s = 0; s < mdp.num_states; ++s) {
    const int oi = mdp.obs_index[static_cast<std::size_t>(s)];
    if (oi < 0) continue;
    for (int a = 0; a < kNumActions; ++a) {
      r[static_cast<std::size_t>(s) * kNumActions + a] =
          obs_reward[static_cast<std::size_t>(oi)][static_cast<std::size_t>(a)];
    }
  }
  return r;
}

RewardGraph::RewardGraph(RewardNet& net, const solver::TabularMDP& mdp,
                         std::span<const int> tokens, CacheStats* stats)
    : mdp_(mdp) {
  check_obs_index(mdp);
  auto b = net.bind(tape_);
  const auto list = observation_list(mdp);
  ad::Tensor e_image = net.trunk().encode_panoramas(tape_, b.trunk, list);
  if (stats != nullptr) stats->cnn_forwards += list.size();
  ad::Tensor e_lang = net.trunk().encode_language(tape_, b.trunk, tokens);
  std::vector<int> rows, acts;
  rows.reserve(list.size() * kNumActions);
  acts.reserve(list.size() * kNumActions);
  for (std::size_t i = 0; i < list.size(); ++i) {
    for (int a = 0; a < kNumActions; ++a) {
      rows.push_back(static_cast<int>(i));
      acts.push_back(a);
    }
  }
  out_ = net.head_forward(b, e_image, e_lang, rows, acts);
  row_values_.assign(out_.data().begin(), out_.data().end());
  rewards_.assign(mdp.table_size(), 0.0);
  for (int s = 0; s < mdp.num_states; ++s) {
    const int oi = mdp.obs_index[static_cast<std::size_t>(s)];
    if (oi < 0) continue;
    for (int a = 0; a < kNumActions; ++a) {
      rewards_[static_cast<std::size_t>(s) * kNumActions + a] =
          row_values_[static_cast<std::size_t>(oi) * kNumActions + a];
    }
  }
}

std::vector<double> RewardGraph::aggregate(std::span<const double> coeffs) const {
  if (coeffs.size() != mdp_.table_size()) {
    throw ad::ShapeError("reward coefficients: expected " +
                         std::to_string(mdp_.table_size()) + " values (S x A), got " +
                         std::to_string(coeffs.size()));
  }
  std::vector<double> w(row_values_.size(), 0.0);
  for (int s = 0; s < mdp_.num_states; ++s) {
    const int oi = mdp_.obs_index[static_cast<std::size_t>(s)];
    if (oi < 0) continue;
    for (int a = 0; a < kNumActions; ++a) {
      w[static_cast<std::size_t>(oi) * kNumActions + a] +=
          coeffs[static_cast<std::size_t>(s) * kNumActions + a];
    }
  }
  return w;
}

void RewardGraph::backward(std::span<const double> coeffs) {
  backward_rows(aggregate(coeffs));
}

void RewardGraph::backward_rows(std::span<const double> row_coeffs) {
  if (used_) throw std::logic_error("RewardGraph::backward called twice");
  if (row_coeffs.size() != row_values_.size()) {
    throw ad::ShapeError("row coefficients: expected " + std::to_string(row_values_.size()) +
                         ", got " + std::to_string(row_coeffs.size()));
  }
  used_ = true;
  ad::Tensor w = tape_.constant(out_.shape(),
                                std::vector<double>(row_coeffs.begin(), row_coeffs.end()));
  tape_.backward(ad::sum(ad::mul(out_, w)));
}

void reward_backward_weighted(RewardNet& net, const solver::TabularMDP& mdp,
                              std::span<const int> tokens, std::span<const double> coeffs,
                              CacheStats* stats) {
  RewardGraph g(net, mdp, tokens, stats);
  g.backward(coeffs);
}

}  // namespace lcrl::reward
