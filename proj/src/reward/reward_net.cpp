#include "lcrl/reward/reward_net.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <unordered_map>

#include "lcrl/common/rng.hpp"
#include "lcrl/solver/mdp.hpp"

namespace lcrl::reward {

using gridhouse::kNumClasses;
using gridhouse::kNumViews;

std::vector<double> scaled_uniform(std::size_t count, std::size_t fan_in,
                                   std::uint64_t seed, std::uint64_t stream) {
  Rng rng(derive_seed(seed, stream));
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  std::vector<double> v(count);
  for (auto& x : v) x = rng.uniform(-bound, bound);
  return v;
}

void check_tokens(std::span<const int> tokens, int vocab_size) {
  if (tokens.empty()) throw std::invalid_argument("empty command");
  for (int t : tokens) {
    if (t < 0 || t >= vocab_size) {
      throw std::out_of_range("unknown token id " + std::to_string(t) +
                              " (vocabulary has " + std::to_string(vocab_size) +
                              " words)");
    }
  }
}

Trunk::Trunk(ad::ParamStore& store, int vocab_size, std::uint64_t seed)
    : vocab_size_(vocab_size) {
  if (vocab_size <= 0) throw std::invalid_argument("vocabulary must be nonempty");
  const auto V = static_cast<std::size_t>(vocab_size);
  const std::size_t C = kNumClasses;
  const std::size_t conv1_fan = C * 25, conv2_fan = kConv1Filters * 9;
  store.add("word_embedding", {V, kEmbed}, scaled_uniform(V * kEmbed, 1, seed, 1));
  store.add("rnn_wx", {kEmbed, kEmbed}, scaled_uniform(kEmbed * kEmbed, kEmbed, seed, 2));
  store.add("rnn_wh", {kEmbed, kEmbed}, scaled_uniform(kEmbed * kEmbed, kEmbed, seed, 3));
  store.add("rnn_b", {1, kEmbed}, scaled_uniform(kEmbed, kEmbed, seed, 4));
  store.add("conv1_w", {kConv1Filters, C, 5, 5},
            scaled_uniform(kConv1Filters * C * 25, conv1_fan, seed, 5));
  store.add("conv1_b", {kConv1Filters}, scaled_uniform(kConv1Filters, conv1_fan, seed, 6));
  store.add("conv2_w", {kConv2Filters, kConv1Filters, 3, 3},
            scaled_uniform(kConv2Filters * kConv1Filters * 9, conv2_fan, seed, 7));
  store.add("conv2_b", {kConv2Filters}, scaled_uniform(kConv2Filters, conv2_fan, seed, 8));
  store.add("proj_w", {kConv2Filters, kEmbed},
            scaled_uniform(kConv2Filters * kEmbed, kConv2Filters, seed, 9));
  store.add("proj_b", {1, kEmbed}, scaled_uniform(kEmbed, kConv2Filters, seed, 10));
}

namespace {

template <class Store>
ad::Tensor bind_one(ad::Tape& tape, Store& store, const char* name) {
  if constexpr (std::is_const_v<Store>) {
    const auto& p = store.get(name);
    return tape.constant(p.shape, p.value);
  } else {
    return tape.param(store.get(name));
  }
}

template <class Store>
Trunk::Bound bind_trunk(ad::Tape& tape, Store& store) {
  return {bind_one(tape, store, "word_embedding"), bind_one(tape, store, "rnn_wx"),
          bind_one(tape, store, "rnn_wh"),         bind_one(tape, store, "rnn_b"),
          bind_one(tape, store, "conv1_w"),        bind_one(tape, store, "conv1_b"),
          bind_one(tape, store, "conv2_w"),        bind_one(tape, store, "conv2_b"),
          bind_one(tape, store, "proj_w"),         bind_one(tape, store, "proj_b")};
}

template <class Store>
RewardNet::Bound bind_reward(ad::Tape& tape, Store& store) {
  RewardNet::Bound b;
  b.trunk = bind_trunk(tape, store);
  b.action_embedding = bind_one(tape, store, "action_embedding");
  b.fc1_w = bind_one(tape, store, "fc1_w");
  b.fc1_b = bind_one(tape, store, "fc1_b");
  b.fc2_w = bind_one(tape, store, "fc2_w");
  b.fc2_b = bind_one(tape, store, "fc2_b");
  return b;
}

}  // namespace

Trunk::Bound Trunk::bind(ad::Tape& tape, ad::ParamStore& store) const {
  return bind_trunk(tape, store);
}

Trunk::Bound Trunk::bind(ad::Tape& tape, const ad::ParamStore& store) const {
  return bind_trunk(tape, store);
}

ad::Tensor repeat_row(const ad::Tensor& row, std::size_t n) {
  const std::vector<int> zeros(n, 0);
  return ad::embedding_lookup(row, zeros);
}

ad::Tensor add_bias(const ad::Tensor& x, const ad::Tensor& bias) {
  return ad::add(x, repeat_row(bias, x.shape().at(0)));
}

ad::Tensor Trunk::encode_language(ad::Tape& tape, const Bound& b,
                                  std::span<const int> tokens) const {
  check_tokens(tokens, vocab_size_);
  ad::Tensor h = tape.constant({1, kEmbed}, std::vector<double>(kEmbed, 0.0));
  for (int tok : tokens) {
    const int idx[1] = {tok};
    ad::Tensor x = ad::embedding_lookup(b.word_embedding, idx);
    h = ad::tanh(ad::add(ad::add(ad::matmul(x, b.rnn_wx), ad::matmul(h, b.rnn_wh)),
                         b.rnn_b));
  }
  return h;
}

ad::Tensor Trunk::encode_views(ad::Tape& tape, const Bound& b,
                               std::vector<double> onehot_views,
                               std::size_t n) const {
  if (onehot_views.size() != n * kViewFloats) {
    throw ad::ShapeError("encode_views: expected " + std::to_string(n) +
                         " views of " + std::to_string(kNumClasses) +
                         " channels, got " + std::to_string(onehot_views.size()) +
                         " values");
  }
  ad::Tensor x = tape.constant({n, static_cast<std::size_t>(kNumClasses), 5, 5},
                               std::move(onehot_views));
  ad::Tensor h1 = ad::relu(ad::conv2d(x, b.conv1_w, b.conv1_b, 2));
  ad::Tensor p1 = ad::max_pool_2x2(h1);
  ad::Tensor h2 = ad::relu(ad::conv2d(p1, b.conv2_w, b.conv2_b, 1));
  ad::Tensor g = ad::global_channel_max_pool(h2);
  return add_bias(ad::matmul(g, b.proj_w), b.proj_b);
}

namespace {

// Sums four per-view rows. Each panorama's rows are ordered by view content
// hash first, so any permutation of the same views adds in the same order.
ad::Tensor sum_views(const ad::Tensor& per_view,
                     std::vector<std::array<std::pair<std::uint64_t, int>, kNumViews>> rows) {
  std::array<std::vector<int>, kNumViews> idx;
  for (auto& r : rows) {
    std::sort(r.begin(), r.end());
    for (int v = 0; v < kNumViews; ++v) {
      idx[static_cast<std::size_t>(v)].push_back(r[static_cast<std::size_t>(v)].second);
    }
  }
  ad::Tensor e = ad::embedding_lookup(per_view, idx[0]);
  for (int v = 1; v < kNumViews; ++v) {
    e = ad::add(e, ad::embedding_lookup(per_view, idx[static_cast<std::size_t>(v)]));
  }
  return e;
}

}  // namespace

ad::Tensor Trunk::encode_panoramas(
    ad::Tape& tape, const Bound& b,
    std::span<const gridhouse::Observation* const> obs) const {
  std::unordered_map<std::uint64_t, int> view_row;
  std::vector<double> data;
  std::vector<std::array<std::pair<std::uint64_t, int>, kNumViews>> rows;
  rows.reserve(obs.size());
  for (const auto* o : obs) {
    auto& r = rows.emplace_back();
    for (int v = 0; v < kNumViews; ++v) {
      const auto key = o->view_key(v);
      auto [it, inserted] = view_row.try_emplace(key, static_cast<int>(view_row.size()));
      if (inserted) {
        data.resize(data.size() + kViewFloats);
        o->write_view(v, std::span(data).last(kViewFloats));
      }
      r[static_cast<std::size_t>(v)] = {key, it->second};
    }
  }
  ad::Tensor views = encode_views(tape, b, std::move(data), view_row.size());
  return sum_views(views, std::move(rows));
}

RewardNet::RewardNet(int vocab_size, std::uint64_t seed, NetOptions opts)
    : trunk_(store_, vocab_size, seed) {
  store_.add("action_embedding", {solver::kNumActions, kEmbed},
             scaled_uniform(solver::kNumActions * kEmbed, 1, seed, 20));
  store_.add("fc1_w", {kEmbed, kEmbed}, scaled_uniform(kEmbed * kEmbed, kEmbed, seed, 21));
  store_.add("fc1_b", {1, kEmbed}, scaled_uniform(kEmbed, kEmbed, seed, 22));
  if (opts.zero_head) {
    store_.add("fc2_w", {kEmbed, 1}, std::vector<double>(kEmbed, 0.0));
    store_.add("fc2_b", {1, 1}, {0.0});
  } else {
    store_.add("fc2_w", {kEmbed, 1}, scaled_uniform(kEmbed, kEmbed, seed, 23));
    store_.add("fc2_b", {1, 1}, scaled_uniform(1, kEmbed, seed, 24));
  }
}

RewardNet::Bound RewardNet::bind(ad::Tape& tape) { return bind_reward(tape, store_); }

RewardNet::Bound RewardNet::bind(ad::Tape& tape) const {
  return bind_reward(tape, store_);
}

ad::Tensor RewardNet::head_forward(const Bound& b, const ad::Tensor& e_image,
                                   const ad::Tensor& e_language,
                                   std::span<const int> image_rows,
                                   std::span<const int> actions) const {
  if (image_rows.size() != actions.size()) {
    throw std::invalid_argument("head_forward: rows and actions differ in length");
  }
  for (int a : actions) {
    if (a < 0 || a >= solver::kNumActions) {
      throw std::out_of_range("action id " + std::to_string(a) + " outside 0..3");
    }
  }
  ad::Tensor z = ad::mul(ad::mul(ad::embedding_lookup(e_image, image_rows),
                                 repeat_row(e_language, image_rows.size())),
                         ad::embedding_lookup(b.action_embedding, actions));
  ad::Tensor h = ad::relu(add_bias(ad::matmul(z, b.fc1_w), b.fc1_b));
  return add_bias(ad::matmul(h, b.fc2_w), b.fc2_b);
}

ad::Tensor encode_language(ad::Tape& tape, RewardNet& net, std::span<const int> tokens) {
  auto b = net.bind(tape);
  return net.trunk().encode_language(tape, b.trunk, tokens);
}

ad::Tensor encode_panorama(ad::Tape& tape, RewardNet& net,
                           const gridhouse::Observation& obs) {
  auto b = net.bind(tape);
  const gridhouse::Observation* list[1] = {&obs};
  return net.trunk().encode_panoramas(tape, b.trunk, list);
}

ad::Tensor encode_panorama(ad::Tape& tape, RewardNet& net, std::span<const double> views) {
  if (views.size() != kNumViews * kViewFloats) {
    throw ad::ShapeError("encode_panorama: expected 4 views of " +
                         std::to_string(kNumClasses) + " channels (" +
                         std::to_string(kNumViews * kViewFloats) + " values), got " +
                         std::to_string(views.size()));
  }
  auto b = net.bind(tape);
  ad::Tensor per_view = net.trunk().encode_views(
      tape, b.trunk, std::vector<double>(views.begin(), views.end()), kNumViews);
  std::array<std::pair<std::uint64_t, int>, kNumViews> r;
  for (int v = 0; v < kNumViews; ++v) {
    auto bytes = std::as_bytes(views.subspan(static_cast<std::size_t>(v) * kViewFloats,
                                             kViewFloats));
    r[static_cast<std::size_t>(v)] = {
        fnv1a(std::span(reinterpret_cast<const std::uint8_t*>(bytes.data()), bytes.size())),
        v};
  }
  return sum_views(per_view, {r});
}

ad::Tensor reward_forward(ad::Tape& tape, RewardNet& net,
                          const gridhouse::Observation& obs, int action,
                          std::span<const int> tokens) {
  auto b = net.bind(tape);
  const gridhouse::Observation* list[1] = {&obs};
  ad::Tensor e_image = net.trunk().encode_panoramas(tape, b.trunk, list);
  ad::Tensor e_lang = net.trunk().encode_language(tape, b.trunk, tokens);
  const int rows[1] = {0};
  const int acts[1] = {action};
  return net.head_forward(b, e_image, e_lang, rows, acts);
}

double reward_value(const RewardNet& net, const gridhouse::Observation& obs,
                    int action, std::span<const int> tokens) {
  ad::Tape tape;
  auto b = net.bind(tape);
  const gridhouse::Observation* list[1] = {&obs};
  ad::Tensor e_image = net.trunk().encode_panoramas(tape, b.trunk, list);
  ad::Tensor e_lang = net.trunk().encode_language(tape, b.trunk, tokens);
  const int rows[1] = {0};
  const int acts[1] = {action};
  return net.head_forward(b, e_image, e_lang, rows, acts).item();
}

}  // namespace lcrl::reward
