#include "lcrl/trainers/policy_net.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <type_traits>

#include "lcrl/gridhouse/mdp_builder.hpp"

namespace lcrl::trainers {

using reward::kEmbed;
using reward::scaled_uniform;
using solver::kNumActions;

PolicyNet::PolicyNet(int vocab_size, std::uint64_t seed, reward::NetOptions opts)
    : trunk_(store_, vocab_size, seed) {
  store_.add("orientation_embedding", {4, kEmbed}, scaled_uniform(4 * kEmbed, 1, seed, 30));
  store_.add("held_embedding", {2, kEmbed}, scaled_uniform(2 * kEmbed, 1, seed, 31));
  store_.add("fc1_w", {kEmbed, kEmbed}, scaled_uniform(kEmbed * kEmbed, kEmbed, seed, 32));
  store_.add("fc1_b", {1, kEmbed}, scaled_uniform(kEmbed, kEmbed, seed, 33));
  if (opts.zero_head) {
    store_.add("fc2_w", {kEmbed, kNumActions}, std::vector<double>(kEmbed * kNumActions, 0.0));
    store_.add("fc2_b", {1, kNumActions}, std::vector<double>(kNumActions, 0.0));
  } else {
    store_.add("fc2_w", {kEmbed, kNumActions},
               scaled_uniform(kEmbed * kNumActions, kEmbed, seed, 34));
    store_.add("fc2_b", {1, kNumActions}, scaled_uniform(kNumActions, kEmbed, seed, 35));
  }
}

namespace {

template <class Net>
PolicyNet::Bound bind_policy(ad::Tape& tape, Net& net) {
  auto one = [&](const char* name) {
    if constexpr (std::is_const_v<Net>) {
      const auto& p = net.params().get(name);
      return tape.constant(p.shape, p.value);
    } else {
      return tape.param(net.params().get(name));
    }
  };
  PolicyNet::Bound b;
  b.trunk = net.trunk().bind(tape, net.params());
  b.orientation_embedding = one("orientation_embedding");
  b.held_embedding = one("held_embedding");
  b.fc1_w = one("fc1_w");
  b.fc1_b = one("fc1_b");
  b.fc2_w = one("fc2_w");
  b.fc2_b = one("fc2_b");
  return b;
}

struct StateRows {
  std::vector<int> states, rows, orientations, held;
};

StateRows non_sink_rows(const solver::TabularMDP& mdp) {
  StateRows r;
  for (int s = 0; s < mdp.num_states; ++s) {
    const int oi = mdp.obs_index[static_cast<std::size_t>(s)];
    if (oi < 0) continue;
    r.states.push_back(s);
    r.rows.push_back(oi);
    r.orientations.push_back(mdp.states[static_cast<std::size_t>(s)].orientation);
    r.held.push_back(held_flag(mdp, s));
  }
  return r;
}

std::vector<const gridhouse::Observation*> observation_list(const solver::TabularMDP& mdp) {
  std::vector<const gridhouse::Observation*> list;
  for (const auto& o : mdp.observations) list.push_back(&o);
  return list;
}

}  // namespace

PolicyNet::Bound PolicyNet::bind(ad::Tape& tape) { return bind_policy(tape, *this); }
PolicyNet::Bound PolicyNet::bind(ad::Tape& tape) const { return bind_policy(tape, *this); }

ad::Tensor PolicyNet::head_forward(const Bound& b, const ad::Tensor& e_image,
                                   const ad::Tensor& e_language,
                                   std::span<const int> image_rows,
                                   std::span<const int> orientations,
                                   std::span<const int> held) const {
  if (image_rows.size() != orientations.size() || image_rows.size() != held.size()) {
    throw std::invalid_argument("policy head: row, orientation and held lists differ in length");
  }
  for (int o : orientations) {
    if (o < 0 || o > 3) throw std::out_of_range("orientation " + std::to_string(o));
  }
  for (int h : held) {
    if (h != 0 && h != 1) throw std::out_of_range("held flag " + std::to_string(h));
  }
  const std::size_t n = image_rows.size();
  ad::Tensor z = ad::mul(ad::embedding_lookup(e_image, image_rows),
                         reward::repeat_row(e_language, n));
  z = ad::mul(z, ad::embedding_lookup(b.orientation_embedding, orientations));
  z = ad::mul(z, ad::embedding_lookup(b.held_embedding, held));
  ad::Tensor h = ad::relu(reward::add_bias(ad::matmul(z, b.fc1_w), b.fc1_b));
  return ad::log_softmax(reward::add_bias(ad::matmul(h, b.fc2_w), b.fc2_b));
}

int held_flag(const solver::TabularMDP& mdp, int s) {
  if (mdp.states.empty()) return 0;
  return mdp.states[static_cast<std::size_t>(s)].status ==
                 static_cast<int>(gridhouse::ObjectStatus::kHeld)
             ? 1
             : 0;
}

solver::Policy policy_table(const PolicyNet& net, const solver::TabularMDP& mdp,
                            std::span<const int> command) {
  const int S = mdp.num_states;
  std::vector<double> stationary(mdp.table_size(), 1.0 / kNumActions);
  const auto rows = non_sink_rows(mdp);
  if (!rows.states.empty()) {
    ad::Tape tape;
    auto b = net.bind(tape);
    const auto list = observation_list(mdp);
    ad::Tensor e_image = net.trunk().encode_panoramas(tape, b.trunk, list);
    ad::Tensor e_lang = net.trunk().encode_language(tape, b.trunk, command);
    auto logp =
        net.head_forward(b, e_image, e_lang, rows.rows, rows.orientations, rows.held).data();
    for (std::size_t i = 0; i < rows.states.size(); ++i) {
      for (int a = 0; a < kNumActions; ++a) {
        stationary[static_cast<std::size_t>(rows.states[i]) * kNumActions + a] =
            std::exp(logp[i * kNumActions + static_cast<std::size_t>(a)]);
      }
    }
  }
  solver::Policy p;
  p.horizon = mdp.horizon;
  p.num_states = S;
  p.prob.reserve(stationary.size() * static_cast<std::size_t>(mdp.horizon + 1));
  for (int t = 0; t <= mdp.horizon; ++t) {
    p.prob.insert(p.prob.end(), stationary.begin(), stationary.end());
  }
  return p;
}

bool policy_rollout(const PolicyNet& net, const solver::TabularMDP& mdp,
                    std::span<const int> command) {
  int s = mdp.initial_state;
  for (int t = 0; t <= mdp.horizon; ++t) {
    if (mdp.success[static_cast<std::size_t>(s)]) return true;
    if (t == mdp.horizon) break;
    const int oi = mdp.obs_index[static_cast<std::size_t>(s)];
    if (oi < 0) return false;
    ad::Tape tape;
    auto b = net.bind(tape);
    const gridhouse::Observation* list[1] = {&mdp.observations[static_cast<std::size_t>(oi)]};
    ad::Tensor e_image = net.trunk().encode_panoramas(tape, b.trunk, list);
    ad::Tensor e_lang = net.trunk().encode_language(tape, b.trunk, command);
    const int row[1] = {0};
    const int orient[1] = {mdp.states.empty() ? 0 : mdp.states[static_cast<std::size_t>(s)].orientation};
    const int held[1] = {held_flag(mdp, s)};
    auto logp = net.head_forward(b, e_image, e_lang, row, orient, held).data();
    int best = 0;
    for (int a = 1; a < kNumActions; ++a) {
      if (logp[static_cast<std::size_t>(a)] > logp[static_cast<std::size_t>(best)]) best = a;
    }
    s = mdp.successor(s, best);
  }
  return false;
}

}  // namespace lcrl::trainers
