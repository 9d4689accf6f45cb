#include <doctest.h>

#include <cmath>

#include "fd.hpp"
#include "lcrl/gridhouse/dataset.hpp"
#include "lcrl/reward/reward_cache.hpp"
#include "micro.hpp"

using namespace lcrl;
using namespace lcrl::reward;
using gridhouse::Observation;

namespace {

constexpr int kVocab = 18;
const std::vector<int> kCommand = {0, 1, 2, 10};

std::vector<double> view_block(const Observation& o, int v) {
  std::vector<double> out(kViewFloats);
  o.write_view(v, out);
  return out;
}

std::vector<double> panorama_data(const Observation& o, const int order[4]) {
  std::vector<double> out;
  for (int k = 0; k < 4; ++k) {
    auto b = view_block(o, order[k]);
    out.insert(out.end(), b.begin(), b.end());
  }
  return out;
}

std::vector<double> values(const ad::Tensor& t) { return {t.data().begin(), t.data().end()}; }

struct Probe {
  std::string name;
  std::size_t index;
};

std::vector<Probe> random_probes(const ad::ParamStore& store, Rng& rng, int n) {
  std::vector<Probe> out;
  const auto& ps = store.params();
  for (int i = 0; i < n; ++i) {
    const auto& p = ps[rng.below(ps.size())];
    out.push_back({p.name, rng.below(p.value.size())});
  }
  return out;
}

double grad_of(ad::ParamStore& store, const Probe& p) {
  const auto& g = store.get(p.name).grad;
  return g.empty() ? 0.0 : g[p.index];
}

const gridhouse::Dataset& small_dataset() {
  static const auto ds = [] {
    gridhouse::DatasetConfig dc;
    dc.num_houses = 10;
    return gridhouse::make_dataset(dc, 8);
  }();
  return ds;
}

const gridhouse::TaskSpec& first_of(gridhouse::TaskKind kind) {
  for (const auto& t : small_dataset().tasks)
    if (t.kind == kind) return t;
  throw std::logic_error("no task");
}

}  // namespace

TEST_CASE("language encoder base case and zero weights") {
  RewardNet net(kVocab, 1);
  ad::Tape tape;
  const int tok[1] = {5};
  const auto h = values(encode_language(tape, net, tok));
  const auto& emb = net.params().get("word_embedding").value;
  const auto& wx = net.params().get("rnn_wx").value;
  const auto& b = net.params().get("rnn_b").value;
  for (std::size_t j = 0; j < kEmbed; ++j) {
    double acc = b[j];
    for (std::size_t i = 0; i < kEmbed; ++i) acc += emb[5 * kEmbed + i] * wx[i * kEmbed + j];
    CHECK(h[j] == doctest::Approx(std::tanh(acc)).epsilon(1e-14));
  }

  for (const char* name : {"rnn_wx", "rnn_wh", "rnn_b"}) {
    auto& p = net.params().get(name);
    std::fill(p.value.begin(), p.value.end(), 0.0);
  }
  ad::Tape t2;
  for (double x : values(encode_language(t2, net, kCommand))) CHECK(x == 0.0);

  ad::Tape t3;
  CHECK_THROWS(encode_language(t3, net, std::vector<int>{}));
  CHECK_THROWS(encode_language(t3, net, std::vector<int>{kVocab}));
}

TEST_CASE("language encoder gradient through five tokens") {
  RewardNet net(kVocab, 2);
  const std::vector<int> tokens = {4, 0, 2, 17, 9};
  Rng rng(3);
  std::vector<double> w(kEmbed);
  for (auto& x : w) x = rng.uniform(-1, 1);
  {
    ad::Tape tape;
    auto h = encode_language(tape, net, tokens);
    tape.backward(ad::sum(ad::mul(h, tape.constant({1, kEmbed}, w))));
  }
  double worst = 0.0;
  for (const char* name : {"rnn_wx", "rnn_wh", "rnn_b", "word_embedding"}) {
    auto& p = net.params().get(name);
    for (std::size_t i = 0; i < p.value.size(); i += 7) {
      const double analytic = p.grad.empty() ? 0.0 : p.grad[i];
      std::vector<double> x{p.value[i]};
      const auto fd = testing::fd_gradient(x, [&] {
        p.value[i] = x[0];
        ad::Tape tape;
        auto h = encode_language(tape, net, tokens);
        return ad::sum(ad::mul(h, tape.constant({1, kEmbed}, w))).item();
      });
      p.value[i] = x[0];
      worst = std::max(worst, testing::rel_err(analytic, fd[0]));
    }
  }
  CHECK(worst < 1e-5);
}

TEST_CASE("panorama sum is exact under view permutation") {
  RewardNet net(kVocab, 4);
  Rng rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    const auto o = testing::random_observation(rng);
    const int id[4] = {0, 1, 2, 3};
    int perm[4] = {0, 1, 2, 3};
    for (int k = 3; k > 0; --k) std::swap(perm[k], perm[rng.below(static_cast<std::uint64_t>(k + 1))]);
    ad::Tape tape;
    const auto a = values(encode_panorama(tape, net, panorama_data(o, id)));
    const auto b = values(encode_panorama(tape, net, panorama_data(o, perm)));
    const auto c = values(encode_panorama(tape, net, o));
    CHECK(a == b);
    for (std::size_t j = 0; j < kEmbed; ++j) CHECK(c[j] == doctest::Approx(a[j]).epsilon(1e-13));
  }
}

TEST_CASE("duplicated view gives four times its vector") {
  RewardNet net(kVocab, 6);
  Rng rng(7);
  const auto o = testing::random_observation(rng);
  const int same[4] = {2, 2, 2, 2};
  ad::Tape tape;
  const auto pano = values(encode_panorama(tape, net, panorama_data(o, same)));
  auto b = net.bind(tape);
  const auto single = values(net.trunk().encode_views(tape, b.trunk, view_block(o, 2), 1));
  for (std::size_t j = 0; j < kEmbed; ++j) CHECK(pano[j] == doctest::Approx(4 * single[j]).epsilon(1e-13));

  Observation blank;
  blank.ground.fill(0);
  blank.overlay.fill(gridhouse::kNoOverlay);
  blank.rehash();
  ad::Tape t2, t3;
  CHECK(values(encode_panorama(t2, net, blank)) == values(encode_panorama(t3, net, blank)));
  CHECK_THROWS_AS(encode_panorama(tape, net, std::vector<double>(kViewFloats * 4 - 25)), ad::ShapeError);
}

TEST_CASE("zero gating factor makes the reward input independent") {
  RewardNet net(kVocab, 8);
  auto& act = net.params().get("action_embedding");
  std::fill(act.value.begin(), act.value.begin() + kEmbed, 0.0);
  Rng rng(9);
  const double r0 = reward_value(net, testing::random_observation(rng), 0, kCommand);
  for (int k = 0; k < 5; ++k) {
    CHECK(reward_value(net, testing::random_observation(rng), 0, std::vector<int>{1 + k, 3}) ==
          doctest::Approx(r0).epsilon(1e-14));
  }
  CHECK_THROWS(reward_value(net, testing::random_observation(rng), 4, kCommand));
  CHECK_THROWS(reward_value(net, testing::random_observation(rng), -1, kCommand));
}

TEST_CASE("reward gradient matches finite differences") {
  RewardNet net(kVocab, 10);
  Rng rng(11);
  for (int trial = 0; trial < 3; ++trial) {
    const auto o = testing::random_observation(rng);
    const int a = static_cast<int>(rng.below(4));
    net.params().zero_grad();
    {
      ad::Tape tape;
      tape.backward(reward_forward(tape, net, o, a, kCommand));
    }
    for (const auto& p : random_probes(net.params(), rng, 5)) {
      const double analytic = grad_of(net.params(), p);
      auto& v = net.params().get(p.name).value;
      std::vector<double> x{v[p.index]};
      const auto fd = testing::fd_gradient(x, [&] {
        v[p.index] = x[0];
        return reward_value(net, o, a, kCommand);
      });
      v[p.index] = x[0];
      CHECK(testing::rel_err(analytic, fd[0], 1e-7) < 1e-5);
    }
  }
}

TEST_CASE("states sharing an observation share rewards") {
  const auto& ds = small_dataset();
  const auto& task = first_of(gridhouse::TaskKind::kPick);
  const auto m = gridhouse::build_mdp(ds.house(task.house_id), task, ds.config.mdp);
  RewardNet net(ds.vocab.size(), 12);
  const auto r = reward_all(net, m, task.command);
  for (int s = 0; s < m.num_states; ++s)
    for (int s2 = s + 1; s2 < m.num_states; ++s2) {
      if (m.obs_index[static_cast<std::size_t>(s)] != m.obs_index[static_cast<std::size_t>(s2)]) continue;
      for (int a = 0; a < 4; ++a)
        CHECK(r[static_cast<std::size_t>(s) * 4 + a] == r[static_cast<std::size_t>(s2) * 4 + a]);
    }
  for (int a = 0; a < 4; ++a) CHECK(r[static_cast<std::size_t>(m.sink) * 4 + a] == 0.0);
}

TEST_CASE("cached rewards are bit identical and need far fewer encodings") {
  const auto& ds = small_dataset();
  RewardNet net(ds.vocab.size(), 13);
  for (auto kind : {gridhouse::TaskKind::kNav, gridhouse::TaskKind::kPick}) {
    const auto& task = first_of(kind);
    const auto m = gridhouse::build_mdp(ds.house(task.house_id), task, ds.config.mdp);
    RewardCache cache;
    const auto naive = reward_all(net, m, task.command);
    const auto cached = reward_all(net, m, task.command, &cache);
    CHECK(naive == cached);
    const auto naive_forwards = static_cast<std::uint64_t>(m.num_states - 1) * 4;
    CHECK(cache.stats().cnn_forwards * 4 <= naive_forwards);
    CHECK(cache.stats().cnn_forwards == m.observations.size());
    if (kind == gridhouse::TaskKind::kNav)
      CHECK(m.observations.size() <= static_cast<std::size_t>(m.num_states) / 4 + 1);

    const auto before = cache.stats();
    CHECK(reward_all(net, m, task.command, &cache) == naive);
    CHECK(cache.stats().cnn_forwards == before.cnn_forwards);
    CHECK(cache.stats().hits > before.hits);
    CHECK(cache.stats().misses == before.misses);

    RewardGraph graph(net, m, task.command);
    CHECK(graph.rewards() == naive);

    auto& p = net.params().get("fc2_b");
    p.value[0] += 0.5;
    net.params().touch();
    const auto shifted = reward_all(net, m, task.command, &cache);
    CHECK(cache.stats().cnn_forwards > before.cnn_forwards);
    CHECK(shifted[0] == doctest::Approx(naive[0] + 0.5));
    p.value[0] -= 0.5;
    net.params().touch();
  }
}

TEST_CASE("weighted backward matches the naive per-state loop") {
  Rng rng(14);
  testing::MicroOptions opt;
  opt.states = 7;
  opt.observations = 4;
  const auto m = testing::micro_mdp(rng, opt);
  RewardNet net(kVocab, 15);

  auto naive = [&](const std::vector<double>& coeffs) {
    net.params().zero_grad();
    for (int s = 0; s < m.num_states; ++s) {
      if (s == m.sink) continue;
      for (int a = 0; a < 4; ++a) {
        const double c = coeffs[static_cast<std::size_t>(s) * 4 + a];
        if (c == 0.0) continue;
        ad::Tape tape;
        const auto& o = m.observations[static_cast<std::size_t>(m.obs_index[static_cast<std::size_t>(s)])];
        tape.backward(ad::scale(reward_forward(tape, net, o, a, kCommand), c));
      }
    }
    std::vector<std::vector<double>> g;
    for (const auto& p : net.params().params()) g.push_back(p.grad.empty() ? std::vector<double>(p.value.size(), 0.0) : p.grad);
    return g;
  };
  auto batched = [&](const std::vector<double>& coeffs) {
    net.params().zero_grad();
    CacheStats stats;
    reward_backward_weighted(net, m, kCommand, coeffs, &stats);
    std::vector<std::vector<double>> g;
    for (const auto& p : net.params().params()) g.push_back(p.grad.empty() ? std::vector<double>(p.value.size(), 0.0) : p.grad);
    return g;
  };
  auto max_diff = [](const auto& a, const auto& b) {
    double d = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
      for (std::size_t j = 0; j < a[i].size(); ++j) {
        d = std::max(d, std::abs(a[i][j] - b[i][j]));
        scale = std::max(scale, std::abs(a[i][j]));
      }
    return std::pair{d, scale};
  };

  const auto zero = batched(std::vector<double>(m.table_size(), 0.0));
  for (const auto& g : zero)
    for (double x : g) CHECK(x == 0.0);

  std::vector<double> one(m.table_size(), 0.0);
  one[2 * 4 + 1] = 1.0;
  const auto [d1, s1] = max_diff(naive(one), batched(one));
  CHECK(d1 <= 1e-12 * std::max(1.0, s1));

  auto coeffs = testing::random_reward(m, rng);
  const auto [d2, s2] = max_diff(naive(coeffs), batched(coeffs));
  CHECK(s2 > 0.0);
  CHECK(d2 <= 1e-12 * std::max(1.0, s2));

  CHECK_THROWS_AS(reward_backward_weighted(net, m, kCommand, std::vector<double>(3, 0.0)), ad::ShapeError);
  RewardGraph graph(net, m, kCommand);
  graph.backward(coeffs);
  CHECK_THROWS_AS(graph.backward(coeffs), std::logic_error);
}
