#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "lcrl/autodiff/ops.hpp"
#include "lcrl/autodiff/param_store.hpp"
#include "lcrl/autodiff/serialize.hpp"
#include "op_check.hpp"

using namespace lcrl;
using lcrl::testing::op_grad_error;

TEST_CASE("elementwise ops match finite differences") {
  const ad::Shape s{3, 4};
  CHECK(op_grad_error({s, s}, [](auto& x) { return ad::add(x[0], x[1]); }, 1) < 1e-5);
  CHECK(op_grad_error({s, s}, [](auto& x) { return ad::sub(x[0], x[1]); }, 2) < 1e-5);
  CHECK(op_grad_error({s, s}, [](auto& x) { return ad::mul(x[0], x[1]); }, 3) < 1e-5);
  CHECK(op_grad_error({s}, [](auto& x) { return ad::scale(x[0], -2.5); }, 4) < 1e-5);
  CHECK(op_grad_error({s}, [](auto& x) { return ad::relu(x[0]); }, 5) < 1e-5);
  CHECK(op_grad_error({s}, [](auto& x) { return ad::tanh(x[0]); }, 6) < 1e-5);
  CHECK(op_grad_error({s}, [](auto& x) { return ad::sum(x[0]); }, 7) < 1e-5);
  CHECK(op_grad_error({s}, [](auto& x) { return ad::log_softmax(x[0]); }, 8) < 1e-5);
  CHECK(op_grad_error({{2, 4}, {3, 4}}, [](auto& x) { return ad::concat(x[0], x[1]); }, 9) < 1e-5);
}

TEST_CASE("matmul gradient on 3x4 by 4x2") {
  CHECK(op_grad_error({{3, 4}, {4, 2}}, [](auto& x) { return ad::matmul(x[0], x[1]); }, 11) < 1e-6);
}

TEST_CASE("embedding lookup accumulates repeated rows") {
  const int idx[] = {2, 0, 2, 1};
  CHECK(op_grad_error({{3, 5}}, [&](auto& x) { return ad::embedding_lookup(x[0], idx); }, 12) < 1e-5);
}

TEST_CASE("convolution and pooling gradients") {
  CHECK(op_grad_error({{2, 3, 5, 5}, {4, 3, 3, 3}, {4}},
                      [](auto& x) { return ad::conv2d(x[0], x[1], x[2]); }, 13) < 1e-5);
  CHECK(op_grad_error({{1, 2, 5, 5}, {3, 2, 5, 5}, {3}},
                      [](auto& x) { return ad::conv2d(x[0], x[1], x[2], 2); }, 14) < 1e-5);
  CHECK(op_grad_error({{2, 3, 5, 5}}, [](auto& x) { return ad::max_pool_2x2(x[0]); }, 15) < 1e-5);
  CHECK(op_grad_error({{2, 3, 4, 3}}, [](auto& x) { return ad::global_channel_max_pool(x[0]); }, 16) <
        1e-5);
}

TEST_CASE("1x1 identity kernel reproduces the input") {
  ad::Tape tape;
  Rng rng(3);
  std::vector<double> xs(2 * 3 * 4 * 4);
  for (auto& v : xs) v = rng.uniform(-1, 1);
  std::vector<double> w(3 * 3, 0.0);
  for (int c = 0; c < 3; ++c) w[static_cast<std::size_t>(c * 3 + c)] = 1.0;
  auto x = tape.constant({2, 3, 4, 4}, xs);
  auto y = ad::conv2d(x, tape.constant({3, 3, 1, 1}, w), tape.constant({3}, {0, 0, 0}));
  CHECK(y.shape() == x.shape());
  for (std::size_t i = 0; i < xs.size(); ++i) CHECK(y.data()[i] == xs[i]);
}

TEST_CASE("global max of a constant plane is the constant") {
  ad::Tape tape;
  std::vector<double> v(2 * 3 * 3, 0.0);
  for (int c = 0; c < 2; ++c)
    for (int i = 0; i < 9; ++i) v[static_cast<std::size_t>(c * 9 + i)] = c == 0 ? 1.5 : -2.0;
  auto y = ad::global_channel_max_pool(tape.constant({1, 2, 3, 3}, v));
  CHECK(y.data()[0] == 1.5);
  CHECK(y.data()[1] == -2.0);
}

TEST_CASE("product rule and zero upstream gradient") {
  ad::Tape tape;
  auto x = tape.variable({1}, {3.0});
  auto y = tape.variable({1}, {-7.0});
  tape.backward(ad::mul(x, y));
  CHECK(x.grad()[0] == -7.0);
  CHECK(y.grad()[0] == 3.0);

  ad::Tape t2;
  auto a = t2.variable({2, 2}, {1, 2, 3, 4});
  auto out = ad::sum(ad::scale(ad::tanh(a), 0.0));
  t2.backward(out);
  for (double g : a.grad()) CHECK(g == 0.0);
}

TEST_CASE("backward rejects non-scalar losses and a second call") {
  ad::Tape tape;
  auto a = tape.variable({2}, {1, 2});
  CHECK_THROWS_AS(tape.backward(a), ad::ShapeError);
  auto l = ad::sum(a);
  tape.backward(l);
  CHECK_THROWS(tape.backward(l));
}

TEST_CASE("shape errors name both shapes") {
  ad::Tape tape;
  auto a = tape.constant({2, 3}, std::vector<double>(6, 0.0));
  auto b = tape.constant({3, 2}, std::vector<double>(6, 0.0));
  try {
    ad::add(a, b);
    FAIL("expected ShapeError");
  } catch (const ad::ShapeError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("[2, 3]") != std::string::npos);
    CHECK(msg.find("[3, 2]") != std::string::npos);
  }
  CHECK_THROWS_AS(ad::matmul(a, a), ad::ShapeError);
}

TEST_CASE("adam with zero gradient leaves parameters unchanged") {
  ad::ParamStore store;
  auto& p = store.add("w", {3}, {1.0, -2.0, 0.5});
  store.adam_step(0.1);
  CHECK(p.value == std::vector<double>{1.0, -2.0, 0.5});
  CHECK(store.step() == 1);
}

TEST_CASE("first adam step with unit gradient moves by about lr") {
  ad::ParamStore store;
  auto& p = store.add("w", {1}, {0.0});
  p.grad = {1.0};
  store.adam_step(5e-4);
  CHECK(p.value[0] == doctest::Approx(-5e-4).epsilon(1e-4));
  CHECK(p.grad[0] == 0.0);
}

TEST_CASE("adam minimises a quadratic bowl") {
  ad::ParamStore store;
  auto& p = store.add("w", {3}, {2.0, -1.0, 0.3});
  const std::vector<double> c{0.5, 0.25, -1.0};
  double f = 0.0;
  for (int it = 0; it < 2000; ++it) {
    f = 0.0;
    for (std::size_t i = 0; i < 3; ++i) {
      p.grad[i] = 2 * (p.value[i] - c[i]);
      f += (p.value[i] - c[i]) * (p.value[i] - c[i]);
    }
    store.adam_step(0.01);
  }
  CHECK(f < 1e-6);
}

TEST_CASE("adam refuses non-finite gradients before updating") {
  ad::ParamStore store;
  auto& p = store.add("w", {2}, {1.0, 1.0});
  p.grad = {0.5, std::nan("")};
  CHECK_THROWS(store.adam_step(0.1));
  CHECK(p.value == std::vector<double>{1.0, 1.0});
}

TEST_CASE("duplicate parameter names are rejected") {
  ad::ParamStore store;
  store.add("w", {1}, {0.0});
  CHECK_THROWS(store.add("w", {1}, {0.0}));
  CHECK_THROWS(store.add("bad", {2}, {0.0}));
}

TEST_CASE("checkpoints round-trip and reject other versions") {
  const auto dir = std::filesystem::temp_directory_path() / "lcrl_test_ckpt";
  std::filesystem::create_directories(dir);
  ad::ParamStore a;
  a.add("x", {2, 2}, {1.5, -2.0, 3.25, 1e-300});
  a.add("y", {1}, {42.0});
  a.set_step(17);
  ad::save_params(a, dir / "m");

  ad::ParamStore b;
  b.add("x", {2, 2}, std::vector<double>(4, 0.0));
  b.add("y", {1}, {0.0});
  ad::load_params(b, dir / "m");
  CHECK(b.get("x").value == a.get("x").value);
  CHECK(b.get("y").value == a.get("y").value);
  CHECK(b.step() == 17);

  ad::ParamStore wrong;
  wrong.add("x", {4}, std::vector<double>(4, 0.0));
  wrong.add("y", {1}, {0.0});
  CHECK_THROWS_AS(ad::load_params(wrong, dir / "m"), ad::CheckpointError);

  {
    std::fstream f(dir / "m.bin", std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(8);
    const std::uint32_t v = 99;
    f.write(reinterpret_cast<const char*>(&v), 4);
  }
  try {
    ad::load_params(b, dir / "m");
    FAIL("expected CheckpointError");
  } catch (const ad::CheckpointError& e) {
    CHECK(std::string(e.what()).find("version") != std::string::npos);
  }
  CHECK_THROWS_AS(ad::load_params(b, dir / "missing"), ad::CheckpointError);
}
