#pragma once

// Finite-difference check of a differentiable expression over leaf inputs.

#include <functional>
#include <vector>

#include "fd.hpp"
#include "lcrl/autodiff/ops.hpp"
#include "lcrl/common/rng.hpp"

namespace lcrl::testing {

using Expr = std::function<ad::Tensor(std::vector<ad::Tensor>&)>;

/// Max relative error between tape gradients of sum(w * expr(inputs)), with
/// random fixed w, and central differences, over every input entry.
inline double op_grad_error(const std::vector<ad::Shape>& shapes, const Expr& expr,
                            std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::vector<double>> values;
  for (const auto& s : shapes) {
    std::vector<double> v(ad::numel(s));
    for (auto& x : v) x = rng.uniform(-1.0, 1.0);
    values.push_back(std::move(v));
  }
  std::vector<double> weights;
  auto eval = [&](bool grads, std::vector<std::vector<double>>* out) {
    ad::Tape tape;
    std::vector<ad::Tensor> in;
    for (std::size_t i = 0; i < shapes.size(); ++i) in.push_back(tape.variable(shapes[i], values[i]));
    ad::Tensor y = expr(in);
    if (weights.empty()) {
      Rng wr(seed ^ 0x5eed);
      weights.resize(y.size());
      for (auto& w : weights) w = wr.uniform(-1.0, 1.0);
    }
    ad::Tensor loss = ad::sum(ad::mul(y, tape.constant(y.shape(), weights)));
    const double v = loss.item();
    if (grads) {
      tape.backward(loss);
      for (auto& t : in) {
        auto g = t.grad();
        out->emplace_back(g.begin(), g.end());
        if (out->back().empty()) out->back().assign(t.size(), 0.0);
      }
    }
    return v;
  };
  std::vector<std::vector<double>> analytic;
  eval(true, &analytic);
  double worst = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const auto fd = fd_gradient(values[i], [&] { return eval(false, nullptr); });
    for (std::size_t j = 0; j < fd.size(); ++j) worst = std::max(worst, rel_err(analytic[i][j], fd[j]));
  }
  return worst;
}

}  // namespace lcrl::testing
