#include "lcrl/autodiff/param_store.hpp"

#include <cmath>
#include <stdexcept>

namespace lcrl::ad {

Parameter& ParamStore::add(std::string name, Shape shape,
                           std::vector<double> init) {
  if (index_.contains(name)) {
    throw std::invalid_argument("duplicate parameter '" + name + "'");
  }
  if (numel(shape) != init.size()) {
    throw ShapeError("parameter '" + name + "' of shape " + shape_str(shape) +
                     " given " + std::to_string(init.size()) + " values");
  }
  Parameter p;
  p.name = name;
  p.shape = std::move(shape);
  p.grad.assign(init.size(), 0.0);
  p.m.assign(init.size(), 0.0);
  p.v.assign(init.size(), 0.0);
  p.value = std::move(init);
  index_.emplace(std::move(name), params_.size());
  params_.push_back(std::move(p));
  ++version_;
  return params_.back();
}

Parameter& ParamStore::get(std::string_view name) {
  auto it = index_.find(name);
  if (it == index_.end()) {
    throw std::out_of_range("unknown parameter '" + std::string(name) + "'");
  }
  return params_[it->second];
}

const Parameter& ParamStore::get(std::string_view name) const {
  return const_cast<ParamStore*>(this)->get(name);
}

bool ParamStore::contains(std::string_view name) const {
  return index_.find(name) != index_.end();
}

void ParamStore::zero_grad() {
  for (auto& p : params_) std::fill(p.grad.begin(), p.grad.end(), 0.0);
}

std::size_t ParamStore::total_size() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.value.size();
  return n;
}

void ParamStore::adam_step(double lr, const AdamOptions& opts) {
  for (const auto& p : params_) {
    for (double g : p.grad) {
      if (!std::isfinite(g)) {
        throw std::runtime_error("non-finite gradient in parameter '" +
                                 p.name + "'");
      }
    }
  }
  ++step_;
  const double t = static_cast<double>(step_);
  const double c1 = 1.0 - std::pow(opts.beta1, t);
  const double c2 = 1.0 - std::pow(opts.beta2, t);
  for (auto& p : params_) {
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      const double g = p.grad[i];
      p.m[i] = opts.beta1 * p.m[i] + (1.0 - opts.beta1) * g;
      p.v[i] = opts.beta2 * p.v[i] + (1.0 - opts.beta2) * g * g;
      const double mhat = p.m[i] / c1;
      const double vhat = p.v[i] / c2;
      p.value[i] -= lr * mhat / (std::sqrt(vhat) + opts.eps);
    }
    std::fill(p.grad.begin(), p.grad.end(), 0.0);
  }
  ++version_;
}

}  // namespace lcrl::ad
