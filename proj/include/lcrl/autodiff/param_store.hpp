#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "lcrl/autodiff/tensor.hpp"

namespace lcrl::ad {

struct Parameter {
  std::string name;
  Shape shape;
  std::vector<double> value;
  std::vector<double> grad;
  // Adam moments.
  std::vector<double> m;
  std::vector<double> v;
};

struct AdamOptions {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

class ParamStore {
 public:
  Parameter& add(std::string name, Shape shape, std::vector<double> init);
  Parameter& get(std::string_view name);
  const Parameter& get(std::string_view name) const;
  bool contains(std::string_view name) const;

  std::deque<Parameter>& params() { return params_; }
  const std::deque<Parameter>& params() const { return params_; }

  void zero_grad();
  /// Bias-corrected Adam, then zeroes gradients. Throws on non-finite grads
  /// before touching any parameter.
  void adam_step(double lr, const AdamOptions& opts = {});

  std::int64_t step() const { return step_; }
  void set_step(std::int64_t step) { step_ = step; }
  /// Bumped on every change to parameter values; caches key on it.
  std::uint64_t version() const { return version_; }
  void touch() { ++version_; }

  std::size_t total_size() const;

 private:
  std::deque<Parameter> params_;
  std::map<std::string, std::size_t, std::less<>> index_;
  std::int64_t step_ = 0;
  std::uint64_t version_ = 0;
};

}  // namespace lcrl::ad
