#include "lcrl/autodiff/tensor.hpp"

#include <sstream>

#include "lcrl/autodiff/param_store.hpp"

namespace lcrl::ad {

std::size_t numel(const Shape& shape) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

std::string shape_str(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ", ";
    os << shape[i];
  }
  os << ']';
  return os.str();
}

const Shape& Tensor::shape() const { return tape_->node(id_).shape; }
std::size_t Tensor::size() const { return tape_->node(id_).value.size(); }

std::span<const double> Tensor::data() const {
  return tape_->node(id_).value;
}

std::span<const double> Tensor::grad() const {
  return tape_->node(id_).grad;
}

bool Tensor::requires_grad() const { return tape_->node(id_).requires_grad; }

double Tensor::item() const {
  const auto& v = tape_->node(id_).value;
  if (v.size() != 1) {
    throw ShapeError("item() on tensor of shape " + shape_str(shape()));
  }
  return v[0];
}

Tensor Tape::constant(Shape shape, std::vector<double> values) {
  return push(std::move(shape), std::move(values), false, {});
}

Tensor Tape::variable(Shape shape, std::vector<double> values) {
  return push(std::move(shape), std::move(values), true, {});
}

Tensor Tape::param(Parameter& p) {
  Tensor t = push(p.shape, p.value, true, {});
  nodes_.back().param = &p;
  return t;
}

Tensor Tape::push(Shape shape, std::vector<double> values, bool requires_grad,
                  std::function<void(Tape&)> backward) {
  if (numel(shape) != values.size()) {
    throw ShapeError("tensor of shape " + shape_str(shape) + " given " +
                     std::to_string(values.size()) + " values");
  }
  Node n;
  n.shape = std::move(shape);
  n.value = std::move(values);
  n.requires_grad = requires_grad;
  if (requires_grad) n.backward = std::move(backward);
  nodes_.push_back(std::move(n));
  return Tensor(this, nodes_.size() - 1);
}

std::vector<double>& Tape::grad_of(std::size_t id) {
  auto& n = nodes_.at(id);
  if (n.grad.empty()) n.grad.assign(n.value.size(), 0.0);
  return n.grad;
}

void Tape::backward(const Tensor& loss) {
  if (loss.size() != 1) {
    throw ShapeError("backward() needs a scalar loss, got shape " +
                     shape_str(loss.shape()));
  }
  if (backward_done_) {
    throw std::logic_error("backward() called twice on the same tape");
  }
  backward_done_ = true;
  if (!node(loss.id()).requires_grad) return;
  grad_of(loss.id())[0] = 1.0;
  for (std::size_t i = loss.id() + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.requires_grad || n.grad.empty()) continue;
    // Closures write into other nodes' grads but never add nodes.
    if (n.backward) n.backward(*this);
    if (n.param != nullptr) {
      auto& g = n.param->grad;
      if (g.size() != n.grad.size()) g.assign(n.grad.size(), 0.0);
      for (std::size_t k = 0; k < g.size(); ++k) g[k] += n.grad[k];
    }
  }
}

}  // namespace lcrl::ad
