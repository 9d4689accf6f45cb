#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace lcrl::ad {

using Shape = std::vector<std::size_t>;

std::size_t numel(const Shape& shape);
std::string shape_str(const Shape& shape);

class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct Parameter;
class Tape;

/// Handle to a node on a Tape. Cheap to copy; valid as long as the tape lives.
class Tensor {
 public:
  Tensor() = default;
  Tensor(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  const Shape& shape() const;
  std::size_t size() const;
  std::span<const double> data() const;
  /// Empty until backward() has reached this node.
  std::span<const double> grad() const;
  bool requires_grad() const;
  double item() const;

  Tape& tape() const { return *tape_; }
  std::size_t id() const { return id_; }

 private:
  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

/// Define-by-run gradient tape. Nodes are appended in creation order, so
/// walking the node list backwards is a valid reverse topological order.
class Tape {
 public:
  struct Node {
    Shape shape;
    std::vector<double> value;
    std::vector<double> grad;
    bool requires_grad = false;
    Parameter* param = nullptr;
    std::function<void(Tape&)> backward;
  };

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Tensor constant(Shape shape, std::vector<double> values);
  Tensor variable(Shape shape, std::vector<double> values);
  /// Leaf bound to a parameter; backward() accumulates into param.grad.
  Tensor param(Parameter& p);

  /// Appends a computed node. `backward` may be empty for constant results.
  Tensor push(Shape shape, std::vector<double> values, bool requires_grad,
              std::function<void(Tape&)> backward);

  /// Reverse sweep from a one-element loss. Parameter leaves add their
  /// gradient into the bound Parameter::grad.
  void backward(const Tensor& loss);

  Node& node(std::size_t id) { return nodes_.at(id); }
  const Node& node(std::size_t id) const { return nodes_.at(id); }
  /// Gradient buffer of a node, allocated (zeroed) on first use.
  std::vector<double>& grad_of(std::size_t id);
  std::size_t size() const { return nodes_.size(); }

 private:
  std::vector<Node> nodes_;
  bool backward_done_ = false;
};

}  // namespace lcrl::ad
