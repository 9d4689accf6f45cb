#pragma once

#include <cstddef>
#include <span>

#include "lcrl/autodiff/tensor.hpp"

// Differentiable operators. Shapes must match exactly; the only broadcast is
// scale() (scalar times tensor). Image tensors are laid out [batch, channel,
// row, col].
namespace lcrl::ad {

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double factor);

/// [m, k] x [k, n] -> [m, n]
Tensor matmul(const Tensor& a, const Tensor& b);

/// Gathers rows of a [rows, dim] table -> [indices.size(), dim].
Tensor embedding_lookup(const Tensor& table, std::span<const int> indices);

/// Cross-correlation, stride 1. input [b, cin, h, w], weight
/// [cout, cin, kh, kw], bias [cout]. `pad` zero cells are added on every
/// side; pad = 0 gives the plain "valid" convolution. Zero input cells are
/// skipped, which makes one-hot inputs cheap.
Tensor conv2d(const Tensor& input, const Tensor& weight, const Tensor& bias,
              std::size_t pad = 0);

/// 2x2 window, stride 2, trailing odd row/col dropped.
Tensor max_pool_2x2(const Tensor& input);

/// [b, c, h, w] -> [b, c], max over spatial positions.
Tensor global_channel_max_pool(const Tensor& input);

Tensor relu(const Tensor& a);
Tensor tanh(const Tensor& a);

/// Sum of all elements -> shape {1}.
Tensor sum(const Tensor& a);

/// Stacks along the leading axis; trailing dims must agree.
Tensor concat(const Tensor& a, const Tensor& b);

/// Row-wise log-softmax of a 2-D tensor.
Tensor log_softmax(const Tensor& a);

}  // namespace lcrl::ad
