#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "lcrl/autodiff/ops.hpp"
#include "lcrl/autodiff/param_store.hpp"
#include "lcrl/gridhouse/observation.hpp"

namespace lcrl::reward {

inline constexpr std::size_t kEmbed = 32;
inline constexpr std::size_t kConv1Filters = 16;
inline constexpr std::size_t kConv2Filters = 32;
inline constexpr std::size_t kViewFloats =
    static_cast<std::size_t>(gridhouse::kNumClasses * gridhouse::kViewCells);

/// Parameters shared by the reward and policy networks: word embeddings and
/// an Elman cell for the command, and the per-view CNN for the panorama.
class Trunk {
 public:
  struct Bound {
    ad::Tensor word_embedding, rnn_wx, rnn_wh, rnn_b;
    ad::Tensor conv1_w, conv1_b, conv2_w, conv2_b, proj_w, proj_b;
  };

  Trunk() = default;
  /// Registers the trunk parameters in `store`.
  Trunk(ad::ParamStore& store, int vocab_size, std::uint64_t seed);

  int vocab_size() const { return vocab_size_; }

  /// Gradient-tracking leaves.
  Bound bind(ad::Tape& tape, ad::ParamStore& store) const;
  /// Constants, for inference.
  Bound bind(ad::Tape& tape, const ad::ParamStore& store) const;

  /// h_t = tanh(x_t W_x + h_{t-1} W_h + b), h_0 = 0; returns h_T as [1, 32].
  ad::Tensor encode_language(ad::Tape& tape, const Bound& b,
                             std::span<const int> tokens) const;

  /// One-hot views [n, C, 5, 5] -> per-view vectors [n, 32]:
  /// conv5x5 -> relu -> maxpool2x2 -> conv3x3 -> relu -> global max -> linear.
  ad::Tensor encode_views(ad::Tape& tape, const Bound& b,
                          std::vector<double> onehot_views, std::size_t n) const;

  /// Panoramas of `obs`: the sum of the four per-view vectors, added in an
  /// order fixed by view content. Identical views go through the CNN once.
  /// Returns [obs.size(), 32].
  ad::Tensor encode_panoramas(ad::Tape& tape, const Bound& b,
                              std::span<const gridhouse::Observation* const> obs) const;

 private:
  int vocab_size_ = 0;
};

/// Broadcasts a [1, d] row to [n, d] via an index lookup.
ad::Tensor repeat_row(const ad::Tensor& row, std::size_t n);

/// Adds a [1, d] bias to every row of an [n, d] tensor.
ad::Tensor add_bias(const ad::Tensor& x, const ad::Tensor& bias);

/// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) initial values.
std::vector<double> scaled_uniform(std::size_t count, std::size_t fan_in,
                                   std::uint64_t seed, std::uint64_t stream);

void check_tokens(std::span<const int> tokens, int vocab_size);

struct NetOptions {
  /// Zero the output layer so the initial network is constant (zero).
  bool zero_head = false;
};

/// r(o, a, L) = FC(e_image * e_language * e_action), FC = 32 -> relu 32 -> 1.
class RewardNet {
 public:
  struct Bound {
    Trunk::Bound trunk;
    ad::Tensor action_embedding, fc1_w, fc1_b, fc2_w, fc2_b;
  };

  RewardNet(int vocab_size, std::uint64_t seed, NetOptions opts = {});

  ad::ParamStore& params() { return store_; }
  const ad::ParamStore& params() const { return store_; }
  const Trunk& trunk() const { return trunk_; }
  int vocab_size() const { return trunk_.vocab_size(); }

  Bound bind(ad::Tape& tape);
  Bound bind(ad::Tape& tape) const;

  /// Rewards for rows (image row i, action a) -> [rows, 1], with
  /// e_image [n, 32] and e_language [1, 32].
  ad::Tensor head_forward(const Bound& b, const ad::Tensor& e_image,
                          const ad::Tensor& e_language,
                          std::span<const int> image_rows,
                          std::span<const int> actions) const;

 private:
  ad::ParamStore store_;
  Trunk trunk_;
};

/// Single-state forward passes on a caller-provided tape, gradients tracked.
ad::Tensor encode_language(ad::Tape& tape, RewardNet& net, std::span<const int> tokens);
ad::Tensor encode_panorama(ad::Tape& tape, RewardNet& net,
                           const gridhouse::Observation& obs);
/// Panorama from raw one-hot data laid out [4, C, 5, 5].
ad::Tensor encode_panorama(ad::Tape& tape, RewardNet& net, std::span<const double> views);
ad::Tensor reward_forward(ad::Tape& tape, RewardNet& net,
                          const gridhouse::Observation& obs, int action,
                          std::span<const int> tokens);

/// Scalar reward on a private inference tape.
double reward_value(const RewardNet& net, const gridhouse::Observation& obs,
                    int action, std::span<const int> tokens);

}  // namespace lcrl::reward
