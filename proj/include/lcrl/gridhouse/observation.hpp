#pragma once

#include <array>
#include <cstdint>
#include <span>

#include "lcrl/gridhouse/semantic.hpp"

namespace lcrl::gridhouse {

inline constexpr int kViewSize = 5;
inline constexpr int kNumViews = 4;
inline constexpr int kViewCells = kViewSize * kViewSize;

/// Panoramic semantic observation: four allocentric views in N, S, E, W
/// order. Each view is a 5x5 crop that extends away from the agent, rotated
/// so row 0 is farthest; the agent stands at row 4, column 2.
struct Observation {
  /// [view][row][col] ground class.
  std::array<std::uint8_t, kNumViews * kViewCells> ground{};
  /// [view][row][col] overlay class or kNoOverlay.
  std::array<std::uint8_t, kNumViews * kViewCells> overlay{};
  std::uint64_t key = 0;

  /// Writes one view as a one-hot [kNumClasses, 5, 5] block.
  void write_view(int view, std::span<double> out) const;
  /// Hash of the view's bytes; views with equal content share a key.
  std::uint64_t view_key(int view) const;
  /// Full 4 x 5 x 5 x C one-hot tensor in view-row-col-channel order.
  std::array<std::uint8_t, kNumViews * kViewCells * kNumClasses> one_hot() const;

  void rehash();
  bool operator==(const Observation& o) const {
    return ground == o.ground && overlay == o.overlay;
  }
};

}  // namespace lcrl::gridhouse
