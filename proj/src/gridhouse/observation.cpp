#include "lcrl/gridhouse/observation.hpp"

#include <algorithm>
#include <stdexcept>

#include "lcrl/common/rng.hpp"

namespace lcrl::gridhouse {

void Observation::write_view(int view, std::span<double> out) const {
  if (out.size() != static_cast<std::size_t>(kNumClasses * kViewCells)) {
    throw std::invalid_argument("write_view: buffer must hold C*5*5 values");
  }
  std::fill(out.begin(), out.end(), 0.0);
  const std::size_t base = static_cast<std::size_t>(view * kViewCells);
  for (std::size_t cell = 0; cell < kViewCells; ++cell) {
    out[ground[base + cell] * kViewCells + cell] = 1.0;
    const auto ov = overlay[base + cell];
    if (ov != kNoOverlay) out[ov * kViewCells + cell] = 1.0;
  }
}

std::uint64_t Observation::view_key(int view) const {
  const std::size_t base = static_cast<std::size_t>(view * kViewCells);
  auto h = fnv1a(std::span(ground).subspan(base, kViewCells));
  return fnv1a(std::span(overlay).subspan(base, kViewCells), h);
}

std::array<std::uint8_t, kNumViews * kViewCells * kNumClasses>
Observation::one_hot() const {
  std::array<std::uint8_t, kNumViews * kViewCells * kNumClasses> out{};
  for (std::size_t i = 0; i < ground.size(); ++i) {
    out[i * kNumClasses + ground[i]] = 1;
    if (overlay[i] != kNoOverlay) out[i * kNumClasses + overlay[i]] = 1;
  }
  return out;
}

void Observation::rehash() {
  key = fnv1a(std::span<const std::uint8_t>(overlay), fnv1a(ground));
}

}  // namespace lcrl::gridhouse
