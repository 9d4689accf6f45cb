#pragma once

#include <filesystem>
#include <stdexcept>

#include "lcrl/gridhouse/dataset.hpp"

// On-disk dataset layout (see docs/formats.md):
//   <dir>/manifest.json  versioned JSON: config, vocabulary, houses (rooms,
//                        slots, objects, grid offset), tasks, splits, checksum
//   <dir>/grids.bin      house grids, each width*height bytes, row-major,
//                        concatenated in house order
namespace lcrl::gridhouse {

inline constexpr int kManifestVersion = 1;

class ManifestError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void save_dataset(const Dataset& ds, const std::filesystem::path& dir);

/// Verifies format tag, version and checksum.
Dataset load_dataset(const std::filesystem::path& dir);

}  // namespace lcrl::gridhouse
