#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>

#include "lcrl/autodiff/param_store.hpp"

// Checkpoint layout (all integers little-endian):
//
//   <stem>.bin
//     magic   "LCRLPARM" (8 bytes)
//     u32     format version
//     i64     optimizer step
//     u32     parameter count
//     per parameter:
//       u32 name length, name bytes
//       u32 rank, u64 dims[rank]
//       f64 values[prod(dims)]
//   <stem>.idx
//     text index: header line "lcrl-params <version> <count>", then one line
//     per parameter "<name> <d0>x<d1>x... <byte offset of values>".
namespace lcrl::ad {

inline constexpr std::uint32_t kCheckpointVersion = 1;

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void save_params(const ParamStore& store, const std::filesystem::path& stem);

/// Loads values into an existing store; names and shapes must match.
void load_params(ParamStore& store, const std::filesystem::path& stem);

}  // namespace lcrl::ad
