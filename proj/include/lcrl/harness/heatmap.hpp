#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "lcrl/gridhouse/house.hpp"
#include "lcrl/solver/mdp.hpp"

namespace lcrl::harness {

/// Values over the house grid, row-major; NaN off the walkable floor.
struct Heatmap {
  int width = 0;
  int height = 0;
  std::vector<double> values;

  double at(int x, int y) const { return values[static_cast<std::size_t>(y * width + x)]; }
};

struct HeatmapSlice {
  int status = 0;
  Heatmap reward;  // max over orientation and action
  Heatmap value;   // max over orientation of the soft V_0
};

/// One slice per object status present in the MDP.
std::vector<HeatmapSlice> reward_heatmaps(const gridhouse::House& house,
                                          const solver::TabularMDP& mdp,
                                          std::span<const double> reward);

/// Comma-separated rows, "nan" off the floor.
void write_heatmap_text(const Heatmap& map, const std::filesystem::path& path);
/// Binary P6, scale factor `cell` pixels per tile, blue high and red low,
/// black off the floor.
void write_heatmap_ppm(const Heatmap& map, const std::filesystem::path& path, int cell = 16);

/// Writes <prefix>_s<status>_{reward,value}.{txt,ppm} for every slice and
/// returns the written paths.
std::vector<std::filesystem::path> export_heatmaps(const gridhouse::House& house,
                                                   const solver::TabularMDP& mdp,
                                                   std::span<const double> reward,
                                                   const std::filesystem::path& dir,
                                                   const std::string& prefix);

}  // namespace lcrl::harness
