#include "lcrl/harness/heatmap.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>

#include "lcrl/solver/solver.hpp"

namespace lcrl::harness {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void raise(Heatmap& m, int x, int y, double v) {
  auto& cell = m.values[static_cast<std::size_t>(y * m.width + x)];
  if (std::isnan(cell) || v > cell) cell = v;
}

}  // namespace

std::vector<HeatmapSlice> reward_heatmaps(const gridhouse::House& house,
                                          const solver::TabularMDP& mdp,
                                          std::span<const double> reward) {
  if (reward.size() != mdp.table_size()) {
    throw std::invalid_argument("heatmap reward has the wrong size");
  }
  if (mdp.states.size() != static_cast<std::size_t>(mdp.num_states)) {
    throw std::invalid_argument("heatmaps need an MDP with grid coordinates");
  }
  const auto sol = solver::soft_q_iteration(mdp, reward);
  int max_status = 0;
  for (int s = 0; s < mdp.num_states; ++s) {
    if (s != mdp.sink) max_status = std::max(max_status, mdp.states[static_cast<std::size_t>(s)].status);
  }
  std::vector<HeatmapSlice> slices(static_cast<std::size_t>(max_status + 1));
  for (int k = 0; k <= max_status; ++k) {
    auto& sl = slices[static_cast<std::size_t>(k)];
    sl.status = k;
    for (Heatmap* m : {&sl.reward, &sl.value}) {
      m->width = house.width;
      m->height = house.height;
      m->values.assign(static_cast<std::size_t>(house.width * house.height), kNaN);
    }
  }
  for (int s = 0; s < mdp.num_states; ++s) {
    if (s == mdp.sink) continue;
    const auto& st = mdp.states[static_cast<std::size_t>(s)];
    auto& sl = slices[static_cast<std::size_t>(st.status)];
    for (int a = 0; a < solver::kNumActions; ++a) {
      raise(sl.reward, st.x, st.y, reward[static_cast<std::size_t>(s) * solver::kNumActions + a]);
    }
    raise(sl.value, st.x, st.y, sol.v_at(0, s));
  }
  return slices;
}

void write_heatmap_text(const Heatmap& map, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << std::setprecision(10);
  for (int y = 0; y < map.height; ++y) {
    for (int x = 0; x < map.width; ++x) {
      if (x > 0) out << ',';
      const double v = map.at(x, y);
      if (std::isnan(v)) {
        out << "nan";
      } else {
        out << v;
      }
    }
    out << '\n';
  }
}

void write_heatmap_ppm(const Heatmap& map, const std::filesystem::path& path, int cell) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (double v : map.values) {
    if (std::isnan(v)) continue;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  const int w = map.width * cell, h = map.height * cell;
  out << "P6\n" << w << ' ' << h << "\n255\n";
  for (int py = 0; py < h; ++py) {
    for (int px = 0; px < w; ++px) {
      const double v = map.at(px / cell, py / cell);
      unsigned char rgb[3] = {0, 0, 0};
      if (!std::isnan(v)) {
        const double u = hi > lo ? (v - lo) / (hi - lo) : 0.5;
        rgb[0] = static_cast<unsigned char>(std::lround(255.0 * (1.0 - u)));
        rgb[2] = static_cast<unsigned char>(std::lround(255.0 * u));
      }
      out.write(reinterpret_cast<const char*>(rgb), 3);
    }
  }
}

std::vector<std::filesystem::path> export_heatmaps(const gridhouse::House& house,
                                                   const solver::TabularMDP& mdp,
                                                   std::span<const double> reward,
                                                   const std::filesystem::path& dir,
                                                   const std::string& prefix) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> written;
  for (const auto& sl : reward_heatmaps(house, mdp, reward)) {
    for (auto [name, map] : {std::pair{"reward", &sl.reward}, std::pair{"value", &sl.value}}) {
      const auto stem = dir / (prefix + "_s" + std::to_string(sl.status) + "_" + name);
      auto txt = stem, ppm = stem;
      txt += ".txt";
      ppm += ".ppm";
      write_heatmap_text(*map, txt);
      write_heatmap_ppm(*map, ppm);
      written.push_back(txt);
      written.push_back(ppm);
    }
  }
  return written;
}

}  // namespace lcrl::harness
