#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "lcrl/harness/experiment.hpp"

namespace lcrl::harness {

enum class Column { kPick, kNav, kTotal };

/// Mean success percentage over seeds and its sample standard deviation.
struct Cell {
  double mean = 0.0;
  double std = 0.0;
  int seeds = 0;
};

struct ResultsRow {
  std::string method;
  std::string evaluator;  // "exact", "qlearning" or "qlearning+shaping"
  /// [split][column]
  std::array<std::array<Cell, 3>, 3> cells{};
  /// Task counts per split and kind (PICK, NAV), identical across seeds.
  std::array<std::array<int, 2>, 3> counts{};

  const Cell& at(gridhouse::Split s, Column c) const {
    return cells[static_cast<std::size_t>(s)][static_cast<std::size_t>(c)];
  }
};

class ResultsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Groups record sets by (method, evaluator label); one set per seed. Total
/// is the task-weighted mean of the PICK and NAV means.
std::vector<ResultsRow> build_results(std::span<const RecordSet> sets);

/// Delimited text, one line per row and cell.
void write_results_csv(std::span<const ResultsRow> rows, const std::filesystem::path& path);
/// Aligned console table.
std::string format_results(std::span<const ResultsRow> rows);

std::string evaluator_label(const RecordSet& set);

}  // namespace lcrl::harness
