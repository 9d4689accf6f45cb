#include "lcrl/harness/results.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace lcrl::harness {

using gridhouse::Split;

namespace {

constexpr Split kSplits[] = {Split::kTrain, Split::kTestTask, Split::kTestHouse};
constexpr const char* kColumnNames[] = {"PICK", "NAV", "Total"};

Cell summarize(const std::vector<double>& xs) {
  Cell c;
  c.seeds = static_cast<int>(xs.size());
  if (xs.empty()) return c;
  for (double x : xs) c.mean += x;
  c.mean /= static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - c.mean) * (x - c.mean);
    c.std = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  }
  return c;
}

}  // namespace

std::string evaluator_label(const RecordSet& set) {
  return set.shaping ? set.evaluator + "+shaping" : set.evaluator;
}

std::vector<ResultsRow> build_results(std::span<const RecordSet> sets) {
  std::vector<ResultsRow> rows;
  std::vector<std::vector<const RecordSet*>> groups;
  for (const auto& s : sets) {
    const auto label = evaluator_label(s);
    std::size_t g = 0;
    while (g < rows.size() && !(rows[g].method == s.method && rows[g].evaluator == label)) ++g;
    if (g == rows.size()) {
      rows.push_back({s.method, label, {}, {}});
      groups.emplace_back();
    }
    for (const auto* other : groups[g]) {
      if (other->seed == s.seed) {
        throw ResultsError("duplicate seed " + std::to_string(s.seed) + " for " + s.method +
                           " / " + label);
      }
    }
    groups[g].push_back(&s);
  }

  for (std::size_t g = 0; g < rows.size(); ++g) {
    auto& row = rows[g];
    for (std::size_t si = 0; si < 3; ++si) {
      std::array<std::vector<double>, 3> per_seed;
      std::array<int, 2> counts{-1, -1};
      for (const auto* set : groups[g]) {
        std::array<int, 2> n{0, 0}, ok{0, 0};
        for (const auto& r : set->records) {
          if (r.split != kSplits[si]) continue;
          const auto k = static_cast<std::size_t>(r.kind == gridhouse::TaskKind::kPick ? 0 : 1);
          ++n[k];
          ok[k] += r.success ? 1 : 0;
        }
        for (std::size_t k = 0; k < 2; ++k) {
          if (counts[k] >= 0 && counts[k] != n[k]) {
            throw ResultsError(row.method + " / " + row.evaluator +
                               ": seeds evaluated different task sets");
          }
          counts[k] = n[k];
          if (n[k] > 0) per_seed[k].push_back(100.0 * ok[k] / n[k]);
        }
        if (n[0] + n[1] > 0) per_seed[2].push_back(100.0 * (ok[0] + ok[1]) / (n[0] + n[1]));
      }
      row.counts[si] = {std::max(counts[0], 0), std::max(counts[1], 0)};
      for (std::size_t c = 0; c < 3; ++c) row.cells[si][c] = summarize(per_seed[c]);
      // Total mean as the task-weighted mean of the PICK and NAV means.
      const double np = row.counts[si][0], nn = row.counts[si][1];
      if (np + nn > 0) {
        row.cells[si][2].mean =
            (np * row.cells[si][0].mean + nn * row.cells[si][1].mean) / (np + nn);
      }
    }
  }
  return rows;
}

void write_results_csv(std::span<const ResultsRow> rows, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ResultsError("cannot write " + path.string());
  out << "method,evaluator,split,column,tasks,seeds,mean,std\n" << std::setprecision(10);
  for (const auto& r : rows) {
    for (std::size_t si = 0; si < 3; ++si) {
      for (std::size_t c = 0; c < 3; ++c) {
        const int tasks = c == 2 ? r.counts[si][0] + r.counts[si][1] : r.counts[si][c];
        const auto& cell = r.cells[si][c];
        out << r.method << ',' << r.evaluator << ',' << gridhouse::split_name(kSplits[si]) << ','
            << kColumnNames[c] << ',' << tasks << ',' << cell.seeds << ',' << cell.mean << ','
            << cell.std << '\n';
      }
    }
  }
}

std::string format_results(std::span<const ResultsRow> rows) {
  std::ostringstream o;
  o << std::fixed << std::setprecision(1);
  o << std::left << std::setw(12) << "method" << std::setw(20) << "evaluator";
  for (Split s : kSplits) {
    for (const char* c : kColumnNames) {
      o << std::setw(14) << (std::string(gridhouse::split_name(s)).substr(0, 6) + ":" + c);
    }
  }
  o << '\n';
  for (const auto& r : rows) {
    o << std::setw(12) << r.method << std::setw(20) << r.evaluator;
    for (std::size_t si = 0; si < 3; ++si) {
      for (std::size_t c = 0; c < 3; ++c) {
        std::ostringstream cell;
        cell << std::fixed << std::setprecision(1) << r.cells[si][c].mean << "+-"
             << r.cells[si][c].std;
        o << std::setw(14) << cell.str();
      }
    }
    o << '\n';
  }
  return o.str();
}

}  // namespace lcrl::harness
