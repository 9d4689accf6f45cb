#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "lcrl/autodiff/param_store.hpp"
#include "lcrl/gridhouse/dataset.hpp"
#include "lcrl/solver/solver.hpp"

namespace lcrl::trainers {

enum class Method { kLcrl, kRegression, kGail, kCloning };

std::string_view method_name(Method m);
/// Accepts "lcrl", "regression", "gail", "cloning".
Method method_from_name(std::string_view name);

struct TrainConfig {
  Method method = Method::kLcrl;
  int steps = 3000;
  int demos_per_task = 10;
  double lr = 5e-4;
  std::uint64_t seed = 0;
  /// Save parameters every this many steps (0 disables); needs checkpoint_dir.
  int checkpoint_every = 0;
  std::filesystem::path checkpoint_dir;
};

class TrainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A training task with its MDP and fixed demonstrations.
struct TrainTask {
  int task_id = 0;
  std::vector<int> command;
  solver::TabularMDP mdp;
  std::vector<solver::Demonstration> demos;
};

/// One row of a training curve: loss or log-likelihood after a step.
struct CurvePoint {
  int step = 0;
  int task_id = 0;
  double value = 0.0;
};

using DemoSet = std::map<int, std::vector<solver::Demonstration>>;

/// `count` rollouts of the soft-optimal policy for the ground-truth reward.
std::vector<solver::Demonstration> sample_demos(const solver::TabularMDP& mdp, int count,
                                                std::uint64_t seed);

/// Demonstrations for every task in the dataset, seeded per task id.
DemoSet sample_dataset_demos(const gridhouse::Dataset& ds, int per_task, std::uint64_t seed);

/// Builds MDPs for `task_ids` and attaches their demonstrations.
std::vector<TrainTask> prepare_tasks(const gridhouse::Dataset& ds,
                                     std::span<const int> task_ids, const DemoSet& demos);

/// Drives `step_fn` over uniformly sampled tasks, logging the curve and
/// writing checkpoints. `step_fn` returns the value to log.
std::vector<CurvePoint> run_training(const TrainConfig& cfg, std::span<const TrainTask> tasks,
                                     ad::ParamStore& store,
                                     const std::function<double(const TrainTask&)>& step_fn);

/// Writes the curve as "step,task_id,value" lines with a header.
void write_curve(const std::filesystem::path& path, std::span<const CurvePoint> curve);

}  // namespace lcrl::trainers
