#include "lcrl/trainers/common.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>

#include "lcrl/autodiff/serialize.hpp"

namespace lcrl::trainers {

std::string_view method_name(Method m) {
  switch (m) {
    case Method::kLcrl: return "lcrl";
    case Method::kRegression: return "regression";
    case Method::kGail: return "gail";
    case Method::kCloning: return "cloning";
  }
  return "?";
}

Method method_from_name(std::string_view name) {
  for (Method m : {Method::kLcrl, Method::kRegression, Method::kGail, Method::kCloning}) {
    if (method_name(m) == name) return m;
  }
  throw std::invalid_argument("unknown method '" + std::string(name) +
                              "' (expected lcrl, regression, gail or cloning)");
}

std::vector<solver::Demonstration> sample_demos(const solver::TabularMDP& mdp, int count,
                                                std::uint64_t seed) {
  const auto sol = solver::soft_q_iteration(mdp, mdp.ground_truth_reward);
  const auto pi = solver::soft_policy(sol);
  Rng rng(seed);
  std::vector<solver::Demonstration> demos;
  demos.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) demos.push_back(solver::sample_trajectory(mdp, pi, rng));
  return demos;
}

DemoSet sample_dataset_demos(const gridhouse::Dataset& ds, int per_task, std::uint64_t seed) {
  DemoSet out;
  for (const auto& t : ds.tasks) {
    const auto mdp = gridhouse::build_mdp(ds.house(t.house_id), t, ds.config.mdp);
    out[t.task_id] =
        sample_demos(mdp, per_task, derive_seed(seed, static_cast<std::uint64_t>(t.task_id)));
  }
  return out;
}

std::vector<TrainTask> prepare_tasks(const gridhouse::Dataset& ds,
                                     std::span<const int> task_ids, const DemoSet& demos) {
  std::vector<TrainTask> out;
  out.reserve(task_ids.size());
  for (int id : task_ids) {
    const auto& spec = ds.task(id);
    TrainTask t;
    t.task_id = id;
    t.command = spec.command;
    t.mdp = gridhouse::build_mdp(ds.house(spec.house_id), spec, ds.config.mdp);
    if (auto it = demos.find(id); it != demos.end()) t.demos = it->second;
    out.push_back(std::move(t));
  }
  return out;
}

std::vector<CurvePoint> run_training(const TrainConfig& cfg, std::span<const TrainTask> tasks,
                                     ad::ParamStore& store,
                                     const std::function<double(const TrainTask&)>& step_fn) {
  if (tasks.empty()) throw TrainError("no training tasks");
  if (cfg.steps < 0) throw TrainError("negative step count");
  if (!(cfg.lr > 0.0)) throw TrainError("learning rate must be positive");
  if (cfg.checkpoint_every > 0 && cfg.checkpoint_dir.empty()) {
    throw TrainError("checkpoint interval set without a checkpoint directory");
  }
  Rng rng(derive_seed(cfg.seed, 0x7a5c));
  std::vector<CurvePoint> curve;
  curve.reserve(static_cast<std::size_t>(cfg.steps));
  for (int step = 1; step <= cfg.steps; ++step) {
    const auto& task = tasks[rng.below(tasks.size())];
    const double value = step_fn(task);
    if (!std::isfinite(value)) {
      throw TrainError(std::string(method_name(cfg.method)) + ": non-finite loss at step " +
                       std::to_string(step) + " on task " + std::to_string(task.task_id));
    }
    store.adam_step(cfg.lr);
    curve.push_back({step, task.task_id, value});
    if (cfg.checkpoint_every > 0 && step % cfg.checkpoint_every == 0) {
      std::filesystem::create_directories(cfg.checkpoint_dir);
      ad::save_params(store, cfg.checkpoint_dir / ("step_" + std::to_string(step)));
    }
  }
  return curve;
}

void write_curve(const std::filesystem::path& path, std::span<const CurvePoint> curve) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "step,task_id,value\n" << std::setprecision(17);
  for (const auto& p : curve) out << p.step << ',' << p.task_id << ',' << p.value << '\n';
}

}  // namespace lcrl::trainers
