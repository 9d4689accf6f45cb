#pragma once

#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "lcrl/gridhouse/dataset.hpp"
#include "lcrl/reoptimize/reoptimize.hpp"
#include "lcrl/reward/reward_cache.hpp"
#include "lcrl/trainers/common.hpp"
#include "lcrl/trainers/policy_net.hpp"

namespace lcrl::harness {

using trainers::Method;

/// A trained learner: a reward network (LC-RL, regression, GAIL
/// discriminator) or a policy network (cloning).
struct Model {
  Method method = Method::kLcrl;
  std::uint64_t seed = 0;
  std::unique_ptr<reward::RewardNet> reward;
  std::unique_ptr<trainers::PolicyNet> policy;

  ad::ParamStore& params();
  const ad::ParamStore& params() const;
  bool has_reward() const { return reward != nullptr; }
};

Model make_model(Method method, int vocab_size, std::uint64_t seed);

struct TrainOutcome {
  Model model;
  std::vector<trainers::CurvePoint> curve;
};

TrainOutcome train_model(Method method, int vocab_size,
                         std::span<const trainers::TrainTask> tasks,
                         const trainers::TrainConfig& cfg);

/// Reward handed to solvers: the network output, or the clamped logit for
/// GAIL. Throws std::logic_error for cloning.
std::vector<double> solver_reward(const Model& model, const solver::TabularMDP& mdp,
                                  std::span<const int> command,
                                  reward::RewardCache* cache = nullptr);

enum class Evaluator { kExact, kQLearning };
std::string_view evaluator_name(Evaluator e);
Evaluator evaluator_from_name(std::string_view name);

struct EvalRecord {
  int task_id = 0;
  gridhouse::Split split = gridhouse::Split::kTrain;
  gridhouse::TaskKind kind = gridhouse::TaskKind::kNav;
  bool success = false;
};

struct EvalOptions {
  Evaluator evaluator = Evaluator::kExact;
  bool shaping = false;
  reoptimize::QLearnConfig qlearn;
};

/// Success of `model` on one task. Reward models are re-optimised with the
/// exact solver (greedy policy of the soft Q values) or tabular Q-learning.
/// Cloning rolls its policy under the exact evaluator; it has no reward, so
/// the Q-learning evaluator throws std::logic_error for it.
bool evaluate_task(const Model& model, const gridhouse::Dataset& ds, int task_id,
                   const EvalOptions& opts);

std::vector<EvalRecord> evaluate(const Model& model, const gridhouse::Dataset& ds,
                                 std::span<const int> task_ids, const EvalOptions& opts);

/// All task ids of the dataset, train then test-task then test-house.
std::vector<int> all_task_ids(const gridhouse::Dataset& ds);

/// Model directory: model.json (method, seed, vocabulary size, step) and
/// params.bin / params.idx.
void save_model(const Model& model, const std::filesystem::path& dir);
Model load_model(const std::filesystem::path& dir);

/// Demonstrations as JSON keyed by task id.
void save_demos(const trainers::DemoSet& demos, std::uint64_t seed,
                const std::filesystem::path& path);
trainers::DemoSet load_demos(const std::filesystem::path& path);

/// Per-task success records as CSV with one header line:
/// method,evaluator,shaping,seed,task_id,split,kind,success
struct RecordSet {
  std::string method;
  std::string evaluator;
  bool shaping = false;
  std::uint64_t seed = 0;
  std::vector<EvalRecord> records;
};
void write_records(const RecordSet& set, const std::filesystem::path& path);
/// Reads every record set in a file (rows may mix several sets).
std::vector<RecordSet> read_records(const std::filesystem::path& path);

}  // namespace lcrl::harness
