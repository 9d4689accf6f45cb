#include "lcrl/harness/experiment.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "lcrl/autodiff/serialize.hpp"
#include "lcrl/gridhouse/mdp_builder.hpp"
#include "lcrl/trainers/reward_trainers.hpp"

namespace lcrl::harness {

using json = nlohmann::json;
using gridhouse::Split;
using gridhouse::TaskKind;

ad::ParamStore& Model::params() { return reward ? reward->params() : policy->params(); }
const ad::ParamStore& Model::params() const {
  return reward ? reward->params() : policy->params();
}

Model make_model(Method method, int vocab_size, std::uint64_t seed) {
  Model m;
  m.method = method;
  m.seed = seed;
  const std::uint64_t init = derive_seed(seed, 0x1417);
  if (method == Method::kCloning) {
    m.policy = std::make_unique<trainers::PolicyNet>(vocab_size, init);
  } else {
    m.reward = std::make_unique<reward::RewardNet>(vocab_size, init);
  }
  return m;
}

TrainOutcome train_model(Method method, int vocab_size,
                         std::span<const trainers::TrainTask> tasks,
                         const trainers::TrainConfig& cfg) {
  TrainOutcome out{make_model(method, vocab_size, cfg.seed), {}};
  auto c = cfg;
  c.method = method;
  switch (method) {
    case Method::kLcrl: out.curve = trainers::lcrl_train(*out.model.reward, tasks, c); break;
    case Method::kRegression:
      out.curve = trainers::reward_regression_train(*out.model.reward, tasks, c);
      break;
    case Method::kGail: out.curve = trainers::gail_exact_train(*out.model.reward, tasks, c); break;
    case Method::kCloning: out.curve = trainers::cloning_train(*out.model.policy, tasks, c); break;
  }
  return out;
}

std::vector<double> solver_reward(const Model& model, const solver::TabularMDP& mdp,
                                  std::span<const int> command, reward::RewardCache* cache) {
  if (!model.reward) throw std::logic_error("cloning has no reward function");
  if (model.method == Method::kGail) {
    return trainers::gail_logits(*model.reward, mdp, command, cache);
  }
  return reward::reward_all(*model.reward, mdp, command, cache);
}

std::string_view evaluator_name(Evaluator e) {
  return e == Evaluator::kExact ? "exact" : "qlearning";
}

Evaluator evaluator_from_name(std::string_view name) {
  if (name == "exact") return Evaluator::kExact;
  if (name == "qlearning") return Evaluator::kQLearning;
  throw std::invalid_argument("unknown evaluator '" + std::string(name) +
                              "' (expected exact or qlearning)");
}

bool evaluate_task(const Model& model, const gridhouse::Dataset& ds, int task_id,
                   const EvalOptions& opts) {
  const auto& spec = ds.task(task_id);
  const auto mdp = gridhouse::build_mdp(ds.house(spec.house_id), spec, ds.config.mdp);
  if (!model.reward) {
    if (opts.evaluator != Evaluator::kExact) {
      throw std::logic_error("cloning has no reward to re-optimise with Q-learning");
    }
    return trainers::policy_rollout(*model.policy, mdp, spec.command);
  }
  reward::RewardCache cache;
  const auto r = solver_reward(model, mdp, spec.command, &cache);
  if (opts.evaluator == Evaluator::kExact) {
    return solver::evaluate_success(mdp,
                                    solver::greedy_policy(solver::soft_q_iteration(mdp, r)));
  }
  std::vector<double> by_obs(mdp.observations.size() * solver::kNumActions, 0.0);
  for (int s = 0; s < mdp.num_states; ++s) {
    const int oi = mdp.obs_index[static_cast<std::size_t>(s)];
    if (oi < 0) continue;
    for (int a = 0; a < solver::kNumActions; ++a) {
      by_obs[static_cast<std::size_t>(oi) * solver::kNumActions + a] =
          r[static_cast<std::size_t>(s) * solver::kNumActions + a];
    }
  }
  auto q = opts.qlearn;
  q.shaping = opts.shaping;
  q.seed = derive_seed(opts.qlearn.seed, static_cast<std::uint64_t>(task_id));
  std::vector<double> phi;
  if (q.shaping) phi = reoptimize::value_potential(mdp, r);
  reoptimize::BlackBoxEnv env(mdp);
  return reoptimize::q_learning(env, reoptimize::table_reward(mdp, by_obs), q, phi).success;
}

std::vector<EvalRecord> evaluate(const Model& model, const gridhouse::Dataset& ds,
                                 std::span<const int> task_ids, const EvalOptions& opts) {
  std::vector<EvalRecord> out;
  out.reserve(task_ids.size());
  for (int id : task_ids) {
    out.push_back({id, ds.split_of(id), ds.task(id).kind, evaluate_task(model, ds, id, opts)});
  }
  return out;
}

std::vector<int> all_task_ids(const gridhouse::Dataset& ds) {
  std::vector<int> ids = ds.split.train;
  ids.insert(ids.end(), ds.split.test_task.begin(), ds.split.test_task.end());
  ids.insert(ids.end(), ds.split.test_house.begin(), ds.split.test_house.end());
  return ids;
}

void save_model(const Model& model, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const int vocab = model.reward ? model.reward->vocab_size() : model.policy->trunk().vocab_size();
  json meta = {{"format", "lcrl-model"},
               {"version", 1},
               {"method", trainers::method_name(model.method)},
               {"seed", model.seed},
               {"vocab_size", vocab},
               {"step", model.params().step()}};
  std::ofstream(dir / "model.json") << meta.dump(2) << '\n';
  ad::save_params(model.params(), dir / "params");
}

Model load_model(const std::filesystem::path& dir) {
  std::ifstream in(dir / "model.json");
  if (!in) throw ad::CheckpointError("missing model file " + (dir / "model.json").string());
  json meta;
  try {
    meta = json::parse(in);
  } catch (const json::exception& e) {
    throw ad::CheckpointError("unreadable model file: " + std::string(e.what()));
  }
  if (meta.value("format", "") != "lcrl-model") throw ad::CheckpointError("not a model directory");
  if (meta.value("version", 0) != 1) throw ad::CheckpointError("model version mismatch");
  Model m = make_model(trainers::method_from_name(meta.at("method").get<std::string>()),
                       meta.at("vocab_size").get<int>(), meta.at("seed").get<std::uint64_t>());
  ad::load_params(m.params(), dir / "params");
  return m;
}

void save_demos(const trainers::DemoSet& demos, std::uint64_t seed,
                const std::filesystem::path& path) {
  json tasks = json::array();
  for (const auto& [id, list] : demos) {
    json dl = json::array();
    for (const auto& d : list) dl.push_back({{"states", d.states}, {"actions", d.actions}});
    tasks.push_back({{"task_id", id}, {"demos", std::move(dl)}});
  }
  json doc = {{"format", "lcrl-demos"}, {"version", 1}, {"seed", seed}, {"tasks", tasks}};
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << doc.dump() << '\n';
}

trainers::DemoSet load_demos(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("missing demonstrations file " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw std::runtime_error("unreadable demonstrations file: " + std::string(e.what()));
  }
  if (doc.value("format", "") != "lcrl-demos" || doc.value("version", 0) != 1) {
    throw std::runtime_error("demonstrations file has an unknown format or version");
  }
  trainers::DemoSet out;
  for (const auto& t : doc.at("tasks")) {
    auto& list = out[t.at("task_id").get<int>()];
    for (const auto& d : t.at("demos")) {
      list.push_back({d.at("states").get<std::vector<int>>(),
                      d.at("actions").get<std::vector<int>>()});
    }
  }
  return out;
}

namespace {

std::string_view kind_name(TaskKind k) { return k == TaskKind::kNav ? "nav" : "pick"; }

Split split_from_name(const std::string& s) {
  for (Split sp : {Split::kTrain, Split::kTestTask, Split::kTestHouse}) {
    if (gridhouse::split_name(sp) == s) return sp;
  }
  throw std::runtime_error("unknown split '" + s + "' in records");
}

constexpr const char* kRecordHeader = "method,evaluator,shaping,seed,task_id,split,kind,success";

}  // namespace

void write_records(const RecordSet& set, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << kRecordHeader << '\n';
  for (const auto& r : set.records) {
    out << set.method << ',' << set.evaluator << ',' << (set.shaping ? 1 : 0) << ','
        << set.seed << ',' << r.task_id << ',' << gridhouse::split_name(r.split) << ','
        << kind_name(r.kind) << ',' << (r.success ? 1 : 0) << '\n';
  }
}

std::vector<RecordSet> read_records(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("missing records file " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != kRecordHeader) {
    throw std::runtime_error("not a records file: " + path.string());
  }
  std::vector<RecordSet> sets;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string x; std::getline(ss, x, ',');) f.push_back(x);
    if (f.size() != 8) {
      throw std::runtime_error(path.string() + ":" + std::to_string(lineno) +
                               ": expected 8 fields");
    }
    const bool shaping = f[2] == "1";
    const auto seed = std::stoull(f[3]);
    auto it = std::find_if(sets.begin(), sets.end(), [&](const RecordSet& s) {
      return s.method == f[0] && s.evaluator == f[1] && s.shaping == shaping && s.seed == seed;
    });
    if (it == sets.end()) {
      sets.push_back({f[0], f[1], shaping, seed, {}});
      it = sets.end() - 1;
    }
    it->records.push_back({std::stoi(f[4]), split_from_name(f[5]),
                           f[6] == "nav" ? TaskKind::kNav : TaskKind::kPick, f[7] == "1"});
  }
  return sets;
}

}  // namespace lcrl::harness
