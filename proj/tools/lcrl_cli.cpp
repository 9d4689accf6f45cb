// Command-line front end: dataset generation, training, evaluation,
// heatmap export and result tables.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "lcrl/autodiff/serialize.hpp"
#include "lcrl/gridhouse/manifest.hpp"
#include "lcrl/harness/config.hpp"
#include "lcrl/harness/experiment.hpp"
#include "lcrl/harness/heatmap.hpp"
#include "lcrl/harness/results.hpp"

namespace fs = std::filesystem;
using namespace lcrl;

namespace {

gridhouse::Dataset open_dataset(const std::string& dir) {
  if (!fs::is_directory(dir)) throw std::runtime_error("dataset directory not found: " + dir);
  return gridhouse::load_dataset(dir);
}

trainers::DemoSet open_demos(const std::string& dir) {
  return harness::load_demos(fs::path(dir) / "demos.json");
}

void run_train(const gridhouse::Dataset& ds, const trainers::DemoSet& demos,
               trainers::Method method, const trainers::TrainConfig& cfg, const fs::path& out) {
  const auto tasks = trainers::prepare_tasks(ds, ds.split.train, demos);
  auto c = cfg;
  if (c.checkpoint_every > 0) c.checkpoint_dir = out / "checkpoints";
  auto res = harness::train_model(method, static_cast<int>(ds.vocab.words.size()), tasks, c);
  harness::save_model(res.model, out);
  trainers::write_curve(out / "curve.csv", res.curve);
}

harness::RecordSet run_eval(const gridhouse::Dataset& ds, const harness::Model& model,
                            const harness::EvalOptions& opts) {
  harness::RecordSet set;
  set.method = std::string(trainers::method_name(model.method));
  set.evaluator = std::string(harness::evaluator_name(opts.evaluator));
  set.shaping = opts.shaping && opts.evaluator == harness::Evaluator::kQLearning;
  set.seed = model.seed;
  set.records = harness::evaluate(model, ds, harness::all_task_ids(ds), opts);
  return set;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Language-conditioned reward learning on procedural grid houses"};
  app.require_subcommand(1);

  // gen-data
  auto* gen = app.add_subcommand("gen-data", "Generate houses, tasks, splits and demonstrations");
  std::uint64_t gen_seed = 0;
  int gen_houses = 60, gen_demos = 10;
  std::string gen_out;
  gen->add_option("--seed", gen_seed, "Dataset seed");
  gen->add_option("--houses", gen_houses, "Number of houses (at least 10)");
  gen->add_option("--demos", gen_demos, "Demonstrations per task");
  gen->add_option("--out", gen_out, "Output directory")->required();

  // train
  auto* train = app.add_subcommand("train", "Train one method on the training split");
  std::string tr_data, tr_method = "lcrl", tr_out;
  trainers::TrainConfig tr_cfg;
  train->add_option("--data", tr_data, "Dataset directory")->required();
  train->add_option("--method", tr_method, "lcrl, regression, gail or cloning");
  train->add_option("--seed", tr_cfg.seed, "Training seed");
  train->add_option("--steps", tr_cfg.steps, "Training steps (one task each)");
  train->add_option("--lr", tr_cfg.lr, "Adam learning rate");
  train->add_option("--checkpoint-every", tr_cfg.checkpoint_every, "Checkpoint interval in steps");
  train->add_option("--out", tr_out, "Model output directory")->required();

  // eval
  auto* eval = app.add_subcommand("eval", "Evaluate a trained model on every split");
  std::string ev_data, ev_model, ev_out, ev_evaluator = "exact";
  harness::EvalOptions ev_opts;
  eval->add_option("--data", ev_data, "Dataset directory")->required();
  eval->add_option("--model", ev_model, "Model directory")->required();
  eval->add_option("--evaluator", ev_evaluator, "exact or qlearning");
  eval->add_flag("--shaping", ev_opts.shaping, "Potential shaping for Q-learning");
  eval->add_option("--episodes", ev_opts.qlearn.episodes, "Q-learning episodes");
  eval->add_option("--out", ev_out, "Records file (CSV)")->required();

  // export-heatmap
  auto* heat = app.add_subcommand("export-heatmap", "Write reward and value heatmaps for a task");
  std::string hm_data, hm_model, hm_out;
  int hm_task = -1;
  bool hm_truth = false;
  heat->add_option("--data", hm_data, "Dataset directory")->required();
  heat->add_option("--task", hm_task, "Task id")->required();
  heat->add_option("--model", hm_model, "Model directory (reward methods)");
  heat->add_flag("--ground-truth", hm_truth, "Use the ground-truth reward");
  heat->add_option("--out", hm_out, "Output directory")->required();

  // report
  auto* report = app.add_subcommand("report", "Aggregate record files into a results table");
  std::string rp_dir, rp_out;
  report->add_option("--dir", rp_dir, "Directory of records CSV files")->required();
  report->add_option("--out", rp_out, "Delimited table output (default <dir>/results.csv)");

  // experiment
  auto* exp = app.add_subcommand("experiment", "Train and evaluate every method and seed of a config");
  std::string ex_config;
  exp->add_option("--config", ex_config, "key=value config file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*gen) {
      gridhouse::DatasetConfig cfg;
      cfg.num_houses = gen_houses;
      const auto ds = gridhouse::make_dataset(cfg, gen_seed);
      gridhouse::save_dataset(ds, gen_out);
      const auto demos = trainers::sample_dataset_demos(ds, gen_demos, derive_seed(gen_seed, 0xde));
      harness::save_demos(demos, gen_seed, fs::path(gen_out) / "demos.json");
      std::printf("%zu houses, %zu tasks (train %zu, test-task %zu, test-house %zu), checksum %016llx\n",
                  ds.houses.size(), ds.tasks.size(), ds.split.train.size(),
                  ds.split.test_task.size(), ds.split.test_house.size(),
                  static_cast<unsigned long long>(ds.split.checksum));
    } else if (*train) {
      const auto ds = open_dataset(tr_data);
      run_train(ds, open_demos(tr_data), trainers::method_from_name(tr_method), tr_cfg, tr_out);
      std::printf("trained %s for %d steps -> %s\n", tr_method.c_str(), tr_cfg.steps, tr_out.c_str());
    } else if (*eval) {
      const auto ds = open_dataset(ev_data);
      const auto model = harness::load_model(ev_model);
      ev_opts.evaluator = harness::evaluator_from_name(ev_evaluator);
      const auto set = run_eval(ds, model, ev_opts);
      harness::write_records(set, ev_out);
      std::size_t ok = 0;
      for (const auto& r : set.records) ok += r.success ? 1 : 0;
      std::printf("%zu / %zu tasks solved -> %s\n", ok, set.records.size(), ev_out.c_str());
    } else if (*heat) {
      const auto ds = open_dataset(hm_data);
      const auto& task = ds.task(hm_task);
      const auto& house = ds.house(task.house_id);
      const auto mdp = gridhouse::build_mdp(house, task, ds.config.mdp);
      std::vector<double> r;
      std::string prefix = "task" + std::to_string(hm_task);
      if (hm_truth) {
        r = mdp.ground_truth_reward;
        prefix += "_truth";
      } else {
        if (hm_model.empty()) throw std::runtime_error("export-heatmap needs --model or --ground-truth");
        const auto model = harness::load_model(hm_model);
        r = harness::solver_reward(model, mdp, task.command);
        prefix += "_" + std::string(trainers::method_name(model.method));
      }
      for (const auto& p : harness::export_heatmaps(house, mdp, r, hm_out, prefix)) {
        std::printf("%s\n", p.string().c_str());
      }
    } else if (*report) {
      if (!fs::is_directory(rp_dir)) throw std::runtime_error("records directory not found: " + rp_dir);
      std::vector<harness::RecordSet> sets;
      std::vector<fs::path> files;
      for (const auto& e : fs::directory_iterator(rp_dir)) {
        if (e.path().extension() == ".csv" && e.path().filename() != "results.csv") {
          files.push_back(e.path());
        }
      }
      std::sort(files.begin(), files.end());
      for (const auto& f : files) {
        for (auto& s : harness::read_records(f)) sets.push_back(std::move(s));
      }
      if (sets.empty()) throw std::runtime_error("no records files in " + rp_dir);
      const auto rows = harness::build_results(sets);
      const fs::path out = rp_out.empty() ? fs::path(rp_dir) / "results.csv" : fs::path(rp_out);
      harness::write_results_csv(rows, out);
      std::cout << harness::format_results(rows);
    } else if (*exp) {
      const auto cfg = harness::load_experiment_config(ex_config);
      const auto ds = gridhouse::load_dataset(cfg.dataset);
      const auto demos = open_demos(cfg.dataset.string());
      for (auto method : cfg.methods) {
        for (auto seed : cfg.seeds) {
          trainers::TrainConfig tc;
          tc.seed = seed;
          tc.steps = cfg.steps;
          tc.lr = cfg.lr;
          tc.checkpoint_every = cfg.checkpoint_every;
          const auto name = std::string(trainers::method_name(method)) + "_seed" + std::to_string(seed);
          const auto model_dir = cfg.output / "models" / name;
          run_train(ds, demos, method, tc, model_dir);
          harness::EvalOptions eo;
          eo.evaluator = method == trainers::Method::kCloning ? harness::Evaluator::kExact : cfg.evaluator;
          eo.shaping = cfg.shaping;
          eo.qlearn.episodes = cfg.episodes;
          const auto set = run_eval(ds, harness::load_model(model_dir), eo);
          fs::create_directories(cfg.output / "records");
          harness::write_records(set, cfg.output / "records" / (name + ".csv"));
          std::printf("%s done\n", name.c_str());
        }
      }
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
