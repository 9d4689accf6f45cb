#include "lcrl/gridhouse/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>

#include "lcrl/common/rng.hpp"

namespace lcrl::gridhouse {

std::string_view split_name(Split s) {
  switch (s) {
    case Split::kTrain:
      return "train";
    case Split::kTestTask:
      return "test_task";
    case Split::kTestHouse:
      return "test_house";
  }
  return "?";
}

const TaskSpec& Dataset::task(int task_id) const {
  auto it = std::lower_bound(
      tasks.begin(), tasks.end(), task_id,
      [](const TaskSpec& t, int id) { return t.task_id < id; });
  if (it == tasks.end() || it->task_id != task_id) {
    throw std::out_of_range("unknown task id " + std::to_string(task_id));
  }
  return *it;
}

const House& Dataset::house(int house_id) const {
  for (const auto& h : houses) {
    if (h.house_id == house_id) return h;
  }
  throw std::out_of_range("unknown house id " + std::to_string(house_id));
}

Split Dataset::split_of(int task_id) const {
  auto has = [task_id](const std::vector<int>& v) {
    return std::find(v.begin(), v.end(), task_id) != v.end();
  };
  if (has(split.train)) return Split::kTrain;
  if (has(split.test_task)) return Split::kTestTask;
  if (has(split.test_house)) return Split::kTestHouse;
  throw std::out_of_range("task " + std::to_string(task_id) + " is in no split");
}

Dataset make_dataset(const DatasetConfig& cfg, std::uint64_t seed) {
  if (cfg.num_houses < 10) {
    throw DatasetError("dataset needs at least 10 houses to keep the splits "
                       "disjoint, got " + std::to_string(cfg.num_houses));
  }
  if (cfg.min_tasks_per_house < 2 ||
      cfg.max_tasks_per_house < cfg.min_tasks_per_house) {
    throw DatasetError("tasks per house must be >= 2 and min <= max");
  }
  Dataset ds;
  ds.seed = seed;
  ds.config = cfg;
  ds.vocab = default_vocabulary();

  for (int h = 0; h < cfg.num_houses; ++h) {
    House house = generate_house(derive_seed(seed, 1000 + static_cast<std::uint64_t>(h)),
                                 cfg.house, h);
    Rng rng(derive_seed(seed, 5000 + static_cast<std::uint64_t>(h)));
    std::vector<TaskSpec> nav, pick;
    for (auto& t : make_tasks(house, ds.vocab, rng)) {
      try {
        (void)build_mdp(house, t, cfg.mdp);
      } catch (const UnsolvableTask&) {
        continue;
      }
      (t.kind == TaskKind::kNav ? nav : pick).push_back(std::move(t));
    }
    rng.shuffle(std::span<TaskSpec>(nav));
    rng.shuffle(std::span<TaskSpec>(pick));
    const int want = (h % 2 == 0) ? cfg.min_tasks_per_house
                                  : cfg.max_tasks_per_house;
    // Odd counts alternate which kind gets the extra task.
    int want_nav = want / 2 + ((want % 2 == 1 && h % 4 < 2) ? 1 : 0);
    int want_pick = want - want_nav;
    if (static_cast<int>(pick.size()) < want_pick) {
      want_nav += want_pick - static_cast<int>(pick.size());
      want_pick = static_cast<int>(pick.size());
    }
    if (static_cast<int>(nav.size()) < want_nav) {
      want_pick = std::min<int>(static_cast<int>(pick.size()),
                                want_pick + want_nav - static_cast<int>(nav.size()));
      want_nav = static_cast<int>(nav.size());
    }
    std::vector<TaskSpec> chosen(nav.begin(), nav.begin() + want_nav);
    chosen.insert(chosen.end(), pick.begin(), pick.begin() + want_pick);
    std::sort(chosen.begin(), chosen.end(),
              [](const auto& a, const auto& b) { return a.task_id < b.task_id; });
    for (auto& t : chosen) ds.tasks.push_back(std::move(t));
    ds.houses.push_back(std::move(house));
  }

  Rng rng(derive_seed(seed, 0x53706c6974ULL));
  std::vector<int> house_ids(static_cast<std::size_t>(cfg.num_houses));
  for (int h = 0; h < cfg.num_houses; ++h) house_ids[static_cast<std::size_t>(h)] = h;
  rng.shuffle(std::span<int>(house_ids));
  const int n_test_houses = std::max(
      1, static_cast<int>(std::lround(cfg.test_house_fraction * cfg.num_houses)));
  std::set<int> test_houses(house_ids.begin(), house_ids.begin() + n_test_houses);

  std::vector<int> nav_pool, pick_pool;
  for (const auto& t : ds.tasks) {
    if (test_houses.contains(t.house_id)) {
      ds.split.test_house.push_back(t.task_id);
    } else {
      (t.kind == TaskKind::kNav ? nav_pool : pick_pool).push_back(t.task_id);
    }
  }
  rng.shuffle(std::span<int>(nav_pool));
  rng.shuffle(std::span<int>(pick_pool));
  const auto n_test_task = static_cast<std::size_t>(std::lround(
      cfg.test_task_fraction * static_cast<double>(ds.tasks.size())));
  std::size_t ni = 0, pi = 0;
  while (ds.split.test_task.size() < n_test_task &&
         (ni < nav_pool.size() || pi < pick_pool.size())) {
    const bool take_nav =
        pi >= pick_pool.size() ||
        (ni < nav_pool.size() && ds.split.test_task.size() % 2 == 0);
    ds.split.test_task.push_back(take_nav ? nav_pool[ni++] : pick_pool[pi++]);
  }
  ds.split.train.assign(nav_pool.begin() + static_cast<std::ptrdiff_t>(ni),
                        nav_pool.end());
  ds.split.train.insert(ds.split.train.end(),
                        pick_pool.begin() + static_cast<std::ptrdiff_t>(pi),
                        pick_pool.end());
  std::sort(ds.split.train.begin(), ds.split.train.end());
  std::sort(ds.split.test_task.begin(), ds.split.test_task.end());
  std::sort(ds.split.test_house.begin(), ds.split.test_house.end());
  if (ds.split.train.empty() || ds.split.test_task.empty() ||
      ds.split.test_house.empty()) {
    throw DatasetError("configuration too small: a split came out empty");
  }
  check_split(ds);
  ds.split.checksum = dataset_checksum(ds);
  return ds;
}

void check_split(const Dataset& ds) {
  std::map<int, Split> where;
  auto add = [&](const std::vector<int>& ids, Split s) {
    for (int id : ids) {
      if (!where.emplace(id, s).second) {
        throw DatasetError("task " + std::to_string(id) +
                           " appears in more than one split");
      }
    }
  };
  add(ds.split.train, Split::kTrain);
  add(ds.split.test_task, Split::kTestTask);
  add(ds.split.test_house, Split::kTestHouse);

  std::set<int> seen_houses;
  std::set<TaskTarget> train_targets;
  for (int id : ds.split.train) {
    seen_houses.insert(ds.task(id).house_id);
    train_targets.insert(task_target(ds.task(id)));
  }
  for (int id : ds.split.test_task) seen_houses.insert(ds.task(id).house_id);
  for (int id : ds.split.test_house) {
    if (seen_houses.contains(ds.task(id).house_id)) {
      throw DatasetError("test_house task " + std::to_string(id) +
                         " uses a house that also appears in train/test_task");
    }
  }
  for (int id : ds.split.test_task) {
    if (train_targets.contains(task_target(ds.task(id)))) {
      throw DatasetError("test_task task " + std::to_string(id) +
                         " repeats a training (house, object, room) target");
    }
  }
}

}  // namespace lcrl::gridhouse
