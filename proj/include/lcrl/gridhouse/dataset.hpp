#pragma once

#include <cstdint>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "lcrl/gridhouse/house.hpp"
#include "lcrl/gridhouse/mdp_builder.hpp"
#include "lcrl/gridhouse/task.hpp"

namespace lcrl::gridhouse {

enum class Split { kTrain, kTestTask, kTestHouse };
std::string_view split_name(Split s);

struct DatasetConfig {
  int num_houses = 60;
  HouseConfig house;
  MdpOptions mdp;
  /// Houses alternate between the two counts, half NAV and half PICK each.
  int min_tasks_per_house = 3;
  int max_tasks_per_house = 4;
  double test_house_fraction = 0.12;
  double test_task_fraction = 0.17;
};

struct DatasetSplit {
  std::vector<int> train;
  std::vector<int> test_task;
  std::vector<int> test_house;
  std::uint64_t checksum = 0;
};

struct Dataset {
  std::uint64_t seed = 0;
  DatasetConfig config;
  Vocabulary vocab;
  std::vector<House> houses;
  std::vector<TaskSpec> tasks;
  DatasetSplit split;

  const TaskSpec& task(int task_id) const;
  const House& house(int house_id) const;
  Split split_of(int task_id) const;
};

class DatasetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Generates houses and solvable tasks, then splits them. Tasks whose goal is
/// unreachable within the horizon are discarded before sampling.
Dataset make_dataset(const DatasetConfig& cfg, std::uint64_t seed);

/// Throws DatasetError on overlapping splits, test-house leakage into train
/// houses, or a test-task target already seen in training for that house.
void check_split(const Dataset& ds);

/// Content hash over houses, tasks, splits and vocabulary.
std::uint64_t dataset_checksum(const Dataset& ds);

}  // namespace lcrl::gridhouse
