#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "lcrl/harness/experiment.hpp"

namespace lcrl::harness {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Flat "key = value" lines; '#' starts a comment. Duplicate keys and lines
/// without '=' are errors.
std::map<std::string, std::string> parse_key_values(const std::string& text,
                                                    const std::string& origin = "config");

struct ExperimentConfig {
  std::filesystem::path dataset;
  std::vector<Method> methods{Method::kLcrl};
  Evaluator evaluator = Evaluator::kExact;
  bool shaping = false;
  std::vector<std::uint64_t> seeds{0};
  std::filesystem::path output;
  int steps = 3000;
  double lr = 5e-4;
  int episodes = 2000;
  int checkpoint_every = 0;
};

/// Keys: dataset, methods (comma list), evaluator, shaping, seeds (comma
/// list), output, steps, lr, episodes, checkpoint_every. Unknown keys are
/// errors. The dataset directory must exist and seeds must be nonempty.
ExperimentConfig experiment_config(const std::map<std::string, std::string>& kv);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

}  // namespace lcrl::harness
