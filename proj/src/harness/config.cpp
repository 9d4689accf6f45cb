#include "lcrl/harness/config.hpp"

#include <fstream>
#include <sstream>

namespace lcrl::harness {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string x; std::getline(ss, x, ',');) {
    x = trim(x);
    if (!x.empty()) out.push_back(x);
  }
  return out;
}

template <class T>
T number(const std::string& key, const std::string& v) {
  std::istringstream in(v);
  T x{};
  in >> x;
  if (!in || !in.eof()) throw ConfigError("config key '" + key + "': bad number '" + v + "'");
  return x;
}

bool boolean(const std::string& key, const std::string& v) {
  if (v == "1" || v == "true" || v == "on" || v == "yes") return true;
  if (v == "0" || v == "false" || v == "off" || v == "no") return false;
  throw ConfigError("config key '" + key + "': expected a boolean, got '" + v + "'");
}

}  // namespace

std::map<std::string, std::string> parse_key_values(const std::string& text,
                                                    const std::string& origin) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = origin + ":" + std::to_string(lineno);
    if (eq == std::string::npos) throw ConfigError(where + ": expected key = value");
    const auto key = trim(line.substr(0, eq));
    if (key.empty()) throw ConfigError(where + ": empty key");
    if (!kv.emplace(key, trim(line.substr(eq + 1))).second) {
      throw ConfigError(where + ": duplicate key '" + key + "'");
    }
  }
  return kv;
}

namespace {

template <class Parse>
auto named(const std::string& key, const std::string& value, Parse parse) {
  try {
    return parse(value);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("config '" + key + "': " + e.what());
  }
}

}  // namespace

ExperimentConfig experiment_config(const std::map<std::string, std::string>& kv) {
  ExperimentConfig c;
  for (const auto& [k, v] : kv) {
    if (k == "dataset") {
      c.dataset = v;
    } else if (k == "methods" || k == "method") {
      c.methods.clear();
      for (const auto& m : split_list(v)) c.methods.push_back(named(k, m, trainers::method_from_name));
    } else if (k == "evaluator") {
      c.evaluator = named(k, v, evaluator_from_name);
    } else if (k == "shaping") {
      c.shaping = boolean(k, v);
    } else if (k == "seeds") {
      c.seeds.clear();
      for (const auto& s : split_list(v)) c.seeds.push_back(number<std::uint64_t>(k, s));
    } else if (k == "output") {
      c.output = v;
    } else if (k == "steps") {
      c.steps = number<int>(k, v);
    } else if (k == "lr") {
      c.lr = number<double>(k, v);
    } else if (k == "episodes") {
      c.episodes = number<int>(k, v);
    } else if (k == "checkpoint_every") {
      c.checkpoint_every = number<int>(k, v);
    } else {
      throw ConfigError("unknown config key '" + k + "'");
    }
  }
  if (c.dataset.empty()) throw ConfigError("config is missing 'dataset'");
  if (!std::filesystem::is_directory(c.dataset)) {
    throw ConfigError("dataset directory does not exist: " + c.dataset.string());
  }
  if (c.output.empty()) throw ConfigError("config is missing 'output'");
  if (c.seeds.empty()) throw ConfigError("config lists no seeds");
  if (c.methods.empty()) throw ConfigError("config lists no methods");
  if (c.steps < 0 || c.episodes < 0 || c.checkpoint_every < 0) {
    throw ConfigError("config counts must be nonnegative");
  }
  if (!(c.lr > 0.0)) throw ConfigError("config 'lr' must be positive");
  return c;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("missing config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return experiment_config(parse_key_values(ss.str(), path.string()));
}

}  // namespace lcrl::harness
