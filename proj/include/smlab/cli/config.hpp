#pragma once

#include <cstdint>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace smlab::cli {

using Json = nlohmann::json;

/// Invalid configuration: malformed JSON, missing or unknown keys, bad values.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
  std::string experiment;
  std::uint64_t seed = 0;
  Json params = Json::object();
  std::string out_dir;  // empty: caller decides
};

/// Top-level keys: experiment (string), seed (non-negative integer), and the
/// optional params (object) and out_dir (string). Anything else is rejected.
ExperimentConfig parse_config(std::string_view text, const std::string& source = "<config>");
ExperimentConfig load_config(const std::string& path);

/// Typed access to an experiment's params with defaults. Every key read is
/// remembered so that finish() can reject keys nobody asked for.
class Params {
 public:
  Params(Json params, std::string experiment);

  bool has(const std::string& key) const { return params_.contains(key); }
  double number(const std::string& key, double fallback);
  std::uint64_t count(const std::string& key, std::uint64_t fallback, std::uint64_t min = 0,
                      std::uint64_t max = UINT64_MAX);
  bool flag(const std::string& key, bool fallback);
  std::string text(const std::string& key, const std::string& fallback);
  std::vector<double> numbers(const std::string& key, const std::vector<double>& fallback);
  std::vector<std::string> texts(const std::string& key, const std::vector<std::string>& fallback);

  /// Throws ConfigError naming the first unknown key.
  void finish() const;

 private:
  const Json* lookup(const std::string& key);
  [[noreturn]] void bad(const std::string& key, const std::string& what) const;

  Json params_;
  std::string experiment_;
  std::set<std::string> seen_;
};

}  // namespace smlab::cli
