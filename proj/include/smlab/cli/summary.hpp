#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "smlab/cli/config.hpp"

namespace smlab::cli {

enum class Relation { le, lt, ge, gt };

std::string_view to_string(Relation r);

/// One pass/fail comparison of a measured value against a threshold.
struct Check {
  std::string name;
  bool passed = false;
  double value = 0.0;
  double tolerance = 0.0;
  Relation relation = Relation::le;
};

Check make_check(std::string name, double value, Relation relation, double tolerance);

struct RunSummary {
  std::string experiment;
  std::uint64_t seed = 0;
  double wall_time_s = 0.0;
  std::map<std::string, double> metrics;
  std::vector<Check> checks;
  Json residuals = Json::object();
  Json born = Json::object();

  bool all_passed() const;
};

Json to_json(const RunSummary& s);
/// Inverse of to_json; throws ConfigError on a malformed document.
RunSummary summary_from_json(const Json& j);

/// Writes `summary.json` through a temporary file and a rename.
void write_summary(const RunSummary& s, const std::filesystem::path& dir);

}  // namespace smlab::cli
