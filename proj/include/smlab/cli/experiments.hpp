#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "smlab/cli/config.hpp"
#include "smlab/cli/summary.hpp"
#include "smlab/numkit/rng.hpp"

namespace smlab::cli {

/// State handed to an experiment: parameters, output directory and the
/// summary being filled.
class RunContext {
 public:
  RunContext(const ExperimentConfig& cfg, std::filesystem::path out_dir);

  Params& params() noexcept { return params_; }
  const ExperimentConfig& config() const noexcept { return config_; }
  /// Stream `id` of the run's master seed.
  numkit::RngStream rng(std::uint64_t id = 0) const { return numkit::RngStream(config_.seed, id); }
  std::string file(const std::string& name) const { return (out_dir_ / name).string(); }

  void metric(const std::string& name, double value) { summary_.metrics[name] = value; }
  bool check(const std::string& name, double value, Relation relation, double tolerance);
  Json& residuals() noexcept { return summary_.residuals; }
  Json& born() noexcept { return summary_.born; }
  RunSummary& summary() noexcept { return summary_; }

 private:
  ExperimentConfig config_;
  std::filesystem::path out_dir_;
  Params params_;
  RunSummary summary_;
};

struct ExperimentInfo {
  std::string name;
  int criterion = 0;
  std::string description;
  std::function<void(RunContext&)> run;
};

/// All registered experiments in criterion order.
const std::vector<ExperimentInfo>& experiment_registry();
const ExperimentInfo* find_experiment(const std::string& name);

/// Runs one experiment, writes its files and summary.json into out_dir and
/// returns the summary. ConfigError for unknown names or keys; module
/// errors propagate unchanged.
RunSummary run_experiment(const ExperimentConfig& cfg, const std::filesystem::path& out_dir);

/// Reads `summary.json` from each directory and writes one CSV row per
/// check. Returns 1 if any summary is missing or malformed, else 0.
int write_report(const std::vector<std::string>& dirs, std::ostream& out);

/// Command-line entry point; returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace smlab::cli
