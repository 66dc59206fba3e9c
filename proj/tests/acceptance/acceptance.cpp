// Runs every registered experiment with its shipped config, twice, and
// prints one PASS/FAIL line per acceptance criterion.
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "smlab/cli/config.hpp"
#include "smlab/cli/experiments.hpp"

namespace fs = std::filesystem;
using namespace smlab::cli;

namespace {

// Runtime budgets in seconds, by experiment.
const std::map<std::string, double> kBudget = {
    {"wiener_structure", 30},   {"divergence_split", 60}, {"density_matching", 180},
    {"hj_sign_flip", 10},       {"markov_wave", 10},      {"scaled_equivalence", 10},
    {"emergent_commutator", 5}, {"hamiltonian_chain", 5}, {"heisenberg_flow", 10},
    {"time_ordered_moments", 60}, {"trace_conservation", 30}, {"trace_derivative", 30},
    {"born_rule", 60},          {"ur_invariance", 120},
};

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

std::string strip_wall_time(std::string text) {
  const auto at = text.find("\"wall_time_s\"");
  if (at != std::string::npos) text.erase(at, text.find('\n', at) - at);
  return text;
}

// Empty string when both directories hold the same files with identical
// bytes (summary.json compared without its wall-clock field).
std::string compare_dirs(const fs::path& a, const fs::path& b) {
  std::set<std::string> names;
  for (const auto& d : {a, b})
    for (const auto& e : fs::directory_iterator(d)) names.insert(e.path().filename().string());
  for (const auto& n : names) {
    if (!fs::exists(a / n) || !fs::exists(b / n)) return n + " missing in one run";
    std::string x = slurp(a / n), y = slurp(b / n);
    if (n == "summary.json") x = strip_wall_time(x), y = strip_wall_time(y);
    if (x != y) return n + " differs";
  }
  return {};
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path config_dir = argc > 1 ? argv[1] : SMLAB_CONFIG_DIR;
  const fs::path work = argc > 2 ? argv[2] : fs::temp_directory_path() / "smlab_acceptance";
  fs::remove_all(work);
  fs::create_directories(work);

  int failures = 0;
  std::vector<std::string> nondeterministic;
  for (const auto& info : experiment_registry()) {
    std::string line;
    bool ok = false;
    try {
      const auto cfg = load_config((config_dir / (info.name + ".json")).string());
      const auto first = run_experiment(cfg, work / info.name / "a");
      const auto second = run_experiment(cfg, work / info.name / "b");
      const double budget = kBudget.at(info.name);
      std::ostringstream detail;
      int failed_checks = 0;
      for (const auto& c : first.checks)
        if (!c.passed) {
          ++failed_checks;
          detail << " failed:" << c.name << "=" << c.value;
        }
      char t[96];
      std::snprintf(t, sizeof t, " checks=%zu time=%.2fs budget=%.0fs", first.checks.size(), first.wall_time_s,
                    budget);
      ok = failed_checks == 0 && !first.checks.empty() && first.wall_time_s < budget;
      line = t + detail.str();
      const auto diff = compare_dirs(work / info.name / "a", work / info.name / "b");
      if (!diff.empty() || second.checks.size() != first.checks.size()) nondeterministic.push_back(info.name + ": " + diff);
    } catch (const std::exception& e) {
      line = std::string(" error: ") + e.what();
      nondeterministic.push_back(info.name + ": not run");
    }
    failures += !ok;
    std::printf("criterion %2d %-22s %s%s\n", info.criterion, info.name.c_str(), ok ? "PASS" : "FAIL", line.c_str());
    std::fflush(stdout);
  }
  const bool same = nondeterministic.empty();
  failures += !same;
  std::printf("criterion 15 %-22s %s", "determinism", same ? "PASS" : "FAIL");
  for (const auto& n : nondeterministic) std::printf(" [%s]", n.c_str());
  std::printf("\n%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
