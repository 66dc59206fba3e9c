#include <chrono>
#include <fstream>
#include <sstream>

#include "CLI11.hpp"
#include "experiment_fns.hpp"
#include "smlab/cli/experiments.hpp"
#include "smlab/numkit/errors.hpp"

namespace smlab::cli {

RunContext::RunContext(const ExperimentConfig& cfg, std::filesystem::path out_dir)
    : config_(cfg), out_dir_(std::move(out_dir)), params_(cfg.params, cfg.experiment) {
  summary_.experiment = cfg.experiment;
  summary_.seed = cfg.seed;
}

bool RunContext::check(const std::string& name, double value, Relation relation, double tolerance) {
  for (const auto& c : summary_.checks)
    if (c.name == name) throw std::logic_error("duplicate check name " + name);
  summary_.checks.push_back(make_check(name, value, relation, tolerance));
  return summary_.checks.back().passed;
}

const std::vector<ExperimentInfo>& experiment_registry() {
  namespace ex = experiments;
  static const std::vector<ExperimentInfo> registry{
      {"wiener_structure", 1, "Brownian covariance and ordered increment products", ex::wiener_structure},
      {"divergence_split", 2, "1/dt divergence of the overlapping kinetic estimator", ex::divergence_split},
      {"density_matching", 3, "path histograms against |psi|^2 for several diffusion constants",
       ex::density_matching},
      {"hj_sign_flip", 4, "Hamilton-Jacobi residuals with both quantum-potential signs", ex::hj_sign_flip},
      {"markov_wave", 5, "stationary real wave pair and product identity", ex::markov_wave},
      {"scaled_equivalence", 6, "rescaled and real-form wave equations", ex::scaled_equivalence},
      {"emergent_commutator", 7, "velocity/position commutator and adjoint in a weighted basis",
       ex::emergent_commutator},
      {"hamiltonian_chain", 8, "three quadrature forms of the mean energy", ex::hamiltonian_chain},
      {"heisenberg_flow", 9, "matrix flow generated by the free Hamiltonian", ex::heisenberg_flow},
      {"time_ordered_moments", 10, "operator moments against Monte Carlo path moments",
       ex::time_ordered_moments},
      {"trace_conservation", 11, "energy and charge conservation in matrix Hamilton flow",
       ex::trace_conservation},
      {"trace_derivative", 12, "cyclic derivatives against finite differences", ex::trace_derivative},
      {"born_rule", 13, "selection frequencies against squared overlaps", ex::born_rule},
      {"ur_invariance", 14, "selection statistics under different hidden evolutions", ex::ur_invariance},
  };
  return registry;
}

const ExperimentInfo* find_experiment(const std::string& name) {
  for (const auto& e : experiment_registry())
    if (e.name == name) return &e;
  return nullptr;
}

RunSummary run_experiment(const ExperimentConfig& cfg, const std::filesystem::path& out_dir) {
  const ExperimentInfo* info = find_experiment(cfg.experiment);
  if (!info) throw ConfigError("unknown experiment '" + cfg.experiment + "' (see `list`)");
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec || !std::filesystem::is_directory(out_dir))
    throw ConfigError("cannot create output directory '" + out_dir.string() + "'");
  RunContext ctx(cfg, out_dir);
  const auto start = std::chrono::steady_clock::now();
  info->run(ctx);
  ctx.params().finish();
  ctx.summary().wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  write_summary(ctx.summary(), out_dir);
  return ctx.summary();
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.15g", v);
  return buf;
}

}  // namespace

int write_report(const std::vector<std::string>& dirs, std::ostream& out) {
  out << "run_dir,experiment,seed,check,passed,value,tolerance,relation,status\n";
  int code = 0;
  for (const auto& dir : dirs) {
    const auto path = std::filesystem::path(dir) / "summary.json";
    try {
      std::ifstream is(path, std::ios::binary);
      if (!is) throw ConfigError("missing summary.json");
      Json j;
      try {
        j = Json::parse(is);
      } catch (const Json::exception& e) {
        throw ConfigError(std::string("unparseable summary: ") + e.what());
      }
      const RunSummary s = summary_from_json(j);
      for (const auto& c : s.checks)
        out << csv_field(dir) << ',' << csv_field(s.experiment) << ',' << s.seed << ',' << csv_field(c.name) << ','
            << (c.passed ? "true" : "false") << ',' << format_number(c.value) << ','
            << format_number(c.tolerance) << ',' << to_string(c.relation) << ",ok\n";
    } catch (const ConfigError& e) {
      out << csv_field(dir) << ",,,,,,,," << csv_field(std::string("malformed: ") + e.what()) << '\n';
      code = 1;
    }
  }
  return code;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"stochastic-mechanics laboratory"};
  app.require_subcommand(1);
  std::string config_path, out_dir;
  std::uint64_t seed = 0;
  auto* run = app.add_subcommand("run", "run one experiment from a JSON config");
  run->add_option("--config", config_path, "config file")->required();
  run->add_option("--out", out_dir, "output directory");
  auto* seed_opt = run->add_option("--seed", seed, "override the config seed");
  std::vector<std::string> dirs;
  auto* report = app.add_subcommand("report", "tabulate checks from run directories");
  report->add_option("dirs", dirs, "run directories");
  auto* list = app.add_subcommand("list", "list registered experiments");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    std::ostringstream o, e2;
    const int code = app.exit(e, o, e2);
    out << o.str();
    err << e2.str();
    return code == 0 ? 0 : 2;
  }

  if (list->parsed()) {
    for (const auto& e : experiment_registry()) out << e.name << '\t' << e.criterion << '\t' << e.description << '\n';
    return 0;
  }
  if (report->parsed()) return write_report(dirs, out);

  try {
    ExperimentConfig cfg = load_config(config_path);
    if (*seed_opt) cfg.seed = seed;
    std::filesystem::path dir = !out_dir.empty() ? out_dir : !cfg.out_dir.empty() ? cfg.out_dir : "out/" + cfg.experiment;
    const RunSummary s = run_experiment(cfg, dir);
    for (const auto& c : s.checks)
      out << (c.passed ? "PASS " : "FAIL ") << c.name << " value=" << format_number(c.value) << ' '
          << to_string(c.relation) << ' ' << format_number(c.tolerance) << '\n';
    out << "summary: " << (dir / "summary.json").string() << '\n';
    return s.all_passed() ? 0 : 1;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return 2;
  } catch (const PreconditionError& e) {
    err << "config error: " << e.what() << '\n';
    return 2;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    err << "runtime failure: " << e.what() << '\n';
    return 3;
  }
}

}  // namespace smlab::cli
