#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "experiment_fns.hpp"
#include "smlab/hiddenvars/hidden.hpp"
#include "smlab/numkit/errors.hpp"

namespace smlab::cli::experiments {

using namespace hiddenvars;

namespace {

// Probability that index k wins the race argmax p_j / E_j with E_j i.i.d.
// unit exponentials: integral over s of p_k exp(-s sum_j p_j), by midpoint
// quadrature on a truncated range. Independent of the sampling code.
std::vector<double> race_oracle(const std::vector<double>& p) {
  double total = 0.0;
  for (double q : p) total += q;
  const double upper = 40.0 / total, h = upper / 200000.0;
  std::vector<double> out(p.size(), 0.0);
  for (std::size_t i = 0; i < 200000; ++i) {
    const double s = (static_cast<double>(i) + 0.5) * h;
    const double w = h * std::exp(-s * total);
    for (std::size_t k = 0; k < p.size(); ++k) out[k] += p[k] * w;
  }
  return out;
}

}  // namespace

void born_rule(RunContext& ctx) {
  auto& p = ctx.params();
  // A single `n` means one dimension and, unless overridden, one pair.
  const bool single = p.has("n");
  const auto dims_d = single ? std::vector<double>{static_cast<double>(p.count("n", 4, 2, kMaxDimension))}
                             : p.numbers("dims", {2, 3, 4, 8});
  const std::size_t pairs = p.count("pairs", single ? 1 : 20, 1);
  const std::size_t samples = p.count("samples", 100000, 1000);
  const auto method = numkit::parse_haar_method(p.text("haar_method", "gram_schmidt"));
  const double p_min = p.number("p_threshold", 0.01);
  const double oracle_tol = p.number("oracle_tol", 1e-6);
  p.finish();
  std::vector<std::size_t> dims;
  for (double d : dims_d) {
    if (!(d >= 2 && d <= static_cast<double>(kMaxDimension)) || d != std::floor(d))
      throw PreconditionError("dims must be integers in [2, 64]");
    dims.push_back(static_cast<std::size_t>(d));
  }
  if (dims.empty()) throw PreconditionError("dims must not be empty");

  std::ofstream os(ctx.file("born.csv"), std::ios::binary);
  os << "pair,n,k,probability,frequency,oracle\n";
  Json born = Json::array();
  double worst_oracle = 0.0, min_p = 1.0;
  std::uint64_t ties = 0;
  char buf[160];
  for (std::size_t k = 0; k < pairs; ++k) {
    const std::size_t n = dims[k % dims.size()];
    auto rng = ctx.rng(100 + k);
    const auto obs = Observable::random(n, rng);
    const auto psi = random_state(n, rng);
    const auto est = born_estimate(psi, obs, samples, rng, method);
    const auto oracle = race_oracle(est.probabilities);
    for (std::size_t j = 0; j < n; ++j) {
      worst_oracle = std::max(worst_oracle, std::abs(oracle[j] - est.probabilities[j]));
      std::snprintf(buf, sizeof buf, "%zu,%zu,%zu,%.15g,%.15g,%.15g\n", k, n, j, est.probabilities[j],
                    est.frequencies[j], oracle[j]);
      os << buf;
    }
    ties += est.ties;
    min_p = std::min(min_p, est.chi_square.p_value);
    born.push_back({{"pair", k},
                    {"n", n},
                    {"frequencies", est.frequencies},
                    {"probabilities", est.probabilities},
                    {"chi_square", est.chi_square.statistic},
                    {"p_value", est.chi_square.p_value},
                    {"passed", est.chi_square.p_value > p_min}});
    ctx.check("p_value_pair" + std::to_string(k) + "_n" + std::to_string(n), est.chi_square.p_value, Relation::gt,
              p_min);
  }
  ctx.born()["pairs"] = born;
  ctx.born()["samples"] = samples;
  ctx.metric("min_p_value", min_p);
  ctx.metric("ties", static_cast<double>(ties));
  ctx.check("race_oracle_agreement", worst_oracle, Relation::le, oracle_tol);
}

void ur_invariance(RunContext& ctx) {
  auto& p = ctx.params();
  const std::size_t n = p.count("n", 3, 2, kMaxDimension);
  const std::size_t samples = p.count("samples", 100000, 10);
  const std::size_t horizon = p.count("horizon", 20, 1);
  const double dt = p.number("dt", 0.05);
  const double epsilon = p.number("epsilon", 0.1);
  const auto names = p.texts("specs", {"frozen", "quantum", "random_markov"});
  const double p_min = p.number("p_threshold", 0.01);
  const double separation = p.number("jump_separation_sigma", 5.0);
  const std::size_t traj_steps = p.count("trajectory_steps", 200, 1);
  p.finish();

  std::vector<EvolutionSpec> specs;
  for (const auto& name : names) {
    const auto kind = parse_evolution_kind(name);
    if (kind == EvolutionKind::custom) throw PreconditionError("custom evolutions cannot be configured from JSON");
    specs.push_back({kind, epsilon, {}, true});
  }
  auto rng = ctx.rng(1);
  const auto obs = Observable::random(n, rng);
  const auto ham = Observable::random(n, rng);
  const auto psi = random_state(n, rng);
  auto sample_rng = ctx.rng(2);
  const auto rep = ur_invariance_test(psi, obs, ham.matrix, specs, samples, horizon, dt, sample_rng, p_min);

  Json born = Json::object();
  born["probabilities_at_horizon"] = obs.probabilities(psi);
  for (std::size_t i = 0; i < specs.size(); ++i) {
    const auto& o = rep.outcomes[i];
    const std::string name(to_string(o.spec.kind));
    born["specs"][name] = {{"frequencies", o.frequencies},
                           {"jump_mean", o.jumps.mean},
                           {"jump_stderr", o.jumps.stderr_},
                           {"unitarity_defect", o.max_unitarity_defect}};
    ctx.metric("jump_mean_" + name, o.jumps.mean);
    ctx.metric("alpha_norm_drift_" + name, o.max_alpha_norm_drift);
  }
  for (std::size_t a = 0; a < specs.size(); ++a)
    for (std::size_t b = a + 1; b < specs.size(); ++b)
      ctx.check("homogeneity_" + std::string(to_string(specs[a].kind)) + "_" + std::string(to_string(specs[b].kind)),
                rep.pairwise_p[a][b], Relation::gt, p_min);
  ctx.born() = born;

  // Jump statistics must separate the frozen and random evolutions.
  const auto find = [&](EvolutionKind k) -> const SpecOutcome* {
    for (const auto& o : rep.outcomes)
      if (o.spec.kind == k) return &o;
    return nullptr;
  };
  const auto* frozen = find(EvolutionKind::frozen);
  const auto* markov = find(EvolutionKind::random_markov);
  if (frozen && markov) {
    const double se = std::hypot(frozen->jumps.stderr_, markov->jumps.stderr_);
    const double z = se > 0 ? std::abs(markov->jumps.mean - frozen->jumps.mean) / se : 0.0;
    ctx.check("jump_separation_sigma", z, Relation::ge, separation);
  }

  // One exported trajectory per evolution, from a common starting pair.
  auto traj_rng = ctx.rng(3);
  const auto pair = make_pair(psi, sample_alpha(n, 1.0, traj_rng, numkit::HaarMethod::gram_schmidt), 1.0);
  for (std::size_t i = 0; i < specs.size(); ++i) {
    auto step_rng = ctx.rng(10 + i);
    const auto rec = observable_trajectory(evolve_pair(pair, ham.matrix, specs[i], dt, traj_steps, step_rng), obs);
    write_hidden_trajectory_csv(rec, ctx.file("hidden_traj_" + std::string(to_string(specs[i].kind)) + ".csv"));
    ctx.metric("trajectory_jumps_" + std::string(to_string(specs[i].kind)), static_cast<double>(rec.jump_count));
  }
}

}  // namespace smlab::cli::experiments
