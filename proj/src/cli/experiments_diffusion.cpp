#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "experiment_fns.hpp"
#include "smlab/diffusion/ensemble.hpp"
#include "smlab/diffusion/estimators.hpp"
#include "smlab/emergent/basis.hpp"
#include "smlab/emergent/operators.hpp"
#include "smlab/numkit/errors.hpp"
#include "smlab/numkit/stats.hpp"
#include "smlab/waveengine/hydro.hpp"
#include "smlab/waveengine/wavefunction.hpp"

namespace smlab::cli::experiments {

using diffusion::DiffusionEnsemble;
using diffusion::DriftField;
using diffusion::SimulationConfig;
using numkit::Field;
using numkit::MeanEstimate;
using numkit::UniformGrid;

namespace {

std::size_t step_of(double t, double dt) {
  const double s = t / dt;
  const auto k = static_cast<std::size_t>(std::llround(s));
  if (std::abs(s - static_cast<double>(k)) > 1e-9 * std::max(1.0, s))
    throw PreconditionError("time " + std::to_string(t) + " is not a multiple of dt");
  return k;
}

double z_score(double value, double expected, double stderr_) {
  if (stderr_ == 0.0) return value == expected ? 0.0 : INFINITY;
  return std::abs(value - expected) / stderr_;
}

MeanEstimate product_mean(const DiffusionEnsemble& ens, const std::vector<std::size_t>& steps) {
  std::vector<double> prod(ens.n_paths());
  for (std::size_t p = 0; p < ens.n_paths(); ++p) {
    double v = 1.0;
    for (auto s : steps) v *= ens.x(p, s);
    prod[p] = v;
  }
  return numkit::mean_estimate(prod);
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.15g", v);
  return buf;
}

}  // namespace

void wiener_structure(RunContext& ctx) {
  auto& p = ctx.params();
  const double nu = p.number("nu", 0.5);
  const double dt = p.number("dt", 1e-3);
  const std::size_t n_paths = p.count("n_paths", 100000, 2);
  const double t1 = p.number("t1", 0.3), t2 = p.number("t2", 0.7);
  const std::size_t csv_paths = p.count("csv_paths", 20);
  const double k_sigma = p.number("k_sigma", 3.0);
  p.finish();
  if (!(t1 > 0.0 && t2 > t1)) throw PreconditionError("need 0 < t1 < t2");

  const std::size_t s1 = step_of(t1, dt), s2 = step_of(t2, dt);
  SimulationConfig cfg{nu, dt, s2, n_paths, 0.0, {}};
  for (std::size_t s = 0; s <= s2; s += std::max<std::size_t>(1, s2 / 20)) cfg.record_steps.push_back(s);
  for (auto s : {s1, s1 + 1, s2}) cfg.record_steps.push_back(s);
  std::sort(cfg.record_steps.begin(), cfg.record_steps.end());
  cfg.record_steps.erase(std::unique(cfg.record_steps.begin(), cfg.record_steps.end()), cfg.record_steps.end());

  const auto ens = diffusion::simulate_ensemble(DriftField::linear(0.0, 0.0), cfg, diffusion::fixed_start(0.0),
                                                ctx.rng(1));
  const auto cs = diffusion::covariance_stats(ens, s1, s2);
  const double expected = 2.0 * nu * std::min(t1, t2);
  ctx.metric("cov", cs.cov.mean);
  ctx.metric("cov_stderr", cs.cov.stderr_);
  ctx.metric("cov_expected", expected);
  ctx.metric("ordered_left", cs.ordered_left.mean);
  ctx.metric("ordered_left_stderr", cs.ordered_left.stderr_);
  ctx.metric("ordered_right", cs.ordered_right.mean);
  ctx.metric("ordered_right_stderr", cs.ordered_right.stderr_);
  ctx.check("covariance_z", z_score(cs.cov.mean, expected, cs.cov.stderr_), Relation::le, k_sigma);
  ctx.check("ordered_left_z", z_score(cs.ordered_left.mean, 2.0 * nu, cs.ordered_left.stderr_), Relation::le,
            k_sigma);
  ctx.check("ordered_right_z", z_score(cs.ordered_right.mean, 0.0, cs.ordered_right.stderr_), Relation::le,
            k_sigma);
  diffusion::write_paths_csv(ens, ctx.file("paths.csv"), csv_paths);
}

void divergence_split(RunContext& ctx) {
  auto& p = ctx.params();
  const double nu = p.number("nu", 0.5);
  const double slope = p.number("drift_slope", -1.0);
  const auto dts = p.numbers("dts", {1e-2, 5e-3, 2.5e-3});
  const std::size_t n_paths = p.count("n_paths", 100000, 2);
  const double rel_tol = p.number("slope_rel_tol", 0.05);
  const double k_sigma = p.number("k_sigma", 3.0);
  p.finish();
  if (dts.size() < 2) throw PreconditionError("need at least two dt values");
  if (!(slope < 0.0)) throw PreconditionError("drift_slope must be negative (stationary start)");

  std::vector<MeanEstimate> over, non;
  std::ofstream os(ctx.file("kinetic.csv"), std::ios::binary);
  os << "dt,overlapping,overlapping_stderr,nonoverlapping,nonoverlapping_stderr\n";
  for (std::size_t i = 0; i < dts.size(); ++i) {
    SimulationConfig cfg{nu, dts[i], 2, n_paths, 0.0, {}};
    const auto ens = diffusion::simulate_ensemble(DriftField::linear(slope, 0.0), cfg,
                                                  diffusion::gaussian_start(0.0, std::sqrt(nu / -slope)),
                                                  ctx.rng(10 + i));
    const auto k = diffusion::kinetic_action_terms(ens, 0);
    over.push_back(k.overlapping);
    non.push_back(k.nonoverlapping);
    os << fmt(dts[i]) << ',' << fmt(k.overlapping.mean) << ',' << fmt(k.overlapping.stderr_) << ','
       << fmt(k.nonoverlapping.mean) << ',' << fmt(k.nonoverlapping.stderr_) << '\n';
  }
  const auto fit = diffusion::fit_divergent_kinetic(dts, over);
  ctx.metric("divergent_coefficient", fit.divergent_coefficient);
  ctx.metric("divergent_stderr", fit.divergent_stderr);
  ctx.metric("finite_part", fit.value);
  ctx.check("slope_relative_error", std::abs(fit.divergent_coefficient - nu) / nu, Relation::le, rel_tol);

  double worst_z = 0.0, worst_abs = 0.0;
  for (std::size_t a = 0; a < non.size(); ++a) {
    worst_abs = std::max(worst_abs, std::abs(non[a].mean));
    for (std::size_t b = a + 1; b < non.size(); ++b)
      worst_z = std::max(worst_z, z_score(non[a].mean, non[b].mean, std::hypot(non[a].stderr_, non[b].stderr_)));
  }
  const auto non_fit = diffusion::fit_divergent_kinetic(dts, non);
  ctx.metric("nonoverlapping_max_abs", worst_abs);
  ctx.metric("nonoverlapping_divergent_coefficient", non_fit.divergent_coefficient);
  ctx.check("nonoverlapping_pairwise_z", worst_z, Relation::le, k_sigma);
  ctx.check("nonoverlapping_divergence_z", z_score(non_fit.divergent_coefficient, 0.0, non_fit.divergent_stderr),
            Relation::le, k_sigma);
}

void density_matching(RunContext& ctx) {
  auto& p = ctx.params();
  const double hbar = 1.0;
  const auto nus = p.numbers("nu_factors", {0.25, 0.5, 1.0});
  const auto times = p.numbers("times", {0.5, 1.0});
  const std::size_t n_paths = p.count("n_paths", 100000, 100);
  const double dt = p.number("dt", 1e-3);
  const double half_width = p.number("half_width", 6.0);
  const std::size_t points = p.count("grid_points", 2001, 11);
  const double bin_range = p.number("bin_range", 3.0);
  const std::size_t n_bins = p.count("bins", 40, 2);
  const double p_min = p.number("p_threshold", 0.01);
  p.finish();
  if (times.empty() || !std::is_sorted(times.begin(), times.end()) || !(times.front() > 0.0))
    throw PreconditionError("times must be positive and increasing");

  const UniformGrid grid(-half_width, half_width, points);
  Field V(points);
  for (std::size_t i = 0; i < points; ++i) V[i] = 0.5 * grid.x(i) * grid.x(i);
  const auto psi0 = waveengine::normalized(waveengine::tabulate(grid, [](double x) { return std::exp(-0.5 * x * x); }));
  const double t_end = times.back();
  const std::size_t total = step_of(t_end, dt);
  const std::size_t every = std::max<std::size_t>(1, total / 20);
  const auto wave = waveengine::evolve_schrodinger_trajectory(psi0, V, dt, total, every);

  // Bin edges: n_bins on [-range, range] plus one tail bin on each side.
  const double width = 2.0 * bin_range / static_cast<double>(n_bins);
  const auto bin_of = [&](double x) -> std::size_t {
    if (x < -bin_range) return 0;
    if (x >= bin_range) return n_bins + 1;
    return 1 + std::min(n_bins - 1, static_cast<std::size_t>((x + bin_range) / width));
  };
  const auto quantum_probs = [&](const waveengine::WavefunctionGrid& w) {
    // Fine trapezoid sum of |psi|^2 with linear interpolation, then normalized.
    std::vector<double> probs(n_bins + 2, 0.0);
    const std::size_t sub = 8;
    for (std::size_t i = 0; i + 1 < w.grid.size(); ++i) {
      const double r0 = std::norm(w.psi[i]), r1 = std::norm(w.psi[i + 1]);
      for (std::size_t k = 0; k < sub; ++k) {
        const double f = (static_cast<double>(k) + 0.5) / static_cast<double>(sub);
        const double x = w.grid.x(i) + f * w.grid.dx();
        probs[bin_of(x)] += ((1 - f) * r0 + f * r1) * w.grid.dx() / static_cast<double>(sub);
      }
    }
    double s = 0.0;
    for (double q : probs) s += q;
    for (double& q : probs) q /= s;
    return probs;
  };

  std::vector<waveengine::HydroFields> field_slices;
  std::ofstream hist(ctx.file("density_hist.csv"), std::ios::binary);
  hist << "nu,t,bin,lower,upper,count,expected\n";
  for (std::size_t ni = 0; ni < nus.size(); ++ni) {
    const double nu = nus[ni] * hbar;
    std::vector<double> slice_t;
    std::vector<Field> slice_b;
    std::vector<std::vector<bool>> slice_valid;
    const waveengine::HydroFields* prev = nullptr;
    std::vector<waveengine::HydroFields> fields;
    fields.reserve(wave.size());
    for (const auto& w : wave) {
      fields.push_back(waveengine::fields_from_wavefunction(w, nu, prev));
      prev = &fields.back();
      slice_t.push_back(w.t);
      slice_b.push_back(fields.back().b);
      slice_valid.push_back(fields.back().valid);
    }
    if (ni == 0) field_slices = fields;
    const DriftField drift(grid, slice_t, slice_b, slice_valid);

    SimulationConfig cfg{nu, dt, total, n_paths, 0.0, {}};
    for (double t : times) cfg.record_steps.push_back(step_of(t, dt));
    // Start from |psi(0)|^2 = N(0, 1/2).
    const auto ens = diffusion::simulate_ensemble(drift, cfg, diffusion::gaussian_start(0.0, std::sqrt(0.5)),
                                                  ctx.rng(100 + ni));
    ctx.metric("boundary_hits_nu" + fmt(nus[ni]), static_cast<double>(ens.boundary_hits()));
    for (double t : times) {
      const std::size_t s = step_of(t, dt);
      std::vector<std::uint64_t> counts(n_bins + 2, 0);
      for (double x : ens.at_step(s)) ++counts[bin_of(x)];
      const auto wit = std::min_element(wave.begin(), wave.end(),
                                        [t](const auto& a, const auto& b) { return std::abs(a.t - t) < std::abs(b.t - t); });
      if (std::abs(wit->t - t) > 1e-9) throw PreconditionError("times must fall on recorded wave slices");
      const auto probs = quantum_probs(*wit);
      const auto test = numkit::chi_square_gof(counts, probs);
      const std::string tag = "nu" + fmt(nus[ni]) + "_t" + fmt(t);
      ctx.metric("chi2_" + tag, test.statistic);
      ctx.check("p_value_" + tag, test.p_value, Relation::gt, p_min);
      for (std::size_t b = 0; b < counts.size(); ++b) {
        const double lo = b == 0 ? -INFINITY : -bin_range + width * static_cast<double>(b - 1);
        const double hi = b == n_bins + 1 ? INFINITY : -bin_range + width * static_cast<double>(b);
        hist << fmt(nu) << ',' << fmt(t) << ',' << b << ',' << fmt(lo) << ',' << fmt(hi) << ',' << counts[b] << ','
             << fmt(probs[b] * static_cast<double>(n_paths)) << '\n';
      }
    }
  }
  waveengine::write_fields_csv(field_slices, ctx.file("fields.csv"));
}

void time_ordered_moments(RunContext& ctx) {
  auto& p = ctx.params();
  const double nu = p.number("nu", 0.5);
  const double t0 = p.number("t0", 0.25);
  const double t1 = p.number("t1", 0.5), t2 = p.number("t2", 1.0), t_mid = p.number("t_mid", 0.75);
  const std::size_t n_paths = p.count("n_paths", 1000000, 2);
  const double dt = p.number("dt", 1e-2);
  const std::size_t n_basis = p.count("n_basis", 8, 4, emergent::kMaxBasisSize);
  const double flow_dt = p.number("flow_dt", 1e-2);
  const double k_sigma = p.number("k_sigma", 3.0);
  const std::size_t csv_paths = p.count("csv_paths", 20);
  p.finish();
  if (!(0.0 < t0 && t0 <= t1 && t1 < t_mid && t_mid < t2)) throw PreconditionError("need 0 < t0 <= t1 < t_mid < t2");

  // Operator side: Gaussian heat-kernel density at t0 with zero forward drift.
  const double sd = std::sqrt(2.0 * nu * t0);
  const UniformGrid grid(-14.0 * sd, 14.0 * sd, 4001);
  Field log_rho(grid.size()), v(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double x = grid.x(i);
    log_rho[i] = -x * x / (4.0 * nu * t0);
    v[i] = x / (2.0 * t0);
  }
  const auto fields = waveengine::fields_from_log_density(grid, log_rho, v, nu, t0, 1.0, false);
  const auto basis = emergent::build_basis(grid, fields.rho, n_basis, emergent::BasisKind::hermite_analytic);
  const auto ops = emergent::operator_matrices(basis, fields);
  const auto ap = emergent::acceleration_and_potential(fields);
  const auto H = emergent::hamiltonian_matrix(ops, emergent::multiplication_matrix(basis, ap.potential));
  const double op1 = emergent::time_ordered_moment(ops.x_hat, H, nu, t0, {t1}, flow_dt);
  const double op2 = emergent::time_ordered_moment(ops.x_hat, H, nu, t0, {t1, t2}, flow_dt);
  const double op3 = emergent::time_ordered_moment(ops.x_hat, H, nu, t0, {t1, t_mid, t2}, flow_dt);

  // Path side.
  const std::size_t s1 = step_of(t1, dt), sm = step_of(t_mid, dt), s2 = step_of(t2, dt);
  SimulationConfig cfg{nu, dt, s2, n_paths, 0.0, {s1, sm, s2}};
  const auto ens = diffusion::simulate_ensemble(DriftField::linear(0.0, 0.0), cfg, diffusion::fixed_start(0.0),
                                                ctx.rng(2));
  const auto mc1 = product_mean(ens, {s1});
  const auto mc2 = product_mean(ens, {s1, s2});
  const auto mc3 = product_mean(ens, {s1, sm, s2});

  ctx.metric("operator_n1", op1);
  ctx.metric("operator_n2", op2);
  ctx.metric("operator_n3", op3);
  ctx.metric("mc_n1", mc1.mean);
  ctx.metric("mc_n2", mc2.mean);
  ctx.metric("mc_n2_stderr", mc2.stderr_);
  ctx.metric("mc_n3", mc3.mean);
  ctx.check("operator_n2_vs_2nu_t1", std::abs(op2 - 2.0 * nu * t1), Relation::le, 1e-8);
  ctx.check("n1_z", z_score(mc1.mean, op1, mc1.stderr_), Relation::le, k_sigma);
  ctx.check("n2_z", z_score(mc2.mean, op2, mc2.stderr_), Relation::le, k_sigma);
  ctx.check("n3_z", z_score(mc3.mean, op3, mc3.stderr_), Relation::le, k_sigma);

  std::ofstream os(ctx.file("moments.csv"), std::ios::binary);
  os << "order,times,operator,monte_carlo,stderr\n";
  os << "1," << fmt(t1) << ',' << fmt(op1) << ',' << fmt(mc1.mean) << ',' << fmt(mc1.stderr_) << '\n';
  os << "2," << fmt(t1) << ' ' << fmt(t2) << ',' << fmt(op2) << ',' << fmt(mc2.mean) << ',' << fmt(mc2.stderr_) << '\n';
  os << "3," << fmt(t1) << ' ' << fmt(t_mid) << ' ' << fmt(t2) << ',' << fmt(op3) << ',' << fmt(mc3.mean) << ','
     << fmt(mc3.stderr_) << '\n';
  diffusion::write_paths_csv(ens, ctx.file("paths.csv"), csv_paths);
}

}  // namespace smlab::cli::experiments
