#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>

#include "doctest.h"
#include "smlab/diffusion/drift_field.hpp"
#include "smlab/diffusion/ensemble.hpp"
#include "smlab/diffusion/estimators.hpp"
#include "smlab/numkit/errors.hpp"
#include "smlab/numkit/stats.hpp"

using namespace smlab;
using namespace smlab::diffusion;
using numkit::mean_estimate;
using numkit::within_sigma;

namespace {

SimulationConfig config(double nu, double dt, std::size_t steps, std::size_t paths,
                        std::vector<std::size_t> record = {}) {
  SimulationConfig c;
  c.nu = nu;
  c.dt = dt;
  c.steps = steps;
  c.n_paths = paths;
  c.record_steps = std::move(record);
  return c;
}

// Exact stationary variance of the Euler-Maruyama chain x' = (1 - dt) x + N(0, 2 nu dt).
double em_ou_variance(double nu, double dt) { return 2.0 * nu * dt / (1.0 - (1.0 - dt) * (1.0 - dt)); }

}  // namespace

TEST_CASE("drift field interpolates linearly and flags the outside") {
  const UniformGrid g(-1.0, 1.0, 3);
  const auto f = DriftField::stationary(g, {1.0, 0.0, 3.0});
  CHECK(f(0.5, 0.0) == doctest::Approx(1.5));
  CHECK(f(-0.5, 7.0) == doctest::Approx(0.5));
  const auto s = f.evaluate(4.0, 0.0);
  CHECK(s.outside);
  CHECK(s.value == 3.0);

  DriftField timed(g, {0.0, 1.0}, {Field{0, 0, 0}, Field{2, 2, 2}});
  CHECK(timed(0.1, 0.25) == doctest::Approx(0.5));
  CHECK(timed(0.1, -3.0) == 0.0);
  CHECK(timed(0.1, 9.0) == 2.0);

  DriftField masked(g, {0.0}, {Field{1, 2, 3}}, {{true, false, true}});
  CHECK(masked.evaluate(0.5, 0.0).invalid_point == 1);
  CHECK(masked.evaluate(-1.0, 0.0).invalid_point == -1);
  CHECK_THROWS_AS(DriftField(g, {0.0}, {Field{1, NAN, 3}}), PreconditionError);
}

TEST_CASE("wiener paths: zero mean, covariance 2 nu min(t1,t2), ordered products") {
  const double nu = 0.5, dt = 1e-3;
  const auto cfg = config(nu, dt, 701, 40000, {0, 300, 301, 700});
  const auto ens = simulate_ensemble(DriftField::linear(0.0, 0.0), cfg, fixed_start(0.0),
                                     numkit::RngStream(11, 0));
  const auto x = ens.at_step(700);
  const auto m = mean_estimate(x);
  CHECK(within_sigma(m.mean, 0.0, m.stderr_, 0.0));

  const auto cs = covariance_stats(ens, 300, 700);
  CHECK(within_sigma(cs.cov.mean, 2.0 * nu * 0.3, cs.cov.stderr_, 0.0));
  CHECK(within_sigma(cs.ordered_left.mean, 2.0 * nu, cs.ordered_left.stderr_, 0.0));
  CHECK(within_sigma(cs.ordered_right.mean, 0.0, cs.ordered_right.stderr_, 0.0));
}

TEST_CASE("wiener increments have variance 2 nu dt and disjoint increments are uncorrelated") {
  const double nu = 0.5, dt = 1e-2;
  const auto ens = simulate_ensemble(DriftField::linear(0.0, 0.0), config(nu, dt, 4, 50000),
                                     fixed_start(0.0), numkit::RngStream(3, 1));
  std::vector<double> sq, cross;
  for (std::size_t p = 0; p < ens.n_paths(); ++p) {
    const double d1 = ens.x(p, 1) - ens.x(p, 0);
    const double d2 = ens.x(p, 4) - ens.x(p, 2);
    sq.push_back(d1 * d1);
    cross.push_back(d1 * d2);
  }
  const auto v = mean_estimate(sq);
  const auto c = mean_estimate(cross);
  CHECK(within_sigma(v.mean, 2.0 * nu * dt, v.stderr_, 0.0));
  CHECK(within_sigma(c.mean, 0.0, c.stderr_, 0.0));
}

TEST_CASE("ornstein-uhlenbeck chain relaxes to its stationary variance") {
  const double nu = 0.5, dt = 1e-2;
  const auto ens = simulate_ensemble(DriftField::linear(-1.0, 0.0), config(nu, dt, 1000, 20000, {1000}),
                                     fixed_start(2.0), numkit::RngStream(5, 2));
  std::vector<double> sq;
  for (double x : ens.at_step(1000)) sq.push_back(x * x);
  const auto v = mean_estimate(sq);
  CHECK(within_sigma(v.mean, em_ou_variance(nu, dt), v.stderr_, 0.0));
  CHECK(std::abs(v.mean - nu) < 0.02);
}

TEST_CASE("simulation is deterministic and independent of path order") {
  const auto cfg = config(0.5, 1e-2, 20, 50);
  const auto drift = DriftField::linear(-1.0, 0.3);
  const auto a = simulate_ensemble(drift, cfg, gaussian_start(0.0, 1.0), numkit::RngStream(9, 4));
  const auto b = simulate_ensemble(drift, cfg, gaussian_start(0.0, 1.0), numkit::RngStream(9, 4));
  auto cfg2 = cfg;
  cfg2.n_paths = 10;
  const auto c = simulate_ensemble(drift, cfg2, gaussian_start(0.0, 1.0), numkit::RngStream(9, 4));
  for (std::size_t p = 0; p < 50; ++p)
    for (std::size_t s = 0; s <= 20; ++s) {
      CHECK(a.x(p, s) == b.x(p, s));
      if (p < 10) CHECK(a.x(p, s) == c.x(p, s));
    }
}

TEST_CASE("non-finite drift aborts with position and time") {
  DriftField bad = DriftField::linear(1e300, 0.0);
  const auto cfg = config(0.5, 1e10, 10, 1);
  try {
    simulate_ensemble(bad, cfg, fixed_start(1e10), numkit::RngStream(1, 1));
    FAIL("expected NumericalError");
  } catch (const NumericalError& e) {
    const std::string what = e.what();
    CHECK(what.find("x=") != std::string::npos);
    CHECK(what.find("t=") != std::string::npos);
  }
  CHECK_THROWS_AS(simulate_ensemble(bad, config(0.5, 0.0, 1, 1), fixed_start(0), numkit::RngStream(1, 1)),
                  PreconditionError);
  CHECK_THROWS_AS(simulate_ensemble(bad, config(-1.0, 0.1, 1, 1), fixed_start(0), numkit::RngStream(1, 1)),
                  PreconditionError);
}

TEST_CASE("boundary hits count steps spent beyond the drift grid") {
  const UniformGrid g(-0.5, 0.5, 11);
  const auto drift = DriftField::from_function(g, [](double) { return 0.0; });
  const auto ens = simulate_ensemble(drift, config(0.0, 0.1, 5, 3), fixed_start(2.0), numkit::RngStream(1, 1));
  CHECK(ens.boundary_hits() == 15);
}

TEST_CASE("drift estimates: wiener forward 0, backward x/t, difference 2 nu dlnrho") {
  const double nu = 0.5, dt = 1e-3;
  const auto ens = simulate_ensemble(DriftField::linear(0.0, 0.0), config(nu, dt, 501, 100000, {499, 500, 501}),
                                     fixed_start(0.0), numkit::RngStream(21, 0));
  const auto est = estimate_drifts(ens, 500, 20);
  const double t = ens.time(500);
  int checked = 0;
  for (std::size_t b = 0; b < 20; ++b) {
    if (!est.populated[b]) continue;
    ++checked;
    CHECK(within_sigma(est.forward[b].mean, 0.0, est.forward[b].stderr_, 0.0));
    CHECK(within_sigma(est.backward[b].mean, est.mean_x[b] / t, est.backward[b].stderr_, 0.0));
  }
  CHECK(checked >= 18);

  // Reversed process: forward drift of x(T - s) is minus the original backward drift.
  const auto rev = reverse(ens);
  const auto rest = estimate_drifts(rev, 1, 20);
  for (std::size_t b = 0; b < 20; ++b) {
    if (!rest.populated[b]) continue;
    CHECK(within_sigma(rest.forward[b].mean, -rest.mean_x[b] / t, rest.forward[b].stderr_, 0.0));
  }
}

TEST_CASE("drift estimates: stationary OU backward drift is +x") {
  const double nu = 0.5, dt = 1e-3;
  const double sd = std::sqrt(em_ou_variance(nu, dt));
  const auto ens = simulate_ensemble(DriftField::linear(-1.0, 0.0), config(nu, dt, 2, 100000),
                                     gaussian_start(0.0, sd), numkit::RngStream(22, 0));
  const auto est = estimate_drifts(ens, 1, 16);
  for (std::size_t b = 0; b < 16; ++b) {
    if (!est.populated[b]) continue;
    CHECK(within_sigma(est.backward[b].mean, est.mean_x[b], est.backward[b].stderr_, 0.0));
    CHECK(within_sigma(est.forward[b].mean, -est.mean_x[b], est.forward[b].stderr_, 0.0));
  }
  CHECK_THROWS_AS(estimate_drifts(ens, 0, 16), PreconditionError);
  CHECK_THROWS_AS(estimate_drifts(ens, 1, 16, 1000000), NumericalError);
}

TEST_CASE("kinetic terms: divergent overlapping slope and finite nonoverlapping part") {
  const double nu = 0.5;
  std::vector<double> dts{1e-2, 5e-3, 2.5e-3};
  std::vector<MeanEstimate> over;
  for (std::size_t i = 0; i < dts.size(); ++i) {
    const auto ens = simulate_ensemble(DriftField::linear(0.0, 0.0), config(nu, dts[i], 3, 100000),
                                       fixed_start(0.0), numkit::RngStream(31, i));
    const auto k = kinetic_action_terms(ens, 0);
    over.push_back(k.overlapping);
    CHECK(within_sigma(k.nonoverlapping.mean, 0.0, k.nonoverlapping.stderr_, 0.0));
  }
  const auto fit = fit_divergent_kinetic(dts, over);
  CHECK(std::abs(fit.divergent_coefficient - nu) < 0.05 * nu);

  const double c = 1.5;
  const auto ens = simulate_ensemble(DriftField::linear(0.0, c), config(1e-4, 1e-2, 3, 20000),
                                     fixed_start(0.0), numkit::RngStream(32, 0));
  const auto k = kinetic_action_terms(ens, 0);
  CHECK(within_sigma(k.nonoverlapping.mean, 0.5 * c * c, k.nonoverlapping.stderr_, 0.0));
  CHECK_THROWS_AS(kinetic_action_terms(ens, 2), PreconditionError);
}

TEST_CASE("kinetic term difference for the discrete OU chain") {
  // With b = -x frozen over each step: E overlapping = E x^2/2 + nu/dt and
  // E nonoverlapping = (1 - dt) E x^2/2 - nu.
  const double nu = 0.5, dt = 1e-2;
  const double var = em_ou_variance(nu, dt);
  const auto ens = simulate_ensemble(DriftField::linear(-1.0, 0.0), config(nu, dt, 2, 400000),
                                     gaussian_start(0.0, std::sqrt(var)), numkit::RngStream(33, 0));
  std::vector<double> diff;
  for (std::size_t p = 0; p < ens.n_paths(); ++p) {
    const double v1 = (ens.x(p, 1) - ens.x(p, 0)) / dt;
    const double v2 = (ens.x(p, 2) - ens.x(p, 1)) / dt;
    diff.push_back(0.5 * v1 * v1 - 0.5 * v1 * v2);
  }
  const auto d = mean_estimate(diff);
  CHECK(within_sigma(d.mean, 0.5 * dt * var + nu / dt + nu, d.stderr_, 0.0));
}

TEST_CASE("lagrangian kinds") {
  CHECK(lagrangian(LagrangianKind::generalized, 1.3, -0.4, 0.2, 0.0) ==
        lagrangian(LagrangianKind::yasue, 1.3, -0.4, 0.2));
  CHECK(lagrangian(LagrangianKind::yasue, 2.0, 2.0, 0.5) == doctest::Approx(1.5));
  CHECK(lagrangian(LagrangianKind::dissipative, 2.0, 2.0, 0.5) == doctest::Approx(1.5));
  CHECK(lagrangian(LagrangianKind::generalized, 2.0, 2.0, 0.5, 1.0) == doctest::Approx(1.5));
  CHECK(lagrangian(LagrangianKind::dissipative, 1.0, -1.0, 0.0) == doctest::Approx(-0.5));
}

TEST_CASE("action estimates: zero-diffusion agreement and ground-state quadrature") {
  const auto drift = DriftField::linear(0.0, 0.7);
  const auto det = simulate_ensemble(drift, config(0.0, 1e-2, 100, 50), gaussian_start(0.0, 1.0),
                                     numkit::RngStream(41, 0));
  auto V = [](double x) { return 0.5 * x * x; };
  const auto y = yasue_action_estimate(det, drift, drift, V, LagrangianKind::yasue);
  const auto d = yasue_action_estimate(det, drift, drift, V, LagrangianKind::dissipative);
  const auto g = yasue_action_estimate(det, drift, drift, V, LagrangianKind::generalized, 0.8);
  CHECK(within_sigma(y.value, d.value, y.stderr_, d.stderr_));
  CHECK(within_sigma(y.value, g.value, y.stderr_, g.stderr_));
  CHECK(y.value == doctest::Approx(d.value).epsilon(1e-12));

  // Stationary OU: b = -x, b* = +x, rho ~ N(0, 1/2). With V = 0 the
  // quadrature value of (b^2 + b*^2)/4 is E x^2 / 2 = 1/4.
  const double nu = 0.5, dt = 1e-2;
  const auto ens = simulate_ensemble(DriftField::linear(-1.0, 0.0), config(nu, dt, 200, 20000),
                                     gaussian_start(0.0, std::sqrt(em_ou_variance(nu, dt))),
                                     numkit::RngStream(42, 0));
  const auto est = yasue_action_estimate(ens, DriftField::linear(-1.0, 0.0), DriftField::linear(1.0, 0.0),
                                         [](double) { return 0.0; }, LagrangianKind::yasue);
  CHECK(within_sigma(est.value, 0.5 * em_ou_variance(nu, dt), est.stderr_, 0.0));
  CHECK(std::abs(est.value - 0.25) < 0.01);
}

TEST_CASE("action estimate rejects paths over empty bins") {
  const double nu = 0.5;
  const auto ens = simulate_ensemble(DriftField::linear(0.0, 0.0), config(nu, 1e-2, 3, 2000),
                                     fixed_start(0.0), numkit::RngStream(43, 0));
  const auto est = estimate_drifts(ens, 1, 30, 100);
  try {
    yasue_action_estimate(ens, est.forward_field(), est.backward_field(), [](double) { return 0.0; },
                          LagrangianKind::yasue);
    FAIL("expected PreconditionError");
  } catch (const PreconditionError& e) {
    CHECK(std::string(e.what()).find("forward:") != std::string::npos);
  }
}

TEST_CASE("paths csv export") {
  const auto ens = simulate_ensemble(DriftField::linear(0.0, 0.0), config(0.5, 0.1, 2, 3),
                                     fixed_start(0.25), numkit::RngStream(1, 2));
  const auto file = std::filesystem::temp_directory_path() / "smlab_paths_test.csv";
  write_paths_csv(ens, file.string(), 2);
  std::ifstream is(file);
  std::string line;
  std::getline(is, line);
  CHECK(line == "path_id,step,t,x");
  std::getline(is, line);
  CHECK(line == "0,0,0,0.25");
  std::size_t rows = 1;
  while (std::getline(is, line)) ++rows;
  CHECK(rows == 6);
  std::filesystem::remove(file);
}
