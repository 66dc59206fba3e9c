#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "experiment_fns.hpp"
#include "smlab/numkit/errors.hpp"
#include "smlab/tracedyn/flow.hpp"
#include "smlab/tracedyn/trace_poly.hpp"

namespace smlab::cli::experiments {

using namespace tracedyn;

void trace_conservation(RunContext& ctx) {
  auto& p = ctx.params();
  const std::size_t dim = p.count("dim", 4, 1, 64);
  const std::size_t dof = p.count("dof", 2, 1, 16);
  const double quartic = p.number("quartic", 0.1);
  const std::string custom = p.text("hamiltonian", "");
  const double dt = p.number("dt", 1e-3);
  const double horizon = p.number("horizon", 10.0);
  const double scale = p.number("initial_scale", 0.5);
  const std::size_t record_every = p.count("record_every", 100, 1);
  const double energy_tol = p.number("energy_tol", 1e-8);
  const double charge_tol = p.number("charge_tol", 1e-6);
  const double trace_tol = p.number("trace_tol", 1e-12);
  p.finish();

  const TracePolynomial h = custom.empty() ? anharmonic_hamiltonian(dof, quartic) : TracePolynomial::parse(custom);
  auto rng = ctx.rng(1);
  const auto s0 = TracePhaseSpace::random(dof, dim, rng, true, scale);
  const auto steps = static_cast<std::size_t>(std::llround(horizon / dt));
  const auto traj = hamilton_flow(h, s0, dt, steps, record_every);
  const auto rep = conservation_report(h, traj);
  ctx.metric("initial_energy", trace_eval(h, s0));
  ctx.metric("initial_charge_norm", millard_charge(s0).frobenius_norm());
  ctx.check("energy_drift", rep.max_energy_drift, Relation::le, energy_tol);
  ctx.check("charge_drift", rep.max_charge_drift, Relation::le, charge_tol);
  ctx.check("charge_trace", rep.max_charge_trace, Relation::le, trace_tol);
  write_trace_flow_csv(h, traj, ctx.file("trace_flow.csv"));
}

void trace_derivative(RunContext& ctx) {
  auto& p = ctx.params();
  const std::size_t n_polys = p.count("polynomials", 100, 1);
  const std::size_t max_degree = p.count("max_degree", 4, 1, 12);
  const std::size_t max_dim = p.count("max_dim", 6, 1, 32);
  const std::size_t dof = p.count("dof", 2, 1, 8);
  const std::size_t terms = p.count("terms", 5, 1);
  const double eps = p.number("epsilon", 1e-5);
  const double tol = p.number("tol", 1e-6);
  p.finish();

  std::ofstream os(ctx.file("trace_derivative.csv"), std::ios::binary);
  os << "polynomial,dim,symbol,symbolic,finite_difference,error\n";
  double worst = 0.0;
  char buf[200];
  for (std::size_t k = 0; k < n_polys; ++k) {
    auto rng = ctx.rng(1000 + k);
    const std::size_t dim = 1 + k % max_dim;
    const auto poly = random_polynomial(dof, max_degree, terms, rng);
    const auto s = TracePhaseSpace::random(dof, dim, rng, false, 0.5);
    for (std::size_t r = 0; r < 2 * dof; ++r) {
      const Symbol sym = r < dof ? coordinate(r) : momentum(r - dof);
      ComplexMatrix e(dim);
      for (std::size_t i = 0; i < dim; ++i)
        for (std::size_t j = 0; j < dim; ++j) e(i, j) = rng.complex_normal();
      const Complex exact = (e * trace_derivative_at(poly, sym, s)).trace();
      TracePhaseSpace plus = s, minus = s;
      plus[sym] += e * Complex(eps);
      minus[sym] -= e * Complex(eps);
      const Complex fd = (trace_eval_complex(poly, plus) - trace_eval_complex(poly, minus)) / (2.0 * eps);
      const double err = std::abs(fd - exact) / std::max(1.0, std::abs(exact));
      worst = std::max(worst, err);
      std::snprintf(buf, sizeof buf, "%zu,%zu,%s,%.15g,%.15g,%.3e\n", k, dim, to_string(sym).c_str(), exact.real(),
                    fd.real(), err);
      os << buf;
    }
  }
  ctx.metric("polynomials", static_cast<double>(n_polys));
  ctx.check("max_relative_error", worst, Relation::le, tol);
}

}  // namespace smlab::cli::experiments
