#include <algorithm>
#include <cmath>

#include "experiment_fns.hpp"
#include "smlab/emergent/basis.hpp"
#include "smlab/emergent/operators.hpp"
#include "smlab/numkit/errors.hpp"
#include "smlab/waveengine/hydro.hpp"

namespace smlab::cli::experiments {

using emergent::BasisKind;
using numkit::Complex;
using numkit::ComplexMatrix;
using numkit::Field;
using numkit::UniformGrid;

namespace {

// Heat-kernel density at time t0 (variance 2 nu t0) with current velocity
// x / (2 t0), so that the forward drift vanishes.
waveengine::HydroFields wiener_fields(double nu, double t0, double half_width_sd, std::size_t points) {
  const double sd = std::sqrt(2.0 * nu * t0);
  const UniformGrid g(-half_width_sd * sd, half_width_sd * sd, points);
  Field lr(points), v(points);
  for (std::size_t i = 0; i < points; ++i) {
    const double x = g.x(i);
    lr[i] = -x * x / (4.0 * nu * t0);
    v[i] = x / (2.0 * t0);
  }
  return waveengine::fields_from_log_density(g, lr, v, nu, t0, 1.0, false);
}

double leading_block_diff(const ComplexMatrix& a, const ComplexMatrix& b, std::size_t block) {
  double worst = 0.0;
  for (std::size_t i = 0; i < block; ++i)
    for (std::size_t j = 0; j < block; ++j) worst = std::max(worst, std::abs(a(i, j) - b(i, j)));
  return worst;
}

}  // namespace

void emergent_commutator(RunContext& ctx) {
  auto& p = ctx.params();
  const double nu = p.number("nu", 0.5);
  const double t0 = p.number("t0", 1.0);
  const std::size_t n = p.count("n_basis", 20, 3, emergent::kMaxBasisSize);
  const std::size_t block = p.count("block", 10, 1);
  const std::size_t points = p.count("grid_points", 8001, 101);
  const double width = p.number("half_width_sd", 20.0);
  const auto kind = emergent::parse_basis_kind(p.text("basis", "hermite_analytic"));
  const double tol = p.number("tol", 1e-8);
  p.finish();
  if (block + 2 > n) throw PreconditionError("block must be at most n_basis - 2");

  const auto f = wiener_fields(nu, t0, width, points);
  const auto basis = emergent::build_basis(f.grid, f.rho, n, kind);
  const auto ops = emergent::operator_matrices(basis, f);
  const double orth = numkit::max_abs_diff(emergent::gram_matrix(basis), ComplexMatrix::identity(n));
  const double comm = emergent::commutator_block(ops.v_hat, ops.x_hat, nu, block);
  const double adj = numkit::max_abs_diff(ops.v_hat.transpose(), ops.v_hat_adjoint);
  const auto rows = emergent::commutator_row_profile(ops.v_hat, ops.x_hat, nu);
  ctx.metric("orthonormality", orth);
  ctx.metric("x_hat_asymmetry", numkit::hermitian_asymmetry(ops.x_hat));
  ctx.metric("commutator_last_row", rows.back());
  ctx.metric("commutator_trace", std::abs(numkit::commutator(ops.v_hat, ops.x_hat).trace()));
  ctx.check("commutator_block", comm, Relation::le, tol);
  ctx.check("adjoint_identity", adj, Relation::le, tol);
  ctx.check("basis_orthonormal", orth, Relation::le, 1e-10);
  emergent::write_operator_csv(ops.x_hat, ctx.file("operator_x.csv"));
  emergent::write_operator_csv(ops.v_hat, ctx.file("operator_v.csv"));
  emergent::write_operator_csv(ops.v_hat_adjoint, ctx.file("operator_v_adjoint.csv"));
  emergent::write_operator_csv(numkit::commutator(ops.v_hat, ops.x_hat), ctx.file("operator_commutator.csv"));
}

void hamiltonian_chain(RunContext& ctx) {
  auto& p = ctx.params();
  const double nu = p.number("nu", 0.5);
  const double variance = p.number("variance", 0.5);
  const double current = p.number("current_slope", 0.0);
  const std::size_t points = p.count("grid_points", 8001, 101);
  const double half_width = p.number("half_width", 20.0);
  const double tol = p.number("tol", 1e-8);
  p.finish();

  // Gaussian density; a nonzero current_slope adds v = current_slope * x.
  const UniformGrid g(-half_width, half_width, points);
  Field lr(points), v(points);
  for (std::size_t i = 0; i < points; ++i) {
    lr[i] = -g.x(i) * g.x(i) / (2.0 * variance);
    v[i] = current * g.x(i);
  }
  const auto f = waveengine::fields_from_log_density(g, lr, v, nu, 0.0, 1.0, false);
  const auto ap = emergent::acceleration_and_potential(f);
  const auto h = emergent::hamiltonian_expectation(f, ap.potential);
  const double scale = std::max(1.0, std::abs(h.operator_square));
  ctx.metric("operator_square", h.operator_square);
  ctx.metric("drift_product", h.drift_product);
  ctx.metric("velocity_split", h.velocity_split);
  ctx.check("operator_square_vs_drift_product", std::abs(h.operator_square - h.drift_product) / scale, Relation::le,
            tol);
  ctx.check("operator_square_vs_velocity_split", std::abs(h.operator_square - h.velocity_split) / scale,
            Relation::le, tol);
  const auto basis = emergent::build_basis(g, f.rho, 8, BasisKind::hermite_analytic);
  const auto ops = emergent::operator_matrices(basis, f);
  const auto H = emergent::hamiltonian_matrix(ops, emergent::multiplication_matrix(basis, ap.potential));
  ctx.metric("matrix_mean_energy", H(0, 0).real());
  emergent::write_operator_csv(H, ctx.file("operator_H.csv"));
}

void heisenberg_flow(RunContext& ctx) {
  auto& p = ctx.params();
  const double nu = p.number("nu", 0.5);
  const double t0 = p.number("t0", 1.0);
  const std::size_t n = p.count("n_basis", 12, 4, emergent::kMaxBasisSize);
  const double dt = p.number("dt", 1e-2);
  const double horizon = p.number("horizon", 1.0);
  const std::size_t points = p.count("grid_points", 8001, 101);
  const double linear_tol = p.number("linear_tol", 1e-8);
  const double comm_tol = p.number("commutator_tol", 1e-6);
  p.finish();
  const auto steps = static_cast<std::size_t>(std::llround(horizon / dt));
  if (steps == 0) throw PreconditionError("horizon must cover at least one step");

  const auto f = wiener_fields(nu, t0, 16.0, points);
  const auto basis = emergent::build_basis(f.grid, f.rho, n, BasisKind::hermite_analytic);
  const auto ops = emergent::operator_matrices(basis, f);
  const auto ap = emergent::acceleration_and_potential(f);
  const auto H = emergent::hamiltonian_matrix(ops, emergent::multiplication_matrix(basis, ap.potential));
  const auto traj = emergent::heisenberg_flow(ops.x_hat, ops.v_hat, H, nu, dt, steps, 1);

  // The last basis column carries truncation error; compare the leading block.
  const std::size_t lead = n - 1, comm_block = n - 2;
  double lin = 0.0, comm = 0.0, energy = 0.0;
  const double e0 = (0.5 * (ops.v_hat * ops.v_hat)(0, 0)).real();
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    const auto expect = ops.x_hat + ops.v_hat * Complex(traj.times[k]);
    lin = std::max(lin, leading_block_diff(traj.x[k], expect, lead));
    comm = std::max(comm, emergent::commutator_block(traj.v[k], traj.x[k], nu, comm_block));
    energy = std::max(energy, std::abs((0.5 * (traj.v[k] * traj.v[k])(0, 0)).real() - e0));
  }
  ctx.metric("initial_difference", numkit::max_abs_diff(traj.x.front(), ops.x_hat));
  ctx.metric("mean_energy_drift", energy);
  ctx.metric("last_column_deviation",
             numkit::max_abs_diff(traj.x.back(), ops.x_hat + ops.v_hat * Complex(traj.times.back())));
  ctx.check("free_flow_linear", lin, Relation::le, linear_tol);
  ctx.check("commutator_preserved", comm, Relation::le, comm_tol);
  emergent::write_operator_csv(traj.x.back(), ctx.file("operator_x_final.csv"));
  emergent::write_operator_csv(traj.v.back(), ctx.file("operator_v_final.csv"));
}

}  // namespace smlab::cli::experiments
