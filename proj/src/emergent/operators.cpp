#include "smlab/emergent/operators.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "smlab/numkit/errors.hpp"
#include "smlab/numkit/rk4.hpp"

namespace smlab::emergent {

OperatorSet operator_matrices(const WeightedBasis& basis, const HydroFields& fields) {
  if (!basis.grid.same_as(fields.grid)) throw PreconditionError("operator_matrices: grids differ");
  const std::size_t n = basis.size(), m = basis.grid.size();
  OperatorSet ops;
  ops.nu = fields.nu;
  ops.x_hat = multiplication_matrix(basis, basis.grid.points());
  ops.v_hat = ComplexMatrix(n);
  ops.v_hat_adjoint = ComplexMatrix(n);
  Field fwd(m), bwd(m);
  const double two_nu = 2.0 * fields.nu;
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < m; ++i) {
      fwd[i] = fields.b[i] * basis.values[k][i] + two_nu * basis.derivatives[k][i];
      bwd[i] = fields.b_star[i] * basis.values[k][i] - two_nu * basis.derivatives[k][i];
    }
    for (std::size_t j = 0; j < n; ++j) {
      ops.v_hat(j, k) = weighted_inner(basis, basis.values[j], fwd);
      ops.v_hat_adjoint(j, k) = weighted_inner(basis, basis.values[j], bwd);
    }
  }
  return ops;
}

double commutator_block(const ComplexMatrix& v, const ComplexMatrix& x, double nu, std::size_t block) {
  if (block > v.dim()) throw PreconditionError("commutator_block: block larger than matrix");
  const ComplexMatrix c = numkit::commutator(v, x);
  double worst = 0.0;
  for (std::size_t j = 0; j < block; ++j)
    for (std::size_t k = 0; k < block; ++k)
      worst = std::max(worst, std::abs(c(j, k) - (j == k ? 2.0 * nu : 0.0)));
  return worst;
}

std::vector<double> commutator_row_profile(const ComplexMatrix& v, const ComplexMatrix& x, double nu) {
  const ComplexMatrix c = numkit::commutator(v, x);
  std::vector<double> rows(c.dim(), 0.0);
  for (std::size_t j = 0; j < c.dim(); ++j)
    for (std::size_t k = 0; k < c.dim(); ++k)
      rows[j] = std::max(rows[j], std::abs(c(j, k) - (j == k ? 2.0 * nu : 0.0)));
  return rows;
}

namespace {

Field spatial_acceleration(const HydroFields& f) {
  const Field b2 = numkit::d2(f.grid, f.b);
  Field sq(f.b.size());
  for (std::size_t i = 0; i < sq.size(); ++i) sq[i] = 0.5 * f.b[i] * f.b[i];
  const Field dsq = numkit::d1(f.grid, sq);
  Field a(sq.size());
  for (std::size_t i = 0; i < a.size(); ++i) a[i] = f.nu * b2[i] + dsq[i];
  return a;
}

AccelerationPotential finish(const UniformGrid& g, Field a) {
  Field u = numkit::antiderivative(g, a);
  for (auto& x : u) x = -x;
  return {std::move(a), std::move(u)};
}

}  // namespace

AccelerationPotential acceleration_and_potential(const HydroFields& f) {
  return finish(f.grid, spatial_acceleration(f));
}

AccelerationPotential acceleration_and_potential(const HydroFields& f0, const HydroFields& f1) {
  if (!f0.grid.same_as(f1.grid)) throw PreconditionError("acceleration_and_potential: grids differ");
  const double dt = f1.t - f0.t;
  if (!(dt > 0.0)) throw PreconditionError("acceleration_and_potential: slices must be increasing in time");
  Field a = spatial_acceleration(f0);
  const Field a1 = spatial_acceleration(f1);
  for (std::size_t i = 0; i < a.size(); ++i) a[i] = 0.5 * (a[i] + a1[i]) + (f1.b[i] - f0.b[i]) / dt;
  return finish(f0.grid, std::move(a));
}

HamiltonianForms hamiltonian_expectation(const HydroFields& f, const Field& potential) {
  const std::size_t n = f.grid.size();
  if (potential.size() != n) throw PreconditionError("hamiltonian_expectation: potential size mismatch");
  const Field db = numkit::d1(f.grid, f.b);
  const Field dl = numkit::d1(f.grid, f.log_rho);
  Field p1(n), p2(n), p3(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double U = potential[i];
    p1[i] = f.rho[i] * (0.5 * (f.b[i] * f.b[i] + 2.0 * f.nu * db[i]) + U);
    p2[i] = f.rho[i] * (0.5 * (f.b[i] - 2.0 * f.nu * dl[i]) * f.b[i] + U);
    p3[i] = f.rho[i] * (0.5 * (f.v[i] * f.v[i] - f.u[i] * f.u[i]) + U);
  }
  return {numkit::integrate(f.grid, p1), numkit::integrate(f.grid, p2), numkit::integrate(f.grid, p3)};
}

ComplexMatrix hamiltonian_matrix(const OperatorSet& ops, const ComplexMatrix& potential,
                                 const ComplexMatrix* quantum_term) {
  ComplexMatrix h = ops.v_hat * ops.v_hat * numkit::Complex(0.5) + potential;
  if (quantum_term) h += *quantum_term;
  return h;
}

namespace {

numkit::MatrixRhs commutator_rhs(const ComplexMatrix& h, double nu, double sign) {
  const numkit::Complex k(sign / (2.0 * nu));
  return [h, k](double, const numkit::MatrixState& s) {
    numkit::MatrixState out;
    out.reserve(s.size());
    for (const auto& m : s) out.push_back(numkit::commutator(h, m) * k);
    return out;
  };
}

}  // namespace

HeisenbergTrajectory heisenberg_flow(const ComplexMatrix& x_hat, const ComplexMatrix& v_hat,
                                     const ComplexMatrix& hamiltonian, double nu, double dt, std::size_t steps,
                                     std::size_t record_every) {
  if (!(nu > 0.0)) throw PreconditionError("heisenberg_flow: nu must be positive");
  const auto traj = numkit::rk4_matrix_flow(commutator_rhs(hamiltonian, nu, 1.0), {x_hat, v_hat}, dt, steps,
                                            record_every);
  HeisenbergTrajectory out;
  out.times = traj.times;
  for (const auto& s : traj.states) {
    out.x.push_back(s[0]);
    out.v.push_back(s[1]);
  }
  return out;
}

ComplexMatrix heisenberg_evolve(const ComplexMatrix& op, const ComplexMatrix& hamiltonian, double nu, double s,
                                double max_dt) {
  if (!(nu > 0.0)) throw PreconditionError("heisenberg_evolve: nu must be positive");
  if (!(max_dt > 0.0)) throw PreconditionError("heisenberg_evolve: max_dt must be positive");
  if (s == 0.0) return op;
  const auto steps = static_cast<std::size_t>(std::ceil(std::abs(s) / max_dt));
  const double dt = std::abs(s) / static_cast<double>(steps);
  const auto traj = numkit::rk4_matrix_flow(commutator_rhs(hamiltonian, nu, s > 0 ? 1.0 : -1.0), {op}, dt,
                                            steps, steps);
  return traj.states.back()[0];
}

double time_ordered_moment(const ComplexMatrix& x_hat, const ComplexMatrix& hamiltonian, double nu, double t0,
                           std::vector<double> times, double max_dt) {
  if (times.empty()) return 1.0;
  std::sort(times.begin(), times.end());
  ComplexMatrix prod = ComplexMatrix::identity(x_hat.dim());
  for (double t : times) prod = prod * heisenberg_evolve(x_hat, hamiltonian, nu, t - t0, max_dt);
  return prod(0, 0).real();
}

void write_operator_csv(const ComplexMatrix& m, const std::string& file) {
  std::ofstream os(file, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + file);
  os << "i,j,value\n";
  char buf[128];
  for (std::size_t i = 0; i < m.dim(); ++i)
    for (std::size_t j = 0; j < m.dim(); ++j) {
      std::snprintf(buf, sizeof buf, "%zu,%zu,%.15g\n", i, j, m(i, j).real());
      os << buf;
    }
}

}  // namespace smlab::emergent
