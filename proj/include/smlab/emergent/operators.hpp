#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "smlab/emergent/basis.hpp"
#include "smlab/waveengine/hydro.hpp"

namespace smlab::emergent {

using waveengine::HydroFields;

/// Position, velocity and velocity-adjoint matrices in a weighted basis.
struct OperatorSet {
  ComplexMatrix x_hat;
  ComplexMatrix v_hat;          // f -> b f + 2 nu f'
  ComplexMatrix v_hat_adjoint;  // f -> b_* f - 2 nu f', built directly
  double nu = 0.0;
};

OperatorSet operator_matrices(const WeightedBasis& basis, const HydroFields& fields);

/// max |([v, x] - 2 nu I)_{jk}| over the leading block x block.
double commutator_block(const ComplexMatrix& v, const ComplexMatrix& x, double nu, std::size_t block);
/// Row-wise maximum deviation of [v, x] from 2 nu I.
std::vector<double> commutator_row_profile(const ComplexMatrix& v, const ComplexMatrix& x, double nu);

struct AccelerationPotential {
  Field acceleration;  // db/dt + nu b'' + (b^2)'/2
  Field potential;     // minus the antiderivative, zero at the left end
};

AccelerationPotential acceleration_and_potential(const HydroFields& f);
/// Midpoint form between two slices.
AccelerationPotential acceleration_and_potential(const HydroFields& f0, const HydroFields& f1);

/// Three quadrature forms of the mean energy (1, H 1).
struct HamiltonianForms {
  double operator_square = 0.0;  // rho [ (b^2 + 2 nu b')/2 + U ]
  double drift_product = 0.0;    // rho [ (b - 2 nu dlog rho) b / 2 + U ]
  double velocity_split = 0.0;   // rho [ (v^2 - u^2)/2 + U ]
};

HamiltonianForms hamiltonian_expectation(const HydroFields& fields, const Field& potential);

/// v v / 2 + potential matrix (+ quantum term matrix when supplied).
ComplexMatrix hamiltonian_matrix(const OperatorSet& ops, const ComplexMatrix& potential,
                                 const ComplexMatrix* quantum_term = nullptr);

/// Trajectory of dX/dt = [H, X] / (2 nu) for position and velocity matrices.
struct HeisenbergTrajectory {
  std::vector<double> times;
  std::vector<ComplexMatrix> x;
  std::vector<ComplexMatrix> v;
};

HeisenbergTrajectory heisenberg_flow(const ComplexMatrix& x_hat, const ComplexMatrix& v_hat,
                                     const ComplexMatrix& hamiltonian, double nu, double dt, std::size_t steps,
                                     std::size_t record_every = 1);

/// One operator carried by the flow over a signed time span s.
ComplexMatrix heisenberg_evolve(const ComplexMatrix& op, const ComplexMatrix& hamiltonian, double nu, double s,
                                double max_dt);

/// (1, X(t_1) ... X(t_n) 1) with the factors sorted by increasing time from
/// left to right; t0 is the anchor time of the basis. Basis function 0 must
/// be the constant 1.
double time_ordered_moment(const ComplexMatrix& x_hat, const ComplexMatrix& hamiltonian, double nu, double t0,
                           std::vector<double> times, double max_dt);

/// CSV with header `i,j,value` (real parts, row-major).
void write_operator_csv(const ComplexMatrix& m, const std::string& file);

}  // namespace smlab::emergent
