#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "smlab/tracedyn/trace_poly.hpp"

namespace smlab::tracedyn {

struct FlowTrajectory {
  std::vector<std::size_t> steps;
  std::vector<double> times;
  std::vector<TracePhaseSpace> states;
};

/// RK4 integration of dq_r/dt = dH/dp_r, dp_r/dt = -dH/dq_r (cyclic
/// derivatives). When the initial state is Hermitian and H is reversal
/// symmetric, each recorded state is checked to stay Hermitian within 1e-8
/// relative; violation throws NumericalError. Integrator failures surface
/// as StepError.
FlowTrajectory hamilton_flow(const TracePolynomial& hamiltonian, const TracePhaseSpace& state0, double dt,
                             std::size_t steps, std::size_t record_every = 1);

/// Sum over r of [q_r, p_r].
ComplexMatrix millard_charge(const TracePhaseSpace& state);

/// Tr sum_r (dA/dq_r dB/dp_r - dB/dq_r dA/dp_r).
Complex trace_poisson_bracket(const TracePolynomial& a, const TracePolynomial& b, const TracePhaseSpace& state);

/// Conservation diagnostics over a trajectory.
struct ConservationReport {
  double max_energy_drift = 0.0;   // max |Tr H(t) - Tr H(0)|
  double max_charge_drift = 0.0;   // max Frobenius norm of C(t) - C(0)
  double max_charge_trace = 0.0;   // max |Tr C(t)|
};

ConservationReport conservation_report(const TracePolynomial& hamiltonian, const FlowTrajectory& traj);

/// CSV with header `step,t,traceH,millard_frobenius,millard_trace`; the last
/// two columns are the Frobenius norm of the charge and |Tr| of it.
void write_trace_flow_csv(const TracePolynomial& hamiltonian, const FlowTrajectory& traj, const std::string& file);

}  // namespace smlab::tracedyn
