#include "smlab/tracedyn/flow.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "smlab/numkit/errors.hpp"
#include "smlab/numkit/rk4.hpp"

namespace smlab::tracedyn {

namespace {

numkit::MatrixState pack(const TracePhaseSpace& s) {
  numkit::MatrixState out(s.q);
  out.insert(out.end(), s.p.begin(), s.p.end());
  return out;
}

TracePhaseSpace unpack(const numkit::MatrixState& v) {
  const std::size_t r = v.size() / 2;
  TracePhaseSpace s;
  s.q.assign(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(r));
  s.p.assign(v.begin() + static_cast<std::ptrdiff_t>(r), v.end());
  return s;
}

}  // namespace

FlowTrajectory hamilton_flow(const TracePolynomial& hamiltonian, const TracePhaseSpace& state0, double dt,
                             std::size_t steps, std::size_t record_every) {
  if (state0.dof() == 0 || state0.p.size() != state0.dof())
    throw PreconditionError("hamilton_flow: state needs matching q and p lists");
  if (hamiltonian.degrees_of_freedom() > state0.dof())
    throw PreconditionError("hamilton_flow: hamiltonian uses symbols outside the state");
  if (!(dt > 0.0)) throw PreconditionError("hamilton_flow: dt must be positive");
  const std::size_t dof = state0.dof();
  numkit::MatrixRhs rhs = [&hamiltonian, dof](double, const numkit::MatrixState& v) {
    const TracePhaseSpace s = unpack(v);
    numkit::MatrixState out(2 * dof);
    for (std::size_t r = 0; r < dof; ++r) {
      out[r] = trace_derivative_at(hamiltonian, momentum(r), s);
      out[dof + r] = trace_derivative_at(hamiltonian, coordinate(r), s) * Complex(-1.0);
    }
    return out;
  };
  const auto raw = numkit::rk4_matrix_flow(rhs, pack(state0), dt, steps, record_every);
  const bool watch_hermitian = state0.hermitian(1e-12) && hamiltonian.reversal_symmetric();
  FlowTrajectory traj;
  for (std::size_t k = 0; k < raw.states.size(); ++k) {
    traj.times.push_back(raw.times[k]);
    traj.steps.push_back(static_cast<std::size_t>(std::llround(raw.times[k] / dt)));
    traj.states.push_back(unpack(raw.states[k]));
    if (watch_hermitian) {
      for (const auto* list : {&traj.states.back().q, &traj.states.back().p})
        for (const auto& m : *list)
          if (numkit::hermitian_asymmetry(m) > 1e-8 * std::max(1.0, m.max_abs()))
            throw NumericalError("hamilton_flow: hermiticity lost at t=" + std::to_string(raw.times[k]));
    }
  }
  return traj;
}

ComplexMatrix millard_charge(const TracePhaseSpace& state) {
  ComplexMatrix c(state.dim());
  for (std::size_t r = 0; r < state.dof(); ++r) c += numkit::commutator(state.q[r], state.p[r]);
  return c;
}

Complex trace_poisson_bracket(const TracePolynomial& a, const TracePolynomial& b, const TracePhaseSpace& state) {
  Complex sum = 0.0;
  for (std::size_t r = 0; r < state.dof(); ++r) {
    const auto aq = trace_derivative_at(a, coordinate(r), state);
    const auto ap = trace_derivative_at(a, momentum(r), state);
    const auto bq = trace_derivative_at(b, coordinate(r), state);
    const auto bp = trace_derivative_at(b, momentum(r), state);
    sum += (aq * bp - bq * ap).trace();
  }
  return sum;
}

ConservationReport conservation_report(const TracePolynomial& hamiltonian, const FlowTrajectory& traj) {
  ConservationReport rep;
  if (traj.states.empty()) return rep;
  const double h0 = trace_eval_complex(hamiltonian, traj.states.front()).real();
  const ComplexMatrix c0 = millard_charge(traj.states.front());
  for (const auto& s : traj.states) {
    const ComplexMatrix c = millard_charge(s);
    rep.max_energy_drift = std::max(rep.max_energy_drift, std::abs(trace_eval_complex(hamiltonian, s).real() - h0));
    rep.max_charge_drift = std::max(rep.max_charge_drift, (c - c0).frobenius_norm());
    rep.max_charge_trace = std::max(rep.max_charge_trace, std::abs(c.trace()));
  }
  return rep;
}

void write_trace_flow_csv(const TracePolynomial& hamiltonian, const FlowTrajectory& traj, const std::string& file) {
  std::ofstream os(file, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + file);
  os << "step,t,traceH,millard_frobenius,millard_trace\n";
  char buf[160];
  for (std::size_t k = 0; k < traj.states.size(); ++k) {
    const ComplexMatrix c = millard_charge(traj.states[k]);
    std::snprintf(buf, sizeof buf, "%zu,%.15g,%.15g,%.15g,%.15g\n", traj.steps[k], traj.times[k],
                  trace_eval_complex(hamiltonian, traj.states[k]).real(), c.frobenius_norm(), std::abs(c.trace()));
    os << buf;
  }
}

}  // namespace smlab::tracedyn
