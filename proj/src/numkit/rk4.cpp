#include "smlab/numkit/rk4.hpp"

#include <string>

#include "smlab/numkit/errors.hpp"

namespace smlab::numkit {

namespace {

MatrixState axpy(const MatrixState& x, double a, const MatrixState& k) {
  MatrixState r = x;
  for (std::size_t i = 0; i < r.size(); ++i) r[i] += k[i] * Complex(a);
  return r;
}

}  // namespace

MatrixState rk4_step(const MatrixRhs& rhs, double t, const MatrixState& state, double dt) {
  const MatrixState k1 = rhs(t, state);
  const MatrixState k2 = rhs(t + 0.5 * dt, axpy(state, 0.5 * dt, k1));
  const MatrixState k3 = rhs(t + 0.5 * dt, axpy(state, 0.5 * dt, k2));
  const MatrixState k4 = rhs(t + dt, axpy(state, dt, k3));
  MatrixState next = state;
  for (std::size_t i = 0; i < next.size(); ++i) {
    auto out = next[i].data();
    auto a = k1[i].data(), b = k2[i].data(), c = k3[i].data(), d = k4[i].data();
    for (std::size_t j = 0; j < out.size(); ++j)
      out[j] += (dt / 6.0) * (a[j] + 2.0 * b[j] + 2.0 * c[j] + d[j]);
  }
  return next;
}

MatrixTrajectory rk4_matrix_flow(const MatrixRhs& rhs, MatrixState state0, double dt,
                                 std::size_t steps, std::size_t record_every) {
  if (!(dt > 0.0)) throw PreconditionError("rk4_matrix_flow: dt must be positive");
  if (record_every == 0) record_every = 1;
  MatrixTrajectory traj;
  traj.times.push_back(0.0);
  traj.states.push_back(state0);
  MatrixState state = std::move(state0);
  for (std::size_t s = 1; s <= steps; ++s) {
    const double t = static_cast<double>(s - 1) * dt;
    state = rk4_step(rhs, t, state, dt);
    for (const auto& m : state)
      if (!all_finite(m))
        throw StepError("rk4_matrix_flow: non-finite state at step " + std::to_string(s), s);
    if (s % record_every == 0 || s == steps) {
      traj.times.push_back(static_cast<double>(s) * dt);
      traj.states.push_back(state);
    }
  }
  return traj;
}

}  // namespace smlab::numkit
