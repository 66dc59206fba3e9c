#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "smlab/numkit/complex_matrix.hpp"

namespace smlab::numkit {

using MatrixState = std::vector<ComplexMatrix>;
using MatrixRhs = std::function<MatrixState(double t, const MatrixState& state)>;

struct MatrixTrajectory {
  std::vector<double> times;
  std::vector<MatrixState> states;
};

/// One classical fourth-order Runge-Kutta step.
MatrixState rk4_step(const MatrixRhs& rhs, double t, const MatrixState& state, double dt);

/// Fixed-step RK4 over `steps` steps starting at t = 0, recording the initial
/// state and every `record_every`-th state (the final state is always kept).
/// Throws StepError carrying the step index if a non-finite entry appears.
MatrixTrajectory rk4_matrix_flow(const MatrixRhs& rhs, MatrixState state0, double dt,
                                 std::size_t steps, std::size_t record_every = 1);

}  // namespace smlab::numkit
