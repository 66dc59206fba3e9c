#pragma once

#include <cstddef>
#include <vector>

#include "smlab/waveengine/hydro.hpp"

namespace smlab::waveengine {

/// Positive real pair exp(R + S), exp(R - S) with the potential U driving
/// [2 nu^2 d^2 + U] phi_pm = -+ 2 nu d/dt phi_pm.
struct MarkovWavePair {
  UniformGrid grid;
  double t = 0.0;
  double nu = 0.5;
  Field phi_plus;
  Field phi_minus;
  Field U;
  std::vector<bool> valid;
};

/// S is the antiderivative of v / (2 nu) from the left end, with v zeroed on
/// points excluded by the density floor. Requires nu > 0.
MarkovWavePair markov_pair_from_fields(const HydroFields& f, Field U);

struct MarkovResidual {
  double plus = 0.0;   // sup over valid points
  double minus = 0.0;
  double fitted_constant = 0.0;
  Field residual_plus;
  Field residual_minus;
};

/// Stationary residuals (time derivative dropped). With `fit_constant` the
/// additive constant c in U + c is chosen by joint least squares first.
MarkovResidual markov_stationary_residual(const MarkovWavePair& pair, bool fit_constant = true,
                                          Stencil stencil = Stencil::fourth);

/// Residuals between two slices, spatial parts averaged (Crank-Nicolson form).
MarkovResidual markov_step_residual(const MarkovWavePair& p0, const MarkovWavePair& p1,
                                    Stencil stencil = Stencil::second);

/// sup |phi_plus * phi_minus - rho| over valid points.
double markov_product_defect(const MarkovWavePair& pair, const Field& rho);

/// Crank-Nicolson steps of both equations with zero boundary values:
/// phi_minus obeys a forward heat equation and phi_plus a backward one.
/// Throws StepError at the first step where either field stops being
/// positive on the initially valid points.
std::vector<MarkovWavePair> solve_markov_wave(const MarkovWavePair& pair0, double dt, std::size_t steps,
                                              std::size_t record_every = 1);

}  // namespace smlab::waveengine
