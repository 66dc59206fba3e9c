#pragma once

#include <cstddef>
#include <vector>

#include "smlab/numkit/complex_matrix.hpp"
#include "smlab/numkit/grid.hpp"

namespace smlab::waveengine {

using numkit::Complex;
using numkit::ComplexVector;
using numkit::Field;
using numkit::UniformGrid;

/// Complex wavefunction on a uniform grid at time t (mass 1).
struct WavefunctionGrid {
  UniformGrid grid;
  ComplexVector psi;
  double t = 0.0;
  double hbar = 1.0;
};

/// Trapezoid integral of |psi|^2.
double norm_squared(const WavefunctionGrid& w);
/// Copy scaled to unit norm.
WavefunctionGrid normalized(WavefunctionGrid w);

/// Crank-Nicolson steps of i hbar psi_t = (-hbar^2/2 psi'' + V psi) with
/// psi = 0 at both grid ends. Throws NumericalError when the norm drifts by
/// more than `norm_tol` (relative) over the run.
WavefunctionGrid evolve_schrodinger(const WavefunctionGrid& w, const Field& potential, double dt,
                                    std::size_t steps, double norm_tol = 1e-6);

/// Same integration, keeping every `record_every`-th state (and the last).
std::vector<WavefunctionGrid> evolve_schrodinger_trajectory(const WavefunctionGrid& w,
                                                            const Field& potential, double dt,
                                                            std::size_t steps,
                                                            std::size_t record_every = 1,
                                                            double norm_tol = 1e-6);

/// Lowest eigenvector of the discrete Dirichlet Hamiltonian used by the
/// solver (inverse iteration), real and positive, unit norm.
struct DiscreteEigenstate {
  WavefunctionGrid state;
  double energy = 0.0;
};
DiscreteEigenstate discrete_ground_state(const UniformGrid& grid, const Field& potential,
                                         double hbar = 1.0);

/// Sup over interior points of the Crank-Nicolson residual linking w0 to w1.
double schrodinger_step_residual(const WavefunctionGrid& w0, const WavefunctionGrid& w1,
                                 const Field& potential);

/// Wavefunction from samples of a complex function.
template <class F>
WavefunctionGrid tabulate(const UniformGrid& grid, F&& f, double t = 0.0, double hbar = 1.0) {
  WavefunctionGrid w{grid, ComplexVector(grid.size()), t, hbar};
  for (std::size_t i = 0; i < grid.size(); ++i) w.psi[i] = f(grid.x(i));
  return w;
}

}  // namespace smlab::waveengine
