#pragma once

#include <vector>

#include "smlab/waveengine/hydro.hpp"
#include "smlab/waveengine/wavefunction.hpp"

namespace smlab::waveengine {

/// Hamilton-Jacobi forms. `schrodinger` and `dissipative` act on S with
/// dS/dx = v and differ in the sign of the two density terms; `modified`
/// acts on S with dS/dx = b and carries nu * S''.
enum class HjVariant { schrodinger, modified, dissipative };

struct ResidualReport {
  Field residual;
  std::vector<bool> mask;
  /// sup over the mask of |residual - mean(residual)|
  double demeaned_sup = 0.0;
};

/// Between two slices: spatial parts averaged, dS/dt from the difference of
/// antiderivatives taken from the left end (velocity zeroed on floored points).
ResidualReport hj_residual(const HydroFields& f0, const HydroFields& f1, const Field& potential,
                           HjVariant variant);
/// Stationary form (dS/dt = 0).
ResidualReport hj_residual(const HydroFields& f, const Field& potential, HjVariant variant);
/// Worst demeaned norm over consecutive slices.
double hj_residual(const std::vector<HydroFields>& traj, const Field& potential, HjVariant variant);

/// sup over interior valid points of d rho/dt + (v rho)' at the midpoint.
double continuity_residual(const HydroFields& f0, const HydroFields& f1);
double continuity_residual(const std::vector<HydroFields>& traj);

/// Residual of the rescaled equation for chi = exp(R + i S / z) between two
/// solver slices, with the 3-point Laplacian and time-averaged spatial part.
/// Throws NumericalError when more than 1% of the grid is floored.
double scaled_equation_residual(const WavefunctionGrid& w0, const WavefunctionGrid& w1,
                                const Field& potential, Complex z);

/// Real form for z = sign * i * modulus acting on exp(R + sign * S / modulus).
double real_scaled_residual(const WavefunctionGrid& w0, const WavefunctionGrid& w1, const Field& potential,
                            double modulus, int sign);

}  // namespace smlab::waveengine
