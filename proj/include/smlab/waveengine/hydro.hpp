#pragma once

#include <span>
#include <string>
#include <vector>

#include "smlab/numkit/grid.hpp"
#include "smlab/waveengine/wavefunction.hpp"

namespace smlab::waveengine {

using numkit::Stencil;

/// Relative density floor: rho below floor_ratio * max(rho) is clamped and
/// the point excluded from residual norms.
inline constexpr double kDensityFloorRatio = 1e-12;

/// Density, phase and velocity fields at one time (mass 1).
struct HydroFields {
  UniformGrid grid;
  double t = 0.0;
  double nu = 0.5;
  double hbar = 1.0;
  Field rho;      // floored and normalised
  Field log_rho;
  Field R;        // log_rho / 2
  Field S_phase;  // unwrapped phase (zero for real-density inputs)
  Field u;        // nu * d log_rho
  Field v;        // current velocity
  Field b;        // u + v
  Field b_star;   // v - u
  /// Points above the floor whose neighbours within 4 cells are also above it
  /// (room for a second derivative of a first derivative).
  std::vector<bool> valid;
  std::size_t floored_points = 0;

  std::size_t valid_count() const;
};

/// Density, phase and drifts from a wavefunction; v = hbar * dS/dx. When
/// `previous` is given the phase is shifted by a multiple of 2*pi so that it
/// is continuous in time at the density maximum. Throws NumericalError when
/// the principal phase step between adjacent valid points exceeds 0.75*pi.
HydroFields fields_from_wavefunction(const WavefunctionGrid& w, double nu,
                                     const HydroFields* previous = nullptr,
                                     Stencil stencil = Stencil::fourth);

/// Fields from a log-density and current velocity. `floor` applies the
/// relative density floor; otherwise log_rho is used as given (after
/// normalisation).
HydroFields fields_from_log_density(const UniformGrid& grid, Field log_rho, Field v, double nu,
                                    double t = 0.0, double hbar = 1.0, bool floor = true,
                                    Stencil stencil = Stencil::fourth);

/// Diffusion constant hbar/(2m) * (1 - beta/2)^(-1/2); beta < 2.
double nu_from_beta(double beta, double hbar = 1.0, double mass = 1.0);

enum class Direction { forward, backward };

/// forward: df/dt + b f' + nu f''; backward: df/dt + b_* f' - nu f''.
/// An empty `df_dt` means f is stationary.
Field generator_apply(const HydroFields& fields, std::span<const double> f,
                      std::span<const double> df_dt, Direction dir,
                      Stencil stencil = Stencil::fourth);

struct AccelerationFields {
  Field mean_forward_backward;       // (D_* b + D b_*)/2
  Field dissipative;  // (D b + D_* b_*)/2
  Field beta_term;    // 2u (2u)' + 2 nu (2u)''
};

/// Stationary fields (time derivatives dropped).
AccelerationFields acceleration_fields(const HydroFields& f);
/// Midpoint evaluation between two slices: spatial parts averaged, time
/// derivatives by the slice difference.
AccelerationFields acceleration_fields(const HydroFields& f0, const HydroFields& f1);

/// Pointwise mean_forward_backward + beta/8 * beta_term + V'.
Field beta_euler_lagrange_residual(const AccelerationFields& acc, const UniformGrid& grid,
                                   const Field& potential, double beta);

/// coeff * (sqrt rho)'' / sqrt rho.
Field quantum_potential_term(const UniformGrid& grid, const Field& rho, double coeff,
                             Stencil stencil = Stencil::fourth);

/// Sup of |field| over the valid points.
double sup_valid(const Field& f, const std::vector<bool>& valid);

/// CSV with header `t,x,rho,S,u,v,b,b_star`.
void write_fields_csv(const std::vector<HydroFields>& slices, const std::string& file);

}  // namespace smlab::waveengine
