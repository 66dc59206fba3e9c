#include "smlab/waveengine/residuals.hpp"

#include <algorithm>
#include <cmath>

#include "smlab/numkit/errors.hpp"

namespace smlab::waveengine {
namespace {

Field gauge_fixed_action(const HydroFields& f, const Field& gradient) {
  Field g(gradient.size());
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = f.valid[i] ? gradient[i] : 0.0;
  return numkit::antiderivative(f.grid, g);
}

// Spatial part of each variant at one slice.
Field hj_spatial(const HydroFields& f, const Field& potential, HjVariant variant) {
  const std::size_t n = f.grid.size();
  const Field dl = numkit::d1(f.grid, f.log_rho);
  const Field ddl = numkit::d2(f.grid, f.log_rho);
  const double nu2 = f.nu * f.nu;
  Field out(n);
  switch (variant) {
    case HjVariant::schrodinger:
      for (std::size_t i = 0; i < n; ++i)
        out[i] = 0.5 * f.v[i] * f.v[i] + potential[i] - 0.5 * nu2 * dl[i] * dl[i] - nu2 * ddl[i];
      break;
    case HjVariant::dissipative:
      for (std::size_t i = 0; i < n; ++i)
        out[i] = 0.5 * f.v[i] * f.v[i] + potential[i] + 0.5 * nu2 * dl[i] * dl[i] + nu2 * ddl[i];
      break;
    case HjVariant::modified: {
      const Field db = numkit::d1(f.grid, f.b);
      for (std::size_t i = 0; i < n; ++i) out[i] = 0.5 * f.b[i] * f.b[i] + f.nu * db[i] + potential[i];
      break;
    }
  }
  return out;
}

const Field& action_gradient(const HydroFields& f, HjVariant variant) {
  return variant == HjVariant::modified ? f.b : f.v;
}

void demean(ResidualReport& r) {
  double sum = 0.0;
  std::size_t cnt = 0;
  for (std::size_t i = 0; i < r.residual.size(); ++i)
    if (r.mask[i]) {
      sum += r.residual[i];
      ++cnt;
    }
  if (cnt == 0) throw NumericalError("residual: no valid points");
  const double mean = sum / static_cast<double>(cnt);
  r.demeaned_sup = 0.0;
  for (std::size_t i = 0; i < r.residual.size(); ++i)
    if (r.mask[i]) r.demeaned_sup = std::max(r.demeaned_sup, std::abs(r.residual[i] - mean));
}

void check_pair(const HydroFields& f0, const HydroFields& f1) {
  if (!f0.grid.same_as(f1.grid)) throw PreconditionError("residual: slices on different grids");
  if (!(f1.t > f0.t)) throw PreconditionError("residual: slices must be increasing in time");
}

}  // namespace

ResidualReport hj_residual(const HydroFields& f0, const HydroFields& f1, const Field& potential,
                           HjVariant variant) {
  check_pair(f0, f1);
  if (potential.size() != f0.grid.size()) throw PreconditionError("hj_residual: potential size mismatch");
  const double dt = f1.t - f0.t;
  const Field s0 = gauge_fixed_action(f0, action_gradient(f0, variant));
  const Field s1 = gauge_fixed_action(f1, action_gradient(f1, variant));
  const Field a0 = hj_spatial(f0, potential, variant);
  const Field a1 = hj_spatial(f1, potential, variant);
  ResidualReport r;
  const std::size_t n = a0.size();
  r.residual.resize(n);
  r.mask.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    r.residual[i] = (s1[i] - s0[i]) / dt + 0.5 * (a0[i] + a1[i]);
    r.mask[i] = f0.valid[i] && f1.valid[i];
  }
  demean(r);
  return r;
}

ResidualReport hj_residual(const HydroFields& f, const Field& potential, HjVariant variant) {
  if (potential.size() != f.grid.size()) throw PreconditionError("hj_residual: potential size mismatch");
  ResidualReport r;
  r.residual = hj_spatial(f, potential, variant);
  r.mask = f.valid;
  demean(r);
  return r;
}

double hj_residual(const std::vector<HydroFields>& traj, const Field& potential, HjVariant variant) {
  if (traj.size() < 2) throw PreconditionError("hj_residual: need at least two slices");
  double worst = 0.0;
  for (std::size_t k = 1; k < traj.size(); ++k)
    worst = std::max(worst, hj_residual(traj[k - 1], traj[k], potential, variant).demeaned_sup);
  return worst;
}

double continuity_residual(const HydroFields& f0, const HydroFields& f1) {
  check_pair(f0, f1);
  const double dt = f1.t - f0.t;
  const std::size_t n = f0.grid.size();
  Field j0(n), j1(n);
  for (std::size_t i = 0; i < n; ++i) {
    j0[i] = f0.v[i] * f0.rho[i];
    j1[i] = f1.v[i] * f1.rho[i];
  }
  const Field d0 = numkit::d1(f0.grid, j0);
  const Field d1 = numkit::d1(f1.grid, j1);
  double worst = 0.0;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (!f0.valid[i] || !f1.valid[i]) continue;
    const double r = (f1.rho[i] - f0.rho[i]) / dt + 0.5 * (d0[i] + d1[i]);
    worst = std::max(worst, std::abs(r));
  }
  return worst;
}

double continuity_residual(const std::vector<HydroFields>& traj) {
  if (traj.size() < 2) throw PreconditionError("continuity_residual: need at least two slices");
  double worst = 0.0;
  for (std::size_t k = 1; k < traj.size(); ++k) worst = std::max(worst, continuity_residual(traj[k - 1], traj[k]));
  return worst;
}

namespace {

struct ScaledSlices {
  HydroFields f0, f1;
  Field q0, q1;  // 3-point (sqrt rho)'' / sqrt rho
  std::vector<bool> mask;
};

ScaledSlices prepare_scaled(const WavefunctionGrid& w0, const WavefunctionGrid& w1) {
  if (!w0.grid.same_as(w1.grid)) throw PreconditionError("scaled residual: slices on different grids");
  if (!(w1.t > w0.t)) throw PreconditionError("scaled residual: slices must be increasing in time");
  ScaledSlices s;
  s.f0 = fields_from_wavefunction(w0, 0.5 * w0.hbar, nullptr, Stencil::second);
  s.f1 = fields_from_wavefunction(w1, 0.5 * w1.hbar, &s.f0, Stencil::second);
  const std::size_t n = w0.grid.size();
  const std::size_t limit = n / 100;
  if (s.f0.floored_points > limit || s.f1.floored_points > limit)
    throw NumericalError("scaled residual: density below floor on more than 1% of the grid");
  s.q0 = quantum_potential_term(w0.grid, s.f0.rho, 1.0, Stencil::second);
  s.q1 = quantum_potential_term(w1.grid, s.f1.rho, 1.0, Stencil::second);
  s.mask.resize(n);
  for (std::size_t i = 0; i < n; ++i) s.mask[i] = s.f0.valid[i] && s.f1.valid[i] && i > 0 && i + 1 < n;
  return s;
}

template <class T>
std::vector<T> laplacian3(const UniformGrid& g, const std::vector<T>& f) {
  std::vector<T> out(f.size(), T(0));
  const double h2 = g.dx() * g.dx();
  for (std::size_t i = 1; i + 1 < f.size(); ++i) out[i] = (f[i - 1] - 2.0 * f[i] + f[i + 1]) / h2;
  return out;
}

}  // namespace

double scaled_equation_residual(const WavefunctionGrid& w0, const WavefunctionGrid& w1, const Field& potential,
                                Complex z) {
  if (z == Complex(0.0)) throw PreconditionError("scaled_equation_residual: z must be nonzero");
  const auto s = prepare_scaled(w0, w1);
  const double hbar = w0.hbar;
  const double dt = w1.t - w0.t;
  const std::size_t n = potential.size();
  ComplexVector c0(n), c1(n);
  for (std::size_t i = 0; i < n; ++i) {
    c0[i] = std::exp(s.f0.R[i] + Complex(0.0, 1.0) * s.f0.S_phase[i] / z);
    c1[i] = std::exp(s.f1.R[i] + Complex(0.0, 1.0) * s.f1.S_phase[i] / z);
  }
  const auto l0 = laplacian3(w0.grid, c0);
  const auto l1 = laplacian3(w1.grid, c1);
  const Complex kin = -(z * hbar) * (z * hbar) / 2.0;
  const Complex corr = hbar * hbar / 2.0 * (z * z - 1.0);
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!s.mask[i]) continue;
    const Complex h0 = kin * l0[i] + (potential[i] + corr * s.q0[i]) * c0[i];
    const Complex h1 = kin * l1[i] + (potential[i] + corr * s.q1[i]) * c1[i];
    const Complex r = 0.5 * (h0 + h1) - Complex(0.0, 1.0) * z * hbar * (c1[i] - c0[i]) / dt;
    worst = std::max(worst, std::abs(r));
  }
  return worst;
}

double real_scaled_residual(const WavefunctionGrid& w0, const WavefunctionGrid& w1, const Field& potential,
                            double modulus, int sign) {
  if (!(modulus > 0.0)) throw PreconditionError("real_scaled_residual: modulus must be positive");
  if (sign != 1 && sign != -1) throw PreconditionError("real_scaled_residual: sign must be +1 or -1");
  const auto s = prepare_scaled(w0, w1);
  const double hbar = w0.hbar;
  const double dt = w1.t - w0.t;
  const std::size_t n = potential.size();
  Field p0(n), p1(n);
  for (std::size_t i = 0; i < n; ++i) {
    p0[i] = std::exp(s.f0.R[i] + sign * s.f0.S_phase[i] / modulus);
    p1[i] = std::exp(s.f1.R[i] + sign * s.f1.S_phase[i] / modulus);
  }
  const auto l0 = laplacian3(w0.grid, p0);
  const auto l1 = laplacian3(w1.grid, p1);
  const double kin = modulus * modulus * hbar * hbar / 2.0;
  const double corr = -hbar * hbar / 2.0 * (modulus * modulus + 1.0);
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!s.mask[i]) continue;
    const double h0 = kin * l0[i] + (potential[i] + corr * s.q0[i]) * p0[i];
    const double h1 = kin * l1[i] + (potential[i] + corr * s.q1[i]) * p1[i];
    const double r = 0.5 * (h0 + h1) + sign * modulus * hbar * (p1[i] - p0[i]) / dt;
    worst = std::max(worst, std::abs(r));
  }
  return worst;
}

}  // namespace smlab::waveengine
