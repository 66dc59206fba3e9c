#include "smlab/waveengine/hydro.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include "smlab/numkit/errors.hpp"

namespace smlab::waveengine {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kMaxPhaseStep = 0.75 * kPi;

double principal(double a) { return std::remainder(a, 2.0 * kPi); }

std::vector<bool> widen_mask(const std::vector<bool>& core, std::size_t halo) {
  const std::size_t n = core.size();
  std::vector<bool> out(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    bool ok = core[i];
    for (std::size_t d = 1; ok && d <= halo; ++d) {
      if (i >= d && !core[i - d]) ok = false;
      if (i + d < n && !core[i + d]) ok = false;
    }
    out[i] = ok;
  }
  return out;
}

// Floors rho, renormalises, and returns the mask of points above the floor.
std::vector<bool> floor_and_normalise(HydroFields& f, bool apply_floor) {
  const std::size_t n = f.grid.size();
  std::vector<bool> core(n, true);
  f.floored_points = 0;
  if (apply_floor) {
    const double top = *std::max_element(f.rho.begin(), f.rho.end());
    if (!(top > 0.0)) throw NumericalError("density vanishes everywhere");
    const double floor = kDensityFloorRatio * top;
    for (std::size_t i = 0; i < n; ++i)
      if (!(f.rho[i] >= floor)) {
        f.rho[i] = floor;
        core[i] = false;
        ++f.floored_points;
      }
  }
  const double mass = numkit::integrate(f.grid, f.rho);
  if (!(mass > 0.0) || !std::isfinite(mass)) throw NumericalError("density cannot be normalised");
  for (auto& r : f.rho) r /= mass;
  f.valid = widen_mask(core, 4);
  return core;
}

void finish_velocities(HydroFields& f, Stencil stencil) {
  const std::size_t n = f.grid.size();
  f.R.resize(n);
  for (std::size_t i = 0; i < n; ++i) f.R[i] = 0.5 * f.log_rho[i];
  const Field dl = numkit::d1(f.grid, f.log_rho, stencil);
  f.u.resize(n);
  f.b.resize(n);
  f.b_star.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    f.u[i] = f.nu * dl[i];
    f.b[i] = f.u[i] + f.v[i];
    f.b_star[i] = f.v[i] - f.u[i];
  }
}

std::size_t density_peak(const Field& rho) {
  return static_cast<std::size_t>(std::max_element(rho.begin(), rho.end()) - rho.begin());
}

}  // namespace

std::size_t HydroFields::valid_count() const {
  return static_cast<std::size_t>(std::count(valid.begin(), valid.end(), true));
}

HydroFields fields_from_wavefunction(const WavefunctionGrid& w, double nu, const HydroFields* previous,
                                     Stencil stencil) {
  if (!(nu >= 0.0)) throw PreconditionError("fields_from_wavefunction: nu must be non-negative");
  const std::size_t n = w.grid.size();
  HydroFields f;
  f.grid = w.grid;
  f.t = w.t;
  f.nu = nu;
  f.hbar = w.hbar;
  f.rho.resize(n);
  for (std::size_t i = 0; i < n; ++i) f.rho[i] = std::norm(w.psi[i]);
  const std::vector<bool> above = floor_and_normalise(f, true);
  f.log_rho.resize(n);
  for (std::size_t i = 0; i < n; ++i) f.log_rho[i] = std::log(f.rho[i]);

  // Unwrap outward from the density peak over points above the floor.
  const std::size_t ref = density_peak(f.rho);
  f.S_phase.assign(n, 0.0);
  f.S_phase[ref] = std::arg(w.psi[ref]);
  auto walk = [&](long step) {
    long last = static_cast<long>(ref);
    for (long i = static_cast<long>(ref) + step; i >= 0 && i < static_cast<long>(n); i += step) {
      const auto iu = static_cast<std::size_t>(i);
      if (!above[iu]) {
        f.S_phase[iu] = f.S_phase[static_cast<std::size_t>(last)];
        continue;
      }
      const auto lu = static_cast<std::size_t>(last);
      const double d = principal(std::arg(w.psi[iu]) - std::arg(w.psi[lu]));
      if (std::abs(i - last) == 1 && std::abs(d) > kMaxPhaseStep) {
        std::ostringstream os;
        os << "phase unwrap failed between x=" << w.grid.x(lu) << " and x=" << w.grid.x(iu)
           << " (step " << d << " rad)";
        throw NumericalError(os.str());
      }
      f.S_phase[iu] = f.S_phase[lu] + d;
      last = i;
    }
  };
  walk(1);
  walk(-1);
  if (previous) {
    const double k = std::round((previous->S_phase[ref] - f.S_phase[ref]) / (2.0 * kPi));
    for (auto& s : f.S_phase) s += 2.0 * kPi * k;
  }
  const Field ds = numkit::d1(f.grid, f.S_phase, stencil);
  f.v.resize(n);
  for (std::size_t i = 0; i < n; ++i) f.v[i] = w.hbar * ds[i];
  finish_velocities(f, stencil);
  return f;
}

HydroFields fields_from_log_density(const UniformGrid& grid, Field log_rho, Field v, double nu, double t,
                                    double hbar, bool floor, Stencil stencil) {
  const std::size_t n = grid.size();
  if (log_rho.size() != n || v.size() != n) throw PreconditionError("fields_from_log_density: size mismatch");
  if (!(nu >= 0.0)) throw PreconditionError("fields_from_log_density: nu must be non-negative");
  HydroFields f;
  f.grid = grid;
  f.t = t;
  f.nu = nu;
  f.hbar = hbar;
  const double top = *std::max_element(log_rho.begin(), log_rho.end());
  f.rho.resize(n);
  for (std::size_t i = 0; i < n; ++i) f.rho[i] = std::exp(log_rho[i] - top);
  floor_and_normalise(f, floor);
  f.log_rho.resize(n);
  if (floor) {
    for (std::size_t i = 0; i < n; ++i) f.log_rho[i] = std::log(f.rho[i]);
  } else {
    // Normalise in log space so tails far below the double range stay exact.
    Field shifted(n);
    for (std::size_t i = 0; i < n; ++i) shifted[i] = std::exp(log_rho[i] - top);
    const double lmass = top + std::log(numkit::integrate(grid, shifted));
    for (std::size_t i = 0; i < n; ++i) f.log_rho[i] = log_rho[i] - lmass;
  }
  f.S_phase.assign(n, 0.0);
  if (hbar > 0.0) {
    const Field s = numkit::antiderivative(grid, v);
    for (std::size_t i = 0; i < n; ++i) f.S_phase[i] = s[i] / hbar;
  }
  f.v = std::move(v);
  finish_velocities(f, stencil);
  return f;
}

double nu_from_beta(double beta, double hbar, double mass) {
  if (!(beta < 2.0)) throw PreconditionError("nu_from_beta: beta must be below 2");
  if (!(mass > 0.0)) throw PreconditionError("nu_from_beta: mass must be positive");
  return hbar / (2.0 * mass) / std::sqrt(1.0 - beta / 2.0);
}

Field generator_apply(const HydroFields& fields, std::span<const double> f, std::span<const double> df_dt,
                      Direction dir, Stencil stencil) {
  const std::size_t n = fields.grid.size();
  if (f.size() != n || (!df_dt.empty() && df_dt.size() != n))
    throw PreconditionError("generator_apply: size mismatch");
  const Field f1 = numkit::d1(fields.grid, f, stencil);
  const Field f2 = numkit::d2(fields.grid, f, stencil);
  Field out(n);
  const bool fwd = dir == Direction::forward;
  for (std::size_t i = 0; i < n; ++i) {
    const double drift = fwd ? fields.b[i] : fields.b_star[i];
    const double diff = fwd ? fields.nu : -fields.nu;
    out[i] = (df_dt.empty() ? 0.0 : df_dt[i]) + drift * f1[i] + diff * f2[i];
  }
  return out;
}

namespace {

AccelerationFields spatial_accelerations(const HydroFields& f) {
  const std::size_t n = f.grid.size();
  const Field Db = generator_apply(f, f.b, {}, Direction::forward);
  const Field Dsb = generator_apply(f, f.b, {}, Direction::backward);
  const Field Dbs = generator_apply(f, f.b_star, {}, Direction::forward);
  const Field Dsbs = generator_apply(f, f.b_star, {}, Direction::backward);
  Field two_u(n);
  for (std::size_t i = 0; i < n; ++i) two_u[i] = 2.0 * f.u[i];
  const Field du = numkit::d1(f.grid, two_u);
  const Field ddu = numkit::d2(f.grid, two_u);
  AccelerationFields a;
  a.mean_forward_backward.resize(n);
  a.dissipative.resize(n);
  a.beta_term.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    a.mean_forward_backward[i] = 0.5 * (Dsb[i] + Dbs[i]);
    a.dissipative[i] = 0.5 * (Db[i] + Dsbs[i]);
    a.beta_term[i] = two_u[i] * du[i] + 2.0 * f.nu * ddu[i];
  }
  return a;
}

}  // namespace

AccelerationFields acceleration_fields(const HydroFields& f) { return spatial_accelerations(f); }

AccelerationFields acceleration_fields(const HydroFields& f0, const HydroFields& f1) {
  if (!f0.grid.same_as(f1.grid)) throw PreconditionError("acceleration_fields: grids differ");
  const double dt = f1.t - f0.t;
  if (!(dt > 0.0)) throw PreconditionError("acceleration_fields: slices must be increasing in time");
  auto a = spatial_accelerations(f0);
  const auto a1 = spatial_accelerations(f1);
  for (std::size_t i = 0; i < a.mean_forward_backward.size(); ++i) {
    const double db = (f1.b[i] - f0.b[i]) / dt;
    const double dbs = (f1.b_star[i] - f0.b_star[i]) / dt;
    // Both accelerations carry (db + dbs)/2 from their time parts.
    a.mean_forward_backward[i] = 0.5 * (a.mean_forward_backward[i] + a1.mean_forward_backward[i]) + 0.5 * (db + dbs);
    a.dissipative[i] = 0.5 * (a.dissipative[i] + a1.dissipative[i]) + 0.5 * (db + dbs);
    a.beta_term[i] = 0.5 * (a.beta_term[i] + a1.beta_term[i]);
  }
  return a;
}

Field beta_euler_lagrange_residual(const AccelerationFields& acc, const UniformGrid& grid,
                                   const Field& potential, double beta) {
  const Field dv = numkit::d1(grid, potential);
  Field r(dv.size());
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = acc.mean_forward_backward[i] + beta / 8.0 * acc.beta_term[i] + dv[i];
  return r;
}

Field quantum_potential_term(const UniformGrid& grid, const Field& rho, double coeff, Stencil stencil) {
  Field s(rho.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!(rho[i] > 0.0)) throw PreconditionError("quantum_potential_term: density must be positive");
    s[i] = std::sqrt(rho[i]);
  }
  const Field s2 = numkit::d2(grid, s, stencil);
  Field q(s.size());
  for (std::size_t i = 0; i < q.size(); ++i) q[i] = coeff == 0.0 ? 0.0 : coeff * s2[i] / s[i];
  return q;
}

double sup_valid(const Field& f, const std::vector<bool>& valid) {
  double m = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i)
    if (valid[i]) m = std::max(m, std::abs(f[i]));
  return m;
}

void write_fields_csv(const std::vector<HydroFields>& slices, const std::string& file) {
  std::ofstream os(file, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + file);
  os << "t,x,rho,S,u,v,b,b_star\n";
  char buf[512];
  for (const auto& f : slices)
    for (std::size_t i = 0; i < f.grid.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.15g,%.15g,%.15g,%.15g,%.15g,%.15g,%.15g,%.15g\n", f.t, f.grid.x(i),
                    f.rho[i], f.S_phase[i], f.u[i], f.v[i], f.b[i], f.b_star[i]);
      os << buf;
    }
}

}  // namespace smlab::waveengine
