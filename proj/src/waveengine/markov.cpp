#include "smlab/waveengine/markov.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <tuple>

#include "smlab/numkit/errors.hpp"
#include "smlab/numkit/tridiag.hpp"

namespace smlab::waveengine {

MarkovWavePair markov_pair_from_fields(const HydroFields& f, Field U) {
  if (!(f.nu > 0.0)) throw PreconditionError("markov_pair_from_fields: nu must be positive");
  const std::size_t n = f.grid.size();
  if (U.size() != n) throw PreconditionError("markov_pair_from_fields: U size mismatch");
  Field v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = f.valid[i] ? f.v[i] : 0.0;
  const Field s = numkit::antiderivative(f.grid, v);
  MarkovWavePair p{f.grid, f.t, f.nu, Field(n), Field(n), std::move(U), f.valid};
  for (std::size_t i = 0; i < n; ++i) {
    const double S = s[i] / (2.0 * f.nu);
    p.phi_plus[i] = std::exp(f.R[i] + S);
    p.phi_minus[i] = std::exp(f.R[i] - S);
  }
  return p;
}

namespace {

Field spatial(const MarkovWavePair& p, const Field& phi, Stencil stencil) {
  const Field d2 = numkit::d2(p.grid, phi, stencil);
  Field out(phi.size());
  for (std::size_t i = 0; i < phi.size(); ++i) out[i] = 2.0 * p.nu * p.nu * d2[i] + p.U[i] * phi[i];
  return out;
}

}  // namespace

MarkovResidual markov_stationary_residual(const MarkovWavePair& pair, bool fit_constant, Stencil stencil) {
  MarkovResidual r;
  r.residual_plus = spatial(pair, pair.phi_plus, stencil);
  r.residual_minus = spatial(pair, pair.phi_minus, stencil);
  if (fit_constant) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < pair.valid.size(); ++i) {
      if (!pair.valid[i]) continue;
      num += r.residual_plus[i] * pair.phi_plus[i] + r.residual_minus[i] * pair.phi_minus[i];
      den += pair.phi_plus[i] * pair.phi_plus[i] + pair.phi_minus[i] * pair.phi_minus[i];
    }
    r.fitted_constant = den > 0.0 ? -num / den : 0.0;
    for (std::size_t i = 0; i < pair.valid.size(); ++i) {
      r.residual_plus[i] += r.fitted_constant * pair.phi_plus[i];
      r.residual_minus[i] += r.fitted_constant * pair.phi_minus[i];
    }
  }
  r.plus = sup_valid(r.residual_plus, pair.valid);
  r.minus = sup_valid(r.residual_minus, pair.valid);
  return r;
}

MarkovResidual markov_step_residual(const MarkovWavePair& p0, const MarkovWavePair& p1, Stencil stencil) {
  const double dt = p1.t - p0.t;
  if (!(dt > 0.0)) throw PreconditionError("markov_step_residual: slices must be increasing in time");
  const Field a0 = spatial(p0, p0.phi_plus, stencil), a1 = spatial(p1, p1.phi_plus, stencil);
  const Field c0 = spatial(p0, p0.phi_minus, stencil), c1 = spatial(p1, p1.phi_minus, stencil);
  const std::size_t n = a0.size();
  MarkovResidual r;
  r.residual_plus.resize(n);
  r.residual_minus.resize(n);
  std::vector<bool> mask(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double k = 2.0 * p0.nu / dt;
    r.residual_plus[i] = 0.5 * (a0[i] + a1[i]) + k * (p1.phi_plus[i] - p0.phi_plus[i]);
    r.residual_minus[i] = 0.5 * (c0[i] + c1[i]) - k * (p1.phi_minus[i] - p0.phi_minus[i]);
    mask[i] = p0.valid[i] && p1.valid[i] && i > 0 && i + 1 < n;
  }
  r.plus = sup_valid(r.residual_plus, mask);
  r.minus = sup_valid(r.residual_minus, mask);
  return r;
}

double markov_product_defect(const MarkovWavePair& pair, const Field& rho) {
  Field d(rho.size());
  for (std::size_t i = 0; i < rho.size(); ++i) d[i] = pair.phi_plus[i] * pair.phi_minus[i] - rho[i];
  return sup_valid(d, pair.valid);
}

std::vector<MarkovWavePair> solve_markov_wave(const MarkovWavePair& pair0, double dt, std::size_t steps,
                                              std::size_t record_every) {
  if (!(dt > 0.0)) throw PreconditionError("solve_markov_wave: dt must be positive");
  if (!(pair0.nu > 0.0)) throw PreconditionError("solve_markov_wave: nu must be positive");
  if (record_every == 0) record_every = 1;
  const std::size_t n = pair0.grid.size();
  const std::size_t m = n - 2;
  const double nu = pair0.nu;
  const double k = nu / (pair0.grid.dx() * pair0.grid.dx());
  // A phi = nu phi'' + U phi / (2 nu); phi_minus: phi_t = A phi, phi_plus: phi_t = -A phi.
  auto build = [&](double sign) {
    const double h = sign * 0.5 * dt;
    Field lo(m, -h * k), di(m), up(m, -h * k);
    for (std::size_t j = 0; j < m; ++j) di[j] = 1.0 + h * (2.0 * k - pair0.U[j + 1] / (2.0 * nu));
    return std::tuple{lo, di, up};
  };
  const auto [lm, dm, um] = build(1.0);
  const auto [lp, dp, up] = build(-1.0);
  auto advance = [&](Field& phi, double sign, const Field& lo, const Field& di, const Field& upv) {
    const double h = sign * 0.5 * dt;
    Field rhs(m);
    for (std::size_t j = 0; j < m; ++j) {
      const std::size_t i = j + 1;
      const double a = k * (phi[i - 1] - 2.0 * phi[i] + phi[i + 1]) + pair0.U[i] / (2.0 * nu) * phi[i];
      rhs[j] = phi[i] + h * a;
    }
    const Field x = numkit::solve_tridiagonal<double>(lo, di, upv, rhs);
    for (std::size_t j = 0; j < m; ++j) phi[j + 1] = x[j];
    phi.front() = 0.0;
    phi.back() = 0.0;
  };
  // Positivity is enforced where the initial product is above the density floor.
  std::vector<bool> watched(n, false);
  double top = 0.0;
  for (std::size_t i = 0; i < n; ++i) top = std::max(top, pair0.phi_plus[i] * pair0.phi_minus[i]);
  for (std::size_t i = 1; i + 1 < n; ++i)
    watched[i] = pair0.valid[i] && pair0.phi_plus[i] * pair0.phi_minus[i] >= kDensityFloorRatio * top;
  std::vector<MarkovWavePair> out{pair0};
  MarkovWavePair cur = pair0;
  cur.phi_plus.front() = cur.phi_plus.back() = 0.0;
  cur.phi_minus.front() = cur.phi_minus.back() = 0.0;
  for (std::size_t s = 1; s <= steps; ++s) {
    advance(cur.phi_minus, 1.0, lm, dm, um);
    advance(cur.phi_plus, -1.0, lp, dp, up);
    cur.t += dt;
    for (std::size_t i = 1; i + 1 < n; ++i) {
      if (!watched[i]) continue;
      if (!(cur.phi_plus[i] > 0.0) || !(cur.phi_minus[i] > 0.0) || !std::isfinite(cur.phi_plus[i]) ||
          !std::isfinite(cur.phi_minus[i])) {
        std::ostringstream os;
        os << "solve_markov_wave: positivity lost at x=" << cur.grid.x(i) << ", step " << s;
        throw StepError(os.str(), s);
      }
    }
    if (s % record_every == 0 || s == steps) out.push_back(cur);
  }
  return out;
}

}  // namespace smlab::waveengine
