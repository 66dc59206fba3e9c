#include "smlab/waveengine/wavefunction.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "smlab/numkit/errors.hpp"
#include "smlab/numkit/tridiag.hpp"

namespace smlab::waveengine {
namespace {

void check_potential(const UniformGrid& g, const Field& v) {
  if (v.size() != g.size()) throw PreconditionError("potential size does not match grid");
  for (double x : v)
    if (!std::isfinite(x)) throw PreconditionError("potential has non-finite values");
}

// H psi at interior point i with the 3-point Laplacian and zero boundary values.
Complex apply_h(const WavefunctionGrid& w, const Field& v, std::size_t i) {
  const double k = w.hbar * w.hbar / (2.0 * w.grid.dx() * w.grid.dx());
  const Complex left = i > 0 ? w.psi[i - 1] : Complex(0);
  const Complex right = i + 1 < w.psi.size() ? w.psi[i + 1] : Complex(0);
  return -k * (left - 2.0 * w.psi[i] + right) + v[i] * w.psi[i];
}

class CrankNicolson {
 public:
  CrankNicolson(const UniformGrid& g, const Field& v, double hbar, double dt)
      : n_(g.size() - 2), lower_(n_), diag_(n_), upper_(n_), v_(v), hbar_(hbar), dt_(dt) {
    const double k = hbar * hbar / (2.0 * g.dx() * g.dx());
    const Complex a(0.0, dt / (2.0 * hbar));
    for (std::size_t j = 0; j < n_; ++j) {
      lower_[j] = a * Complex(-k);
      upper_[j] = a * Complex(-k);
      diag_[j] = 1.0 + a * (2.0 * k + v[j + 1]);
    }
  }

  void step(WavefunctionGrid& w) const {
    ComplexVector rhs(n_);
    const Complex a(0.0, dt_ / (2.0 * hbar_));
    for (std::size_t j = 0; j < n_; ++j) rhs[j] = w.psi[j + 1] - a * apply_h(w, v_, j + 1);
    const auto x = numkit::solve_tridiagonal<Complex>(lower_, diag_, upper_, rhs);
    for (std::size_t j = 0; j < n_; ++j) w.psi[j + 1] = x[j];
    w.psi.front() = 0.0;
    w.psi.back() = 0.0;
    w.t += dt_;
  }

 private:
  std::size_t n_;
  ComplexVector lower_, diag_, upper_;
  const Field& v_;
  double hbar_, dt_;
};

}  // namespace

double norm_squared(const WavefunctionGrid& w) {
  Field r(w.psi.size());
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = std::norm(w.psi[i]);
  return numkit::integrate(w.grid, r);
}

WavefunctionGrid normalized(WavefunctionGrid w) {
  const double n = std::sqrt(norm_squared(w));
  if (!(n > 0.0)) throw NumericalError("normalized: zero wavefunction");
  for (auto& z : w.psi) z /= n;
  return w;
}

std::vector<WavefunctionGrid> evolve_schrodinger_trajectory(const WavefunctionGrid& w,
                                                            const Field& potential, double dt,
                                                            std::size_t steps,
                                                            std::size_t record_every,
                                                            double norm_tol) {
  if (!(dt > 0.0)) throw PreconditionError("evolve_schrodinger: dt must be positive");
  if (w.psi.size() != w.grid.size() || w.grid.size() < 3)
    throw PreconditionError("evolve_schrodinger: wavefunction does not match grid");
  if (record_every == 0) record_every = 1;
  check_potential(w.grid, potential);
  const CrankNicolson cn(w.grid, potential, w.hbar, dt);
  WavefunctionGrid cur = w;
  cur.psi.front() = 0.0;
  cur.psi.back() = 0.0;
  const double n0 = norm_squared(cur);
  std::vector<WavefunctionGrid> out{cur};
  for (std::size_t s = 1; s <= steps; ++s) {
    cn.step(cur);
    if (s % record_every == 0 || s == steps) out.push_back(cur);
  }
  const double drift = std::abs(norm_squared(cur) - n0) / n0;
  if (!(drift <= norm_tol)) {
    std::ostringstream os;
    os << "evolve_schrodinger: norm drift " << drift << " exceeds " << norm_tol;
    throw NumericalError(os.str());
  }
  return out;
}

WavefunctionGrid evolve_schrodinger(const WavefunctionGrid& w, const Field& potential, double dt,
                                    std::size_t steps, double norm_tol) {
  return evolve_schrodinger_trajectory(w, potential, dt, steps, steps == 0 ? 1 : steps, norm_tol).back();
}

DiscreteEigenstate discrete_ground_state(const UniformGrid& grid, const Field& potential, double hbar) {
  check_potential(grid, potential);
  const std::size_t n = grid.size() - 2;
  const double k = hbar * hbar / (2.0 * grid.dx() * grid.dx());
  const double shift = *std::min_element(potential.begin() + 1, potential.end() - 1) - 1e-3;
  Field lower(n, -k), upper(n, -k), diag(n);
  for (std::size_t j = 0; j < n; ++j) diag[j] = 2.0 * k + potential[j + 1] - shift;
  Field x(n, 1.0);
  double energy = 0.0;
  for (int it = 0; it < 1000; ++it) {
    Field y = numkit::solve_tridiagonal<double>(lower, diag, upper, x);
    double nrm = 0.0;
    for (double v : y) nrm += v * v;
    nrm = std::sqrt(nrm);
    double change = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      y[j] /= nrm;
      change = std::max(change, std::abs(y[j] - x[j]));
    }
    x = std::move(y);
    if (change < 1e-15) break;
  }
  // Rayleigh quotient with the unshifted operator.
  double num = 0.0, den = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double l = j > 0 ? x[j - 1] : 0.0;
    const double r = j + 1 < n ? x[j + 1] : 0.0;
    num += x[j] * (-k * (l + r) + (2.0 * k + potential[j + 1]) * x[j]);
    den += x[j] * x[j];
  }
  energy = num / den;
  WavefunctionGrid w{grid, ComplexVector(grid.size(), 0.0), 0.0, hbar};
  const double sign = std::accumulate(x.begin(), x.end(), 0.0) < 0.0 ? -1.0 : 1.0;
  for (std::size_t j = 0; j < n; ++j) w.psi[j + 1] = sign * x[j];
  return {normalized(std::move(w)), energy};
}

double schrodinger_step_residual(const WavefunctionGrid& w0, const WavefunctionGrid& w1,
                                 const Field& potential) {
  const double dt = w1.t - w0.t;
  if (!(dt > 0.0)) throw PreconditionError("schrodinger_step_residual: need increasing times");
  double worst = 0.0;
  for (std::size_t i = 1; i + 1 < w0.psi.size(); ++i) {
    const Complex h = 0.5 * (apply_h(w0, potential, i) + apply_h(w1, potential, i));
    const Complex r = Complex(0.0, w0.hbar) * (w1.psi[i] - w0.psi[i]) / dt - h;
    worst = std::max(worst, std::abs(r));
  }
  return worst;
}

}  // namespace smlab::waveengine
