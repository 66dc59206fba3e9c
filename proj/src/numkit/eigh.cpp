#include "smlab/numkit/eigh.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "smlab/numkit/errors.hpp"

namespace smlab::numkit {

namespace {

double off_diagonal_norm(const ComplexMatrix& a) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i)
    for (std::size_t j = 0; j < a.dim(); ++j)
      if (i != j) s += std::norm(a(i, j));
  return std::sqrt(s);
}

void rotate(ComplexMatrix& a, ComplexMatrix& q, std::size_t p, std::size_t r) {
  const Complex apr = a(p, r);
  const double mag = std::abs(apr);
  if (mag == 0.0) return;
  const double app = a(p, p).real();
  const double arr = a(r, r).real();
  const Complex phase = std::conj(apr) / mag;  // e^{-i phi}

  const double theta = (arr - app) / (2.0 * mag);
  const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
  const double cs = 1.0 / std::sqrt(t * t + 1.0);
  const double sn = t * cs;

  const Complex vpp = cs, vpr = sn, vrp = -sn * phase, vrr = cs * phase;
  const std::size_t n = a.dim();

  for (std::size_t k = 0; k < n; ++k) {
    const Complex akp = a(k, p), akr = a(k, r);
    a(k, p) = akp * vpp + akr * vrp;
    a(k, r) = akp * vpr + akr * vrr;
  }
  for (std::size_t k = 0; k < n; ++k) {
    const Complex apk = a(p, k), ark = a(r, k);
    a(p, k) = std::conj(vpp) * apk + std::conj(vrp) * ark;
    a(r, k) = std::conj(vpr) * apk + std::conj(vrr) * ark;
  }
  a(p, p) = app - t * mag;
  a(r, r) = arr + t * mag;
  a(p, r) = 0.0;
  a(r, p) = 0.0;

  for (std::size_t k = 0; k < n; ++k) {
    const Complex qkp = q(k, p), qkr = q(k, r);
    q(k, p) = qkp * vpp + qkr * vrp;
    q(k, r) = qkp * vpr + qkr * vrr;
  }
}

}  // namespace

EighResult hermitian_eigh(const ComplexMatrix& m, const EighOptions& opts) {
  const double asym = hermitian_asymmetry(m);
  if (!(asym <= opts.hermitian_tol)) {
    std::ostringstream os;
    os << "hermitian_eigh: matrix is not Hermitian (max asymmetry " << asym << ")";
    throw NonHermitianError(os.str(), asym);
  }
  const std::size_t n = m.dim();
  ComplexMatrix a = m;
  for (std::size_t i = 0; i < n; ++i) {
    a(i, i) = a(i, i).real();
    for (std::size_t j = i + 1; j < n; ++j) {
      const Complex avg = 0.5 * (a(i, j) + std::conj(a(j, i)));
      a(i, j) = avg;
      a(j, i) = std::conj(avg);
    }
  }
  ComplexMatrix q = ComplexMatrix::identity(n);
  const double scale = std::max(a.frobenius_norm(), 1e-300);

  int sweep = 0;
  double off = off_diagonal_norm(a);
  while (off > 1e-15 * scale) {
    if (sweep >= opts.max_sweeps) {
      std::ostringstream os;
      os << "hermitian_eigh: no convergence after " << sweep << " sweeps (off-diagonal norm "
         << off << ")";
      throw ConvergenceError(os.str(), off);
    }
    for (std::size_t p = 0; p + 1 < n; ++p)
      for (std::size_t r = p + 1; r < n; ++r) rotate(a, q, p, r);
    ++sweep;
    const double next = off_diagonal_norm(a);
    // round-off floor reached
    if (next >= off) {
      off = next;
      break;
    }
    off = next;
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return a(i, i).real() < a(j, j).real(); });

  EighResult res;
  res.sweeps = sweep;
  res.eigenvalues.resize(n);
  res.eigenvectors = ComplexMatrix(n);
  for (std::size_t k = 0; k < n; ++k) {
    res.eigenvalues[k] = a(order[k], order[k]).real();
    for (std::size_t i = 0; i < n; ++i) res.eigenvectors(i, k) = q(i, order[k]);
  }
  return res;
}

ComplexMatrix spectral_function(const EighResult& eig, const std::function<Complex(double)>& f) {
  const std::size_t n = eig.eigenvalues.size();
  const ComplexMatrix& v = eig.eigenvectors;
  std::vector<Complex> fl(n);
  for (std::size_t k = 0; k < n; ++k) fl[k] = f(eig.eigenvalues[k]);
  ComplexMatrix r(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      Complex s = 0.0;
      for (std::size_t k = 0; k < n; ++k) s += v(i, k) * fl[k] * std::conj(v(j, k));
      r(i, j) = s;
    }
  return r;
}

ComplexMatrix hermitian_exp(const ComplexMatrix& h, Complex coeff) {
  return spectral_function(hermitian_eigh(h), [coeff](double l) { return std::exp(coeff * l); });
}

}  // namespace smlab::numkit
