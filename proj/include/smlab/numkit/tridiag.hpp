#pragma once

#include <cmath>
#include <complex>
#include <span>
#include <vector>

#include "smlab/numkit/errors.hpp"

namespace smlab::numkit {

/// Thomas algorithm for a tridiagonal system. Row i reads
/// lower[i]*x[i-1] + diag[i]*x[i] + upper[i]*x[i+1] = rhs[i];
/// lower[0] and upper[n-1] are ignored.
template <class T>
std::vector<T> solve_tridiagonal(std::span<const T> lower, std::span<const T> diag,
                                 std::span<const T> upper, std::span<const T> rhs) {
  const std::size_t n = diag.size();
  if (lower.size() != n || upper.size() != n || rhs.size() != n)
    throw PreconditionError("solve_tridiagonal: size mismatch");
  std::vector<T> c(n), d(n), x(n);
  T piv = diag[0];
  if (std::abs(piv) == 0.0) throw NumericalError("solve_tridiagonal: zero pivot");
  c[0] = n > 1 ? upper[0] / piv : T(0);
  d[0] = rhs[0] / piv;
  for (std::size_t i = 1; i < n; ++i) {
    piv = diag[i] - lower[i] * c[i - 1];
    if (std::abs(piv) == 0.0) throw NumericalError("solve_tridiagonal: zero pivot");
    c[i] = i + 1 < n ? upper[i] / piv : T(0);
    d[i] = (rhs[i] - lower[i] * d[i - 1]) / piv;
  }
  x[n - 1] = d[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) x[i] = d[i] - c[i] * x[i + 1];
  return x;
}

}  // namespace smlab::numkit
