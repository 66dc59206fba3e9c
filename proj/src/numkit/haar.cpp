#include "smlab/numkit/haar.hpp"

#include <cmath>
#include <string>

#include "smlab/numkit/errors.hpp"

namespace smlab::numkit {

HaarMethod parse_haar_method(std::string_view name) {
  if (name == "gram_schmidt") return HaarMethod::gram_schmidt;
  if (name == "column_wise") return HaarMethod::column_wise;
  throw PreconditionError("unknown Haar method '" + std::string(name) + "'");
}

std::string_view to_string(HaarMethod m) {
  return m == HaarMethod::gram_schmidt ? "gram_schmidt" : "column_wise";
}

namespace {

// Removes from v its components along the first k columns of q (twice).
// Returns the projection coefficients accumulated over both passes.
ComplexVector project_out(const ComplexMatrix& q, std::size_t k, ComplexVector& v) {
  ComplexVector coeff(q.dim(), 0.0);
  for (int pass = 0; pass < 2; ++pass) {
    for (std::size_t j = 0; j < k; ++j) {
      Complex c = 0.0;
      for (std::size_t i = 0; i < q.dim(); ++i) c += std::conj(q(i, j)) * v[i];
      for (std::size_t i = 0; i < q.dim(); ++i) v[i] -= c * q(i, j);
      coeff[j] += c;
    }
  }
  return coeff;
}

}  // namespace

QrResult qr_gram_schmidt(const ComplexMatrix& a) {
  const std::size_t n = a.dim();
  QrResult res{ComplexMatrix(n), ComplexMatrix(n)};
  for (std::size_t k = 0; k < n; ++k) {
    ComplexVector v = a.column(k);
    const double orig = norm(v);
    const ComplexVector coeff = project_out(res.q, k, v);
    const double nv = norm(v);
    if (!(nv > 1e-14 * orig) || nv == 0.0)
      throw NumericalError("qr_gram_schmidt: rank-deficient column " + std::to_string(k));
    for (std::size_t j = 0; j < k; ++j) res.r(j, k) = coeff[j];
    res.r(k, k) = nv;
    for (auto& z : v) z /= nv;
    res.q.set_column(k, v);
  }
  return res;
}

ComplexMatrix ginibre(std::size_t n, RngStream& rng) {
  ComplexMatrix g(n);
  for (auto& z : g.data()) z = rng.complex_normal();
  return g;
}

ComplexMatrix haar_unitary(std::size_t n, RngStream& rng, HaarMethod method) {
  if (n == 0) throw PreconditionError("haar_unitary: dimension must be >= 1");
  if (method == HaarMethod::gram_schmidt) {
    QrResult qr = qr_gram_schmidt(ginibre(n, rng));
    for (std::size_t k = 0; k < n; ++k) {
      const Complex rkk = qr.r(k, k);
      const Complex phase = std::conj(rkk) / std::abs(rkk);
      for (std::size_t i = 0; i < n; ++i) qr.q(i, k) *= phase;
    }
    return qr.q;
  }

  ComplexMatrix u(n);
  for (std::size_t k = 0; k < n; ++k) {
    ComplexVector v(n);
    for (auto& z : v) z = rng.complex_normal();
    project_out(u, k, v);
    const double nv = norm(v);
    if (nv == 0.0) throw NumericalError("haar_unitary: degenerate Gaussian column");
    for (auto& z : v) z /= nv;
    u.set_column(k, v);
  }
  return u;
}

}  // namespace smlab::numkit
