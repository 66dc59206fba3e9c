#include "smlab/emergent/basis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "smlab/numkit/eigh.hpp"
#include "smlab/numkit/errors.hpp"

namespace smlab::emergent {
namespace {

constexpr double kMaxCondition = 1e12;

double weighted(const UniformGrid& g, const Field& rho, const Field& f, const Field& h) {
  Field p(rho.size());
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = rho[i] * f[i] * h[i];
  return numkit::integrate(g, p);
}

void fit_moments(const UniformGrid& g, const Field& rho, double& mean, double& sigma) {
  const Field x = g.points();
  const Field one(rho.size(), 1.0);
  const double mass = weighted(g, rho, one, one);
  if (!(std::abs(mass - 1.0) < 1e-6)) throw PreconditionError("build_basis: rho must be normalised");
  mean = weighted(g, rho, x, one);
  Field c(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) c[i] = x[i] - mean;
  const double var = weighted(g, rho, c, c);
  if (!(var > 0.0)) throw PreconditionError("build_basis: rho has zero variance");
  sigma = std::sqrt(var);
}

}  // namespace

BasisKind parse_basis_kind(const std::string& name) {
  if (name == "hermite_analytic") return BasisKind::hermite_analytic;
  if (name == "gram_schmidt_monomials") return BasisKind::gram_schmidt_monomials;
  throw PreconditionError("unknown basis kind '" + name + "'");
}

double monomial_condition_number(const UniformGrid& grid, const Field& rho, double mean, double sigma,
                                 std::size_t n) {
  std::vector<double> moments(2 * n - 1);
  Field y(grid.size()), pw(grid.size(), 1.0), p(grid.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = (grid.x(i) - mean) / sigma;
  for (std::size_t k = 0; k < moments.size(); ++k) {
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = rho[i] * pw[i];
    moments[k] = numkit::integrate(grid, p);
    for (std::size_t i = 0; i < pw.size(); ++i) pw[i] *= y[i];
  }
  ComplexMatrix m(n);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t k = 0; k < n; ++k) m(j, k) = moments[j + k];
  const auto eig = numkit::hermitian_eigh(m, {1e-8, 100});
  const double lo = eig.eigenvalues.front(), hi = eig.eigenvalues.back();
  return lo > 0.0 ? hi / lo : INFINITY;
}

WeightedBasis build_basis(const UniformGrid& grid, const Field& rho, std::size_t n, BasisKind kind) {
  if (n == 0 || n > kMaxBasisSize)
    throw PreconditionError("build_basis: n_basis must be in 1.." + std::to_string(kMaxBasisSize));
  if (rho.size() != grid.size()) throw PreconditionError("build_basis: rho size mismatch");
  WeightedBasis b;
  b.grid = grid;
  b.rho = rho;
  b.kind = kind;
  fit_moments(grid, rho, b.mean, b.sigma);
  const std::size_t m = grid.size();
  Field y(m);
  for (std::size_t i = 0; i < m; ++i) y[i] = (grid.x(i) - b.mean) / b.sigma;

  if (kind == BasisKind::hermite_analytic) {
    const double peak = *std::max_element(rho.begin(), rho.end());
    const double norm = 1.0 / (b.sigma * std::sqrt(2.0 * std::numbers::pi));
    for (std::size_t i = 0; i < m; ++i)
      if (std::abs(rho[i] - norm * std::exp(-0.5 * y[i] * y[i])) > 1e-6 * peak)
        throw PreconditionError("build_basis: hermite_analytic needs a Gaussian density");
    b.values.assign(n, Field(m));
    b.derivatives.assign(n, Field(m));
    for (std::size_t i = 0; i < m; ++i) {
      b.values[0][i] = 1.0;
      b.derivatives[0][i] = 0.0;
      if (n > 1) b.values[1][i] = y[i];
      for (std::size_t k = 1; k + 1 < n; ++k)
        b.values[k + 1][i] = (y[i] * b.values[k][i] - std::sqrt(double(k)) * b.values[k - 1][i]) /
                             std::sqrt(double(k + 1));
      for (std::size_t k = 1; k < n; ++k)
        b.derivatives[k][i] = std::sqrt(double(k)) / b.sigma * b.values[k - 1][i];
    }
    return b;
  }

  const double cond = monomial_condition_number(grid, rho, b.mean, b.sigma, n);
  if (!(cond <= kMaxCondition)) {
    std::ostringstream os;
    os << "build_basis: monomial Gram condition number " << cond << " exceeds " << kMaxCondition
       << " at n_basis=" << n << "; use a smaller n_basis or the hermite_analytic basis";
    throw NumericalError(os.str());
  }
  for (std::size_t k = 0; k < n; ++k) {
    Field v(m), d(m);
    for (std::size_t i = 0; i < m; ++i) {
      v[i] = std::pow(y[i], double(k));
      d[i] = k == 0 ? 0.0 : double(k) * std::pow(y[i], double(k - 1)) / b.sigma;
    }
    for (int pass = 0; pass < 2; ++pass)
      for (std::size_t j = 0; j < k; ++j) {
        const double c = weighted(grid, rho, b.values[j], v);
        for (std::size_t i = 0; i < m; ++i) {
          v[i] -= c * b.values[j][i];
          d[i] -= c * b.derivatives[j][i];
        }
      }
    const double nrm = std::sqrt(weighted(grid, rho, v, v));
    for (std::size_t i = 0; i < m; ++i) {
      v[i] /= nrm;
      d[i] /= nrm;
    }
    b.values.push_back(std::move(v));
    b.derivatives.push_back(std::move(d));
  }
  return b;
}

double weighted_inner(const WeightedBasis& basis, const Field& f, const Field& g) {
  return weighted(basis.grid, basis.rho, f, g);
}

ComplexMatrix gram_matrix(const WeightedBasis& basis) {
  const std::size_t n = basis.size();
  ComplexMatrix g(n);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t k = 0; k < n; ++k) g(j, k) = weighted_inner(basis, basis.values[j], basis.values[k]);
  return g;
}

ComplexMatrix multiplication_matrix(const WeightedBasis& basis, const Field& f) {
  if (f.size() != basis.grid.size()) throw PreconditionError("multiplication_matrix: size mismatch");
  const std::size_t n = basis.size();
  ComplexMatrix out(n);
  Field tmp(f.size());
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < f.size(); ++i) tmp[i] = f[i] * basis.values[k][i];
    for (std::size_t j = 0; j < n; ++j) out(j, k) = weighted_inner(basis, basis.values[j], tmp);
  }
  return out;
}

}  // namespace smlab::emergent
