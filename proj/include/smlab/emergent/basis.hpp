#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "smlab/numkit/complex_matrix.hpp"
#include "smlab/numkit/grid.hpp"

namespace smlab::emergent {

using numkit::ComplexMatrix;
using numkit::Field;
using numkit::UniformGrid;

inline constexpr std::size_t kMaxBasisSize = 24;

enum class BasisKind { hermite_analytic, gram_schmidt_monomials };

BasisKind parse_basis_kind(const std::string& name);

/// Real functions orthonormal under (f, g) = integral of rho f g, tabulated
/// together with their derivatives.
struct WeightedBasis {
  UniformGrid grid;
  Field rho;
  BasisKind kind = BasisKind::hermite_analytic;
  double mean = 0.0;
  double sigma = 1.0;
  std::vector<Field> values;
  std::vector<Field> derivatives;

  std::size_t size() const noexcept { return values.size(); }
};

/// hermite_analytic: He_k((x - mean)/sigma) / sqrt(k!) with mean and sigma
/// fitted from rho, which must be Gaussian to 1e-6 relative.
/// gram_schmidt_monomials: modified Gram-Schmidt (two passes) on powers of
/// (x - mean)/sigma. Throws NumericalError if the monomial Gram matrix has
/// condition number above 1e12.
WeightedBasis build_basis(const UniformGrid& grid, const Field& rho, std::size_t n, BasisKind kind);

/// Weighted inner product by trapezoid quadrature.
double weighted_inner(const WeightedBasis& basis, const Field& f, const Field& g);

/// Overlap matrix of the basis (identity for an orthonormal basis).
ComplexMatrix gram_matrix(const WeightedBasis& basis);

/// Matrix of multiplication by a field.
ComplexMatrix multiplication_matrix(const WeightedBasis& basis, const Field& f);

/// Condition number of the monomial moment matrix of size n.
double monomial_condition_number(const UniformGrid& grid, const Field& rho, double mean, double sigma,
                                 std::size_t n);

}  // namespace smlab::emergent
