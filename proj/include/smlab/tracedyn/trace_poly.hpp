#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "smlab/numkit/complex_matrix.hpp"
#include "smlab/numkit/rng.hpp"

namespace smlab::tracedyn {

using numkit::Complex;
using numkit::ComplexMatrix;

enum class Variable { q, p };

/// One matrix variable: q_r or p_r with a zero-based degree-of-freedom index.
struct Symbol {
  Variable var = Variable::q;
  std::size_t index = 0;
  friend bool operator==(const Symbol&, const Symbol&) = default;
};

inline Symbol coordinate(std::size_t r) { return {Variable::q, r}; }
inline Symbol momentum(std::size_t r) { return {Variable::p, r}; }
std::string to_string(const Symbol& s);  // "q1", "p2", ... (one-based)

struct Term {
  double coefficient = 0.0;
  std::vector<Symbol> word;
};

/// Linear combination of traces of words in non-commuting matrix symbols.
/// Words are kept exactly as written; no reordering is attempted.
class TracePolynomial {
 public:
  TracePolynomial() = default;

  /// Appends coefficient * Tr(word). Throws PreconditionError on an empty word.
  TracePolynomial& add(double coefficient, std::vector<Symbol> word);

  const std::vector<Term>& terms() const noexcept { return terms_; }
  /// One more than the largest degree-of-freedom index used (0 if empty).
  std::size_t degrees_of_freedom() const noexcept;
  std::size_t max_degree() const noexcept;

  /// True when the polynomial maps to itself under word reversal up to
  /// cyclic rotation, which makes it real on Hermitian arguments.
  bool reversal_symmetric() const;

  /// Text form such as "0.5 p1 p1 + 0.5 q1 q1 - 0.1 q1*q1*q1*q1".
  /// Symbols are q<r> or p<r> with r >= 1; a missing coefficient means 1.
  static TracePolynomial parse(std::string_view text);
  std::string to_string() const;

  friend TracePolynomial operator+(TracePolynomial a, const TracePolynomial& b);
  friend TracePolynomial operator*(double s, TracePolynomial a);

 private:
  std::vector<Term> terms_;
};

/// Sum over r of Tr(p_r^2/2 + q_r^2/2 + quartic q_r^4).
TracePolynomial anharmonic_hamiltonian(std::size_t dof, double quartic);

/// Random polynomial with n_terms words of length 1..max_degree over dof
/// degrees of freedom and standard-normal coefficients.
TracePolynomial random_polynomial(std::size_t dof, std::size_t max_degree, std::size_t n_terms,
                                  numkit::RngStream& rng);

/// Matrix configuration: R coordinate and R momentum matrices of size N.
struct TracePhaseSpace {
  std::vector<ComplexMatrix> q;
  std::vector<ComplexMatrix> p;

  std::size_t dof() const noexcept { return q.size(); }
  std::size_t dim() const noexcept { return q.empty() ? 0 : q.front().dim(); }
  const ComplexMatrix& operator[](const Symbol& s) const;
  ComplexMatrix& operator[](const Symbol& s);
  bool hermitian(double tol = 1e-12) const;

  /// Entries i.i.d. complex normal (general) or Hermitian with GUE-like
  /// entries scaled by `scale`.
  static TracePhaseSpace random(std::size_t dof, std::size_t dim, numkit::RngStream& rng, bool hermitian,
                                double scale = 1.0);
};

/// Sum of coefficient * Tr(word) at the state. Throws PreconditionError if a
/// symbol index is beyond the state's degrees of freedom.
Complex trace_eval_complex(const TracePolynomial& poly, const TracePhaseSpace& state);
/// Real part; throws NumericalError if the imaginary part exceeds
/// 1e-9 * (1 + |real part|).
double trace_eval(const TracePolynomial& poly, const TracePhaseSpace& state);

using MatrixEvaluator = std::function<ComplexMatrix(const TracePhaseSpace&)>;

/// Cyclic derivative: for every occurrence of `symbol`, the product of the
/// rest of the word read cyclically from the position after it. Satisfies
/// d/de Tr P(x + e E) = Tr(E D) at e = 0.
ComplexMatrix trace_derivative_at(const TracePolynomial& poly, const Symbol& symbol, const TracePhaseSpace& state);
MatrixEvaluator trace_derivative(const TracePolynomial& poly, const Symbol& symbol);

}  // namespace smlab::tracedyn
