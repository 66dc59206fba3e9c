#include "smlab/tracedyn/trace_poly.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <utility>

#include "smlab/numkit/errors.hpp"

namespace smlab::tracedyn {

std::string to_string(const Symbol& s) {
  return (s.var == Variable::q ? "q" : "p") + std::to_string(s.index + 1);
}

TracePolynomial& TracePolynomial::add(double coefficient, std::vector<Symbol> word) {
  if (word.empty()) throw PreconditionError("TracePolynomial: empty word");
  if (!std::isfinite(coefficient)) throw PreconditionError("TracePolynomial: non-finite coefficient");
  terms_.push_back({coefficient, std::move(word)});
  return *this;
}

std::size_t TracePolynomial::degrees_of_freedom() const noexcept {
  std::size_t r = 0;
  for (const auto& t : terms_)
    for (const auto& s : t.word) r = std::max(r, s.index + 1);
  return r;
}

std::size_t TracePolynomial::max_degree() const noexcept {
  std::size_t d = 0;
  for (const auto& t : terms_) d = std::max(d, t.word.size());
  return d;
}

namespace {

using Key = std::vector<std::pair<int, std::size_t>>;

Key encode(const std::vector<Symbol>& w) {
  Key k;
  k.reserve(w.size());
  for (const auto& s : w) k.emplace_back(s.var == Variable::q ? 0 : 1, s.index);
  return k;
}

Key min_rotation(Key k) {
  Key best = k;
  for (std::size_t i = 1; i < k.size(); ++i) {
    std::rotate(k.begin(), k.begin() + 1, k.end());
    if (k < best) best = k;
  }
  return best;
}

std::map<Key, double> cyclic_classes(const std::vector<Term>& terms, bool reversed) {
  std::map<Key, double> out;
  for (const auto& t : terms) {
    Key k = encode(t.word);
    if (reversed) std::reverse(k.begin(), k.end());
    out[min_rotation(std::move(k))] += t.coefficient;
  }
  return out;
}

}  // namespace

bool TracePolynomial::reversal_symmetric() const {
  const auto a = cyclic_classes(terms_, false);
  const auto b = cyclic_classes(terms_, true);
  auto close = [](double x, double y) { return std::abs(x - y) <= 1e-14 * (1.0 + std::abs(x) + std::abs(y)); };
  for (const auto& [k, c] : a) {
    const auto it = b.find(k);
    if (!close(c, it == b.end() ? 0.0 : it->second)) return false;
  }
  for (const auto& [k, c] : b)
    if (!a.contains(k) && !close(c, 0.0)) return false;
  return true;
}

TracePolynomial TracePolynomial::parse(std::string_view text) {
  TracePolynomial out;
  std::size_t i = 0;
  const auto fail = [&](const std::string& what) {
    throw PreconditionError("cannot parse polynomial at offset " + std::to_string(i) + ": " + what);
  };
  const auto skip_space = [&] {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
  };
  bool first = true;
  while (true) {
    skip_space();
    if (i >= text.size()) break;
    double sign = 1.0;
    if (text[i] == '+' || text[i] == '-') {
      sign = text[i] == '-' ? -1.0 : 1.0;
      ++i;
      skip_space();
    } else if (!first) {
      fail("expected '+' or '-'");
    }
    first = false;
    double coefficient = 1.0;
    if (i < text.size() && (std::isdigit(static_cast<unsigned char>(text[i])) || text[i] == '.')) {
      const auto res = std::from_chars(text.data() + i, text.data() + text.size(), coefficient);
      if (res.ec != std::errc()) fail("bad number");
      i = static_cast<std::size_t>(res.ptr - text.data());
    }
    std::vector<Symbol> word;
    while (true) {
      skip_space();
      if (i < text.size() && text[i] == '*') {
        ++i;
        skip_space();
      }
      if (i >= text.size() || (text[i] != 'q' && text[i] != 'p')) break;
      const Variable var = text[i] == 'q' ? Variable::q : Variable::p;
      ++i;
      std::size_t r = 0;
      const auto res = std::from_chars(text.data() + i, text.data() + text.size(), r);
      if (res.ec != std::errc() || r == 0) fail("symbol index must be a positive integer");
      i = static_cast<std::size_t>(res.ptr - text.data());
      word.push_back({var, r - 1});
    }
    if (word.empty()) fail("term without symbols");
    out.add(sign * coefficient, std::move(word));
  }
  if (out.terms_.empty()) throw PreconditionError("cannot parse polynomial: empty");
  return out;
}

std::string TracePolynomial::to_string() const {
  std::string s;
  char buf[64];
  for (std::size_t k = 0; k < terms_.size(); ++k) {
    const double c = terms_[k].coefficient;
    if (k > 0) s += c < 0 ? " - " : " + ";
    else if (c < 0) s += "-";
    std::snprintf(buf, sizeof buf, "%.17g", std::abs(c));
    s += buf;
    for (const auto& sym : terms_[k].word) s += " " + tracedyn::to_string(sym);
  }
  return s;
}

TracePolynomial operator+(TracePolynomial a, const TracePolynomial& b) {
  a.terms_.insert(a.terms_.end(), b.terms_.begin(), b.terms_.end());
  return a;
}

TracePolynomial operator*(double s, TracePolynomial a) {
  for (auto& t : a.terms_) t.coefficient *= s;
  return a;
}

TracePolynomial anharmonic_hamiltonian(std::size_t dof, double quartic) {
  TracePolynomial h;
  for (std::size_t r = 0; r < dof; ++r) {
    h.add(0.5, {momentum(r), momentum(r)});
    h.add(0.5, {coordinate(r), coordinate(r)});
    if (quartic != 0.0) h.add(quartic, {coordinate(r), coordinate(r), coordinate(r), coordinate(r)});
  }
  return h;
}

TracePolynomial random_polynomial(std::size_t dof, std::size_t max_degree, std::size_t n_terms,
                                  numkit::RngStream& rng) {
  if (dof == 0 || max_degree == 0 || n_terms == 0) throw PreconditionError("random_polynomial: empty request");
  TracePolynomial poly;
  for (std::size_t k = 0; k < n_terms; ++k) {
    const auto len = 1 + static_cast<std::size_t>(rng.uniform() * static_cast<double>(max_degree));
    std::vector<Symbol> word;
    for (std::size_t j = 0; j < std::min(len, max_degree); ++j) {
      const auto pick = static_cast<std::size_t>(rng.uniform() * static_cast<double>(2 * dof));
      word.push_back({pick % 2 == 0 ? Variable::q : Variable::p, std::min(pick / 2, dof - 1)});
    }
    poly.add(rng.normal(), std::move(word));
  }
  return poly;
}

const ComplexMatrix& TracePhaseSpace::operator[](const Symbol& s) const {
  const auto& v = s.var == Variable::q ? q : p;
  if (s.index >= v.size()) throw PreconditionError("symbol " + to_string(s) + " beyond the phase space");
  return v[s.index];
}

ComplexMatrix& TracePhaseSpace::operator[](const Symbol& s) {
  auto& v = s.var == Variable::q ? q : p;
  if (s.index >= v.size()) throw PreconditionError("symbol " + to_string(s) + " beyond the phase space");
  return v[s.index];
}

bool TracePhaseSpace::hermitian(double tol) const {
  for (const auto* v : {&q, &p})
    for (const auto& m : *v)
      if (!numkit::is_hermitian(m, tol)) return false;
  return true;
}

TracePhaseSpace TracePhaseSpace::random(std::size_t dof, std::size_t dim, numkit::RngStream& rng, bool hermitian,
                                        double scale) {
  if (dof == 0 || dim == 0) throw PreconditionError("TracePhaseSpace::random: empty request");
  TracePhaseSpace s;
  auto draw = [&] {
    ComplexMatrix m(dim);
    for (std::size_t i = 0; i < dim; ++i)
      for (std::size_t j = 0; j < dim; ++j) m(i, j) = scale * rng.complex_normal();
    if (hermitian) {
      m += m.adjoint();
      m *= Complex(0.5);
    }
    return m;
  };
  for (std::size_t r = 0; r < dof; ++r) s.q.push_back(draw());
  for (std::size_t r = 0; r < dof; ++r) s.p.push_back(draw());
  return s;
}

namespace {

ComplexMatrix word_product(const std::vector<Symbol>& word, std::size_t begin, std::size_t count,
                           const TracePhaseSpace& state) {
  const std::size_t n = word.size();
  ComplexMatrix prod = ComplexMatrix::identity(state.dim());
  for (std::size_t k = 0; k < count; ++k) prod = prod * state[word[(begin + k) % n]];
  return prod;
}

void check_symbols(const TracePolynomial& poly, const TracePhaseSpace& state) {
  if (poly.degrees_of_freedom() > state.dof())
    throw PreconditionError("polynomial uses " + std::to_string(poly.degrees_of_freedom()) +
                            " degrees of freedom, state has " + std::to_string(state.dof()));
}

}  // namespace

Complex trace_eval_complex(const TracePolynomial& poly, const TracePhaseSpace& state) {
  check_symbols(poly, state);
  Complex sum = 0.0;
  for (const auto& t : poly.terms()) sum += t.coefficient * word_product(t.word, 0, t.word.size(), state).trace();
  return sum;
}

double trace_eval(const TracePolynomial& poly, const TracePhaseSpace& state) {
  const Complex z = trace_eval_complex(poly, state);
  if (std::abs(z.imag()) > 1e-9 * (1.0 + std::abs(z.real())))
    throw NumericalError("trace value has imaginary part " + std::to_string(z.imag()));
  return z.real();
}

ComplexMatrix trace_derivative_at(const TracePolynomial& poly, const Symbol& symbol, const TracePhaseSpace& state) {
  check_symbols(poly, state);
  ComplexMatrix out(state.dim());
  for (const auto& t : poly.terms()) {
    const std::size_t n = t.word.size();
    for (std::size_t i = 0; i < n; ++i) {
      if (!(t.word[i] == symbol)) continue;
      out += word_product(t.word, i + 1, n - 1, state) * Complex(t.coefficient);
    }
  }
  return out;
}

MatrixEvaluator trace_derivative(const TracePolynomial& poly, const Symbol& symbol) {
  return [poly, symbol](const TracePhaseSpace& state) { return trace_derivative_at(poly, symbol, state); };
}

}  // namespace smlab::tracedyn
