#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "smlab/numkit/complex_matrix.hpp"
#include "smlab/numkit/eigh.hpp"
#include "smlab/numkit/errors.hpp"
#include "smlab/numkit/grid.hpp"
#include "smlab/numkit/haar.hpp"
#include "smlab/numkit/rk4.hpp"
#include "smlab/numkit/rng.hpp"
#include "smlab/numkit/stats.hpp"

using namespace smlab;
using namespace smlab::numkit;

namespace {

ComplexMatrix random_hermitian(std::size_t n, RngStream& rng) {
  ComplexMatrix a = ginibre(n, rng);
  ComplexMatrix h = a + a.adjoint();
  return h * Complex(0.5);
}

double eigh_residual(const ComplexMatrix& m, const EighResult& e) {
  double worst = 0.0;
  for (std::size_t k = 0; k < m.dim(); ++k) {
    const ComplexVector v = e.eigenvectors.column(k);
    const ComplexVector mv = m.apply(v);
    for (std::size_t i = 0; i < m.dim(); ++i)
      worst = std::max(worst, std::abs(mv[i] - e.eigenvalues[k] * v[i]));
  }
  return worst;
}

}  // namespace

TEST_CASE("rng streams are reproducible and distinct") {
  RngStream a(42, 7), b(42, 7), c(42, 8);
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next_u64();
    CHECK(x == b.next_u64());
    CHECK(x != c.next_u64());
  }
  RngStream d1 = a.derive(3), d2 = b.derive(3);
  CHECK(d1.stream_id() == d2.stream_id());
  CHECK(d1.normal() == d2.normal());
}

TEST_CASE("rng normal has unit variance") {
  RngStream r(1, 0);
  std::vector<double> xs(200000);
  for (auto& x : xs) x = r.normal();
  const auto est = mean_estimate(xs);
  CHECK(std::abs(est.mean) < 3.0 * est.stderr_ + 1e-12);
  double ss = 0.0;
  for (double x : xs) ss += x * x;
  CHECK(std::abs(ss / xs.size() - 1.0) < 0.01);
}

TEST_CASE("hermitian_eigh small cases") {
  SUBCASE("diagonal") {
    const std::vector<double> d{3.0, 1.0, 2.0};
    const auto e = hermitian_eigh(ComplexMatrix::diagonal(d));
    CHECK(e.eigenvalues == std::vector<double>{1.0, 2.0, 3.0});
  }
  SUBCASE("pauli x") {
    const std::vector<double> rows{0, 1, 1, 0};
    const auto e = hermitian_eigh(ComplexMatrix::from_real(2, rows));
    CHECK(e.eigenvalues[0] == doctest::Approx(-1.0).epsilon(1e-14));
    CHECK(e.eigenvalues[1] == doctest::Approx(1.0).epsilon(1e-14));
  }
  SUBCASE("1x1 and complex 2x2") {
    ComplexMatrix m(2);
    m(0, 0) = 1.0;
    m(1, 1) = -1.0;
    m(0, 1) = Complex(0.0, 1.0);
    m(1, 0) = Complex(0.0, -1.0);
    const auto e = hermitian_eigh(m);
    CHECK(e.eigenvalues[0] == doctest::Approx(-std::sqrt(2.0)));
    CHECK(e.eigenvalues[1] == doctest::Approx(std::sqrt(2.0)));
    CHECK(eigh_residual(m, e) < 1e-14);
  }
}

TEST_CASE("hermitian_eigh reconstructs random 8x8") {
  RngStream rng(2024, 1);
  const ComplexMatrix m = random_hermitian(8, rng);
  const auto e = hermitian_eigh(m);
  const ComplexMatrix rebuilt = spectral_function(e, [](double l) { return Complex(l); });
  CHECK(max_abs_diff(rebuilt, m) <= 1e-10);
}

TEST_CASE("hermitian_eigh property sweep up to dim 32") {
  RngStream rng(77, 0);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 1 + rng.next_u64() % 32;
    const ComplexMatrix m = random_hermitian(n, rng);
    const auto e = hermitian_eigh(m);
    REQUIRE(eigh_residual(m, e) <= 1e-10 * m.frobenius_norm());
    REQUIRE(unitarity_defect(e.eigenvectors) <= 1e-12);
    for (std::size_t k = 1; k < n; ++k) REQUIRE(e.eigenvalues[k - 1] <= e.eigenvalues[k]);
  }
}

TEST_CASE("hermitian_eigh errors") {
  ComplexMatrix m(2);
  m(0, 1) = 1.0;
  try {
    hermitian_eigh(m);
    FAIL("expected rejection");
  } catch (const NonHermitianError& e) {
    CHECK(e.asymmetry() == doctest::Approx(1.0));
  }
  RngStream rng(5, 5);
  const ComplexMatrix h = random_hermitian(6, rng);
  CHECK_THROWS_AS(hermitian_eigh(h, EighOptions{1e-12, 0}), ConvergenceError);
}

TEST_CASE("haar unitaries are unitary and deterministic") {
  for (auto method : {HaarMethod::gram_schmidt, HaarMethod::column_wise}) {
    for (std::size_t n = 1; n <= 12; ++n) {
      RngStream rng(9, n);
      const ComplexMatrix u = haar_unitary(n, rng, method);
      CHECK(unitarity_defect(u) <= 1e-12);
      RngStream again(9, n);
      CHECK(max_abs_diff(u, haar_unitary(n, again, method)) == 0.0);
    }
  }
  RngStream rng(1, 1);
  CHECK_THROWS_AS(haar_unitary(0, rng, HaarMethod::gram_schmidt), PreconditionError);
}

TEST_CASE("haar n=1 phase is uniform (KS)") {
  for (auto method : {HaarMethod::gram_schmidt, HaarMethod::column_wise}) {
    RngStream rng(31, 0);
    std::vector<double> phases(10000);
    for (auto& p : phases) {
      const Complex u = haar_unitary(1, rng, method)(0, 0);
      p = std::arg(u);
      if (p < 0) p += 2.0 * std::numbers::pi;
    }
    const auto ks = ks_one_sample(phases, [](double x) { return x / (2.0 * std::numbers::pi); });
    CHECK(ks.p_value > 0.01);
  }
}

TEST_CASE("haar n=4 first entry has mean |u|^2 = 1/4") {
  for (auto method : {HaarMethod::gram_schmidt, HaarMethod::column_wise}) {
    RngStream rng(32, 0);
    std::vector<double> w(10000);
    for (auto& x : w) x = std::norm(haar_unitary(4, rng, method)(0, 0));
    const auto est = mean_estimate(w);
    CHECK(within_sigma(est.mean, 0.25, est.stderr_, 0.0));
  }
}

TEST_CASE("haar methods agree and are left-invariant (two-sample KS)") {
  const std::size_t n = 4, samples = 10000;
  RngStream ra(100, 1), rb(100, 2), rc(100, 3);
  RngStream rw(100, 4);
  const ComplexMatrix w = haar_unitary(n, rw, HaarMethod::gram_schmidt);
  std::vector<double> a(samples), b(samples), c(samples);
  for (std::size_t s = 0; s < samples; ++s) {
    a[s] = std::abs(haar_unitary(n, ra, HaarMethod::gram_schmidt)(1, 2));
    b[s] = std::abs(haar_unitary(n, rb, HaarMethod::column_wise)(1, 2));
    c[s] = std::abs((w * haar_unitary(n, rc, HaarMethod::column_wise))(1, 2));
  }
  CHECK(ks_two_sample(a, b).p_value > 0.01);
  CHECK(ks_two_sample(b, c).p_value > 0.01);
}

TEST_CASE("rk4 flow") {
  SUBCASE("zero rhs keeps state") {
    RngStream rng(3, 3);
    MatrixState s0{ginibre(3, rng)};
    const auto traj = rk4_matrix_flow(
        [](double, const MatrixState& s) { return MatrixState{ComplexMatrix(s[0].dim())}; }, s0,
        0.1, 10);
    CHECK(max_abs_diff(traj.states.back()[0], s0[0]) == 0.0);
  }
  SUBCASE("scalar exponential, one step") {
    MatrixState s0{ComplexMatrix::identity(1)};
    const auto traj = rk4_matrix_flow([](double, const MatrixState& s) { return s; }, s0, 0.1, 1);
    CHECK(std::abs(traj.states.back()[0](0, 0) - std::exp(0.1)) <= 1e-7);
  }
  SUBCASE("rotation stays orthogonal and matches exact rotation") {
    const std::vector<double> gen{0, -1, 1, 0};
    const ComplexMatrix g = ComplexMatrix::from_real(2, gen);
    MatrixState s0{ComplexMatrix::identity(2)};
    const auto traj =
        rk4_matrix_flow([&](double, const MatrixState& s) { return MatrixState{g * s[0]}; }, s0,
                        1e-3, 1000, 100);
    for (std::size_t k = 0; k < traj.states.size(); ++k) {
      const ComplexMatrix& r = traj.states[k][0];
      CHECK(max_abs_diff(r.transpose() * r, ComplexMatrix::identity(2)) <= 1e-9);
      const double t = traj.times[k];
      const std::vector<double> exact{std::cos(t), -std::sin(t), std::sin(t), std::cos(t)};
      CHECK(max_abs_diff(r, ComplexMatrix::from_real(2, exact)) <= 1e-9);
    }
  }
  SUBCASE("non-finite state aborts with step index") {
    MatrixState s0{ComplexMatrix::identity(1)};
    try {
      rk4_matrix_flow(
          [](double t, const MatrixState& s) {
            MatrixState r = s;
            if (t >= 0.25) r[0](0, 0) = std::nan("");
            return r;
          },
          s0, 0.1, 10);
      FAIL("expected StepError");
    } catch (const StepError& e) {
      CHECK(e.step() == 3);
    }
  }
}

TEST_CASE("grid derivatives are exact on low-degree polynomials") {
  const UniformGrid g(-2.0, 3.0, 101);
  Field cubic(g.size()), quad(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double x = g.x(i);
    cubic[i] = x * x * x - 2.0 * x;
    quad[i] = 0.5 * x * x + x;
  }
  const Field dc = d1(g, cubic);
  const Field ddc = d2(g, cubic);
  for (std::size_t i = 2; i + 2 < g.size(); ++i) {
    const double x = g.x(i);
    CHECK(dc[i] == doctest::Approx(3 * x * x - 2.0).epsilon(1e-10));
    CHECK(ddc[i] == doctest::Approx(6 * x).epsilon(1e-8).scale(1.0));
  }
  const Field dq = d1(g, quad, Stencil::second);
  for (std::size_t i = 0; i < g.size(); ++i) CHECK(dq[i] == doctest::Approx(g.x(i) + 1.0));
  const Field anti = antiderivative(g, Field(g.size(), 2.0));
  CHECK(anti.back() == doctest::Approx(10.0));
  CHECK(integrate(g, Field(g.size(), 1.0)) == doctest::Approx(5.0));
  bool outside = false;
  CHECK(interpolate(g, quad, 10.0, &outside) == doctest::Approx(quad.back()));
  CHECK(outside);
}

TEST_CASE("stats reference values") {
  CHECK(chi_square_sf(3.841458820694124, 1.0) == doctest::Approx(0.05).epsilon(1e-9));
  CHECK(chi_square_sf(18.307038053275146, 10.0) == doctest::Approx(0.05).epsilon(1e-9));
  CHECK(kolmogorov_q(1.3580986393225507) == doctest::Approx(0.05).epsilon(1e-4));
  const std::vector<double> x{1, 2, 3, 4}, y{3, 5, 7, 9};
  const auto fit = linear_fit(x, y);
  CHECK(fit.slope == doctest::Approx(2.0));
  CHECK(fit.intercept == doctest::Approx(1.0));
  const std::vector<std::uint64_t> obs{50, 50};
  const std::vector<double> p{0.5, 0.5};
  CHECK(chi_square_gof(obs, p).p_value == doctest::Approx(1.0));
}
