#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>

#include "doctest.h"
#include "smlab/numkit/errors.hpp"
#include "smlab/tracedyn/flow.hpp"
#include "smlab/tracedyn/trace_poly.hpp"

using namespace smlab;
using namespace smlab::tracedyn;
using numkit::RngStream;

namespace {

const Symbol q1 = coordinate(0), p1 = momentum(0), q2 = coordinate(1), p2 = momentum(1);

TracePhaseSpace scalar_state(double q, double p) {
  TracePhaseSpace s;
  s.q.push_back(ComplexMatrix::identity(1) * Complex(q));
  s.p.push_back(ComplexMatrix::identity(1) * Complex(p));
  return s;
}

double directional_fd(const TracePolynomial& poly, TracePhaseSpace s, const Symbol& sym, const ComplexMatrix& e,
                      double eps) {
  TracePhaseSpace plus = s, minus = s;
  plus[sym] += e * Complex(eps);
  minus[sym] -= e * Complex(eps);
  return ((trace_eval_complex(poly, plus) - trace_eval_complex(poly, minus)) / (2.0 * eps)).real();
}

}  // namespace

TEST_CASE("scalar matrices reduce to ordinary polynomials") {
  const auto poly = TracePolynomial::parse("2 q1 q1 p1 - 0.5 p1 + q1*q1*q1*q1");
  const double q = 0.7, p = -1.3;
  CHECK(trace_eval(poly, scalar_state(q, p)) == doctest::Approx(2 * q * q * p - 0.5 * p + std::pow(q, 4)));
}

TEST_CASE("trace of a commutator vanishes") {
  RngStream rng(3, 0);
  TracePolynomial c;
  c.add(1.0, {q1, p1}).add(-1.0, {p1, q1});
  for (int k = 0; k < 5; ++k)
    CHECK(std::abs(trace_eval_complex(c, TracePhaseSpace::random(1, 4, rng, false))) < 1e-12);
}

TEST_CASE("evaluation agrees with direct matrix arithmetic") {
  RngStream rng(4, 0);
  const auto s = TracePhaseSpace::random(2, 4, rng, false);
  const auto poly = TracePolynomial::parse("1.5 q1 p2 q1 - 0.25 p1 p1 q2 + 3 q2");
  const Complex direct = 1.5 * (s.q[0] * s.p[1] * s.q[0]).trace() - 0.25 * (s.p[0] * s.p[0] * s.q[1]).trace() +
                         3.0 * s.q[1].trace();
  CHECK(std::abs(trace_eval_complex(poly, s) - direct) < 1e-12 * (1 + std::abs(direct)));
  // Cyclic rotation of a word leaves the value unchanged.
  TracePolynomial a, b;
  a.add(1.0, {q1, p2, q2, p1});
  b.add(1.0, {q2, p1, q1, p2});
  CHECK(std::abs(trace_eval_complex(a, s) - trace_eval_complex(b, s)) < 1e-12 * (1 + std::abs(trace_eval_complex(a, s))));
}

TEST_CASE("symbols outside the state are rejected") {
  RngStream rng(5, 0);
  const auto s = TracePhaseSpace::random(1, 3, rng, true);
  CHECK_THROWS_AS(trace_eval(TracePolynomial::parse("q2 q2"), s), PreconditionError);
  CHECK_THROWS_AS(TracePolynomial().add(1.0, {}), PreconditionError);
  CHECK_THROWS_AS(TracePolynomial::parse("q0"), PreconditionError);
  CHECK_THROWS_AS(TracePolynomial::parse("2 +"), PreconditionError);
  CHECK_THROWS_AS(TracePolynomial::parse(""), PreconditionError);
}

TEST_CASE("parse and print round trip") {
  const auto poly = TracePolynomial::parse("0.5 p1 p1 + 0.5 q1 q1 - 0.1 q1*q1*q1*q1 + p2");
  REQUIRE(poly.terms().size() == 4);
  CHECK(poly.terms()[2].coefficient == doctest::Approx(-0.1));
  CHECK(poly.terms()[3].word == std::vector<Symbol>{p2});
  const auto again = TracePolynomial::parse(poly.to_string());
  RngStream rng(6, 0);
  const auto s = TracePhaseSpace::random(2, 3, rng, false);
  CHECK(std::abs(trace_eval_complex(poly, s) - trace_eval_complex(again, s)) < 1e-12);
  CHECK(poly.degrees_of_freedom() == 2);
  CHECK(poly.max_degree() == 4);
}

TEST_CASE("reversal symmetry detection") {
  CHECK(anharmonic_hamiltonian(2, 0.1).reversal_symmetric());
  CHECK(TracePolynomial::parse("q1 p1 q1 p1").reversal_symmetric());
  CHECK(TracePolynomial::parse("q1 q2 p1").reversal_symmetric() == false);
  CHECK(TracePolynomial::parse("q1 q2 p1 + q1 p1 q2").reversal_symmetric());
}

TEST_CASE("cyclic derivatives") {
  RngStream rng(7, 0);
  const auto s = TracePhaseSpace::random(1, 4, rng, false);
  const auto d_sq = trace_derivative_at(TracePolynomial::parse("q1 q1"), q1, s);
  CHECK(numkit::max_abs_diff(d_sq, s.q[0] * Complex(2.0)) < 1e-12);
  const auto d = trace_derivative(TracePolynomial::parse("q1 p1 q1 p1"), q1)(s);
  CHECK(numkit::max_abs_diff(d, s.p[0] * s.q[0] * s.p[0] * Complex(2.0)) < 1e-12);
  const auto lone = trace_derivative_at(TracePolynomial::parse("3 p1"), p1, s);
  CHECK(numkit::max_abs_diff(lone, ComplexMatrix::identity(4) * Complex(3.0)) < 1e-15);
  CHECK(trace_derivative_at(TracePolynomial::parse("q1"), p1, s).max_abs() == 0.0);
}

TEST_CASE("cyclic derivative matches finite differences") {
  RngStream rng(8, 0);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t dim = 1 + trial % 6;
    const auto poly = random_polynomial(2, 4, 5, rng);
    const auto s = TracePhaseSpace::random(2, dim, rng, false, 0.5);
    for (const auto& sym : {q1, p1, q2, p2}) {
      ComplexMatrix e(dim);
      for (std::size_t i = 0; i < dim; ++i)
        for (std::size_t j = 0; j < dim; ++j) e(i, j) = rng.complex_normal();
      // Real part of the directional derivative along E and along iE.
      const auto d = trace_derivative_at(poly, sym, s);
      const double fd = directional_fd(poly, s, sym, e, 1e-5);
      const double exact = (e * d).trace().real();
      CHECK(std::abs(fd - exact) <= 1e-6 * (1 + std::abs(exact)));
    }
  }
}

TEST_CASE("harmonic flow is a rotation in phase space") {
  RngStream rng(9, 0);
  const auto s0 = TracePhaseSpace::random(1, 4, rng, true);
  const auto traj = hamilton_flow(anharmonic_hamiltonian(1, 0.0), s0, 1e-3, 1000, 1000);
  REQUIRE(traj.states.size() == 2);
  const auto expect = s0.q[0] * Complex(std::cos(1.0)) + s0.p[0] * Complex(std::sin(1.0));
  CHECK(numkit::max_abs_diff(traj.states.back().q[0], expect) < 1e-6);
  CHECK(traj.steps.back() == 1000);
  CHECK(traj.times.back() == doctest::Approx(1.0));
}

TEST_CASE("quartic flow obeys the matrix Newton law") {
  RngStream rng(10, 0);
  const auto h = TracePolynomial::parse("0.5 p1 p1 + 0.5 q1 q1 + 0.1 q1 q1 q1 q1");
  const auto potential = TracePolynomial::parse("0.5 q1 q1 + 0.1 q1 q1 q1 q1");
  const double dt = 1e-3;
  const auto traj = hamilton_flow(h, TracePhaseSpace::random(1, 3, rng, true, 0.5), dt, 400, 1);
  double worst = 0.0;
  for (std::size_t k = 2; k + 2 < traj.states.size(); k += 37) {
    const auto& qm2 = traj.states[k - 2].q[0];
    const auto& qm1 = traj.states[k - 1].q[0];
    const auto& q0 = traj.states[k].q[0];
    const auto& qp1 = traj.states[k + 1].q[0];
    const auto& qp2 = traj.states[k + 2].q[0];
    const auto accel = (qm2 * Complex(-1.0) + qm1 * Complex(16.0) - q0 * Complex(30.0) + qp1 * Complex(16.0) -
                        qp2) * Complex(1.0 / (12.0 * dt * dt));
    const auto force = trace_derivative_at(potential, q1, traj.states[k]) * Complex(-1.0);
    worst = std::max(worst, numkit::max_abs_diff(accel, force));
  }
  CHECK(worst < 1e-6);
}

TEST_CASE("one-dimensional flow matches a scalar integrator") {
  const auto h = TracePolynomial::parse("0.5 p1 p1 + 0.5 q1 q1 + 0.1 q1 q1 q1 q1");
  const auto traj = hamilton_flow(h, scalar_state(1.0, 0.3), 1e-3, 2000, 2000);
  // Fourth-order Yoshida composition of velocity Verlet with a fine step.
  double q = 1.0, p = 0.3;
  const double w1 = 1.0 / (2.0 - std::cbrt(2.0)), w0 = 1.0 - 2.0 * w1;
  const auto force = [](double x) { return -x - 0.4 * x * x * x; };
  const double h_step = 1e-4;
  for (int k = 0; k < 20000; ++k)
    for (double w : {w1, w0, w1}) {
      p += 0.5 * w * h_step * force(q);
      q += w * h_step * p;
      p += 0.5 * w * h_step * force(q);
    }
  CHECK(traj.states.back().q[0](0, 0).real() == doctest::Approx(q).epsilon(1e-6));
  CHECK(traj.states.back().p[0](0, 0).real() == doctest::Approx(p).epsilon(1e-6));
}

TEST_CASE("Millard charge is traceless and conserved") {
  RngStream rng(11, 0);
  TracePhaseSpace diag;
  diag.q.push_back(ComplexMatrix::diagonal(std::vector<double>{1.0, 2.0, 3.0}));
  diag.p.push_back(ComplexMatrix::diagonal(std::vector<double>{-1.0, 0.5, 4.0}));
  CHECK(millard_charge(diag).max_abs() == 0.0);
  const auto s0 = TracePhaseSpace::random(2, 4, rng, true, 0.7);
  CHECK(std::abs(millard_charge(s0).trace()) < 1e-12);
  CHECK(millard_charge(s0).frobenius_norm() > 0.1);
  const auto h = anharmonic_hamiltonian(2, 0.1);
  const auto traj = hamilton_flow(h, s0, 1e-3, 2000, 100);
  const auto rep = conservation_report(h, traj);
  CHECK(rep.max_energy_drift < 1e-8);
  CHECK(rep.max_charge_drift < 1e-6);
  CHECK(rep.max_charge_trace < 1e-12);
}

TEST_CASE("general non-Hermitian states flow without a hermiticity check") {
  RngStream rng(12, 0);
  const auto s0 = TracePhaseSpace::random(1, 3, rng, false, 0.3);
  const auto h = anharmonic_hamiltonian(1, 0.1);
  const auto traj = hamilton_flow(h, s0, 1e-3, 500, 500);
  const Complex e0 = trace_eval_complex(h, s0), e1 = trace_eval_complex(h, traj.states.back());
  CHECK(std::abs(e1 - e0) < 1e-9);
  CHECK_THROWS_AS(hamilton_flow(TracePolynomial::parse("q2 p2"), s0, 1e-3, 1), PreconditionError);
  CHECK_THROWS_AS(hamilton_flow(h, s0, 0.0, 1), PreconditionError);
}

TEST_CASE("diverging flow surfaces the failing step") {
  TracePhaseSpace s = scalar_state(10.0, 0.0);
  const auto h = TracePolynomial::parse("0.5 p1 p1 - q1 q1 q1 q1 q1 q1");
  CHECK_THROWS_AS(hamilton_flow(h, s, 0.5, 200), StepError);
}

TEST_CASE("trace Poisson brackets") {
  RngStream rng(13, 0);
  const auto s = TracePhaseSpace::random(2, 5, rng, false);
  const Complex qp = trace_poisson_bracket(TracePolynomial::parse("q1"), TracePolynomial::parse("p1"), s);
  CHECK(qp.real() == doctest::Approx(5.0));
  CHECK(std::abs(qp.imag()) < 1e-15);
  const auto a = random_polynomial(2, 3, 4, rng), b = random_polynomial(2, 3, 4, rng);
  const Complex ab = trace_poisson_bracket(a, b, s), ba = trace_poisson_bracket(b, a, s);
  CHECK(std::abs(ab + ba) < 1e-12 * (1 + std::abs(ab)));
}

TEST_CASE("time derivative of a trace equals its bracket with H") {
  RngStream rng(14, 0);
  const auto h = anharmonic_hamiltonian(2, 0.1);
  const auto a = TracePolynomial::parse("q1 p2 q2 + 0.3 p1 p1 q1");
  const auto s0 = TracePhaseSpace::random(2, 3, rng, true, 0.5);
  const double dt = 1e-3;
  const auto traj = hamilton_flow(h, s0, dt, 2, 1);
  const Complex fd = (trace_eval_complex(a, traj.states[2]) - trace_eval_complex(a, traj.states[0])) / (2 * dt);
  const Complex br = trace_poisson_bracket(a, h, traj.states[1]);
  CHECK(std::abs(fd - br) < 1e-6);
}

TEST_CASE("trace flow CSV") {
  RngStream rng(15, 0);
  const auto h = anharmonic_hamiltonian(1, 0.0);
  const auto traj = hamilton_flow(h, TracePhaseSpace::random(1, 2, rng, true), 0.01, 4, 2);
  const auto path = std::filesystem::temp_directory_path() / "smlab_trace.csv";
  write_trace_flow_csv(h, traj, path.string());
  std::ifstream is(path);
  std::string line;
  std::getline(is, line);
  CHECK(line == "step,t,traceH,millard_frobenius,millard_trace");
  int rows = 0;
  while (std::getline(is, line)) ++rows;
  CHECK(rows == 3);
  std::filesystem::remove(path);
}
