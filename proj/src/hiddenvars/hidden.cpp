#include "smlab/hiddenvars/hidden.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "smlab/numkit/eigh.hpp"
#include "smlab/numkit/errors.hpp"

namespace smlab::hiddenvars {

namespace {

void check_dimension(std::size_t n) {
  if (n < 2 || n > kMaxDimension)
    throw PreconditionError("hidden-variable dimension must be in [2, " + std::to_string(kMaxDimension) + "], got " +
                            std::to_string(n));
}

ComplexVector scaled(ComplexVector v, double s) {
  for (auto& z : v) z *= s;
  return v;
}

}  // namespace

HiddenPair make_pair(ComplexVector psi, ComplexVector alpha, double alpha0_norm) {
  check_dimension(psi.size());
  if (alpha.size() != psi.size()) throw PreconditionError("make_pair: psi and alpha sizes differ");
  if (!(alpha0_norm > 0.0)) throw PreconditionError("make_pair: alpha0_norm must be positive");
  if (std::abs(numkit::norm(psi) - 1.0) > 1e-12) throw PreconditionError("make_pair: psi is not normalized");
  if (std::abs(numkit::norm(alpha) - alpha0_norm) > 1e-12 * alpha0_norm)
    throw PreconditionError("make_pair: alpha norm differs from alpha0_norm");
  return {std::move(psi), std::move(alpha), alpha0_norm};
}

ComplexVector reference_alpha(std::size_t n, double norm) {
  check_dimension(n);
  ComplexVector v(n, 0.0);
  v[0] = norm;
  return v;
}

ComplexVector sample_alpha(std::size_t n, double alpha0_norm, RngStream& rng, HaarMethod method,
                           const ComplexVector* alpha0) {
  check_dimension(n);
  const ComplexVector ref = alpha0 ? *alpha0 : reference_alpha(n, alpha0_norm);
  if (ref.size() != n) throw PreconditionError("sample_alpha: reference vector has the wrong size");
  return numkit::haar_unitary(n, rng, method).apply(ref);
}

ComplexVector random_state(std::size_t n, RngStream& rng) {
  check_dimension(n);
  ComplexVector v(n);
  for (auto& z : v) z = rng.complex_normal();
  return scaled(std::move(v), 1.0 / numkit::norm(v));
}

Observable Observable::from_matrix(const ComplexMatrix& m) {
  check_dimension(m.dim());
  auto eig = numkit::hermitian_eigh(m);
  return {m, std::move(eig.eigenvalues), std::move(eig.eigenvectors)};
}

Observable Observable::random(std::size_t n, RngStream& rng) {
  check_dimension(n);
  ComplexMatrix a(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) a(i, j) = rng.complex_normal();
  ComplexMatrix h = (a + a.adjoint()) * Complex(0.5);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < i; ++j) h(i, j) = std::conj(h(j, i));
  return from_matrix(h);
}

std::vector<double> Observable::overlaps(const ComplexVector& v) const {
  if (v.size() != n()) throw PreconditionError("Observable::overlaps: size mismatch");
  std::vector<double> out(n());
  for (std::size_t k = 0; k < n(); ++k) {
    Complex s = 0.0;
    for (std::size_t i = 0; i < n(); ++i) s += std::conj(eigenvectors(i, k)) * v[i];
    out[k] = std::abs(s);
  }
  return out;
}

std::vector<double> Observable::probabilities(const ComplexVector& psi) const {
  auto o = overlaps(psi);
  for (auto& x : o) x *= x;
  return o;
}

namespace {

Selection select_from_overlaps(const std::vector<double>& num, const std::vector<double>& den) {
  Selection sel;
  sel.ratios.resize(num.size());
  double best = -1.0;
  bool found = false;
  for (std::size_t k = 0; k < num.size(); ++k) {
    double r;
    if (den[k] == 0.0)
      r = num[k] == 0.0 ? std::numeric_limits<double>::quiet_NaN() : std::numeric_limits<double>::infinity();
    else
      r = num[k] / den[k];
    sel.ratios[k] = r;
    if (std::isnan(r)) continue;
    if (!found || r > best) {
      best = r;
      sel.index = k;
      found = true;
    } else if (r == best) {
      sel.tie = true;
    }
  }
  if (!found || !(best > 0.0)) throw NumericalError("polychotomic_select: no positive ratio");
  return sel;
}

}  // namespace

Selection polychotomic_select(const HiddenPair& pair, const Observable& obs) {
  if (pair.n() != obs.n()) throw PreconditionError("polychotomic_select: dimension mismatch");
  Selection sel = select_from_overlaps(obs.overlaps(pair.psi), obs.overlaps(pair.alpha));
  sel.eigenvalue = obs.eigenvalues[sel.index];
  return sel;
}

BornEstimate born_estimate(const ComplexVector& psi, const Observable& obs, std::size_t n_samples, RngStream& rng,
                           HaarMethod method, double alpha0_norm) {
  if (n_samples < 1000) throw PreconditionError("born_estimate: need at least 1000 samples");
  if (psi.size() != obs.n()) throw PreconditionError("born_estimate: dimension mismatch");
  BornEstimate est;
  est.samples = n_samples;
  est.counts.assign(obs.n(), 0);
  est.probabilities = obs.probabilities(psi);
  const auto num = obs.overlaps(psi);
  for (std::size_t s = 0; s < n_samples; ++s) {
    RngStream stream = rng.derive(s);
    const auto alpha = sample_alpha(obs.n(), alpha0_norm, stream, method);
    const auto sel = select_from_overlaps(num, obs.overlaps(alpha));
    ++est.counts[sel.index];
    if (sel.tie) ++est.ties;
  }
  for (auto c : est.counts) est.frequencies.push_back(static_cast<double>(c) / static_cast<double>(n_samples));
  est.chi_square = numkit::chi_square_gof(est.counts, est.probabilities);
  return est;
}

EvolutionKind parse_evolution_kind(std::string_view name) {
  if (name == "quantum") return EvolutionKind::quantum;
  if (name == "frozen") return EvolutionKind::frozen;
  if (name == "random_markov") return EvolutionKind::random_markov;
  if (name == "custom") return EvolutionKind::custom;
  throw PreconditionError("unknown evolution kind '" + std::string(name) + "'");
}

std::string_view to_string(EvolutionKind k) {
  switch (k) {
    case EvolutionKind::quantum: return "quantum";
    case EvolutionKind::frozen: return "frozen";
    case EvolutionKind::random_markov: return "random_markov";
    case EvolutionKind::custom: return "custom";
  }
  return "?";
}

std::uint64_t EvolutionSpec::fingerprint() const {
  std::uint64_t h = numkit::splitmix64(static_cast<std::uint64_t>(kind) + 1);
  if (kind == EvolutionKind::random_markov) h = numkit::splitmix64(h ^ std::bit_cast<std::uint64_t>(epsilon));
  for (const auto& u : unitaries)
    for (const auto& z : u.data())
      h = numkit::splitmix64(h ^ std::bit_cast<std::uint64_t>(z.real()) ^
                             (std::bit_cast<std::uint64_t>(z.imag()) << 1));
  return h;
}

namespace {

/// Per-step maps for the hidden vector.
class AlphaStepper {
 public:
  AlphaStepper(const EvolutionSpec& spec, const ComplexMatrix& propagator, std::size_t n)
      : spec_(spec), propagator_(propagator), n_(n) {
    if (spec.kind == EvolutionKind::custom) {
      if (spec.unitaries.empty()) throw PreconditionError("custom evolution needs at least one matrix");
      for (const auto& u : spec.unitaries) {
        if (u.dim() != n) throw PreconditionError("custom evolution matrix has the wrong size");
        const double d = numkit::unitarity_defect(u);
        defect_ = std::max(defect_, d);
        if (spec.check_unitary && d > 1e-12)
          throw PreconditionError("custom evolution matrix is not unitary (defect " + std::to_string(d) + ")");
      }
    }
    if (spec.kind == EvolutionKind::random_markov && !(spec.epsilon >= 0.0))
      throw PreconditionError("random_markov step size must be non-negative");
  }

  void step(ComplexVector& alpha, std::size_t k, RngStream& rng) {
    switch (spec_.kind) {
      case EvolutionKind::frozen: return;
      case EvolutionKind::quantum: alpha = propagator_.apply(alpha); return;
      case EvolutionKind::custom: alpha = spec_.unitaries[k % spec_.unitaries.size()].apply(alpha); return;
      case EvolutionKind::random_markov: {
        ComplexMatrix g(n_);
        for (std::size_t i = 0; i < n_; ++i) {
          g(i, i) = rng.normal();
          for (std::size_t j = i + 1; j < n_; ++j) {
            g(i, j) = rng.complex_normal();
            g(j, i) = std::conj(g(i, j));
          }
        }
        const ComplexMatrix u = numkit::hermitian_exp(g, Complex(0.0, spec_.epsilon));
        defect_ = std::max(defect_, numkit::unitarity_defect(u));
        alpha = u.apply(alpha);
        return;
      }
    }
  }

  double defect() const noexcept { return defect_; }

 private:
  const EvolutionSpec& spec_;
  const ComplexMatrix& propagator_;
  std::size_t n_;
  double defect_ = 0.0;
};

ComplexMatrix propagator(const ComplexMatrix& hamiltonian, double dt) {
  return numkit::hermitian_exp(hamiltonian, Complex(0.0, -dt));
}

}  // namespace

PairTrajectory evolve_pair(const HiddenPair& pair, const ComplexMatrix& hamiltonian, const EvolutionSpec& spec,
                           double dt, std::size_t steps, RngStream& rng) {
  if (!(dt > 0.0)) throw PreconditionError("evolve_pair: dt must be positive");
  if (hamiltonian.dim() != pair.n()) throw PreconditionError("evolve_pair: hamiltonian has the wrong size");
  const ComplexMatrix u = propagator(hamiltonian, dt);
  AlphaStepper stepper(spec, u, pair.n());
  PairTrajectory traj;
  traj.times.push_back(0.0);
  traj.pairs.push_back(pair);
  HiddenPair cur = pair;
  for (std::size_t k = 0; k < steps; ++k) {
    cur.psi = u.apply(cur.psi);
    stepper.step(cur.alpha, k, rng);
    traj.times.push_back(static_cast<double>(k + 1) * dt);
    traj.pairs.push_back(cur);
  }
  return traj;
}

ObservableRecord observable_trajectory(const PairTrajectory& traj, const Observable& obs) {
  if (traj.pairs.empty()) throw PreconditionError("observable_trajectory: empty trajectory");
  ObservableRecord rec;
  std::size_t run = 0;
  for (std::size_t k = 0; k < traj.pairs.size(); ++k) {
    const auto sel = polychotomic_select(traj.pairs[k], obs);
    if (sel.tie) ++rec.ties;
    if (k > 0 && sel.index != rec.indices.back()) {
      ++rec.jump_count;
      ++rec.dwell_histogram[run];
      run = 0;
    }
    ++run;
    rec.times.push_back(traj.times[k]);
    rec.indices.push_back(sel.index);
    rec.eigenvalues.push_back(sel.eigenvalue);
  }
  ++rec.dwell_histogram[run];
  return rec;
}

void write_hidden_trajectory_csv(const ObservableRecord& rec, const std::string& file) {
  std::ofstream os(file, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + file);
  os << "step,t,k,eigenvalue\n";
  char buf[128];
  for (std::size_t k = 0; k < rec.times.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%zu,%.15g,%zu,%.15g\n", k, rec.times[k], rec.indices[k], rec.eigenvalues[k]);
    os << buf;
  }
}

InvarianceReport ur_invariance_test(const ComplexVector& psi, const Observable& obs, const ComplexMatrix& hamiltonian,
                                    const std::vector<EvolutionSpec>& specs, std::size_t n_samples,
                                    std::size_t horizon, double dt, RngStream& rng, double p_threshold) {
  if (specs.size() < 2) throw PreconditionError("ur_invariance_test: need at least two evolution specs");
  if (n_samples == 0) throw PreconditionError("ur_invariance_test: need samples");
  if (!(dt > 0.0)) throw PreconditionError("ur_invariance_test: dt must be positive");
  const std::size_t n = obs.n();
  if (psi.size() != n || hamiltonian.dim() != n) throw PreconditionError("ur_invariance_test: dimension mismatch");
  const ComplexMatrix u = propagator(hamiltonian, dt);

  // psi does not depend on the sample, so its overlaps are shared.
  std::vector<std::vector<double>> psi_overlaps;
  ComplexVector p = psi;
  psi_overlaps.push_back(obs.overlaps(p));
  for (std::size_t k = 0; k < horizon; ++k) {
    p = u.apply(p);
    psi_overlaps.push_back(obs.overlaps(p));
  }

  InvarianceReport rep;
  bool all_unitary = true;
  for (const auto& spec : specs) {
    SpecOutcome out;
    out.spec = spec;
    out.counts.assign(n, 0);
    AlphaStepper stepper(spec, u, n);
    const RngStream spec_rng = rng.derive(spec.fingerprint());
    std::vector<double> jumps;
    jumps.reserve(n_samples);
    for (std::size_t s = 0; s < n_samples; ++s) {
      RngStream stream = spec_rng.derive(s);
      ComplexVector alpha = sample_alpha(n, 1.0, stream, HaarMethod::gram_schmidt);
      std::size_t current = select_from_overlaps(psi_overlaps[0], obs.overlaps(alpha)).index;
      std::size_t count = 0;
      for (std::size_t k = 0; k < horizon; ++k) {
        stepper.step(alpha, k, stream);
        const std::size_t next = select_from_overlaps(psi_overlaps[k + 1], obs.overlaps(alpha)).index;
        if (next != current) ++count;
        current = next;
      }
      ++out.counts[current];
      jumps.push_back(static_cast<double>(count));
      out.max_alpha_norm_drift = std::max(out.max_alpha_norm_drift, std::abs(numkit::norm(alpha) - 1.0));
    }
    for (auto c : out.counts) out.frequencies.push_back(static_cast<double>(c) / static_cast<double>(n_samples));
    out.jumps = numkit::mean_estimate(jumps);
    out.max_unitarity_defect = stepper.defect();
    if (out.max_unitarity_defect > 1e-10 || out.max_alpha_norm_drift > 1e-10) all_unitary = false;
    rep.outcomes.push_back(std::move(out));
  }

  const std::size_t m = specs.size();
  rep.pairwise_p.assign(m, std::vector<double>(m, 1.0));
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = a + 1; b < m; ++b) {
      const double pv = numkit::chi_square_homogeneity({rep.outcomes[a].counts, rep.outcomes[b].counts}).p_value;
      rep.pairwise_p[a][b] = rep.pairwise_p[b][a] = pv;
      rep.min_p = std::min(rep.min_p, pv);
    }
  rep.invariance_holds = all_unitary && rep.min_p > p_threshold;
  return rep;
}

ComplexVector signal_noise_state(const ComplexVector& psi, const ComplexVector& alpha, double lambda) {
  if (psi.size() != alpha.size()) throw PreconditionError("signal_noise_state: size mismatch");
  if (!std::isfinite(lambda)) throw PreconditionError("signal_noise_state: lambda must be finite");
  ComplexVector out(psi.size());
  for (std::size_t i = 0; i < psi.size(); ++i) out[i] = psi[i] + lambda * alpha[i];
  const double nrm = numkit::norm(out);
  if (nrm == 0.0) throw NumericalError("signal_noise_state: signal and noise cancel exactly");
  return scaled(std::move(out), 1.0 / nrm);
}

}  // namespace smlab::hiddenvars
