#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "smlab/numkit/complex_matrix.hpp"
#include "smlab/numkit/haar.hpp"
#include "smlab/numkit/rng.hpp"
#include "smlab/numkit/stats.hpp"

namespace smlab::hiddenvars {

using numkit::Complex;
using numkit::ComplexMatrix;
using numkit::ComplexVector;
using numkit::HaarMethod;
using numkit::RngStream;

inline constexpr std::size_t kMaxDimension = 64;

/// State vector together with the hidden vector that drives selections.
struct HiddenPair {
  ComplexVector psi;
  ComplexVector alpha;
  double alpha0_norm = 1.0;

  std::size_t n() const noexcept { return psi.size(); }
};

/// Validates sizes, ||psi|| = 1 and ||alpha|| = alpha0_norm (1e-12 relative).
HiddenPair make_pair(ComplexVector psi, ComplexVector alpha, double alpha0_norm);

/// First standard basis vector scaled to `norm`.
ComplexVector reference_alpha(std::size_t n, double norm = 1.0);

/// U alpha0 with U Haar. alpha0 defaults to reference_alpha(n, alpha0_norm).
ComplexVector sample_alpha(std::size_t n, double alpha0_norm, RngStream& rng, HaarMethod method,
                           const ComplexVector* alpha0 = nullptr);

/// Normalized vector of i.i.d. complex normals.
ComplexVector random_state(std::size_t n, RngStream& rng);

struct Observable {
  ComplexMatrix matrix;
  std::vector<double> eigenvalues;  // ascending
  ComplexMatrix eigenvectors;       // columns

  static Observable from_matrix(const ComplexMatrix& m);
  /// Hermitian matrix with complex normal entries (symmetrised).
  static Observable random(std::size_t n, RngStream& rng);
  /// |<phi_k|v>| for every eigenvector.
  std::vector<double> overlaps(const ComplexVector& v) const;
  /// |<phi_k|psi>|^2.
  std::vector<double> probabilities(const ComplexVector& psi) const;
  std::size_t n() const noexcept { return eigenvalues.size(); }
};

struct Selection {
  std::size_t index = 0;
  double eigenvalue = 0.0;
  std::vector<double> ratios;  // NaN marks an excluded 0/0 index
  bool tie = false;
};

/// Largest |<phi_k|psi>| / |<phi_k|alpha>|; a zero denominator with a nonzero
/// numerator is +inf, 0/0 is excluded, ties go to the lowest index and set
/// `tie`. Throws NumericalError if no ratio is positive.
Selection polychotomic_select(const HiddenPair& pair, const Observable& obs);

struct BornEstimate {
  std::vector<std::uint64_t> counts;
  std::vector<double> frequencies;
  std::vector<double> probabilities;
  numkit::TestResult chi_square;
  std::uint64_t ties = 0;
  std::size_t samples = 0;
};

/// Selection frequencies over independent Haar draws of alpha (one derived
/// stream per sample) with a Pearson test against |<phi_k|psi>|^2.
BornEstimate born_estimate(const ComplexVector& psi, const Observable& obs, std::size_t n_samples, RngStream& rng,
                           HaarMethod method = HaarMethod::gram_schmidt, double alpha0_norm = 1.0);

enum class EvolutionKind { quantum, frozen, random_markov, custom };

EvolutionKind parse_evolution_kind(std::string_view name);
std::string_view to_string(EvolutionKind k);

/// How the hidden vector moves. custom applies `unitaries` cyclically; the
/// unitarity check can be disabled to build negative controls.
struct EvolutionSpec {
  EvolutionKind kind = EvolutionKind::quantum;
  double epsilon = 0.1;
  std::vector<ComplexMatrix> unitaries;
  bool check_unitary = true;

  /// Stable 64-bit identity used to pick random streams.
  std::uint64_t fingerprint() const;
};

struct PairTrajectory {
  std::vector<double> times;
  std::vector<HiddenPair> pairs;
};

/// psi moves by exp(-i H dt) each step; alpha moves according to `spec`.
/// Throws NonHermitianError for a non-Hermitian H and PreconditionError for
/// dt <= 0 or a non-unitary custom map while checks are on.
PairTrajectory evolve_pair(const HiddenPair& pair, const ComplexMatrix& hamiltonian, const EvolutionSpec& spec,
                           double dt, std::size_t steps, RngStream& rng);

struct ObservableRecord {
  std::vector<double> times;
  std::vector<std::size_t> indices;
  std::vector<double> eigenvalues;
  std::size_t jump_count = 0;
  std::map<std::size_t, std::size_t> dwell_histogram;  // run length in steps -> count
  std::uint64_t ties = 0;
};

ObservableRecord observable_trajectory(const PairTrajectory& traj, const Observable& obs);

/// CSV with header `step,t,k,eigenvalue` (k zero-based).
void write_hidden_trajectory_csv(const ObservableRecord& rec, const std::string& file);

struct SpecOutcome {
  EvolutionSpec spec;
  std::vector<std::uint64_t> counts;  // selections at the horizon
  std::vector<double> frequencies;
  numkit::MeanEstimate jumps;         // per-sample jump count over the horizon
  double max_unitarity_defect = 0.0;
  double max_alpha_norm_drift = 0.0;
};

struct InvarianceReport {
  std::vector<SpecOutcome> outcomes;
  std::vector<std::vector<double>> pairwise_p;  // homogeneity p-values
  double min_p = 1.0;
  bool invariance_holds = false;  // min_p > threshold and every map unitary
};

/// For each spec and sample, draws alpha from a stream keyed by the spec's
/// fingerprint and the sample index, evolves the pair for `horizon` steps
/// and records the final selection and the number of jumps.
InvarianceReport ur_invariance_test(const ComplexVector& psi, const Observable& obs, const ComplexMatrix& hamiltonian,
                                    const std::vector<EvolutionSpec>& specs, std::size_t n_samples,
                                    std::size_t horizon, double dt, RngStream& rng, double p_threshold = 0.01);

/// (psi + lambda alpha) / norm. Throws NumericalError if the sum vanishes.
ComplexVector signal_noise_state(const ComplexVector& psi, const ComplexVector& alpha, double lambda);

}  // namespace smlab::hiddenvars
