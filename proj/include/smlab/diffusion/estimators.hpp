#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "smlab/diffusion/drift_field.hpp"
#include "smlab/diffusion/ensemble.hpp"
#include "smlab/numkit/stats.hpp"

namespace smlab::diffusion {

using numkit::MeanEstimate;

/// Conditional-mean drift estimates on equal-width bins at one step.
struct DriftEstimate {
  std::size_t step = 0;
  double t = 0.0;
  UniformGrid centers;  // bin centres
  double bin_width = 0.0;
  std::vector<MeanEstimate> forward;
  std::vector<MeanEstimate> backward;
  Field mean_x;   // mean position of the samples in each bin
  Field density;  // histogram density, normalised over all paths
  std::vector<bool> populated;

  std::size_t populated_count() const;
  DriftField forward_field() const;
  DriftField backward_field() const;
};

/// Bins span the 0.5% .. 99.5% empirical quantiles at `step`. Bins with
/// fewer than `min_count` samples are flagged unpopulated. Needs steps
/// step-1, step and step+1 to be recorded.
DriftEstimate estimate_drifts(const DiffusionEnsemble& ens, std::size_t step, std::size_t n_bins,
                              std::size_t min_count = 30);

struct CovarianceStats {
  MeanEstimate cov;
  /// mean of (x(t1+dt) - x(t1))/dt * x(t1+dt)
  MeanEstimate ordered_left;
  /// mean of x(t1) * (x(t1+dt) - x(t1))/dt
  MeanEstimate ordered_right;
};

CovarianceStats covariance_stats(const DiffusionEnsemble& ens, std::size_t s1, std::size_t s2);

struct KineticTerms {
  MeanEstimate overlapping;
  MeanEstimate nonoverlapping;
};

/// Needs steps s, s+1 and s+2 to be recorded.
KineticTerms kinetic_action_terms(const DiffusionEnsemble& ens, std::size_t step);

struct ActionEstimate {
  double value = 0.0;
  double stderr_ = 0.0;
  double divergent_coefficient = 0.0;
  double divergent_stderr = 0.0;
};

/// Weighted fit of overlapping-kinetic means against 1/dt. The slope is the
/// divergent coefficient and the intercept the finite part.
ActionEstimate fit_divergent_kinetic(const std::vector<double>& dts,
                                     const std::vector<MeanEstimate>& overlapping);

enum class LagrangianKind { yasue, dissipative, generalized };

/// Lagrangian density for forward velocity b and backward velocity bs (m = 1).
double lagrangian(LagrangianKind kind, double b, double bs, double potential, double beta = 0.0);

/// Time average over the recorded steps of each path, then mean and
/// standard error over paths. Throws PreconditionError listing the invalid
/// drift grid points visited by any path.
ActionEstimate yasue_action_estimate(const DiffusionEnsemble& ens, const DriftField& forward,
                                     const DriftField& backward,
                                     const std::function<double(double)>& potential,
                                     LagrangianKind kind, double beta = 0.0);

}  // namespace smlab::diffusion
