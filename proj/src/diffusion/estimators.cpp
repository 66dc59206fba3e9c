#include "smlab/diffusion/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "smlab/numkit/errors.hpp"

namespace smlab::diffusion {
namespace {

double quantile(std::vector<double> xs, double q) {
  const auto k = static_cast<std::size_t>(q * static_cast<double>(xs.size() - 1));
  std::nth_element(xs.begin(), xs.begin() + static_cast<long>(k), xs.end());
  return xs[k];
}

struct Accum {
  double sum = 0.0, sum2 = 0.0;
  std::size_t n = 0;
  void add(double v) {
    sum += v;
    sum2 += v * v;
    ++n;
  }
  MeanEstimate get() const {
    MeanEstimate m;
    m.count = n;
    if (n == 0) return m;
    m.mean = sum / static_cast<double>(n);
    if (n > 1) {
      const double var = std::max(0.0, (sum2 - sum * m.mean) / static_cast<double>(n - 1));
      m.stderr_ = std::sqrt(var / static_cast<double>(n));
    }
    return m;
  }
};

}  // namespace

std::size_t DriftEstimate::populated_count() const {
  return static_cast<std::size_t>(std::count(populated.begin(), populated.end(), true));
}

namespace {
DriftField bin_field(const DriftEstimate& d, const std::vector<MeanEstimate>& m) {
  Field v(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) v[i] = d.populated[i] ? m[i].mean : 0.0;
  return DriftField(d.centers, {d.t}, {v}, {d.populated});
}
}  // namespace

DriftField DriftEstimate::forward_field() const { return bin_field(*this, forward); }
DriftField DriftEstimate::backward_field() const { return bin_field(*this, backward); }

DriftEstimate estimate_drifts(const DiffusionEnsemble& ens, std::size_t step, std::size_t n_bins,
                              std::size_t min_count) {
  if (step == 0 || step >= ens.steps())
    throw PreconditionError("estimate_drifts: step must satisfy 0 < step < T");
  if (n_bins < 2) throw PreconditionError("estimate_drifts: need at least two bins");
  const auto prev = ens.at_step(step - 1);
  const auto cur = ens.at_step(step);
  const auto next = ens.at_step(step + 1);
  const double lo = quantile(cur, 0.005);
  const double hi = quantile(cur, 0.995);
  if (!(hi > lo)) throw NumericalError("estimate_drifts: degenerate sample spread");
  const double width = (hi - lo) / static_cast<double>(n_bins);

  std::vector<Accum> fwd(n_bins), bwd(n_bins);
  std::vector<double> xsum(n_bins, 0.0);
  for (std::size_t p = 0; p < cur.size(); ++p) {
    const double x = cur[p];
    if (x < lo || x > hi) continue;
    auto b = static_cast<std::size_t>((x - lo) / width);
    if (b >= n_bins) b = n_bins - 1;
    fwd[b].add((next[p] - x) / ens.dt());
    bwd[b].add((x - prev[p]) / ens.dt());
    xsum[b] += x;
  }

  DriftEstimate out;
  out.step = step;
  out.t = ens.time(step);
  out.centers = UniformGrid(lo + 0.5 * width, hi - 0.5 * width, n_bins);
  out.bin_width = width;
  out.forward.resize(n_bins);
  out.backward.resize(n_bins);
  out.mean_x.assign(n_bins, 0.0);
  out.density.assign(n_bins, 0.0);
  out.populated.assign(n_bins, false);
  for (std::size_t b = 0; b < n_bins; ++b) {
    out.forward[b] = fwd[b].get();
    out.backward[b] = bwd[b].get();
    const double n = static_cast<double>(fwd[b].n);
    out.mean_x[b] = fwd[b].n ? xsum[b] / n : out.centers.x(b);
    out.density[b] = n / (static_cast<double>(cur.size()) * width);
    out.populated[b] = fwd[b].n >= min_count;
  }
  if (out.populated_count() == 0) throw NumericalError("estimate_drifts: every bin is under-populated");
  return out;
}

CovarianceStats covariance_stats(const DiffusionEnsemble& ens, std::size_t s1, std::size_t s2) {
  const auto a = ens.at_step(s1);
  const auto b = ens.at_step(s2);
  const auto a1 = ens.at_step(s1 + 1);
  const double ma = numkit::mean_estimate(a).mean;
  const double mb = numkit::mean_estimate(b).mean;
  Accum cov, left, right;
  for (std::size_t p = 0; p < a.size(); ++p) {
    cov.add((a[p] - ma) * (b[p] - mb));
    const double vel = (a1[p] - a[p]) / ens.dt();
    left.add(vel * a1[p]);
    right.add(a[p] * vel);
  }
  CovarianceStats out{cov.get(), left.get(), right.get()};
  // Bessel correction for the two estimated means.
  const double n = static_cast<double>(a.size());
  if (n > 1) out.cov.mean *= n / (n - 1);
  return out;
}

KineticTerms kinetic_action_terms(const DiffusionEnsemble& ens, std::size_t step) {
  if (step + 2 > ens.steps()) throw PreconditionError("kinetic_action_terms: need step+2 <= T");
  const auto x0 = ens.at_step(step);
  const auto x1 = ens.at_step(step + 1);
  const auto x2 = ens.at_step(step + 2);
  Accum over, non;
  for (std::size_t p = 0; p < x0.size(); ++p) {
    const double v1 = (x1[p] - x0[p]) / ens.dt();
    const double v2 = (x2[p] - x1[p]) / ens.dt();
    over.add(0.5 * v1 * v1);
    non.add(0.5 * v1 * v2);
  }
  return {over.get(), non.get()};
}

ActionEstimate fit_divergent_kinetic(const std::vector<double>& dts,
                                     const std::vector<MeanEstimate>& overlapping) {
  if (dts.size() != overlapping.size() || dts.size() < 2)
    throw PreconditionError("fit_divergent_kinetic: need matching lists of at least two points");
  std::vector<double> inv, y, sig;
  for (std::size_t i = 0; i < dts.size(); ++i) {
    inv.push_back(1.0 / dts[i]);
    y.push_back(overlapping[i].mean);
    sig.push_back(overlapping[i].stderr_);
  }
  const bool weighted = std::all_of(sig.begin(), sig.end(), [](double s) { return s > 0.0; });
  const auto fit = numkit::linear_fit(inv, y, weighted ? std::span<const double>(sig) : std::span<const double>{});
  ActionEstimate est;
  est.value = fit.intercept;
  est.divergent_coefficient = fit.slope;
  est.divergent_stderr = fit.slope_stderr;
  return est;
}

double lagrangian(LagrangianKind kind, double b, double bs, double potential, double beta) {
  switch (kind) {
    case LagrangianKind::yasue:
      return 0.5 * (0.5 * b * b + 0.5 * bs * bs) - potential;
    case LagrangianKind::dissipative:
      return 0.5 * b * bs - potential;
    case LagrangianKind::generalized: {
      const double d = b - bs;
      return 0.5 * (0.5 * (b * b + bs * bs) - beta / 8.0 * d * d) - potential;
    }
  }
  return 0.0;
}

ActionEstimate yasue_action_estimate(const DiffusionEnsemble& ens, const DriftField& forward,
                                     const DriftField& backward,
                                     const std::function<double(double)>& potential,
                                     LagrangianKind kind, double beta) {
  std::vector<double> per_path(ens.n_paths());
  std::set<long> bad_fwd, bad_bwd;
  const auto& rec = ens.recorded_steps();
  for (std::size_t p = 0; p < ens.n_paths(); ++p) {
    const auto xs = ens.path(p);
    double acc = 0.0;
    for (std::size_t s = 0; s < xs.size(); ++s) {
      const double t = ens.time(rec[s]);
      const auto b = forward.evaluate(xs[s], t);
      const auto bs = backward.evaluate(xs[s], t);
      if (b.invalid_point >= 0) bad_fwd.insert(b.invalid_point);
      if (bs.invalid_point >= 0) bad_bwd.insert(bs.invalid_point);
      acc += lagrangian(kind, b.value, bs.value, potential(xs[s]), beta);
    }
    per_path[p] = acc / static_cast<double>(xs.size());
  }
  if (!bad_fwd.empty() || !bad_bwd.empty()) {
    std::ostringstream os;
    os << "yasue_action_estimate: paths visit empty drift bins; forward:";
    for (long i : bad_fwd) os << ' ' << i;
    os << "; backward:";
    for (long i : bad_bwd) os << ' ' << i;
    throw PreconditionError(os.str());
  }
  const auto m = numkit::mean_estimate(per_path);
  ActionEstimate est;
  est.value = m.mean;
  est.stderr_ = m.stderr_;
  return est;
}

}  // namespace smlab::diffusion
