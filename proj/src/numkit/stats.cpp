#include "smlab/numkit/stats.hpp"

#include <algorithm>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <limits>

#include "smlab/numkit/errors.hpp"

namespace smlab::numkit {

MeanEstimate mean_estimate(std::span<const double> xs) {
  MeanEstimate e;
  e.count = xs.size();
  if (xs.empty()) return e;
  // two-pass for accuracy
  double s = 0.0;
  for (double x : xs) s += x;
  e.mean = s / static_cast<double>(xs.size());
  if (xs.size() < 2) return e;
  double ss = 0.0;
  for (double x : xs) ss += (x - e.mean) * (x - e.mean);
  const double var = ss / static_cast<double>(xs.size() - 1);
  e.stderr_ = std::sqrt(var / static_cast<double>(xs.size()));
  return e;
}

bool within_sigma(double a, double b, double sa, double sb, double k) {
  const double tol = k * std::sqrt(sa * sa + sb * sb) + 1e-14 * (1.0 + std::abs(a) + std::abs(b));
  return std::abs(a - b) <= tol;
}

double kolmogorov_q(double lambda) {
  if (lambda < 1e-3) return 1.0;
  double sum = 0.0;
  double sign = 1.0;
  for (int k = 1; k <= 200; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += sign * term;
    if (term < 1e-17) break;
    sign = -sign;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

TestResult ks_one_sample(std::vector<double> xs, const std::function<double(double)>& cdf) {
  if (xs.empty()) throw PreconditionError("ks_one_sample: empty sample");
  std::sort(xs.begin(), xs.end());
  const auto n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = cdf(xs[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  const double sn = std::sqrt(n);
  return {d, n, kolmogorov_q((sn + 0.12 + 0.11 / sn) * d)};
}

TestResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw PreconditionError("ks_two_sample: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const auto na = static_cast<double>(a.size());
  const auto nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  const double ne = std::sqrt(na * nb / (na + nb));
  return {d, ne * ne, kolmogorov_q((ne + 0.12 + 0.11 / ne) * d)};
}

double chi_square_sf(double statistic, double dof) {
  if (dof <= 0.0) return 1.0;
  if (!std::isfinite(statistic)) return 0.0;
  if (statistic <= 0.0) return 1.0;
  return boost::math::gamma_q(0.5 * dof, 0.5 * statistic);
}

TestResult chi_square_gof(std::span<const std::uint64_t> observed, std::span<const double> probs) {
  if (observed.size() != probs.size()) throw PreconditionError("chi_square_gof: size mismatch");
  double total = 0.0;
  for (auto o : observed) total += static_cast<double>(o);
  double stat = 0.0;
  int used = 0;
  for (std::size_t k = 0; k < observed.size(); ++k) {
    const double e = total * probs[k];
    if (e <= 0.0) {
      if (observed[k] > 0) stat = std::numeric_limits<double>::infinity();
      continue;
    }
    ++used;
    const double diff = static_cast<double>(observed[k]) - e;
    stat += diff * diff / e;
  }
  const double dof = std::max(used - 1, 0);
  return {stat, dof, chi_square_sf(stat, dof)};
}

TestResult chi_square_homogeneity(const std::vector<std::vector<std::uint64_t>>& table) {
  if (table.size() < 2) throw PreconditionError("chi_square_homogeneity: need at least two rows");
  const std::size_t k = table.front().size();
  std::vector<double> col(k, 0.0), row(table.size(), 0.0);
  double total = 0.0;
  for (std::size_t r = 0; r < table.size(); ++r) {
    if (table[r].size() != k) throw PreconditionError("chi_square_homogeneity: ragged table");
    for (std::size_t c = 0; c < k; ++c) {
      col[c] += static_cast<double>(table[r][c]);
      row[r] += static_cast<double>(table[r][c]);
    }
    total += row[r];
  }
  double stat = 0.0;
  int used_cols = 0;
  for (std::size_t c = 0; c < k; ++c) {
    if (col[c] == 0.0) continue;
    ++used_cols;
    for (std::size_t r = 0; r < table.size(); ++r) {
      const double e = row[r] * col[c] / total;
      if (e == 0.0) continue;
      const double diff = static_cast<double>(table[r][c]) - e;
      stat += diff * diff / e;
    }
  }
  const double dof = static_cast<double>(std::max(used_cols - 1, 0)) *
                     static_cast<double>(table.size() - 1);
  return {stat, dof, chi_square_sf(stat, dof)};
}

LinearFit linear_fit(std::span<const double> x, std::span<const double> y,
                     std::span<const double> sigma) {
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n || (!sigma.empty() && sigma.size() != n))
    throw PreconditionError("linear_fit: need >= 2 matching points");
  double sw = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double w = sigma.empty() ? 1.0 : 1.0 / (sigma[i] * sigma[i]);
    sw += w;
    sx += w * x[i];
    sy += w * y[i];
    sxx += w * x[i] * x[i];
    sxy += w * x[i] * y[i];
  }
  const double det = sw * sxx - sx * sx;
  LinearFit fit;
  fit.slope = (sw * sxy - sx * sy) / det;
  fit.intercept = (sxx * sy - sx * sxy) / det;
  if (!sigma.empty()) {
    fit.slope_stderr = std::sqrt(sw / det);
  } else if (n > 2) {
    double rss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double r = y[i] - fit.intercept - fit.slope * x[i];
      rss += r * r;
    }
    fit.slope_stderr = std::sqrt(rss / static_cast<double>(n - 2) * sw / det);
  }
  return fit;
}

}  // namespace smlab::numkit
