#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace smlab::numkit {

struct MeanEstimate {
  double mean = 0.0;
  double stderr_ = 0.0;  // standard error of the mean
  std::size_t count = 0;
};

MeanEstimate mean_estimate(std::span<const double> xs);

/// |a - b| <= k * sqrt(sa^2 + sb^2), with a tiny absolute floor for exact ties.
bool within_sigma(double a, double b, double sa, double sb, double k = 3.0);

struct TestResult {
  double statistic = 0.0;
  double dof = 0.0;
  double p_value = 1.0;
};

/// One-sample Kolmogorov-Smirnov test against a continuous CDF.
TestResult ks_one_sample(std::vector<double> xs, const std::function<double(double)>& cdf);
/// Two-sample Kolmogorov-Smirnov test.
TestResult ks_two_sample(std::vector<double> a, std::vector<double> b);
/// Survival function of the Kolmogorov distribution.
double kolmogorov_q(double lambda);

/// Pearson goodness-of-fit against category probabilities. Categories with
/// zero expected probability contribute infinity if observed, else nothing.
TestResult chi_square_gof(std::span<const std::uint64_t> observed, std::span<const double> probs);
/// Homogeneity test on a rows x categories contingency table.
TestResult chi_square_homogeneity(const std::vector<std::vector<std::uint64_t>>& table);
/// Upper tail of the chi-square distribution.
double chi_square_sf(double statistic, double dof);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_stderr = 0.0;
};

/// Weighted least-squares line; weights are 1/sigma^2 (empty = unweighted).
LinearFit linear_fit(std::span<const double> x, std::span<const double> y,
                     std::span<const double> sigma = {});

}  // namespace smlab::numkit
