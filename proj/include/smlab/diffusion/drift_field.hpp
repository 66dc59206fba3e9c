#pragma once

#include <functional>
#include <vector>

#include "smlab/numkit/grid.hpp"

namespace smlab::diffusion {

using numkit::Field;
using numkit::UniformGrid;

/// Drift b(x, t) tabulated on a uniform x-grid at one or more time slices.
///
/// Values are linear in x between grid points and held constant beyond the
/// grid ends; between time slices they are linear in t, and constant before
/// the first and after the last slice. A cell may be marked invalid (for
/// instance an under-populated histogram bin); evaluations that touch an
/// invalid grid point report it through `invalid_point`.
class DriftField {
 public:
  DriftField(UniformGrid grid, std::vector<double> times, std::vector<Field> values,
             std::vector<std::vector<bool>> valid = {});

  static DriftField stationary(UniformGrid grid, Field values);
  static DriftField from_function(UniformGrid grid, const std::function<double(double)>& b);
  /// b(x) = slope*x + intercept, exact on [-half_width, half_width].
  static DriftField linear(double slope, double intercept, double half_width = 1e6);

  struct Sample {
    double value = 0.0;
    bool outside = false;
    /// Index of an invalid grid point used by the evaluation, or -1.
    long invalid_point = -1;
  };

  Sample evaluate(double x, double t) const;
  double operator()(double x, double t) const { return evaluate(x, t).value; }

  const UniformGrid& grid() const noexcept { return grid_; }
  const std::vector<double>& times() const noexcept { return times_; }
  const std::vector<Field>& values() const noexcept { return values_; }

 private:
  double eval_slice(std::size_t k, double x, bool& outside, long& invalid) const;

  UniformGrid grid_;
  std::vector<double> times_;
  std::vector<Field> values_;
  std::vector<std::vector<bool>> valid_;
};

}  // namespace smlab::diffusion
