#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace smlab::numkit {

using Field = std::vector<double>;

/// Uniform 1-D grid x_i = x_min + i*dx, i = 0..n-1.
class UniformGrid {
 public:
  UniformGrid() = default;
  /// n >= 2 points spanning [x_min, x_max] inclusive.
  UniformGrid(double x_min, double x_max, std::size_t n);

  std::size_t size() const noexcept { return n_; }
  double x_min() const noexcept { return x_min_; }
  double x_max() const noexcept { return x_min_ + dx_ * static_cast<double>(n_ - 1); }
  double dx() const noexcept { return dx_; }
  double x(std::size_t i) const noexcept { return x_min_ + dx_ * static_cast<double>(i); }
  Field points() const;

  bool same_as(const UniformGrid& o) const noexcept;

 private:
  double x_min_ = 0.0;
  double dx_ = 1.0;
  std::size_t n_ = 0;
};

/// Central-difference order; boundaries fall back to lower-order one-sided stencils.
enum class Stencil { second, fourth };

Field d1(const UniformGrid& g, std::span<const double> f, Stencil s = Stencil::fourth);
Field d2(const UniformGrid& g, std::span<const double> f, Stencil s = Stencil::fourth);

/// Cumulative trapezoid integral from the left end (value 0 at x_min).
Field antiderivative(const UniformGrid& g, std::span<const double> f);
/// Trapezoid rule over the whole grid.
double integrate(const UniformGrid& g, std::span<const double> f);

/// Piecewise-linear interpolation with constant extrapolation.
/// `outside` is set when x lies beyond the grid ends.
double interpolate(const UniformGrid& g, std::span<const double> f, double x, bool* outside = nullptr);

}  // namespace smlab::numkit
