#include "smlab/numkit/grid.hpp"

#include <cassert>
#include <cmath>

#include "smlab/numkit/errors.hpp"

namespace smlab::numkit {

UniformGrid::UniformGrid(double x_min, double x_max, std::size_t n) : x_min_(x_min), n_(n) {
  if (n < 2 || !(x_max > x_min)) throw PreconditionError("UniformGrid: need n >= 2 and x_max > x_min");
  dx_ = (x_max - x_min) / static_cast<double>(n - 1);
}

Field UniformGrid::points() const {
  Field p(n_);
  for (std::size_t i = 0; i < n_; ++i) p[i] = x(i);
  return p;
}

bool UniformGrid::same_as(const UniformGrid& o) const noexcept {
  return n_ == o.n_ && std::abs(x_min_ - o.x_min_) <= 1e-12 * (1.0 + std::abs(x_min_)) &&
         std::abs(dx_ - o.dx_) <= 1e-12 * dx_;
}

Field d1(const UniformGrid& g, std::span<const double> f, Stencil s) {
  const std::size_t n = f.size();
  assert(n == g.size());
  const double h = g.dx();
  Field r(n, 0.0);
  if (n < 3) {
    if (n == 2) r[0] = r[1] = (f[1] - f[0]) / h;
    return r;
  }
  r[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h);
  r[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * h);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (s == Stencil::fourth && i >= 2 && i + 2 < n)
      r[i] = (-f[i + 2] + 8.0 * f[i + 1] - 8.0 * f[i - 1] + f[i - 2]) / (12.0 * h);
    else
      r[i] = (f[i + 1] - f[i - 1]) / (2.0 * h);
  }
  return r;
}

Field d2(const UniformGrid& g, std::span<const double> f, Stencil s) {
  const std::size_t n = f.size();
  assert(n == g.size());
  const double h2 = g.dx() * g.dx();
  Field r(n, 0.0);
  if (n < 4) {
    if (n == 3) r[0] = r[1] = r[2] = (f[2] - 2.0 * f[1] + f[0]) / h2;
    return r;
  }
  r[0] = (2.0 * f[0] - 5.0 * f[1] + 4.0 * f[2] - f[3]) / h2;
  r[n - 1] = (2.0 * f[n - 1] - 5.0 * f[n - 2] + 4.0 * f[n - 3] - f[n - 4]) / h2;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (s == Stencil::fourth && i >= 2 && i + 2 < n)
      r[i] = (-f[i + 2] + 16.0 * f[i + 1] - 30.0 * f[i] + 16.0 * f[i - 1] - f[i - 2]) / (12.0 * h2);
    else
      r[i] = (f[i + 1] - 2.0 * f[i] + f[i - 1]) / h2;
  }
  return r;
}

Field antiderivative(const UniformGrid& g, std::span<const double> f) {
  Field r(f.size(), 0.0);
  for (std::size_t i = 1; i < f.size(); ++i) r[i] = r[i - 1] + 0.5 * g.dx() * (f[i] + f[i - 1]);
  return r;
}

double integrate(const UniformGrid& g, std::span<const double> f) {
  if (f.empty()) return 0.0;
  double s = 0.5 * (f.front() + f.back());
  for (std::size_t i = 1; i + 1 < f.size(); ++i) s += f[i];
  return s * g.dx();
}

double interpolate(const UniformGrid& g, std::span<const double> f, double x, bool* outside) {
  const double pos = (x - g.x_min()) / g.dx();
  const auto last = static_cast<double>(g.size() - 1);
  if (outside) *outside = false;
  if (!(pos > 0.0)) {
    if (outside && pos < 0.0) *outside = true;
    return f.front();
  }
  if (!(pos < last)) {
    if (outside && pos > last) *outside = true;
    return f.back();
  }
  const auto i = static_cast<std::size_t>(pos);
  const double w = pos - static_cast<double>(i);
  return (1.0 - w) * f[i] + w * f[i + 1];
}

}  // namespace smlab::numkit
