#include "smlab/diffusion/drift_field.hpp"

#include <algorithm>
#include <cmath>

#include "smlab/numkit/errors.hpp"

namespace smlab::diffusion {

DriftField::DriftField(UniformGrid grid, std::vector<double> times, std::vector<Field> values,
                       std::vector<std::vector<bool>> valid)
    : grid_(grid), times_(std::move(times)), values_(std::move(values)), valid_(std::move(valid)) {
  if (times_.empty() || times_.size() != values_.size())
    throw PreconditionError("DriftField: need one value slice per time stamp");
  if (!std::is_sorted(times_.begin(), times_.end()))
    throw PreconditionError("DriftField: time stamps must be increasing");
  for (const auto& v : values_) {
    if (v.size() != grid_.size()) throw PreconditionError("DriftField: slice size != grid size");
    for (double b : v)
      if (!std::isfinite(b)) throw PreconditionError("DriftField: non-finite drift value");
  }
  if (!valid_.empty()) {
    if (valid_.size() != values_.size()) throw PreconditionError("DriftField: mask count mismatch");
    for (const auto& m : valid_)
      if (m.size() != grid_.size()) throw PreconditionError("DriftField: mask size mismatch");
  }
}

DriftField DriftField::stationary(UniformGrid grid, Field values) {
  return DriftField(grid, {0.0}, {std::move(values)});
}

DriftField DriftField::from_function(UniformGrid grid, const std::function<double(double)>& b) {
  Field v(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) v[i] = b(grid.x(i));
  return stationary(grid, std::move(v));
}

DriftField DriftField::linear(double slope, double intercept, double half_width) {
  const UniformGrid g(-half_width, half_width, 2);
  return stationary(g, {intercept - slope * half_width, intercept + slope * half_width});
}

double DriftField::eval_slice(std::size_t k, double x, bool& outside, long& invalid) const {
  bool out = false;
  const double v = numkit::interpolate(grid_, values_[k], x, &out);
  outside = outside || out;
  if (!valid_.empty()) {
    const double pos = std::clamp((x - grid_.x_min()) / grid_.dx(), 0.0,
                                  static_cast<double>(grid_.size() - 1));
    const auto i = static_cast<std::size_t>(pos);
    const std::size_t j = std::min(i + 1, grid_.size() - 1);
    const double w = pos - static_cast<double>(i);
    if (!valid_[k][i] && w < 1.0) invalid = static_cast<long>(i);
    else if (!valid_[k][j] && w > 0.0) invalid = static_cast<long>(j);
  }
  return v;
}

DriftField::Sample DriftField::evaluate(double x, double t) const {
  Sample s;
  if (times_.size() == 1 || t <= times_.front()) {
    s.value = eval_slice(0, x, s.outside, s.invalid_point);
    return s;
  }
  if (t >= times_.back()) {
    s.value = eval_slice(times_.size() - 1, x, s.outside, s.invalid_point);
    return s;
  }
  const auto it = std::upper_bound(times_.begin(), times_.end(), t);
  const std::size_t k1 = static_cast<std::size_t>(it - times_.begin());
  const std::size_t k0 = k1 - 1;
  const double w = (t - times_[k0]) / (times_[k1] - times_[k0]);
  const double v0 = eval_slice(k0, x, s.outside, s.invalid_point);
  const double v1 = eval_slice(k1, x, s.outside, s.invalid_point);
  s.value = (1.0 - w) * v0 + w * v1;
  return s;
}

}  // namespace smlab::diffusion
