#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "smlab/diffusion/drift_field.hpp"
#include "smlab/numkit/rng.hpp"

namespace smlab::diffusion {

using numkit::RngStream;

/// Draws the starting position of one path from that path's own stream.
using X0Sampler = std::function<double(RngStream&)>;

X0Sampler fixed_start(double x0);
X0Sampler gaussian_start(double mean, double stddev);

struct SimulationConfig {
  double nu = 0.5;
  double dt = 1e-3;
  std::size_t steps = 1000;
  std::size_t n_paths = 1000;
  double t0 = 0.0;
  /// Step indices to keep (sorted, unique). Empty keeps every step.
  std::vector<std::size_t> record_steps;
};

/// P sample paths of dx = b dt + dw with E dw^2 = 2 nu dt.
///
/// Only the step indices listed in `recorded_steps` are stored; estimators
/// that need a particular step check for it and throw otherwise.
class DiffusionEnsemble {
 public:
  DiffusionEnsemble(double nu, double dt, double t0, std::size_t steps, std::size_t n_paths,
                    std::vector<std::size_t> recorded_steps, std::uint64_t master_seed,
                    std::uint64_t stream_id);

  double nu() const noexcept { return nu_; }
  double dt() const noexcept { return dt_; }
  double t0() const noexcept { return t0_; }
  std::size_t steps() const noexcept { return steps_; }
  std::size_t n_paths() const noexcept { return n_paths_; }
  std::uint64_t master_seed() const noexcept { return master_seed_; }
  std::uint64_t stream_id() const noexcept { return stream_id_; }
  std::size_t boundary_hits() const noexcept { return boundary_hits_; }
  void add_boundary_hits(std::size_t n) noexcept { boundary_hits_ += n; }

  double time(std::size_t step) const noexcept { return t0_ + dt_ * static_cast<double>(step); }
  const std::vector<std::size_t>& recorded_steps() const noexcept { return recorded_; }
  bool has_step(std::size_t step) const noexcept;
  /// Column slot of a recorded step; throws PreconditionError if absent.
  std::size_t slot(std::size_t step) const;

  double x(std::size_t path, std::size_t step) const { return data_[path * recorded_.size() + slot(step)]; }
  std::span<double> path(std::size_t p) noexcept {
    return {data_.data() + p * recorded_.size(), recorded_.size()};
  }
  std::span<const double> path(std::size_t p) const noexcept {
    return {data_.data() + p * recorded_.size(), recorded_.size()};
  }
  /// Positions of every path at one recorded step.
  std::vector<double> at_step(std::size_t step) const;

 private:
  double nu_, dt_, t0_;
  std::size_t steps_, n_paths_;
  std::vector<std::size_t> recorded_;
  std::vector<long> slot_of_;  // step -> slot or -1
  std::vector<double> data_;
  std::uint64_t master_seed_, stream_id_;
  std::size_t boundary_hits_ = 0;
};

/// Euler-Maruyama simulation. Path p uses rng.derive(p), so the result does
/// not depend on the order in which paths are generated. Throws
/// NumericalError if the drift evaluates to a non-finite value.
DiffusionEnsemble simulate_ensemble(const DriftField& drift, const SimulationConfig& cfg,
                                    const X0Sampler& x0, const RngStream& rng);

/// Time-reversed view x_*(s) = x(T - s): step k of the result is step T - k
/// of the input. Times are re-stamped from t0 = 0.
DiffusionEnsemble reverse(const DiffusionEnsemble& ens);

/// CSV with header `path_id,step,t,x` for the first `max_paths` paths.
void write_paths_csv(const DiffusionEnsemble& ens, const std::string& file, std::size_t max_paths);

}  // namespace smlab::diffusion
