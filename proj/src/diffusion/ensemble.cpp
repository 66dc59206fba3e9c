#include "smlab/diffusion/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "smlab/numkit/errors.hpp"

namespace smlab::diffusion {

X0Sampler fixed_start(double x0) {
  return [x0](RngStream&) { return x0; };
}

X0Sampler gaussian_start(double mean, double stddev) {
  return [mean, stddev](RngStream& r) { return mean + stddev * r.normal(); };
}

DiffusionEnsemble::DiffusionEnsemble(double nu, double dt, double t0, std::size_t steps,
                                     std::size_t n_paths, std::vector<std::size_t> recorded_steps,
                                     std::uint64_t master_seed, std::uint64_t stream_id)
    : nu_(nu), dt_(dt), t0_(t0), steps_(steps), n_paths_(n_paths),
      recorded_(std::move(recorded_steps)), slot_of_(steps + 1, -1),
      master_seed_(master_seed), stream_id_(stream_id) {
  if (recorded_.empty()) {
    recorded_.resize(steps + 1);
    for (std::size_t k = 0; k <= steps; ++k) recorded_[k] = k;
  }
  std::sort(recorded_.begin(), recorded_.end());
  recorded_.erase(std::unique(recorded_.begin(), recorded_.end()), recorded_.end());
  for (std::size_t s = 0; s < recorded_.size(); ++s) {
    if (recorded_[s] > steps) throw PreconditionError("DiffusionEnsemble: recorded step beyond horizon");
    slot_of_[recorded_[s]] = static_cast<long>(s);
  }
  data_.assign(n_paths * recorded_.size(), 0.0);
}

bool DiffusionEnsemble::has_step(std::size_t step) const noexcept {
  return step < slot_of_.size() && slot_of_[step] >= 0;
}

std::size_t DiffusionEnsemble::slot(std::size_t step) const {
  if (!has_step(step))
    throw PreconditionError("DiffusionEnsemble: step " + std::to_string(step) + " was not recorded");
  return static_cast<std::size_t>(slot_of_[step]);
}

std::vector<double> DiffusionEnsemble::at_step(std::size_t step) const {
  const std::size_t s = slot(step);
  std::vector<double> xs(n_paths_);
  for (std::size_t p = 0; p < n_paths_; ++p) xs[p] = data_[p * recorded_.size() + s];
  return xs;
}

DiffusionEnsemble simulate_ensemble(const DriftField& drift, const SimulationConfig& cfg,
                                    const X0Sampler& x0, const RngStream& rng) {
  if (!(cfg.dt > 0.0)) throw PreconditionError("simulate_ensemble: dt must be positive");
  if (!(cfg.nu >= 0.0)) throw PreconditionError("simulate_ensemble: nu must be non-negative");
  DiffusionEnsemble ens(cfg.nu, cfg.dt, cfg.t0, cfg.steps, cfg.n_paths, cfg.record_steps,
                        rng.master_seed(), rng.stream_id());
  const double noise = std::sqrt(2.0 * cfg.nu * cfg.dt);
  const auto& rec = ens.recorded_steps();
  std::size_t hits = 0;
  for (std::size_t p = 0; p < cfg.n_paths; ++p) {
    RngStream r = rng.derive(p);
    double x = x0(r);
    auto out = ens.path(p);
    std::size_t next_slot = 0;
    if (rec[0] == 0) out[next_slot++] = x;
    for (std::size_t k = 1; k <= cfg.steps; ++k) {
      const double t = cfg.t0 + cfg.dt * static_cast<double>(k - 1);
      const auto b = drift.evaluate(x, t);
      if (!std::isfinite(b.value) || !std::isfinite(x)) {
        std::ostringstream os;
        os << "simulate_ensemble: non-finite drift at x=" << x << ", t=" << t << " (path " << p << ")";
        throw NumericalError(os.str());
      }
      if (b.outside) ++hits;
      x += b.value * cfg.dt + noise * r.normal();
      if (next_slot < rec.size() && rec[next_slot] == k) out[next_slot++] = x;
    }
  }
  ens.add_boundary_hits(hits);
  return ens;
}

DiffusionEnsemble reverse(const DiffusionEnsemble& ens) {
  const std::size_t T = ens.steps();
  std::vector<std::size_t> rec;
  for (auto s : ens.recorded_steps()) rec.push_back(T - s);
  DiffusionEnsemble out(ens.nu(), ens.dt(), 0.0, T, ens.n_paths(), rec, ens.master_seed(),
                        ens.stream_id());
  const std::size_t m = ens.recorded_steps().size();
  for (std::size_t p = 0; p < ens.n_paths(); ++p) {
    auto src = ens.path(p);
    auto dst = out.path(p);
    for (std::size_t s = 0; s < m; ++s) dst[m - 1 - s] = src[s];
  }
  out.add_boundary_hits(ens.boundary_hits());
  return out;
}

void write_paths_csv(const DiffusionEnsemble& ens, const std::string& file, std::size_t max_paths) {
  std::ofstream os(file, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + file);
  os << "path_id,step,t,x\n";
  char buf[128];
  const std::size_t np = std::min(max_paths, ens.n_paths());
  for (std::size_t p = 0; p < np; ++p) {
    auto xs = ens.path(p);
    for (std::size_t s = 0; s < xs.size(); ++s) {
      const std::size_t step = ens.recorded_steps()[s];
      std::snprintf(buf, sizeof buf, "%zu,%zu,%.15g,%.15g\n", p, step, ens.time(step), xs[s]);
      os << buf;
    }
  }
}

}  // namespace smlab::diffusion
