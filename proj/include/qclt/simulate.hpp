#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "qclt/chain.hpp"
#include "qclt/error.hpp"
#include "qclt/ks.hpp"
#include "qclt/martingale.hpp"
#include "qclt/parallel.hpp"
#include "qclt/random.hpp"

namespace qclt {

/// Inverse-CDF transition sampler with cumulative row sums computed once.
class PathSampler {
 public:
  explicit PathSampler(const Matrix& kernel) : n_(kernel.rows()), cum_(n_ * n_) {
    for (std::size_t x = 0; x < n_; ++x) {
      double acc = 0.0;
      for (std::size_t y = 0; y < n_; ++y) {
        acc += kernel(x, y);
        cum_[x * n_ + y] = acc;
      }
      // Rounding must never push u past the last state with positive mass.
      std::size_t last = n_;
      while (last > 0 && kernel(x, last - 1) <= 0.0) --last;
      for (std::size_t y = last == 0 ? 0 : last - 1; y < n_; ++y)
        cum_[x * n_ + y] = 2.0;
    }
  }

  std::size_t step(std::size_t x, double u) const {
    const auto first = cum_.begin() + static_cast<std::ptrdiff_t>(x * n_);
    const auto it = std::upper_bound(first, first + static_cast<std::ptrdiff_t>(n_), u);
    return static_cast<std::size_t>(it - first);
  }

 private:
  std::size_t n_;
  std::vector<double> cum_;
};

/// ξ₀ = x, ξ₁..ξ_n drawn from the rows of Q.
inline std::vector<std::size_t> sample_path(const FiniteChain& chain,
                                            std::size_t x, long n,
                                            CounterStream& stream) {
  if (n < 1) throw Error(ErrorKind::BadArgument, "path length must be >= 1");
  if (x >= chain.size()) throw Error(ErrorKind::BadArgument, "start state");
  const PathSampler sampler(chain.kernel());
  std::vector<std::size_t> path;
  path.reserve(static_cast<std::size_t>(n) + 1);
  path.push_back(x);
  for (long k = 0; k < n; ++k) path.push_back(sampler.step(path.back(), stream.uniform()));
  return path;
}

struct SimulationConfig {
  std::size_t start = 0;
  long n = 1;
  std::size_t num_paths = 100;
  std::uint64_t seed = 0;
  unsigned workers = 1;
};

struct SimulationReport {
  std::size_t start_state = 0;
  long n = 0;
  std::size_t num_paths = 0;
  std::uint64_t seed = 0;
  double sample_mean = 0.0;  // of S_n/√n
  double sample_var = 0.0;   // of S_n/√n, N-1 denominator
  double ks_distance = 0.0;  // S_n/(σ√n) against N(0,1)
  double residual_max = 0.0; // max |S_n - M_n - (Qg(ξ₀) - Qg(ξ_n))|
  double sigma_sq_used = 0.0;
};

struct PathSample {
  double s_scaled = 0.0;
  double m_scaled = 0.0;
  double residual = 0.0;
};

namespace detail {

inline void two_pass_moments(std::span<const PathSample> samples, double& mean,
                             double& var) {
  const double n = static_cast<double>(samples.size());
  double sum = 0.0;
  for (const auto& s : samples) sum += s.s_scaled;
  mean = sum / n;
  double ss = 0.0;
  for (const auto& s : samples) ss += (s.s_scaled - mean) * (s.s_scaled - mean);
  var = samples.size() > 1 ? ss / (n - 1.0) : 0.0;
}

// Aggregates per-path samples (already in path-index order) into a report.
inline SimulationReport summarize(std::span<const PathSample> samples,
                                  double sigma_sq) {
  SimulationReport r;
  r.num_paths = samples.size();
  r.sigma_sq_used = sigma_sq;
  detail::two_pass_moments(samples, r.sample_mean, r.sample_var);
  for (const auto& s : samples) r.residual_max = std::max(r.residual_max, s.residual);
  if (sigma_sq > 0.0) {
    const double sigma = std::sqrt(sigma_sq);
    std::vector<double> z(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) z[i] = samples[i].s_scaled / sigma;
    std::sort(z.begin(), z.end());
    r.ks_distance = ks_distance_normal(z);
  }
  return r;
}

}  // namespace detail

/// Monte Carlo under P^x: S_n/√n, M_n/√n and the pathwise telescoping
/// residual for each path, reduced in path-index order so the report is
/// bit-identical for any worker count.
inline SimulationReport simulate_quenched(const FiniteChain& chain,
                                          const MartingaleScheme& scheme,
                                          const SimulationConfig& cfg,
                                          std::vector<PathSample>* dump = nullptr) {
  if (cfg.start >= chain.size()) throw Error(ErrorKind::BadArgument, "start state");
  if (cfg.n < 1) throw Error(ErrorKind::BadArgument, "n must be >= 1");
  if (cfg.num_paths < 100) {
    throw Error(ErrorKind::BadArgument, "need at least 100 paths");
  }
  if (scheme.sigma_sq <= 1e-12) {
    throw Error(ErrorKind::DegenerateSigma,
                "sigma^2 = " + std::to_string(scheme.sigma_sq) +
                    "; S_n/sqrt(n) has a point-mass limit");
  }
  if (scheme.g.size() != chain.size()) {
    throw Error(ErrorKind::DimensionMismatch, "scheme does not match chain");
  }

  const PathSampler sampler(chain.kernel());
  const double root_n = std::sqrt(static_cast<double>(cfg.n));
  std::vector<PathSample> samples(cfg.num_paths);
  parallel_for(cfg.num_paths, cfg.workers, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      CounterStream stream(cfg.seed, i);
      std::size_t x = cfg.start;
      double s = 0.0, m = 0.0;
      for (long k = 0; k < cfg.n; ++k) {
        const std::size_t y = sampler.step(x, stream.uniform());
        s += scheme.f[y];
        m += scheme.H(x, y);
        x = y;
      }
      const double telescoped = scheme.qg[cfg.start] - scheme.qg[x];
      samples[i] = {s / root_n, m / root_n, std::abs(s - m - telescoped)};
    }
  });

  SimulationReport r = detail::summarize(samples, scheme.sigma_sq);
  r.start_state = cfg.start;
  r.n = cfg.n;
  r.seed = cfg.seed;
  if (dump) *dump = std::move(samples);
  return r;
}

}  // namespace qclt
