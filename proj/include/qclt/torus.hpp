#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <vector>

#include "qclt/error.hpp"
#include "qclt/parallel.hpp"
#include "qclt/random.hpp"
#include "qclt/simulate.hpp"
#include "qclt/spectral.hpp"

namespace qclt {

inline constexpr long long kMaxConvergentDenominator = 1'000'000;

inline double golden_alpha() { return (std::sqrt(5.0) - 1.0) / 2.0; }

struct Convergent {
  long long p = 0;
  long long q = 1;
};

/// Continued-fraction convergents p_k/q_k of alpha with q_k <= max_q,
/// iterated in long double. Stops early if alpha is exhausted (rational).
inline std::vector<Convergent> convergents(double alpha, long long max_q) {
  std::vector<Convergent> out;
  long double x = alpha;
  long long p_prev = 1, q_prev = 0, p_prev2 = 0, q_prev2 = 1;
  for (int step = 0; step < 200; ++step) {
    const long double a_ld = std::floor(x);
    if (a_ld > 1e15L) break;
    const auto a = static_cast<long long>(a_ld);
    const long long p = a * p_prev + p_prev2;
    const long long q = a * q_prev + q_prev2;
    if (q > max_q) break;
    out.push_back({p, q});
    const long double frac = x - a_ld;
    if (frac < 1e-15L) break;
    x = 1.0L / frac;
    p_prev2 = p_prev;
    q_prev2 = q_prev;
    p_prev = p;
    q_prev = q;
  }
  return out;
}

/// Fractional part {n·alpha} and distance to the nearest integer ||n·alpha||.
/// The product is split with fma so the reduced phase keeps full precision.
struct Phase {
  double frac = 0.0;
  double dist = 0.0;
};

inline Phase phase_of(long n, double alpha) {
  const double dn = static_cast<double>(n);
  const double prod = dn * alpha;
  const double err = std::fma(dn, alpha, -prod);
  const double whole = std::floor(prod);
  double frac = (prod - whole) + err;
  frac -= std::floor(frac);
  return {frac, std::min(frac, 1.0 - frac)};
}

struct TorusCoefficient {
  long n = 0;
  Complex c;
};

/// Walk on R/Z with ν = lazy·δ₀ + (1-lazy)/2 (δ_α + δ_{-α}) and a real
/// trigonometric-polynomial observable f(x) = Σ f̂(n) e^{2πinx}.
struct TorusWalk {
  double alpha = 0.0;
  double lazy = 0.0;
  std::vector<TorusCoefficient> fhat;
};

inline void validate(const TorusWalk& w) {
  if (!(w.alpha > 0.0 && w.alpha < 1.0)) {
    throw Error(ErrorKind::BadArgument, "alpha must lie in (0,1)");
  }
  if (!(w.lazy >= 0.0 && w.lazy < 1.0)) {
    throw Error(ErrorKind::BadArgument, "lazy must lie in [0,1)");
  }
  for (const auto& c : convergents(w.alpha, kMaxConvergentDenominator)) {
    const long double gap =
        static_cast<long double>(c.q) * w.alpha - static_cast<long double>(c.p);
    if (std::abs(gap) <= 1e-10L) {
      throw Error(ErrorKind::RationalAlpha,
                  "alpha is within 1e-10/q of " + std::to_string(c.p) + "/" +
                      std::to_string(c.q));
    }
  }
  for (const auto& c : w.fhat) {
    if (c.n == 0) {
      throw Error(ErrorKind::NotHermitian,
                  "frequency 0 would give a non-centred observable");
    }
    const auto mirror = std::find_if(w.fhat.begin(), w.fhat.end(),
                                     [&](const TorusCoefficient& o) { return o.n == -c.n; });
    if (mirror == w.fhat.end() || std::abs(mirror->c - std::conj(c.c)) > 1e-12) {
      throw Error(ErrorKind::NotHermitian,
                  "missing or mismatched conjugate for frequency " + std::to_string(c.n));
    }
  }
}

/// 1 - ν̂(n) = (1 - lazy) · 2 sin²(π n α), computed from the reduced phase.
inline double torus_one_minus_nuhat(const TorusWalk& w, long n) {
  const double s = std::sin(std::numbers::pi * phase_of(n, w.alpha).frac);
  return (1.0 - w.lazy) * 2.0 * s * s;
}

/// max over 1 <= n <= n_max of |(1 - cos 2πθ) - 2 sin² πθ|, θ = {nα}.
inline double torus_identity_max_error(double alpha, long n_max) {
  double worst = 0.0;
  for (long n = 1; n <= n_max; ++n) {
    const double theta = phase_of(n, alpha).frac;
    const double s = std::sin(std::numbers::pi * theta);
    const double lhs = 1.0 - std::cos(2.0 * std::numbers::pi * theta);
    worst = std::max(worst, std::abs(lhs - 2.0 * s * s));
  }
  return worst;
}

/// σ² = Σ_{n≠0} |f̂(n)|² (1 + ν̂(n)) / (1 - ν̂(n)).
inline double torus_sigma_sq(const TorusWalk& w) {
  double s = 0.0;
  for (const auto& c : w.fhat) {
    const double om = torus_one_minus_nuhat(w, c.n);
    s += std::norm(c.c) * (2.0 - om) / om;
  }
  return s;
}

struct TorusRow {
  long n = 0;
  double frac = 0.0;            // {nα}
  double dist = 0.0;            // ||nα||
  double one_minus_nuhat = 0.0;
  double ratio = 0.0;           // (1 - ν̂(n)) / (2π² ||nα||²)
  double term = 0.0;
  double partial_sum = 0.0;
};

struct TorusSeriesReport {
  std::vector<TorusRow> rows;
  std::vector<Convergent> convergents;
  double partial_sum = 0.0;
};

/// Per-frequency data and partial sums of the torus form of the log-log
/// condition over the observable's (finite) Fourier support. Non-lazy walks
/// use ||nα||², lazy walks sin²(nπα).
inline TorusSeriesReport torus_condition(const TorusWalk& w, long cutoff) {
  validate(w);
  long max_freq = 0;
  for (const auto& c : w.fhat) max_freq = std::max(max_freq, std::abs(c.n));
  if (cutoff < max_freq) {
    throw Error(ErrorKind::BadArgument,
                "cutoff is below the highest supported frequency");
  }
  std::vector<TorusCoefficient> sorted = w.fhat;
  std::sort(sorted.begin(), sorted.end(),
            [](const TorusCoefficient& a, const TorusCoefficient& b) { return a.n < b.n; });

  TorusSeriesReport r;
  for (const auto& c : sorted) {
    TorusRow row;
    row.n = c.n;
    const Phase ph = phase_of(c.n, w.alpha);
    row.frac = ph.frac;
    row.dist = ph.dist;
    row.one_minus_nuhat = torus_one_minus_nuhat(w, c.n);
    row.ratio = row.one_minus_nuhat / (2.0 * std::numbers::pi * std::numbers::pi *
                                       ph.dist * ph.dist);
    double base;
    if (w.lazy == 0.0) {
      base = ph.dist * ph.dist;
    } else {
      const double s = std::sin(std::numbers::pi * ph.frac);
      base = s * s;
    }
    const double lp = log_plus(std::abs(std::log(base)));
    row.term = std::norm(c.c) * lp * lp / base;
    r.partial_sum += row.term;
    row.partial_sum = r.partial_sum;
    r.rows.push_back(row);
  }
  r.convergents = convergents(w.alpha, std::min<long long>(cutoff, kMaxConvergentDenominator));
  return r;
}

struct TorusSimulationReport {
  double start = 0.0;
  SimulationReport stats;
};

/// Monte Carlo on the orbit of x under x -> x ± α (mod 1). M_n uses the
/// Fourier-side Poisson solution ĝ(n) = f̂(n)/(1 - ν̂(n)), so the telescoping
/// residual is checked here as well.
inline TorusSimulationReport simulate_torus(const TorusWalk& w, double x,
                                            const SimulationConfig& cfg,
                                            std::vector<PathSample>* dump = nullptr) {
  validate(w);
  if (cfg.n < 1) throw Error(ErrorKind::BadArgument, "n must be >= 1");
  if (cfg.num_paths < 1) throw Error(ErrorKind::BadArgument, "need paths");
  x -= std::floor(x);

  TorusSimulationReport out;
  out.start = x;
  out.stats.n = cfg.n;
  out.stats.num_paths = cfg.num_paths;
  out.stats.seed = cfg.seed;

  const bool zero = std::all_of(w.fhat.begin(), w.fhat.end(),
                                [](const TorusCoefficient& c) { return std::abs(c.c) == 0.0; });
  if (zero) {
    if (dump) dump->assign(cfg.num_paths, PathSample{});
    return out;
  }
  const double sigma_sq = torus_sigma_sq(w);
  if (sigma_sq <= 1e-12) {
    throw Error(ErrorKind::DegenerateSigma, "torus sigma^2 vanishes");
  }

  const std::size_t m = w.fhat.size();
  std::vector<double> freq(m);
  std::vector<Complex> fc(m), gc(m), qgc(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double om = torus_one_minus_nuhat(w, w.fhat[i].n);
    freq[i] = static_cast<double>(w.fhat[i].n);
    fc[i] = w.fhat[i].c;
    gc[i] = w.fhat[i].c / om;
    qgc[i] = w.fhat[i].c * (1.0 - om) / om;
  }
  struct Values {
    double f, g, qg;
  };
  auto eval = [&](double pos) {
    Values v{0.0, 0.0, 0.0};
    for (std::size_t i = 0; i < m; ++i) {
      const double ph = freq[i] * pos;
      const double angle = 2.0 * std::numbers::pi * (ph - std::floor(ph));
      const Complex e(std::cos(angle), std::sin(angle));
      v.f += (fc[i] * e).real();
      v.g += (gc[i] * e).real();
      v.qg += (qgc[i] * e).real();
    }
    return v;
  };

  const double up = w.lazy + 0.5 * (1.0 - w.lazy);
  const double root_n = std::sqrt(static_cast<double>(cfg.n));
  const Values start_vals = eval(x);
  std::vector<PathSample> samples(cfg.num_paths);
  parallel_for(cfg.num_paths, cfg.workers, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      CounterStream stream(cfg.seed, i);
      double pos = x;
      Values cur = start_vals;
      double s = 0.0, mart = 0.0;
      for (long k = 0; k < cfg.n; ++k) {
        const double u = stream.uniform();
        if (u >= w.lazy) pos += (u < up) ? w.alpha : -w.alpha;
        if (pos >= 1.0) pos -= 1.0;
        if (pos < 0.0) pos += 1.0;
        const Values next = eval(pos);
        s += next.f;
        mart += next.g - cur.qg;
        cur = next;
      }
      const double telescoped = start_vals.qg - cur.qg;
      samples[i] = {s / root_n, mart / root_n, std::abs(s - mart - telescoped)};
    }
  });

  out.stats = detail::summarize(samples, sigma_sq);
  out.stats.n = cfg.n;
  out.stats.seed = cfg.seed;
  if (dump) *dump = std::move(samples);
  return out;
}

}  // namespace qclt
