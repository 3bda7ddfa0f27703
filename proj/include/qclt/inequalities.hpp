#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qclt/chain.hpp"
#include "qclt/error.hpp"
#include "qclt/linalg.hpp"
#include "qclt/martingale.hpp"
#include "qclt/spectral.hpp"

namespace qclt {

// ---------------------------------------------------------------------------
// Chaining maximal inequality
// ---------------------------------------------------------------------------

/// Random variables T_0..T_{2^d} given as a finite weighted distribution.
/// Monte Carlo samples are the special case of equal weights with
/// `exact = false`.
struct DyadicFamily {
  int level = 0;
  std::vector<Vector> outcomes;
  Vector weights;
  bool exact = false;

  static DyadicFamily from_samples(int level, std::vector<Vector> samples) {
    const double w = samples.empty() ? 0.0 : 1.0 / static_cast<double>(samples.size());
    DyadicFamily fam{level, std::move(samples), {}, false};
    fam.weights.assign(fam.outcomes.size(), w);
    return fam;
  }

  static DyadicFamily from_distribution(int level, std::vector<Vector> outcomes,
                                        Vector probs) {
    return {level, std::move(outcomes), std::move(probs), true};
  }

  std::size_t length() const { return (std::size_t{1} << level) + 1; }

  void validate() const {
    if (level < 0 || level > 30) throw Error(ErrorKind::BadLength, "level");
    if (outcomes.empty() || outcomes.size() != weights.size()) {
      throw Error(ErrorKind::BadLength, "no outcomes or weight count mismatch");
    }
    for (const auto& o : outcomes)
      if (o.size() != length()) {
        throw Error(ErrorKind::BadLength,
                    "expected 2^d + 1 = " + std::to_string(length()) + " values");
      }
  }

  /// E(T_j - T_i)².
  double moment(std::size_t i, std::size_t j) const {
    double s = 0.0;
    for (std::size_t k = 0; k < outcomes.size(); ++k) {
      const double d = outcomes[k][j] - outcomes[k][i];
      s += weights[k] * d * d;
    }
    return s;
  }
};

struct WuResult {
  double lhs = 0.0;    // ||max_{1<=k<=2^d} |T_k - T_0| ||_2
  double rhs = 0.0;    // Σ_r [Σ_m E(T_{2^r m} - T_{2^r (m-1)})²]^{1/2}
  double slack = 0.0;
  bool verdict = false;
};

inline WuResult wu_check(const DyadicFamily& fam) {
  fam.validate();
  const std::size_t top = std::size_t{1} << fam.level;

  WuResult r;
  double mean_y = 0.0, mean_y2 = 0.0;
  for (std::size_t s = 0; s < fam.outcomes.size(); ++s) {
    const auto& t = fam.outcomes[s];
    double mx = 0.0;
    for (std::size_t k = 1; k <= top; ++k) mx = std::max(mx, std::abs(t[k] - t[0]));
    const double y = mx * mx;
    mean_y += fam.weights[s] * y;
    mean_y2 += fam.weights[s] * y * y;
  }
  r.lhs = std::sqrt(mean_y);

  for (int lvl = 0; lvl <= fam.level; ++lvl) {
    const std::size_t step = std::size_t{1} << lvl;
    double block = 0.0;
    for (std::size_t m = 1; m <= top / step; ++m) block += fam.moment(step * (m - 1), step * m);
    r.rhs += std::sqrt(block);
  }

  if (fam.exact) {
    r.slack = 1e-12;
  } else {
    // Delta method on sqrt of the sample mean of max².
    const double n = static_cast<double>(fam.outcomes.size());
    const double var_y = std::max(0.0, mean_y2 - mean_y * mean_y) * n / std::max(1.0, n - 1.0);
    const double se_mean = std::sqrt(var_y / n);
    r.slack = r.lhs > 0.0 ? 3.0 * se_mean / (2.0 * r.lhs) : 3.0 * std::sqrt(se_mean);
  }
  r.verdict = r.lhs <= r.rhs + r.slack;
  return r;
}

// ---------------------------------------------------------------------------
// Maximal bound from integral control of increments
// ---------------------------------------------------------------------------

/// Upper bound on Σ_{n>=n0} (log n) a^{2^n} for 0 <= a < 1: terms are added
/// explicitly until successive ratios fall below 1/2, then bounded by a
/// geometric series.
inline double log_weighted_power_tail(double a, long n0) {
  if (a <= 0.0) return 0.0;
  if (a >= 1.0) return std::numeric_limits<double>::infinity();
  n0 = std::max(n0, 2L);
  double sum = 0.0;
  for (long n = n0; n < 1023; ++n) {
    const double p = std::pow(a, std::ldexp(1.0, static_cast<int>(n)));
    const double term = std::log(static_cast<double>(n)) * p;
    const double rho = std::log(static_cast<double>(n + 1)) / std::log(static_cast<double>(n)) * p;
    if (rho <= 0.5) return sum + term / (1.0 - rho);
    sum += term;
  }
  return std::numeric_limits<double>::infinity();
}

/// g_n(t) = √(1-t²) Σ_{k=2^n}^{2^{n+1}-1} t^k, nonnegative on [-1,1] for n >= 1.
inline double dyadic_block_power_sum(long n, double t) {
  if (t == 1.0) return std::ldexp(1.0, static_cast<int>(n));
  const double p = std::pow(t, std::ldexp(1.0, static_cast<int>(n)));
  return p * (1.0 - p) / (1.0 - t);
}

inline double builtin_g(long n, double t) {
  if (std::abs(t) >= 1.0) return 0.0;
  return std::sqrt(1.0 - t * t) * dyadic_block_power_sum(n, t);
}

/// A positive finite measure μ on [-1,1] and a family of nonnegative
/// functions g_n used to dominate increments of a sequence.
struct AtomicWeightFamily {
  std::vector<std::pair<double, double>> mu;  // (t, mass)
  std::function<double(long, double)> g = builtin_g;
  bool builtin = true;

  static AtomicWeightFamily from_measure(const SpectralMeasure& m, double scale = 1.0) {
    AtomicWeightFamily fam;
    for (const auto& a : m.atoms) fam.mu.emplace_back(a.location.real(), a.mass * scale);
    return fam;
  }

  /// ∫ [Σ_{k=lo}^{hi} g_k(t)]² μ(dt).
  double block_integral(long lo, long hi) const {
    double s = 0.0;
    for (const auto& [t, mass] : mu) {
      double inner = 0.0;
      for (long k = lo; k <= hi; ++k) inner += g(k, t);
      s += inner * inner * mass;
    }
    return s;
  }
};

/// W_1..W_M as a finite weighted distribution; outcome[i][n-1] = W_n.
struct SequenceFamily {
  std::vector<Vector> outcomes;
  Vector weights;

  std::size_t length() const { return outcomes.empty() ? 0 : outcomes.front().size(); }

  double expect(const std::function<double(const Vector&)>& fn) const {
    double s = 0.0;
    for (std::size_t k = 0; k < outcomes.size(); ++k) s += weights[k] * fn(outcomes[k]);
    return s;
  }
};

struct LemmeReport {
  // Increment domination E[W_n - W_m]² <= ∫[g_{m+1} + ... + g_n]² dμ.
  double cond_worst_slack = std::numeric_limits<double>::infinity();
  long cond_worst_m = 0;
  long cond_worst_n = 0;
  double cond_max_rel_gap = 0.0;  // max |rhs - lhs| / (1 + rhs)
  // ∫[Σ_{n<=M} (log n) g_n]² dμ and a bound on what n > M adds.
  double cond2_truncated = 0.0;
  double cond2_tail = 0.0;
  int blocks = 0;  // complete dyadic blocks d with 2^{d+1} <= M
  double dyadic_max_lhs = 0.0;  // Σ_d E max_{2^d<k<=2^{d+1}} (W_k - W_{2^d})²
  double dyadic_max_bound = 0.0;  // Σ_d (d+1)² ∫[Σ_{k=2^d+1}^{2^{d+1}} g_k]² dμ
  double est_lhs = 0.0;    // E[Σ_d |W_{2^{d+1}} - W_{2^d}|]²
  double est_bound = 0.0;  // π²/6 times the dyadic sum above
  double sup_lhs = 0.0;    // E max_{n <= 2^{blocks}} W_n²
  double sup_bound = 0.0;  // 3 (E W_1² + est_bound + dyadic_max_bound)
  bool verdict = false;
};

inline LemmeReport lemme_verify(const AtomicWeightFamily& fam, const SequenceFamily& w,
                                long big_m) {
  if (big_m < 1 || static_cast<std::size_t>(big_m) > w.length()) {
    throw Error(ErrorKind::BadLength, "M exceeds the supplied sequence");
  }
  if (w.outcomes.size() != w.weights.size()) {
    throw Error(ErrorKind::BadLength, "weight count mismatch");
  }
  for (const auto& [t, mass] : fam.mu) {
    if (mass < 0.0 || std::abs(t) > 1.0 + 1e-12) {
      throw Error(ErrorKind::BadArgument, "mu must be a positive measure on [-1,1]");
    }
    for (long n = 1; n <= big_m; ++n)
      if (fam.g(n, t) < -1e-15) {
        throw Error(ErrorKind::BadArgument, "g_n must be nonnegative at the atoms");
      }
  }
  auto W = [](const Vector& o, long n) { return o[static_cast<std::size_t>(n - 1)]; };

  LemmeReport r;
  for (long m = 1; m < big_m; ++m)
    for (long n = m + 1; n <= big_m; ++n) {
      const double lhs = w.expect([&](const Vector& o) {
        const double d = W(o, n) - W(o, m);
        return d * d;
      });
      const double rhs = fam.block_integral(m + 1, n);
      const double slack = rhs - lhs;
      r.cond_max_rel_gap = std::max(r.cond_max_rel_gap, std::abs(slack) / (1.0 + rhs));
      if (slack < r.cond_worst_slack) {
        r.cond_worst_slack = slack;
        r.cond_worst_m = m;
        r.cond_worst_n = n;
      }
      if (lhs > rhs + 1e-9 * (1.0 + rhs)) {
        throw Error(ErrorKind::CondViolated,
                    "E[W_n - W_m]^2 exceeds the g-integral at (m,n) = (" +
                        std::to_string(m) + "," + std::to_string(n) + ")");
      }
    }
  if (big_m == 1) r.cond_worst_slack = 0.0;

  for (const auto& [t, mass] : fam.mu) {
    double inner = 0.0;
    for (long n = 2; n <= big_m; ++n) inner += std::log(static_cast<double>(n)) * fam.g(n, t);
    r.cond2_truncated += inner * inner * mass;
    if (!fam.builtin || mass == 0.0 || std::abs(t) >= 1.0) continue;
    const double tail = std::sqrt(1.0 - t * t) * log_weighted_power_tail(std::abs(t), big_m + 1) /
                        (1.0 - std::abs(t));
    r.cond2_tail += (2.0 * inner * tail + tail * tail) * mass;
  }

  while ((2L << r.blocks) <= big_m) ++r.blocks;
  for (int d = 0; d < r.blocks; ++d) {
    const long lo = (1L << d), hi = (2L << d);
    r.dyadic_max_lhs += w.expect([&](const Vector& o) {
      double mx = 0.0;
      for (long k = lo + 1; k <= hi; ++k) mx = std::max(mx, std::abs(W(o, k) - W(o, lo)));
      return mx * mx;
    });
    const double dd = static_cast<double>(d + 1);
    r.dyadic_max_bound += dd * dd * fam.block_integral(lo + 1, hi);
  }
  r.est_bound = std::numbers::pi * std::numbers::pi / 6.0 * r.dyadic_max_bound;
  r.est_lhs = w.expect([&](const Vector& o) {
    double s = 0.0;
    for (int d = 0; d < r.blocks; ++d) s += std::abs(W(o, 2L << d) - W(o, 1L << d));
    return s * s;
  });
  const long top = 1L << r.blocks;
  r.sup_lhs = w.expect([&](const Vector& o) {
    double mx = 0.0;
    for (long n = 1; n <= top; ++n) mx = std::max(mx, W(o, n) * W(o, n));
    return mx;
  });
  const double w1 = w.expect([&](const Vector& o) { return W(o, 1) * W(o, 1); });
  r.sup_bound = 3.0 * (w1 + r.est_bound + r.dyadic_max_bound);
  const double tol = 1e-12;
  r.verdict = r.dyadic_max_lhs <= r.dyadic_max_bound * (1 + tol) + tol &&
              r.est_lhs <= r.est_bound * (1 + tol) + tol &&
              r.sup_lhs <= r.sup_bound * (1 + tol) + tol;
  return r;
}

namespace detail {

// V_k f for k = 0..k_max (V_0 = 0), by Horner accumulation.
inline std::vector<Vector> all_vn(const FiniteChain& chain, const Observable& f, long k_max) {
  std::vector<Vector> v(static_cast<std::size_t>(k_max) + 1);
  v[0] = Vector(chain.size(), 0.0);
  for (long k = 1; k <= k_max; ++k) {
    Vector qv = matvec(chain.kernel(), v[static_cast<std::size_t>(k - 1)]);
    for (std::size_t x = 0; x < qv.size(); ++x) qv[x] += f[x];
    v[static_cast<std::size_t>(k)] = std::move(qv);
  }
  return v;
}

}  // namespace detail

/// W_n = H_{2^{n+1}}(ξ₀,ξ₁), n = 1..M, over the pair law π(x)Q(x,y). With
/// μ = ρ_f and the built-in g family, the increment condition holds with
/// equality.
inline SequenceFamily lemme_sequence_from_chain(const FiniteChain& chain,
                                                const Observable& f, long big_m) {
  if (big_m < 1 || big_m > 24) throw Error(ErrorKind::BadArgument, "1 <= M <= 24");
  const auto& q = chain.kernel();
  const auto& pi = chain.stationary();
  const std::size_t n = chain.size();
  // Doubling: V_{2k} = V_k + Q^k V_k, with Q^{2^j} by squaring.
  Vector v = f.values();  // V_1
  Matrix qpow = q;        // Q^1
  std::vector<Vector> v_at;  // v_at[j] = V_{2^j}
  v_at.push_back(v);
  for (long j = 1; j <= big_m + 1; ++j) {
    const Vector shifted = matvec(qpow, v);
    for (std::size_t x = 0; x < n; ++x) v[x] += shifted[x];
    v_at.push_back(v);
    qpow = multiply(qpow, qpow);
  }
  SequenceFamily fam;
  for (std::size_t x = 0; x < n; ++x)
    for (std::size_t y = 0; y < n; ++y) {
      if (q(x, y) <= 0.0) continue;
      Vector seq;
      for (long k = 1; k <= big_m; ++k) {
        const Vector& vk = v_at[static_cast<std::size_t>(k + 1)];
        double qvx = 0.0;
        for (std::size_t z = 0; z < n; ++z) qvx += q(x, z) * vk[z];
        seq.push_back(vk[y] - qvx);
      }
      fam.outcomes.push_back(std::move(seq));
      fam.weights.push_back(pi[x] * q(x, y));
    }
  return fam;
}

struct DyadicHResult {
  std::vector<double> cumulative;  // lhs after blocks 0..d
  double lhs_sum = 0.0;
  double rhs_bound = 0.0;
  bool verdict = false;
};

/// Σ_{d=0}^{D} E max_{2^d < n <= 2^{d+1}} [H_{2n} - H_{2^{d+1}}]², enumerated
/// exactly over the pair space, against ∫ (1+t)/(1-t) ρ_f(dt).
inline DyadicHResult dyadic_h_maxsum(const FiniteChain& chain, const Observable& f, int big_d) {
  if (!chain.flags().reversible) throw Error(ErrorKind::NotReversible, "dyadic_h_maxsum");
  if (big_d < 0 || big_d > 16) throw Error(ErrorKind::BadArgument, "0 <= D <= 16");
  require_centered(f);
  DyadicHResult r;
  r.rhs_bound = spectral_integral(spectral_measure(chain, f), SpectralWeight::SigmaSq);

  const auto& q = chain.kernel();
  const auto& pi = chain.stationary();
  const std::size_t n = chain.size();
  const long k_max = 4L << big_d;
  const auto v = detail::all_vn(chain, f, k_max + 1);
  // H_k(x,y) = V_k(y) - (Q V_k)(x) and Q V_k = V_{k+1} - f.
  auto h = [&](long k, std::size_t x, std::size_t y) {
    const auto& vk = v[static_cast<std::size_t>(k)];
    const auto& vk1 = v[static_cast<std::size_t>(k + 1)];
    return vk[y] - (vk1[x] - f[x]);
  };
  for (int d = 0; d <= big_d; ++d) {
    const long base = 2L << d;
    double block = 0.0;
    for (std::size_t x = 0; x < n; ++x)
      for (std::size_t y = 0; y < n; ++y) {
        const double w = pi[x] * q(x, y);
        if (w <= 0.0) continue;
        const double hb = h(base, x, y);
        double mx = 0.0;
        for (long m = (1L << d) + 1; m <= base; ++m) {
          const double diff = h(2 * m, x, y) - hb;
          mx = std::max(mx, diff * diff);
        }
        block += w * mx;
      }
    r.lhs_sum += block;
    r.cumulative.push_back(r.lhs_sum);
  }
  r.verdict = r.lhs_sum <= r.rhs_bound + 1e-12;
  return r;
}

struct EnvelopeResult {
  double worst_ratio = 0.0;
  double location = 0.0;
  std::vector<double> ratios;  // one per grid point
};

/// Sup over a grid of
///   [Σ_{n<=n_max} (log n) Σ_{k=2^n}^{2^{n+1}-1} t^k + tail] /
///   [(1+t) max(log⁺|log(1-t²)|, ε) / (1-t²)],   ε = 1e-3,
/// where the tail is a certified bound on n > n_max.
inline EnvelopeResult l2_envelope_check(std::span<const double> grid, long n_max) {
  if (n_max < 1 || n_max > 1000) throw Error(ErrorKind::BadArgument, "1 <= n_max <= 1000");
  constexpr double kEps = 1e-3;
  EnvelopeResult r;
  for (double t : grid) {
    if (!(std::abs(t) <= 1.0 - 1e-8)) {
      throw Error(ErrorKind::GridTouchesSingularity,
                  "grid point " + std::to_string(t) + " is within 1e-8 of +-1");
    }
    double series = 0.0;
    for (long n = 2; n <= n_max; ++n)
      series += std::log(static_cast<double>(n)) * dyadic_block_power_sum(n, t);
    const double at = std::abs(t);
    const double tail = log_weighted_power_tail(at, n_max + 1) / (1.0 - at);
    const double env = (1.0 + t) * std::max(log_plus(std::abs(std::log(1.0 - t * t))), kEps) /
                       (1.0 - t * t);
    const double ratio = (series + tail) / env;
    r.ratios.push_back(ratio);
    if (r.ratios.size() == 1 || ratio > r.worst_ratio) {
      r.worst_ratio = ratio;
      r.location = t;
    }
  }
  return r;
}

}  // namespace qclt
