#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "qclt/chain.hpp"
#include "qclt/error.hpp"
#include "qclt/linalg.hpp"
#include "qclt/spectral.hpp"

namespace qclt {

/// Poisson solution g of (I - Q)g = f and the limit martingale kernel
/// H(x,y) = g(y) - (Qg)(x). M_n = Σ_k H(ξ_{k-1}, ξ_k).
struct MartingaleScheme {
  Vector f;
  Vector g;
  Vector qg;
  Matrix H;
  double sigma_sq = 0.0;
  /// Largest |eigenvalue| of Q on mean-zero functions.
  double rate = 0.0;
};

struct ApproximationDiagnostics {
  std::size_t state = 0;
  long n = 0;
  double cond_mean = 0.0;        // E^x(S_n)
  double residual_msq = 0.0;     // E^x[(S_n - M_n)²]
  double residual_over_n = 0.0;
  double asdl_sup = 0.0;         // max_x |E^x(S_n)| / √n
};

inline double l2_norm(const FiniteChain& chain, std::span<const double> v) {
  return std::sqrt(inner_product(chain, v, v));
}

namespace detail {

inline Vector center(const FiniteChain& chain, Vector v) {
  const double m = inner_product(chain, v, Vector(v.size(), 1.0));
  for (double& x : v) x -= m;
  return v;
}

// Power iteration with the constants deflated. For normal Q the ratio
// ||Q^{k+1} v|| / ||Q^k v|| increases monotonically to the max modulus.
inline double power_iteration_rate(const FiniteChain& chain) {
  const std::size_t n = chain.size();
  Vector v(n);
  for (std::size_t x = 0; x < n; ++x)
    v[x] = std::sin(1.0 + 2.718281828 * static_cast<double>(x * x + 3 * x));
  v = center(chain, std::move(v));
  double norm = l2_norm(chain, v);
  if (norm == 0.0) return 0.0;
  for (double& x : v) x /= norm;

  double ratio = 0.0;
  int stable = 0;
  for (int it = 0; it < 200000; ++it) {
    Vector w = center(chain, matvec(chain.kernel(), v));
    const double wn = l2_norm(chain, w);
    if (wn <= 1e-300) return 0.0;
    stable = std::abs(wn - ratio) <= 1e-13 ? stable + 1 : 0;
    ratio = wn;
    if (stable >= 3) break;
    for (double& x : w) x /= wn;
    v = std::move(w);
  }
  return ratio;
}

inline Matrix matrix_power(const Matrix& q, long n) {
  Matrix result = Matrix::identity(q.rows());
  Matrix base = q;
  while (n > 0) {
    if (n & 1) result = multiply(result, base);
    n >>= 1;
    if (n > 0) base = multiply(base, base);
  }
  return result;
}

// Column of the symmetrized eigenbasis carrying the constants (closest to √π).
inline std::size_t constant_mode(const SymmetricEigen& eig, const Vector& pi) {
  std::size_t top = 0;
  double best = -1.0;
  for (std::size_t k = 0; k < pi.size(); ++k) {
    double overlap = 0.0;
    for (std::size_t x = 0; x < pi.size(); ++x)
      overlap += eig.vectors(x, k) * std::sqrt(pi[x]);
    if (std::abs(overlap) > best) {
      best = std::abs(overlap);
      top = k;
    }
  }
  return top;
}

}  // namespace detail

/// Contraction rate of Q on L²₀(π): from the symmetric eigenproblem when
/// reversible, power iteration otherwise.
inline double contraction_rate(const FiniteChain& chain) {
  if (chain.size() == 1) return 0.0;
  if (!chain.flags().reversible) return detail::power_iteration_rate(chain);
  const auto eig = symmetrized_spectrum(chain);
  const std::size_t top = detail::constant_mode(eig, chain.stationary());
  double rate = 0.0;
  for (std::size_t k = 0; k < chain.size(); ++k)
    if (k != top) rate = std::max(rate, std::abs(eig.values[k]));
  return rate;
}

/// Largest non-constant eigenvalue of a reversible chain; (I - Q) is
/// near-singular on L²₀(π) when it approaches 1.
inline double top_nonconstant_eigenvalue(const FiniteChain& chain) {
  const auto eig = symmetrized_spectrum(chain);
  const std::size_t top = detail::constant_mode(eig, chain.stationary());
  double out = -1.0;
  for (std::size_t k = 0; k < chain.size(); ++k)
    if (k != top) out = std::max(out, eig.values[k]);
  return out;
}

inline MartingaleScheme poisson_solve(const FiniteChain& chain,
                                      const Observable& f) {
  if (!chain.flags().irreducible) {
    throw Error(ErrorKind::NotIrreducible, "poisson_solve");
  }
  if (f.size() != chain.size()) {
    throw Error(ErrorKind::DimensionMismatch, "poisson_solve");
  }
  require_centered(f);
  const std::size_t n = chain.size();
  const auto& q = chain.kernel();
  const auto& pi = chain.stationary();

  if (chain.flags().reversible && n > 1 &&
      top_nonconstant_eigenvalue(chain) >= 1.0 - 1e-12) {
    throw Error(ErrorKind::NearSingular, "eigenvalue at 1 on L2_0(pi)");
  }

  // (I - Q + 1 πᵀ) g = f forces ⟨g,1⟩_π = 0 because π(I - Q) = 0 and πf = 0.
  Matrix a(n, n);
  for (std::size_t x = 0; x < n; ++x)
    for (std::size_t y = 0; y < n; ++y)
      a(x, y) = (x == y ? 1.0 : 0.0) - q(x, y) + pi[y];
  auto sol = solve_linear(std::move(a), f.values(), 1e-14);
  if (!sol || sol->min_pivot_ratio <= 1e-12) {
    throw Error(ErrorKind::NearSingular, "I - Q singular on L2_0(pi)");
  }

  MartingaleScheme s;
  s.f = f.values();
  s.g = detail::center(chain, std::move(sol->x));
  s.qg = matvec(q, s.g);
  s.H = Matrix(n, n);
  for (std::size_t x = 0; x < n; ++x)
    for (std::size_t y = 0; y < n; ++y) {
      s.H(x, y) = s.g[y] - s.qg[x];
      s.sigma_sq += pi[x] * q(x, y) * s.H(x, y) * s.H(x, y);
    }
  s.rate = contraction_rate(chain);
  return s;
}

struct VnHn {
  Vector vn;  // V_n f = (I + Q + ... + Q^{n-1}) f
  Matrix hn;  // H_n(x,y) = V_n f(y) - (Q V_n f)(x)
};

inline VnHn vn_hn(const FiniteChain& chain, const Observable& f, long n) {
  if (n < 1) throw Error(ErrorKind::BadArgument, "vn_hn needs n >= 1");
  const auto& q = chain.kernel();
  Vector v = f.values();
  for (long k = 1; k < n; ++k) {
    Vector qv = matvec(q, v);
    for (std::size_t x = 0; x < v.size(); ++x) v[x] = f[x] + qv[x];
  }
  const Vector qv = matvec(q, v);
  Matrix h(v.size(), v.size());
  for (std::size_t x = 0; x < v.size(); ++x)
    for (std::size_t y = 0; y < v.size(); ++y) h(x, y) = v[y] - qv[x];
  return {std::move(v), std::move(h)};
}

/// E[H_n - H_m]² under the stationary pair law π(x)Q(x,y).
inline double varH_direct(const FiniteChain& chain, const Observable& f, long m,
                          long n) {
  if (m < 1 || m >= n) throw Error(ErrorKind::BadIndexOrder, "need 1 <= m < n");
  const auto& q = chain.kernel();
  const auto& pi = chain.stationary();
  // H_n - H_m is built from D = Σ_{k=m}^{n-1} Q^k f.
  Vector qk = f.values();
  for (long k = 0; k < m; ++k) qk = matvec(q, qk);
  Vector d(chain.size(), 0.0);
  for (long k = m; k < n; ++k) {
    for (std::size_t x = 0; x < d.size(); ++x) d[x] += qk[x];
    qk = matvec(q, qk);
  }
  const Vector qd = matvec(q, d);
  double total = 0.0;
  for (std::size_t x = 0; x < d.size(); ++x)
    for (std::size_t y = 0; y < d.size(); ++y) {
      const double diff = d[y] - qd[x];
      total += pi[x] * q(x, y) * diff * diff;
    }
  return total;
}

/// E[sup_{m>N} G_m(ξ₀,ξ₁)²] with G_m(x,y) = (Q^{m+1}g)(x) - (Q^m g)(y).
/// Each pair's supremum is enumerated until the envelope
/// |Q^{m'} g(x)| <= rate^{m'-m} ||Q^m g||_π / √π_min shows later terms
/// cannot exceed it.
inline double tail_sup_deviation(const FiniteChain& chain,
                                 const MartingaleScheme& scheme, long big_n) {
  if (scheme.rate >= 1.0 - 1e-12) {
    throw Error(ErrorKind::RateNotContractive,
                "rate " + std::to_string(scheme.rate) + " has no geometric tail");
  }
  if (big_n < 0) throw Error(ErrorKind::BadArgument, "N must be >= 0");
  const std::size_t n = chain.size();
  const auto& q = chain.kernel();
  const auto& pi = chain.stationary();
  const double pi_min = *std::min_element(pi.begin(), pi.end());
  const double r = scheme.rate;

  Vector cur = scheme.g;  // Q^m g
  for (long k = 0; k < big_n + 1; ++k) cur = matvec(q, cur);
  Vector next = matvec(q, cur);  // Q^{m+1} g

  Matrix sup(n, n, 0.0);
  constexpr double kFloor = 1e-30;
  for (long m = big_n + 1; m < big_n + 1 + 10'000'000; ++m) {
    double smallest = std::numeric_limits<double>::infinity();
    for (std::size_t x = 0; x < n; ++x)
      for (std::size_t y = 0; y < n; ++y) {
        if (q(x, y) <= 0.0) continue;
        const double gm = next[x] - cur[y];
        sup(x, y) = std::max(sup(x, y), gm * gm);
        smallest = std::min(smallest, sup(x, y));
      }
    const double envelope =
        (r + r * r) * l2_norm(chain, cur) / std::sqrt(pi_min);
    const double env_sq = envelope * envelope;
    if (env_sq <= smallest || env_sq <= kFloor) break;
    cur = std::move(next);
    next = matvec(q, cur);
  }

  double total = 0.0;
  for (std::size_t x = 0; x < n; ++x)
    for (std::size_t y = 0; y < n; ++y) total += pi[x] * q(x, y) * sup(x, y);
  return total;
}

/// Exact quenched moments from start state x: E^x(S_n) = Σ_{k=1}^n Q^k f(x),
/// and, since S_n - M_n = Qg(ξ₀) - Qg(ξ_n),
/// E^x[(S_n - M_n)²] = Σ_y Q^n(x,y) (Qg(x) - Qg(y))².
inline ApproximationDiagnostics quenched_diagnostics(
    const FiniteChain& chain, const MartingaleScheme& scheme, std::size_t x,
    long n) {
  if (n < 1) throw Error(ErrorKind::BadArgument, "n must be >= 1");
  if (x >= chain.size()) throw Error(ErrorKind::BadArgument, "start state");
  const auto& q = chain.kernel();
  Vector qk = scheme.f;
  Vector cond(chain.size(), 0.0);
  for (long k = 1; k <= n; ++k) {
    qk = matvec(q, qk);
    for (std::size_t i = 0; i < cond.size(); ++i) cond[i] += qk[i];
  }
  const double root_n = std::sqrt(static_cast<double>(n));

  ApproximationDiagnostics d;
  d.state = x;
  d.n = n;
  d.cond_mean = cond[x];
  d.asdl_sup = max_abs(cond) / root_n;

  const Matrix qn = detail::matrix_power(q, n);
  for (std::size_t y = 0; y < chain.size(); ++y) {
    const double jump = scheme.qg[x] - scheme.qg[y];
    d.residual_msq += qn(x, y) * jump * jump;
  }
  d.residual_over_n = d.residual_msq / static_cast<double>(n);
  return d;
}

/// Partial sums, index k-1 holding the sum up to k:
///   pr_k  = Σ_{j<=k} (||Q^j f||² - ||Q^{j+1} f||²)^{1/2}
///   mix_k = Σ_{j<=k} ||Q^j f|| / √j
///   vn_k  = Σ_{j<=k} (log log max(j,3))² ||V_j f||² / j²
/// Tails are certified bounds on the remainder beyond K when available.
struct SeriesReport {
  std::vector<double> pr;
  std::vector<double> mix;
  std::vector<double> vn;
  std::optional<double> pr_tail;
  std::optional<double> mix_tail;
  std::optional<double> vn_tail;
};

inline SeriesReport projection_series(const FiniteChain& chain,
                                      const Observable& f, long big_k) {
  if (big_k < 1) throw Error(ErrorKind::BadArgument, "K must be >= 1");
  const auto& q = chain.kernel();
  SeriesReport out;
  Vector qj = matvec(q, f.values());  // Q^j f, j = 1
  Vector vj = f.values();            // V_j f, j = 1
  double pr = 0.0, mix = 0.0, vn = 0.0;
  for (long j = 1; j <= big_k; ++j) {
    const Vector qj1 = matvec(q, qj);
    const double nj = inner_product(chain, qj, qj);
    const double nj1 = inner_product(chain, qj1, qj1);
    const double dj = static_cast<double>(j);
    pr += std::sqrt(std::max(0.0, nj - nj1));
    mix += std::sqrt(nj) / std::sqrt(dj);
    const double ll = std::log(std::log(std::max(dj, 3.0)));
    vn += ll * ll * inner_product(chain, vj, vj) / (dj * dj);
    out.pr.push_back(pr);
    out.mix.push_back(mix);
    out.vn.push_back(vn);

    const Vector qv = matvec(q, vj);
    for (std::size_t x = 0; x < vj.size(); ++x) vj[x] = f[x] + qv[x];
    qj = qj1;
  }

  if (!chain.flags().irreducible || !f.is_centered()) return out;
  try {
    const auto scheme = poisson_solve(chain, f);
    // ||V_j f|| = ||g - Q^j g|| <= 2||g||, and (log log j)² <= log j, so the
    // remainder is at most 4||g||² Σ_{j>K} log j / j² <= 4||g||²(log K + 1)/K.
    const double gn = inner_product(chain, scheme.g, scheme.g);
    const double kk = static_cast<double>(big_k);
    out.vn_tail = 4.0 * gn * (std::log(kk) + 1.0) / kk;
    if (chain.flags().normal && scheme.rate < 1.0) {
      // ||Q^j f|| <= rate^{j-K} ||Q^K f|| for normal Q on L²₀(π).
      Vector qk = f.values();
      for (long j = 0; j < big_k; ++j) qk = matvec(q, qk);
      const double base = l2_norm(chain, qk);
      const double geo = scheme.rate / (1.0 - scheme.rate);
      out.pr_tail = base * geo;
      out.mix_tail = base * geo / std::sqrt(kk + 1.0);
    }
  } catch (const Error&) {
    // Tails stay unset when no Poisson solution exists.
  }
  return out;
}

}  // namespace qclt
