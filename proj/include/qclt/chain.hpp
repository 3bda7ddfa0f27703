#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <queue>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qclt/error.hpp"
#include "qclt/linalg.hpp"

namespace qclt {

inline constexpr double kDefaultClassifyTol = 1e-10;
/// Row sums (and Σπ) may deviate this much in an input document.
inline constexpr double kInputStochasticTol = 1e-9;

struct ChainFlags {
  bool reversible = false;
  bool normal = false;
  bool irreducible = false;
  bool aperiodic = false;
  double tol = kDefaultClassifyTol;
};

/// A validated finite-state kernel Q with a strictly positive stationary
/// law π. Immutable after construction.
class FiniteChain {
 public:
  /// Validates the kernel, renormalises rows (deviation <= 1e-9 accepted),
  /// then either validates the supplied π or solves (Qᵀ - I)π = 0, Σπ = 1.
  static FiniteChain create(std::vector<std::string> labels, Matrix kernel,
                            std::optional<Vector> stationary = std::nullopt,
                            double tol = kDefaultClassifyTol);

  std::size_t size() const noexcept { return kernel_.rows(); }
  const std::vector<std::string>& labels() const noexcept { return labels_; }
  const Matrix& kernel() const noexcept { return kernel_; }
  const Vector& stationary() const noexcept { return stationary_; }
  const ChainFlags& flags() const noexcept { return flags_; }

  /// Index of a state label; throws BadArgument when absent.
  std::size_t index_of(const std::string& label) const {
    const auto it = std::find(labels_.begin(), labels_.end(), label);
    if (it == labels_.end()) {
      throw Error(ErrorKind::BadArgument, "unknown state '" + label + "'");
    }
    return static_cast<std::size_t>(it - labels_.begin());
  }

 private:
  FiniteChain() = default;

  std::vector<std::string> labels_;
  Matrix kernel_;
  Vector stationary_;
  ChainFlags flags_;
};

/// Solves (Qᵀ - I)π = 0 with the last equation replaced by Σπ = 1.
/// Throws SingularStationary when π is not unique.
inline Vector stationary_law(const Matrix& kernel) {
  const std::size_t n = kernel.rows();
  Matrix a(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      a(i, j) = kernel(j, i) - (i == j ? 1.0 : 0.0);
  Vector b(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) a(n - 1, j) = 1.0;
  b[n - 1] = 1.0;
  auto sol = solve_linear(std::move(a), std::move(b), 1e-12);
  if (!sol) {
    throw Error(ErrorKind::SingularStationary,
                "stationary law is not unique (reducible chain?); supply pi");
  }
  return std::move(sol->x);
}

/// Q*(x,y) = π(y) Q(y,x) / π(x).
inline Matrix adjoint_kernel(const Matrix& kernel, std::span<const double> pi) {
  const std::size_t n = kernel.rows();
  Matrix adj(n, n);
  for (std::size_t x = 0; x < n; ++x)
    for (std::size_t y = 0; y < n; ++y)
      adj(x, y) = pi[y] * kernel(y, x) / pi[x];
  return adj;
}

inline Matrix adjoint_kernel(const FiniteChain& chain) {
  return adjoint_kernel(chain.kernel(), chain.stationary());
}

namespace detail {

inline std::vector<bool> reachable(const Matrix& kernel, std::size_t from,
                                   bool reverse) {
  const std::size_t n = kernel.rows();
  std::vector<bool> seen(n, false);
  std::queue<std::size_t> todo;
  seen[from] = true;
  todo.push(from);
  while (!todo.empty()) {
    const std::size_t u = todo.front();
    todo.pop();
    for (std::size_t v = 0; v < n; ++v) {
      const double w = reverse ? kernel(v, u) : kernel(u, v);
      if (w > 0.0 && !seen[v]) {
        seen[v] = true;
        todo.push(v);
      }
    }
  }
  return seen;
}

// Period of state 0: gcd of level(u) + 1 - level(v) over support edges
// inside the class reachable from 0.
inline std::size_t period_of_state0(const Matrix& kernel) {
  const std::size_t n = kernel.rows();
  std::vector<long> level(n, -1);
  std::queue<std::size_t> todo;
  level[0] = 0;
  todo.push(0);
  while (!todo.empty()) {
    const std::size_t u = todo.front();
    todo.pop();
    for (std::size_t v = 0; v < n; ++v)
      if (kernel(u, v) > 0.0 && level[v] < 0) {
        level[v] = level[u] + 1;
        todo.push(v);
      }
  }
  long g = 0;
  for (std::size_t u = 0; u < n; ++u) {
    if (level[u] < 0) continue;
    for (std::size_t v = 0; v < n; ++v)
      if (kernel(u, v) > 0.0 && level[v] >= 0)
        g = std::gcd(g, std::abs(level[u] + 1 - level[v]));
  }
  return static_cast<std::size_t>(g);
}

}  // namespace detail

inline ChainFlags classify_kernel(const Matrix& kernel,
                                  std::span<const double> pi, double tol) {
  const std::size_t n = kernel.rows();
  ChainFlags flags;
  flags.tol = tol;

  double balance = 0.0;
  for (std::size_t x = 0; x < n; ++x)
    for (std::size_t y = 0; y < n; ++y)
      balance = std::max(
          balance, std::abs(pi[x] * kernel(x, y) - pi[y] * kernel(y, x)));
  flags.reversible = balance <= tol;

  const Matrix adj = adjoint_kernel(kernel, pi);
  flags.normal =
      max_abs_diff(multiply(kernel, adj), multiply(adj, kernel)) <= tol;
  // Detailed balance within tol can still leave QQ* - Q*Q slightly above tol.
  flags.normal = flags.normal || flags.reversible;

  const auto fwd = detail::reachable(kernel, 0, false);
  const auto bwd = detail::reachable(kernel, 0, true);
  flags.irreducible =
      std::all_of(fwd.begin(), fwd.end(), [](bool b) { return b; }) &&
      std::all_of(bwd.begin(), bwd.end(), [](bool b) { return b; });
  flags.aperiodic = detail::period_of_state0(kernel) == 1;
  return flags;
}

inline ChainFlags classify_chain(const FiniteChain& chain,
                                 double tol = kDefaultClassifyTol) {
  return classify_kernel(chain.kernel(), chain.stationary(), tol);
}

inline FiniteChain FiniteChain::create(std::vector<std::string> labels,
                                       Matrix kernel,
                                       std::optional<Vector> stationary,
                                       double tol) {
  const std::size_t n = kernel.rows();
  if (n == 0 || !kernel.square()) {
    throw Error(ErrorKind::DimensionMismatch, "kernel must be square, n >= 1");
  }
  if (labels.empty()) {
    for (std::size_t i = 0; i < n; ++i) labels.push_back(std::to_string(i));
  }
  if (labels.size() != n) {
    throw Error(ErrorKind::DimensionMismatch,
                "state label count does not match kernel size");
  }
  for (std::size_t x = 0; x < n; ++x) {
    double sum = 0.0;
    for (std::size_t y = 0; y < n; ++y) {
      const double q = kernel(x, y);
      if (!std::isfinite(q)) {
        throw Error(ErrorKind::BadDocument, "non-finite kernel entry");
      }
      if (q < 0.0) {
        throw Error(ErrorKind::NegativeEntry,
                    "Q[" + std::to_string(x) + "][" + std::to_string(y) + "]");
      }
      sum += q;
    }
    if (std::abs(sum - 1.0) > kInputStochasticTol) {
      throw Error(ErrorKind::NonStochasticRow,
                  "row " + std::to_string(x) + " sums to " +
                      std::to_string(sum));
    }
    for (double& q : kernel.row(x)) q /= sum;
  }

  Vector pi;
  if (stationary) {
    pi = std::move(*stationary);
    if (pi.size() != n) {
      throw Error(ErrorKind::DimensionMismatch, "pi length");
    }
    const double total = std::accumulate(pi.begin(), pi.end(), 0.0);
    if (std::abs(total - 1.0) > kInputStochasticTol) {
      throw Error(ErrorKind::InvalidStationary, "pi does not sum to 1");
    }
    for (double& p : pi) p /= total;
  } else {
    pi = stationary_law(kernel);
    const double total = std::accumulate(pi.begin(), pi.end(), 0.0);
    for (double& p : pi) p /= total;
  }
  for (double p : pi) {
    if (!(p > 0.0)) {
      throw Error(ErrorKind::InvalidStationary,
                  "stationary law must be strictly positive");
    }
  }
  const Vector moved = vecmat(pi, kernel);
  double drift = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    drift = std::max(drift, std::abs(moved[i] - pi[i]));
  if (drift > kInputStochasticTol) {
    throw Error(ErrorKind::InvalidStationary,
                "pi Q != pi (max deviation " + std::to_string(drift) + ")");
  }

  FiniteChain chain;
  chain.labels_ = std::move(labels);
  chain.kernel_ = std::move(kernel);
  chain.stationary_ = std::move(pi);
  chain.flags_ = classify_kernel(chain.kernel_, chain.stationary_, tol);
  return chain;
}

/// A real function on the state space together with its L²(π) data.
class Observable {
 public:
  static Observable from_values(const FiniteChain& chain, Vector values) {
    if (values.size() != chain.size()) {
      throw Error(ErrorKind::DimensionMismatch, "observable length");
    }
    Observable f;
    const auto& pi = chain.stationary();
    for (std::size_t x = 0; x < values.size(); ++x) {
      f.mean_ += pi[x] * values[x];
      f.norm_sq_ += pi[x] * values[x] * values[x];
    }
    f.values_ = std::move(values);
    return f;
  }

  const Vector& values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  double norm_sq() const noexcept { return norm_sq_; }
  double mean() const noexcept { return mean_; }

  /// Membership in L²₀(π), judged relative to the observable's scale.
  bool is_centered() const noexcept {
    return std::abs(mean_) <= 1e-12 * std::max(1.0, max_abs(values_));
  }

 private:
  Vector values_;
  double norm_sq_ = 0.0;
  double mean_ = 0.0;
};

inline void require_centered(const Observable& f) {
  if (!f.is_centered()) {
    throw Error(ErrorKind::NotMeanZero,
                "observable has pi-mean " + std::to_string(f.mean()));
  }
}

inline double inner_product(const FiniteChain& chain,
                            std::span<const double> u,
                            std::span<const double> v) {
  if (u.size() != chain.size() || v.size() != chain.size()) {
    throw Error(ErrorKind::DimensionMismatch, "inner_product");
  }
  const auto& pi = chain.stationary();
  double s = 0.0;
  for (std::size_t x = 0; x < u.size(); ++x) s += pi[x] * u[x] * v[x];
  return s;
}

inline double inner_product(const FiniteChain& chain, const Observable& u,
                            const Observable& v) {
  return inner_product(chain, u.values(), v.values());
}

inline Observable center_observable(const FiniteChain& chain,
                                    std::span<const double> raw) {
  if (raw.size() != chain.size()) {
    throw Error(ErrorKind::DimensionMismatch, "center_observable");
  }
  const auto& pi = chain.stationary();
  double mean = 0.0;
  for (std::size_t x = 0; x < raw.size(); ++x) mean += pi[x] * raw[x];
  Vector f(raw.begin(), raw.end());
  for (double& v : f) v -= mean;
  return Observable::from_values(chain, std::move(f));
}

}  // namespace qclt
