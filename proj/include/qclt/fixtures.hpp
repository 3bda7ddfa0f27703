#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "qclt/chain.hpp"
#include "qclt/linalg.hpp"

namespace qclt::fixtures {

struct NamedChain {
  std::string name;
  FiniteChain chain;
  Vector f;
};

/// Two states, switching with probability p; f = (1, -1).
inline NamedChain two_state(double p = 0.25) {
  auto chain = FiniteChain::create({"0", "1"}, Matrix::from_rows({{1 - p, p}, {p, 1 - p}}));
  return {"two_state", std::move(chain), {1.0, -1.0}};
}

/// Rows all equal to π = (1/2, 1/2); f = (1, -1), so σ² = 1.
inline NamedChain iid() {
  auto chain = FiniteChain::create({"0", "1"}, Matrix::from_rows({{0.5, 0.5}, {0.5, 0.5}}));
  return {"iid", std::move(chain), {1.0, -1.0}};
}

/// Deterministic flip on Z_2; f = (1, -1) is the -1 eigenvector.
inline NamedChain flip() {
  auto chain = FiniteChain::create({"0", "1"}, Matrix::from_rows({{0.0, 1.0}, {1.0, 0.0}}));
  return {"flip", std::move(chain), {1.0, -1.0}};
}

/// Lazy nearest-neighbour walk on a path of n states; f linear, centred.
inline NamedChain lazy_path(std::size_t n = 5) {
  Matrix q(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    const double left = i > 0 ? 0.25 : 0.0;
    const double right = i + 1 < n ? 0.25 : 0.0;
    if (i > 0) q(i, i - 1) = left;
    if (i + 1 < n) q(i, i + 1) = right;
    q(i, i) = 1.0 - left - right;
  }
  std::vector<std::string> labels;
  Vector f(n);
  for (std::size_t i = 0; i < n; ++i) {
    labels.push_back(std::to_string(i));
    f[i] = static_cast<double>(i) - static_cast<double>(n - 1) / 2.0;
  }
  return {"lazy_path", FiniteChain::create(std::move(labels), std::move(q)), std::move(f)};
}

/// Reversible chains used wherever "every reversible fixture" is required.
inline std::vector<NamedChain> reversible_fixtures() {
  std::vector<NamedChain> out;
  out.push_back(two_state());
  out.push_back(iid());
  out.push_back(flip());
  out.push_back(lazy_path());
  return out;
}

/// Q(i,j) = w_ij / Σ_k w_ik for random symmetric weights w, so
/// π ∝ Σ_k w_ik and detailed balance holds. Returns a centred random f.
inline NamedChain random_reversible(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> unit(0.05, 1.0);
  Matrix w(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) w(i, j) = w(j, i) = unit(rng);
  Matrix q(n, n);
  Vector pi(n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < n; ++j) row += w(i, j);
    for (std::size_t j = 0; j < n; ++j) q(i, j) = w(i, j) / row;
    pi[i] = row;
    total += row;
  }
  for (double& p : pi) p /= total;
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < n; ++i) labels.push_back(std::to_string(i));
  auto chain = FiniteChain::create(std::move(labels), std::move(q), pi);

  std::normal_distribution<double> gauss;
  Vector f(n);
  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    f[i] = gauss(rng);
    mean += pi[i] * f[i];
  }
  for (double& v : f) v -= mean;
  return {"random_" + std::to_string(n), std::move(chain), std::move(f)};
}

}  // namespace qclt::fixtures
