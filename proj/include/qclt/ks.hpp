#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <span>

#include "qclt/error.hpp"

namespace qclt {

inline double normal_cdf(double x) {
  return 0.5 * std::erfc(-x / std::sqrt(2.0));
}

/// One-sample Kolmogorov-Smirnov statistic of an ascending sample against
/// a continuous CDF: max_i max(i/N - F(x_i), F(x_i) - (i-1)/N).
template <class Cdf>
  requires std::invocable<Cdf, double>
double ks_distance(std::span<const double> sorted, Cdf&& cdf) {
  if (sorted.empty()) throw Error(ErrorKind::EmptySample, "ks_distance");
  if (!std::is_sorted(sorted.begin(), sorted.end())) {
    throw Error(ErrorKind::BadArgument, "ks_distance needs a sorted sample");
  }
  const double n = static_cast<double>(sorted.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double f = cdf(sorted[i]);
    const double above = static_cast<double>(i + 1) / n - f;
    const double below = f - static_cast<double>(i) / n;
    d = std::max({d, above, below});
  }
  return d;
}

inline double ks_distance_normal(std::span<const double> sorted) {
  return ks_distance(sorted, normal_cdf);
}

}  // namespace qclt
