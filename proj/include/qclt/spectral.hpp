#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <concepts>
#include <string>
#include <vector>

#include "qclt/chain.hpp"
#include "qclt/error.hpp"
#include "qclt/linalg.hpp"

namespace qclt {

using Complex = std::complex<double>;

inline constexpr double kAtomMergeTol = 1e-10;
/// Atoms lighter than this never make a condition integral diverge.
inline constexpr double kDivergentMassThreshold = 1e-9;
inline constexpr double kSingularityDistance = 1e-12;

struct SpectralAtom {
  Complex location;
  double mass = 0.0;
};

/// Atomic spectral measure ρ_f. Reversible chains give real locations in
/// [-1,1]; group walks may give locations anywhere in the closed unit disk.
struct SpectralMeasure {
  std::vector<SpectralAtom> atoms;

  double total() const {
    double s = 0.0;
    for (const auto& a : atoms) s += a.mass;
    return s;
  }
  bool real_supported() const {
    return std::all_of(atoms.begin(), atoms.end(), [](const SpectralAtom& a) {
      return std::abs(a.location.imag()) <= 1e-12;
    });
  }
  /// Mass sitting within `tol` of a location.
  double mass_near(Complex z, double tol = kAtomMergeTol) const {
    double s = 0.0;
    for (const auto& a : atoms)
      if (std::abs(a.location - z) <= tol) s += a.mass;
    return s;
  }
};

enum class SpectralWeight { SR, SR2, SN, SN1, SigmaSq };

inline std::string to_string(SpectralWeight w) {
  switch (w) {
    case SpectralWeight::SR: return "SR";
    case SpectralWeight::SR2: return "SR2";
    case SpectralWeight::SN: return "SN";
    case SpectralWeight::SN1: return "SN1";
    case SpectralWeight::SigmaSq: return "sigma_sq";
  }
  return "?";
}

inline double log_plus(double u) { return u > 1.0 ? std::log(u) : 0.0; }

/// Integrand of each named spectral condition at location z.
inline double weight_value(SpectralWeight w, Complex z) {
  switch (w) {
    case SpectralWeight::SR: return 1.0 / (1.0 - z.real());
    case SpectralWeight::SR2: {
      const double one_minus = 1.0 - z.real();
      const double lp = log_plus(std::abs(std::log(one_minus)));
      return lp * lp / one_minus;
    }
    case SpectralWeight::SN: return 1.0 / std::abs(1.0 - z);
    case SpectralWeight::SN1: {
      const double d = std::abs(1.0 - z);
      return std::abs(std::log(d)) / d;
    }
    case SpectralWeight::SigmaSq: return (1.0 + z.real()) / (1.0 - z.real());
  }
  return 0.0;
}

/// Eigen-decomposition of S = D^{1/2} Q D^{-1/2} (D = diag π), symmetric
/// exactly when the chain is reversible.
inline SymmetricEigen symmetrized_spectrum(const FiniteChain& chain) {
  if (!chain.flags().reversible) {
    throw Error(ErrorKind::NotReversible,
                "spectral decomposition needs a reversible chain");
  }
  const std::size_t n = chain.size();
  const auto& pi = chain.stationary();
  const auto& q = chain.kernel();
  Matrix s(n, n);
  for (std::size_t x = 0; x < n; ++x)
    for (std::size_t y = 0; y < n; ++y)
      s(x, y) = std::sqrt(pi[x]) * q(x, y) / std::sqrt(pi[y]);
  for (std::size_t x = 0; x < n; ++x)
    for (std::size_t y = x + 1; y < n; ++y) {
      const double avg = 0.5 * (s(x, y) + s(y, x));
      s(x, y) = avg;
      s(y, x) = avg;
    }
  auto eig = jacobi_eigen(std::move(s));
  for (double& v : eig.values) v = std::clamp(v, -1.0, 1.0);
  return eig;
}

inline SpectralMeasure spectral_measure(const FiniteChain& chain,
                                        const Observable& f) {
  if (f.size() != chain.size()) {
    throw Error(ErrorKind::DimensionMismatch, "spectral_measure");
  }
  const auto eig = symmetrized_spectrum(chain);
  const std::size_t n = chain.size();
  const auto& pi = chain.stationary();
  Vector weighted(n);
  for (std::size_t x = 0; x < n; ++x) weighted[x] = std::sqrt(pi[x]) * f[x];

  SpectralMeasure out;
  for (std::size_t k = 0; k < n; ++k) {
    double c = 0.0;
    for (std::size_t x = 0; x < n; ++x) c += eig.vectors(x, k) * weighted[x];
    const double lambda = eig.values[k];
    // Eigenvalues are sorted, so merging with the previous atom suffices.
    if (!out.atoms.empty() &&
        std::abs(lambda - out.atoms.back().location.real()) <= kAtomMergeTol) {
      out.atoms.back().mass += c * c;
    } else {
      out.atoms.push_back({Complex(lambda, 0.0), c * c});
    }
  }
  return out;
}

namespace detail {

inline bool near_singularity(SpectralWeight w, Complex z) {
  switch (w) {
    case SpectralWeight::SR:
    case SpectralWeight::SR2:
    case SpectralWeight::SigmaSq:
      return 1.0 - z.real() <= kSingularityDistance;
    case SpectralWeight::SN:
    case SpectralWeight::SN1:
      return std::abs(1.0 - z) <= kSingularityDistance;
  }
  return false;
}

}  // namespace detail

/// Σ_i w(location_i) mass_i for a named condition. Throws DivergentIntegral
/// when a non-negligible atom sits on the integrand's singularity.
inline double spectral_integral(const SpectralMeasure& measure,
                                SpectralWeight weight) {
  const bool real_weight = weight == SpectralWeight::SR ||
                           weight == SpectralWeight::SR2 ||
                           weight == SpectralWeight::SigmaSq;
  if (real_weight && !measure.real_supported()) {
    throw Error(ErrorKind::NotRealSupported,
                to_string(weight) + " needs a real-supported measure");
  }
  double sum = 0.0;
  for (const auto& a : measure.atoms) {
    if (detail::near_singularity(weight, a.location)) {
      if (a.mass > kDivergentMassThreshold) {
        throw Error(ErrorKind::DivergentIntegral,
                    to_string(weight) + ": atom of mass " +
                        std::to_string(a.mass) + " at the singularity");
      }
      continue;
    }
    sum += weight_value(weight, a.location) * a.mass;
  }
  return sum;
}

/// Caller-supplied integrand evaluated at every atom location.
template <class Integrand>
  requires std::invocable<Integrand, Complex>
double spectral_integral(const SpectralMeasure& measure, Integrand&& w) {
  double sum = 0.0;
  for (const auto& a : measure.atoms) sum += w(a.location) * a.mass;
  return sum;
}

/// Spectral value of E[H_n - H_m]²: Σ (1 - t²)(Σ_{k=m}^{n-1} t^k)² mass.
inline double varH_spectral(const SpectralMeasure& measure, int m, int n) {
  if (m < 1 || m >= n) {
    throw Error(ErrorKind::BadIndexOrder, "need 1 <= m < n");
  }
  if (!measure.real_supported()) {
    throw Error(ErrorKind::NotRealSupported, "varH_spectral");
  }
  double total = 0.0;
  for (const auto& a : measure.atoms) {
    const double t = a.location.real();
    double power = std::pow(t, m);
    double block = 0.0;
    for (int k = m; k < n; ++k) {
      block += power;
      power *= t;
    }
    total += (1.0 - t * t) * block * block * a.mass;
  }
  return total;
}

/// var(S_n)/n under the stationary law, from the exact covariance sum
/// (1/n)[n<f,f> + 2 Σ_{k=1}^{n-1} (n-k) <f, Q^k f>].
inline double variance_growth(const FiniteChain& chain, const Observable& f,
                              long n) {
  if (n < 1) throw Error(ErrorKind::BadArgument, "variance_growth needs n >= 1");
  require_centered(f);
  const double dn = static_cast<double>(n);
  double acc = dn * f.norm_sq();
  Vector qk = f.values();
  for (long k = 1; k < n; ++k) {
    qk = matvec(chain.kernel(), qk);
    acc += 2.0 * static_cast<double>(n - k) * inner_product(chain, f.values(), qk);
  }
  return acc / dn;
}

}  // namespace qclt
