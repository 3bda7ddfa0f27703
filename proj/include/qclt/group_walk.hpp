#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "qclt/chain.hpp"
#include "qclt/error.hpp"
#include "qclt/spectral.hpp"

namespace qclt {

/// One atom of the step law ν on Z_{m_1} x ... x Z_{m_r}.
struct GroupAtom {
  std::vector<long> element;
  double prob = 0.0;
};

/// Random walk Q(x, A) = ν(A - x) on a finite abelian group. States and
/// characters share the same mixed-radix indexing (last component fastest).
class GroupWalk {
 public:
  const std::vector<long>& moduli() const noexcept { return moduli_; }
  const std::vector<GroupAtom>& nu() const noexcept { return nu_; }
  bool symmetric() const noexcept { return symmetric_; }
  bool ergodic() const noexcept { return ergodic_; }
  const FiniteChain& chain() const noexcept { return *chain_; }
  std::size_t order() const noexcept { return order_; }

  std::vector<long> element_of(std::size_t index) const {
    std::vector<long> e(moduli_.size());
    for (std::size_t j = moduli_.size(); j-- > 0;) {
      e[j] = static_cast<long>(index % static_cast<std::size_t>(moduli_[j]));
      index /= static_cast<std::size_t>(moduli_[j]);
    }
    return e;
  }

  std::size_t index_of(const std::vector<long>& element) const {
    std::size_t idx = 0;
    for (std::size_t j = 0; j < moduli_.size(); ++j)
      idx = idx * static_cast<std::size_t>(moduli_[j]) +
            static_cast<std::size_t>(reduce(element[j], moduli_[j]));
    return idx;
  }

  /// χ_k(x) = exp(2πi Σ_j k_j x_j / m_j), phase reduced mod 1 first.
  Complex character(std::size_t k, std::size_t x) const {
    const auto ke = element_of(k);
    const auto xe = element_of(x);
    double phase = 0.0;
    for (std::size_t j = 0; j < moduli_.size(); ++j) {
      const long m = moduli_[j];
      phase += static_cast<double>((ke[j] * xe[j]) % m) / static_cast<double>(m);
    }
    phase -= std::floor(phase);
    const double angle = 2.0 * std::numbers::pi * phase;
    return {std::cos(angle), std::sin(angle)};
  }

  static long reduce(long v, long m) {
    const long r = v % m;
    return r < 0 ? r + m : r;
  }

  friend GroupWalk build_group_walk(std::vector<long> moduli,
                                    std::vector<GroupAtom> nu);

 private:
  GroupWalk() = default;

  std::vector<long> moduli_;
  std::vector<GroupAtom> nu_;
  bool symmetric_ = false;
  bool ergodic_ = false;
  std::size_t order_ = 0;
  std::optional<FiniteChain> chain_;
};

inline std::string element_label(const std::vector<long>& e) {
  if (e.size() == 1) return std::to_string(e[0]);
  std::string s = "(";
  for (std::size_t j = 0; j < e.size(); ++j) {
    if (j) s += ",";
    s += std::to_string(e[j]);
  }
  return s + ")";
}

/// ν̂(k) = Σ_a ν(a) χ_k(a) for every character k.
inline std::vector<Complex> nu_hat(const GroupWalk& walk) {
  std::vector<Complex> out(walk.order());
  for (std::size_t k = 0; k < walk.order(); ++k)
    for (const auto& a : walk.nu())
      out[k] += a.prob * walk.character(k, walk.index_of(a.element));
  return out;
}

inline GroupWalk build_group_walk(std::vector<long> moduli,
                                  std::vector<GroupAtom> nu) {
  if (moduli.empty()) throw Error(ErrorKind::BadArgument, "no moduli");
  std::size_t order = 1;
  for (long m : moduli) {
    if (m < 1) throw Error(ErrorKind::BadArgument, "moduli must be positive");
    order *= static_cast<std::size_t>(m);
  }
  if (nu.empty()) throw Error(ErrorKind::EmptySupport, "step law has no atoms");

  GroupWalk walk;
  walk.moduli_ = std::move(moduli);
  walk.order_ = order;

  // Reduce elements and merge repeated atoms.
  std::vector<double> mass(order, 0.0);
  double total = 0.0;
  for (const auto& a : nu) {
    if (a.element.size() != walk.moduli_.size()) {
      throw Error(ErrorKind::DimensionMismatch, "group element arity");
    }
    if (!(a.prob >= 0.0) || !std::isfinite(a.prob)) {
      throw Error(ErrorKind::BadProbabilities, "negative or non-finite mass");
    }
    mass[walk.index_of(a.element)] += a.prob;
    total += a.prob;
  }
  if (std::abs(total - 1.0) > kInputStochasticTol) {
    throw Error(ErrorKind::BadProbabilities,
                "step law sums to " + std::to_string(total));
  }
  for (std::size_t i = 0; i < order; ++i)
    if (mass[i] > 0.0) walk.nu_.push_back({walk.element_of(i), mass[i] / total});
  if (walk.nu_.empty()) throw Error(ErrorKind::EmptySupport, "all masses zero");

  walk.symmetric_ = true;
  for (std::size_t i = 0; i < order; ++i) {
    auto neg = walk.element_of(i);
    for (std::size_t j = 0; j < neg.size(); ++j) neg[j] = -neg[j];
    if (std::abs(mass[i] - mass[walk.index_of(neg)]) > 1e-15) walk.symmetric_ = false;
  }

  Matrix q(order, order);
  std::vector<std::string> labels;
  for (std::size_t x = 0; x < order; ++x) {
    const auto xe = walk.element_of(x);
    labels.push_back(element_label(xe));
    for (const auto& a : walk.nu_) {
      auto ye = xe;
      for (std::size_t j = 0; j < ye.size(); ++j) ye[j] += a.element[j];
      q(x, walk.index_of(ye)) += a.prob;
    }
  }
  walk.chain_ = FiniteChain::create(std::move(labels), std::move(q),
                                    Vector(order, 1.0 / static_cast<double>(order)));

  const auto hat = nu_hat(walk);
  walk.ergodic_ = true;
  for (std::size_t k = 1; k < order; ++k)
    if (std::abs(1.0 - hat[k]) <= 1e-12) walk.ergodic_ = false;
  return walk;
}

/// Step law of the adjoint walk: ν* is the image of ν under x -> -x.
inline std::vector<GroupAtom> reflected_step(const GroupWalk& walk) {
  std::vector<GroupAtom> out;
  for (const auto& a : walk.nu()) {
    GroupAtom r = a;
    for (auto& c : r.element) c = -c;
    out.push_back(std::move(r));
  }
  return out;
}

struct WalkFourier {
  std::vector<Complex> nu_hat;
  std::vector<Complex> f_hat;  // f = Σ_k f̂(k) χ_k
};

inline WalkFourier walk_fourier(const GroupWalk& walk, std::span<const double> f) {
  if (f.size() != walk.order()) {
    throw Error(ErrorKind::DimensionMismatch, "observable length");
  }
  WalkFourier out{nu_hat(walk), std::vector<Complex>(walk.order())};
  const double inv_n = 1.0 / static_cast<double>(walk.order());
  for (std::size_t k = 0; k < walk.order(); ++k) {
    Complex acc;
    for (std::size_t x = 0; x < walk.order(); ++x)
      acc += f[x] * std::conj(walk.character(k, x));
    out.f_hat[k] = acc * inv_n;
  }
  return out;
}

/// Fourier-side condition sums over the non-identity characters.
struct G1Report {
  double sr_sum = 0.0;   // Σ |f̂|² / |1 - ν̂|
  double g1_sum = 0.0;   // Σ |f̂|² (log⁺|log|1 - ν̂||)² / |1 - ν̂|
  double sn_sum = 0.0;   // Σ |f̂|² / |1 - z|, z = ν̂
  double sn1_sum = 0.0;  // Σ |f̂|² |log|1 - z|| / |1 - z|
  bool symmetric = false;
  /// Symmetric ν only: Σ |f̂|² (1 + ν̂)/(1 - ν̂).
  std::optional<double> sigma_sq;
  /// Symmetric ν only: SR integral of the materialised chain's spectral
  /// measure, an independent computation of sr_sum.
  std::optional<double> spectral_sr;
  std::optional<double> spectral_sigma_sq;
};

inline G1Report check_g1(const GroupWalk& walk, std::span<const double> f) {
  if (!walk.ergodic()) {
    throw Error(ErrorKind::NotErgodic,
                "step law is supported by a proper subgroup");
  }
  const auto fourier = walk_fourier(walk, f);
  G1Report r;
  r.symmetric = walk.symmetric();
  double sigma = 0.0;
  for (std::size_t k = 1; k < walk.order(); ++k) {
    const double w = std::norm(fourier.f_hat[k]);
    const Complex z = fourier.nu_hat[k];
    const double d = std::abs(1.0 - z);
    const double lp = log_plus(std::abs(std::log(d)));
    r.sr_sum += w / d;
    r.g1_sum += w * lp * lp / d;
    r.sn_sum += w / d;
    r.sn1_sum += w * std::abs(std::log(d)) / d;
    sigma += w * (1.0 + z.real()) / (1.0 - z.real());
  }
  if (walk.symmetric()) {
    r.sigma_sq = sigma;
    const auto centered = center_observable(walk.chain(), f);
    const auto measure = spectral_measure(walk.chain(), centered);
    r.spectral_sr = spectral_integral(measure, SpectralWeight::SR);
    r.spectral_sigma_sq = spectral_integral(measure, SpectralWeight::SigmaSq);
  }
  return r;
}

/// Disk-valued spectral measure of f for any group walk: atoms (ν̂(k), |f̂(k)|²).
inline SpectralMeasure walk_spectral_measure(const GroupWalk& walk,
                                             std::span<const double> f) {
  const auto fourier = walk_fourier(walk, f);
  SpectralMeasure m;
  for (std::size_t k = 0; k < walk.order(); ++k)
    m.atoms.push_back({fourier.nu_hat[k], std::norm(fourier.f_hat[k])});
  return m;
}

/// √2 cos(2π Σ k_j x_j / m_j): unit L²(π) norm for a non-real character;
/// a real character (2k = 0) gives cos itself, already of unit norm.
inline Vector harmonic_observable(const GroupWalk& walk, std::size_t k) {
  auto ke = walk.element_of(k);
  bool real_char = true;
  for (std::size_t j = 0; j < ke.size(); ++j)
    if ((2 * ke[j]) % walk.moduli()[j] != 0) real_char = false;
  const double scale = real_char ? 1.0 : std::numbers::sqrt2;
  Vector f(walk.order());
  for (std::size_t x = 0; x < walk.order(); ++x)
    f[x] = scale * walk.character(k, x).real();
  return f;
}

}  // namespace qclt
