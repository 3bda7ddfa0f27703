#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "qclt/chain.hpp"
#include "qclt/group_walk.hpp"
#include "qclt/spectral.hpp"

using namespace qclt;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

GroupWalk z5_neighbour() { return build_group_walk({5}, {{{1}, 0.5}, {{4}, 0.5}}); }

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::BadArgument;
}

// A random symmetric step law on Z_{m_1} x ... x Z_{m_r}.
GroupWalk random_symmetric_walk(std::mt19937_64& rng, const std::vector<long>& moduli) {
  std::size_t order = 1;
  for (long m : moduli) order *= static_cast<std::size_t>(m);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<GroupAtom> nu;
  double total = 0.0;
  std::vector<long> e(moduli.size(), 0);
  for (std::size_t i = 0; i < order; ++i) {
    std::size_t rest = i;
    for (std::size_t j = moduli.size(); j-- > 0;) {
      e[j] = static_cast<long>(rest % static_cast<std::size_t>(moduli[j]));
      rest /= static_cast<std::size_t>(moduli[j]);
    }
    const double w = unit(rng);
    auto neg = e;
    for (auto& c : neg) c = -c;
    nu.push_back({e, w});
    nu.push_back({neg, w});
    total += 2 * w;
  }
  for (auto& a : nu) a.prob /= total;
  return build_group_walk(moduli, nu);
}

}  // namespace

TEST(BuildGroupWalk, Examples) {
  const auto z5 = z5_neighbour();
  EXPECT_TRUE(z5.symmetric());
  EXPECT_TRUE(z5.ergodic());
  EXPECT_TRUE(z5.chain().flags().reversible);
  for (double p : z5.chain().stationary()) EXPECT_NEAR(p, 0.2, 1e-15);

  const auto z3 = build_group_walk({3}, {{{1}, 1.0}});
  EXPECT_FALSE(z3.symmetric());
  EXPECT_FALSE(z3.chain().flags().reversible);
  EXPECT_TRUE(z3.chain().flags().normal);

  const auto z4 = build_group_walk({4}, {{{2}, 1.0}});
  EXPECT_FALSE(z4.ergodic());
}

TEST(BuildGroupWalk, Errors) {
  EXPECT_EQ(kind_of([] { build_group_walk({5}, {{{1}, 0.7}, {{4}, 0.7}}); }),
            ErrorKind::BadProbabilities);
  EXPECT_EQ(kind_of([] { build_group_walk({5}, {{{1}, -0.5}, {{4}, 1.5}}); }),
            ErrorKind::BadProbabilities);
  EXPECT_EQ(kind_of([] { build_group_walk({5}, {}); }), ErrorKind::EmptySupport);
  EXPECT_EQ(kind_of([] { build_group_walk({5}, {{{1, 2}, 1.0}}); }), ErrorKind::DimensionMismatch);
}

TEST(BuildGroupWalk, ReducesAndMergesAtoms) {
  const auto w = build_group_walk({5}, {{{6}, 0.25}, {{1}, 0.25}, {{-1}, 0.5}});
  ASSERT_EQ(w.nu().size(), 2u);
  EXPECT_EQ(w.nu()[0].element, std::vector<long>{1});
  EXPECT_DOUBLE_EQ(w.nu()[0].prob, 0.5);
  EXPECT_EQ(w.nu()[1].element, std::vector<long>{4});
  EXPECT_TRUE(w.symmetric());
}

TEST(WalkFourier, Examples) {
  const auto z5 = z5_neighbour();
  const auto hat = nu_hat(z5);
  for (std::size_t k = 0; k < 5; ++k) {
    EXPECT_NEAR(hat[k].real(), std::cos(kTwoPi * static_cast<double>(k) / 5.0), 1e-15);
    EXPECT_NEAR(hat[k].imag(), 0.0, 1e-15);
  }
  EXPECT_NEAR(hat[1].real(), 0.309016994, 1e-9);

  const auto f = harmonic_observable(z5, 1);
  for (std::size_t x = 0; x < 5; ++x)
    EXPECT_NEAR(f[x], std::sqrt(2.0) * std::cos(kTwoPi * static_cast<double>(x) / 5.0), 1e-15);
  const auto wf = walk_fourier(z5, f);
  EXPECT_NEAR(std::norm(wf.f_hat[1]), 0.5, 1e-15);
  EXPECT_NEAR(std::norm(wf.f_hat[4]), 0.5, 1e-15);
  EXPECT_NEAR(std::abs(wf.f_hat[0]) + std::abs(wf.f_hat[2]) + std::abs(wf.f_hat[3]), 0.0, 1e-15);

  const auto delta = build_group_walk({4}, {{{0}, 1.0}});
  for (const auto& z : nu_hat(delta)) EXPECT_NEAR(std::abs(z - Complex(1.0, 0.0)), 0.0, 1e-15);
}

TEST(WalkFourier, ParsevalAndInversion) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> gauss;
  for (const auto& moduli : std::vector<std::vector<long>>{{7}, {2, 3}, {4, 4}, {3, 2, 2}}) {
    const auto w = random_symmetric_walk(rng, moduli);
    Vector f(w.order());
    for (double& v : f) v = gauss(rng);
    const auto wf = walk_fourier(w, f);
    double parseval = 0.0;
    for (const auto& c : wf.f_hat) parseval += std::norm(c);
    EXPECT_NEAR(parseval, inner_product(w.chain(), f, f), 1e-9);
    for (std::size_t x = 0; x < w.order(); ++x) {
      Complex back;
      for (std::size_t k = 0; k < w.order(); ++k) back += wf.f_hat[k] * w.character(k, x);
      EXPECT_NEAR(back.real(), f[x], 1e-12);
      EXPECT_NEAR(back.imag(), 0.0, 1e-12);
    }
  }
}

TEST(WalkFourier, CharactersDiagonaliseTheKernel) {
  // Qχ_k = ν̂(k) χ_k, checked against the materialised matrix.
  const auto w = build_group_walk({3, 4}, {{{1, 0}, 0.3}, {{0, 1}, 0.5}, {{2, 3}, 0.2}});
  const auto hat = nu_hat(w);
  const auto& q = w.chain().kernel();
  for (std::size_t k = 0; k < w.order(); ++k)
    for (std::size_t x = 0; x < w.order(); ++x) {
      Complex qchi;
      for (std::size_t y = 0; y < w.order(); ++y) qchi += q(x, y) * w.character(k, y);
      EXPECT_NEAR(std::abs(qchi - hat[k] * w.character(k, x)), 0.0, 1e-12);
    }
}

TEST(WalkFourier, EigenvalueIdentity) {
  std::mt19937_64 rng(8);
  for (long n : {3L, 5L, 8L, 11L}) {
    const auto w = random_symmetric_walk(rng, {n});
    Vector fourier;
    for (const auto& z : nu_hat(w)) fourier.push_back(z.real());
    std::sort(fourier.begin(), fourier.end());
    const auto eig = symmetrized_spectrum(w.chain());
    for (std::size_t i = 0; i < fourier.size(); ++i) EXPECT_NEAR(fourier[i], eig.values[i], 1e-9);
  }
}

TEST(WalkFourier, AdjointIsReflectedWalk) {
  const auto w = build_group_walk({5}, {{{1}, 0.6}, {{2}, 0.4}});
  const auto reflected = build_group_walk({5}, reflected_step(w));
  EXPECT_LE(max_abs_diff(adjoint_kernel(w.chain()), reflected.chain().kernel()), 1e-15);
  const auto a = nu_hat(w), b = nu_hat(reflected);
  for (std::size_t k = 0; k < a.size(); ++k) EXPECT_NEAR(std::abs(b[k] - std::conj(a[k])), 0.0, 1e-15);
}

TEST(CheckG1, Examples) {
  const auto z5 = z5_neighbour();
  const auto r = check_g1(z5, harmonic_observable(z5, 1));
  EXPECT_NEAR(r.sr_sum, 1.0 / (1.0 - std::cos(kTwoPi / 5.0)), 1e-12);
  EXPECT_NEAR(r.sr_sum, 1.447213596, 1e-9);
  EXPECT_EQ(r.g1_sum, 0.0);
  ASSERT_TRUE(r.spectral_sr.has_value());
  EXPECT_NEAR(*r.spectral_sr, r.sr_sum, 1e-9);
  EXPECT_NEAR(*r.spectral_sigma_sq, *r.sigma_sq, 1e-9);

  const auto z3 = build_group_walk({3}, {{{1}, 1.0}});
  const auto r3 = check_g1(z3, harmonic_observable(z3, 1));
  EXPECT_NEAR(r3.sn_sum, 1.0 / std::sqrt(3.0), 1e-12);
  EXPECT_FALSE(r3.sigma_sq.has_value());

  const auto zero = check_g1(z5, Vector(5, 0.0));
  EXPECT_EQ(zero.sr_sum + zero.g1_sum + zero.sn_sum + zero.sn1_sum, 0.0);

  const auto z4 = build_group_walk({4}, {{{2}, 1.0}});
  EXPECT_EQ(kind_of([&] { check_g1(z4, Vector(4, 0.0)); }), ErrorKind::NotErgodic);
}

TEST(CheckG1, ConsistentWithSpectralOnRandomWalks) {
  std::mt19937_64 rng(15);
  std::normal_distribution<double> gauss;
  for (const auto& moduli : std::vector<std::vector<long>>{{6}, {9}, {2, 5}, {3, 3}}) {
    const auto w = random_symmetric_walk(rng, moduli);
    Vector f(w.order());
    for (double& v : f) v = gauss(rng);
    const auto r = check_g1(w, f);
    EXPECT_NEAR(r.sr_sum, *r.spectral_sr, 1e-9 * (1 + r.sr_sum));
    EXPECT_NEAR(*r.sigma_sq, *r.spectral_sigma_sq, 1e-9 * (1 + *r.sigma_sq));
  }
}

TEST(CheckG1, LogWeightEngagesNearOne) {
  // Z_60 with ν = 0.96 δ₀ + 0.02(δ₁ + δ₋₁): 1 - ν̂(1) = 0.04(1 - cos(2π/60)) is
  // far below e^{-e}, so log⁺|log| is positive.
  const auto w = build_group_walk({60}, {{{0}, 0.96}, {{1}, 0.02}, {{59}, 0.02}});
  const auto r = check_g1(w, harmonic_observable(w, 1));
  const double d = 0.04 * (1.0 - std::cos(kTwoPi / 60.0));
  const double lp = std::log(std::abs(std::log(d)));
  EXPECT_NEAR(r.g1_sum, lp * lp / d, 1e-9 * lp * lp / d);
  EXPECT_NEAR(r.sn1_sum, std::abs(std::log(d)) / d, 1e-9 / d);
}
