#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "qclt/fixtures.hpp"
#include "qclt/martingale.hpp"
#include "qclt/spectral.hpp"

using namespace qclt;

namespace {

SpectralMeasure atoms(std::initializer_list<std::pair<double, double>> list) {
  SpectralMeasure m;
  for (const auto& [t, w] : list) m.atoms.push_back({{t, 0.0}, w});
  return m;
}

Observable obs(const fixtures::NamedChain& c) { return Observable::from_values(c.chain, c.f); }

}  // namespace

TEST(SpectralMeasure, TwoStateSingleAtom) {
  const auto fx = fixtures::two_state();
  const auto m = spectral_measure(fx.chain, obs(fx));
  EXPECT_NEAR(m.mass_near({0.5, 0.0}, 1e-12), 1.0, 1e-12);
  EXPECT_NEAR(m.total(), 1.0, 1e-12);
}

TEST(SpectralMeasure, FlipAtMinusOne) {
  const auto fx = fixtures::flip();
  const auto m = spectral_measure(fx.chain, obs(fx));
  EXPECT_NEAR(m.mass_near({-1.0, 0.0}, 1e-12), 1.0, 1e-12);
}

TEST(SpectralMeasure, ZeroObservable) {
  const auto fx = fixtures::two_state();
  const auto m = spectral_measure(fx.chain, Observable::from_values(fx.chain, {0.0, 0.0}));
  EXPECT_EQ(m.total(), 0.0);
}

TEST(SpectralMeasure, RejectsNonReversible) {
  const auto rot = FiniteChain::create({"0", "1", "2"},
                                       Matrix::from_rows({{0, 1, 0}, {0, 0, 1}, {1, 0, 0}}));
  try {
    spectral_measure(rot, Observable::from_values(rot, {1.0, -1.0, 0.0}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NotReversible);
  }
}

TEST(SpectralIntegral, Examples) {
  EXPECT_NEAR(spectral_integral(atoms({{0.5, 1.0}}), SpectralWeight::SigmaSq), 3.0, 1e-15);
  EXPECT_EQ(spectral_integral(atoms({{0.5, 1.0}}), SpectralWeight::SR2), 0.0);
  EXPECT_EQ(spectral_integral(atoms({{-1.0, 1.0}}), SpectralWeight::SigmaSq), 0.0);
  try {
    spectral_integral(atoms({{1.0, 0.5}}), SpectralWeight::SR);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DivergentIntegral);
  }
  // Roundoff-sized mass at 1 is ignored.
  EXPECT_NEAR(spectral_integral(atoms({{1.0, 1e-12}, {0.0, 1.0}}), SpectralWeight::SR), 1.0, 1e-15);
}

TEST(SpectralIntegral, LogWeights) {
  // t = 1 - e^{-3}: |log(1-t)| = 3, log⁺ 3 = log 3.
  const double t = 1.0 - std::exp(-3.0);
  const double sr2 = spectral_integral(atoms({{t, 1.0}}), SpectralWeight::SR2);
  EXPECT_NEAR(sr2, std::log(3.0) * std::log(3.0) * std::exp(3.0), 1e-9);
  const Complex z{0.0, 1.0};
  EXPECT_NEAR(weight_value(SpectralWeight::SN, z), 1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(weight_value(SpectralWeight::SN1, z), std::log(std::sqrt(2.0)) / std::sqrt(2.0),
              1e-15);
}

TEST(SpectralIntegral, RealWeightNeedsRealSupport) {
  SpectralMeasure m;
  m.atoms.push_back({{0.0, 0.5}, 1.0});
  EXPECT_THROW(spectral_integral(m, SpectralWeight::SR), Error);
  EXPECT_NEAR(spectral_integral(m, SpectralWeight::SN), 1.0 / std::abs(Complex(1.0, -0.5)), 1e-15);
}

TEST(VarHSpectral, Examples) {
  EXPECT_NEAR(varH_spectral(atoms({{0.5, 1.0}}), 1, 2), 0.1875, 1e-15);
  EXPECT_EQ(varH_spectral(atoms({{-1.0, 1.0}}), 1, 3), 0.0);
  EXPECT_THROW(varH_spectral(atoms({{0.5, 1.0}}), 2, 2), Error);
}

TEST(VarianceGrowth, Examples) {
  const auto two = fixtures::two_state();
  EXPECT_NEAR(variance_growth(two.chain, obs(two), 2), 1.5, 1e-15);
  const auto iid = fixtures::iid();
  for (long n : {1L, 7L, 100L}) EXPECT_NEAR(variance_growth(iid.chain, obs(iid), n), 1.0, 1e-14);
  const long n = 10000;
  EXPECT_LE(std::abs(variance_growth(two.chain, obs(two), n) - 3.0), 4.0 / n);
}

class RandomReversible : public ::testing::TestWithParam<int> {};

TEST_P(RandomReversible, MassAndMoments) {
  std::mt19937_64 rng(1000 + GetParam());
  const auto fx = fixtures::random_reversible(rng, 3 + static_cast<std::size_t>(GetParam()) % 10);
  const auto f = obs(fx);
  const auto m = spectral_measure(fx.chain, f);
  EXPECT_NEAR(m.total(), f.norm_sq(), 1e-9 * f.norm_sq());
  EXPECT_LE(m.mass_near({1.0, 0.0}, 1e-9), 1e-9);
  for (const auto& a : m.atoms) {
    EXPECT_GE(a.mass, 0.0);
    EXPECT_LE(std::abs(a.location), 1.0 + 1e-12);
  }
  Vector qk = fx.f;
  for (int k = 0; k <= 20; ++k) {
    const double direct = inner_product(fx.chain, fx.f, qk);
    const double spec = spectral_integral(m, [k](Complex z) { return std::pow(z.real(), k); });
    EXPECT_NEAR(spec, direct, 1e-9 * std::max(1.0, std::abs(direct))) << "k=" << k;
    qk = matvec(fx.chain.kernel(), qk);
  }
  Vector scaled = fx.f;
  for (double& v : scaled) v *= 3.0;
  const auto m3 = spectral_measure(fx.chain, Observable::from_values(fx.chain, scaled));
  ASSERT_EQ(m3.atoms.size(), m.atoms.size());
  for (std::size_t i = 0; i < m.atoms.size(); ++i) {
    EXPECT_NEAR(m3.atoms[i].location.real(), m.atoms[i].location.real(), 1e-12);
    EXPECT_NEAR(m3.atoms[i].mass, 9.0 * m.atoms[i].mass, 1e-9 * (1.0 + 9.0 * m.atoms[i].mass));
  }
}

TEST_P(RandomReversible, VarHAgreesWithDirect) {
  std::mt19937_64 rng(2000 + GetParam());
  const auto fx = fixtures::random_reversible(rng, 3 + static_cast<std::size_t>(GetParam()) % 10);
  const auto f = obs(fx);
  const auto m = spectral_measure(fx.chain, f);
  for (int lo = 1; lo < 20; ++lo)
    for (int hi = lo + 1; hi <= 20; ++hi) {
      const double direct = varH_direct(fx.chain, f, lo, hi);
      EXPECT_NEAR(varH_spectral(m, lo, hi), direct, 1e-9 * (1.0 + std::abs(direct)));
    }
}

TEST_P(RandomReversible, VarianceGrowthConverges) {
  std::mt19937_64 rng(3000 + GetParam());
  const auto fx = fixtures::random_reversible(rng, 3 + static_cast<std::size_t>(GetParam()) % 10);
  const auto f = obs(fx);
  const auto m = spectral_measure(fx.chain, f);
  const double sigma_sq = spectral_integral(m, SpectralWeight::SigmaSq);
  double c = 0.0;
  for (const auto& a : m.atoms) {
    const double t = a.location.real();
    if (std::abs(t) < 1.0) c += a.mass * 2.0 * std::abs(t) / ((1.0 - t) * (1.0 - t));
  }
  for (long n = 64; n <= (1L << 14); n *= 4) {
    EXPECT_LE(std::abs(variance_growth(fx.chain, f, n) - sigma_sq), 2.0 * c / n + 1e-9);
  }
}

INSTANTIATE_TEST_SUITE_P(Chains, RandomReversible, ::testing::Range(0, 12));
