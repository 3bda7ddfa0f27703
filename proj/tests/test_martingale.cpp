#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "qclt/fixtures.hpp"
#include "qclt/martingale.hpp"
#include "qclt/spectral.hpp"

using namespace qclt;

namespace {

Observable obs(const fixtures::NamedChain& c) { return Observable::from_values(c.chain, c.f); }

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::BadArgument;
}

}  // namespace

TEST(PoissonSolve, TwoStateClosedForm) {
  const auto fx = fixtures::two_state();
  const auto s = poisson_solve(fx.chain, obs(fx));
  EXPECT_NEAR(s.g[0], 2.0, 1e-12);
  EXPECT_NEAR(s.g[1], -2.0, 1e-12);
  EXPECT_NEAR(s.qg[0], 1.0, 1e-12);
  EXPECT_NEAR(s.qg[1], -1.0, 1e-12);
  const Matrix h = Matrix::from_rows({{1, -3}, {3, -1}});
  EXPECT_LE(max_abs_diff(s.H, h), 1e-12);
  EXPECT_NEAR(s.sigma_sq, 3.0, 1e-12);
  EXPECT_NEAR(s.rate, 0.5, 1e-12);
}

TEST(PoissonSolve, IidIsItsOwnMartingale) {
  const auto fx = fixtures::iid();
  const auto s = poisson_solve(fx.chain, obs(fx));
  EXPECT_NEAR(s.g[0], 1.0, 1e-12);
  for (std::size_t x = 0; x < 2; ++x)
    for (std::size_t y = 0; y < 2; ++y) EXPECT_NEAR(s.H(x, y), fx.f[y], 1e-12);
  EXPECT_NEAR(s.sigma_sq, 1.0, 1e-12);
  EXPECT_NEAR(s.rate, 0.0, 1e-12);
}

TEST(PoissonSolve, Errors) {
  const auto fx = fixtures::two_state();
  EXPECT_EQ(kind_of([&] { poisson_solve(fx.chain, Observable::from_values(fx.chain, {1.0, 1.0})); }),
            ErrorKind::NotMeanZero);
  const auto reducible = FiniteChain::create({"0", "1"}, Matrix::identity(2), Vector{0.5, 0.5});
  EXPECT_EQ(kind_of([&] {
              poisson_solve(reducible, Observable::from_values(reducible, {1.0, -1.0}));
            }),
            ErrorKind::NotIrreducible);
}

TEST(PoissonSolve, PropertiesOnRandomChains) {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 25; ++trial) {
    const auto fx = fixtures::random_reversible(rng, 3 + static_cast<std::size_t>(trial) % 10);
    const auto f = obs(fx);
    const auto s = poisson_solve(fx.chain, f);
    const auto qg = matvec(fx.chain.kernel(), s.g);
    double fmax = max_abs(fx.f);
    for (std::size_t x = 0; x < fx.f.size(); ++x)
      EXPECT_LE(std::abs(s.g[x] - qg[x] - fx.f[x]), 1e-10 * fmax);
    EXPECT_LE(std::abs(inner_product(fx.chain, s.g, Vector(fx.f.size(), 1.0))), 1e-12);
    for (std::size_t x = 0; x < fx.f.size(); ++x) {
      double cm = 0.0;
      for (std::size_t y = 0; y < fx.f.size(); ++y) cm += fx.chain.kernel()(x, y) * s.H(x, y);
      EXPECT_LE(std::abs(cm), 1e-12);
    }
    EXPECT_GE(s.rate, 0.0);
    EXPECT_LT(s.rate, 1.0);
    const double spec = spectral_integral(spectral_measure(fx.chain, f), SpectralWeight::SigmaSq);
    EXPECT_NEAR(s.sigma_sq, spec, 1e-9 * spec);
  }
}

TEST(VnHn, Examples) {
  const auto two = fixtures::two_state();
  const auto r2 = vn_hn(two.chain, obs(two), 2);
  EXPECT_NEAR(r2.vn[0], 1.5, 1e-15);
  EXPECT_NEAR(r2.vn[1], -1.5, 1e-15);
  EXPECT_NEAR(r2.hn(0, 1), -2.25, 1e-15);
  const auto r1 = vn_hn(two.chain, obs(two), 1);
  const auto qf = matvec(two.chain.kernel(), two.f);
  for (std::size_t x = 0; x < 2; ++x)
    for (std::size_t y = 0; y < 2; ++y) EXPECT_NEAR(r1.hn(x, y), two.f[y] - qf[x], 1e-15);
  const auto iid = fixtures::iid();
  const auto ri = vn_hn(iid.chain, obs(iid), 9);
  EXPECT_EQ(ri.vn, iid.f);
  EXPECT_NEAR(ri.hn(0, 1), -1.0, 1e-15);
}

TEST(VnHn, ConvergesToH) {
  const auto fx = fixtures::lazy_path(6);
  const auto s = poisson_solve(fx.chain, obs(fx));
  Vector qng = s.g;
  for (long n = 1; n <= 40; ++n) {
    qng = matvec(fx.chain.kernel(), qng);
    const auto r = vn_hn(fx.chain, obs(fx), n);
    EXPECT_LE(max_abs_diff(r.hn, s.H), 2.0 * max_abs(qng) + 1e-12) << "n=" << n;
  }
}

TEST(VarHDirect, Examples) {
  const auto two = fixtures::two_state();
  EXPECT_NEAR(varH_direct(two.chain, obs(two), 1, 2), 0.1875, 1e-15);
  EXPECT_EQ(kind_of([&] { varH_direct(two.chain, obs(two), 3, 3); }), ErrorKind::BadIndexOrder);
  const auto iid = fixtures::iid();
  EXPECT_NEAR(varH_direct(iid.chain, obs(iid), 2, 17), 0.0, 1e-15);
}

TEST(TailSup, Examples) {
  const auto iid = fixtures::iid();
  EXPECT_EQ(tail_sup_deviation(iid.chain, poisson_solve(iid.chain, obs(iid)), 0), 0.0);
  const auto two = fixtures::two_state();
  const auto s = poisson_solve(two.chain, obs(two));
  for (long n = 5; n < 12; ++n) {
    const double ratio = tail_sup_deviation(two.chain, s, n + 1) / tail_sup_deviation(two.chain, s, n);
    EXPECT_NEAR(ratio, 0.25, 0.05) << "N=" << n;
  }
  const auto flip = fixtures::flip();
  MartingaleScheme fake;
  fake.rate = 1.0;
  EXPECT_EQ(kind_of([&] { tail_sup_deviation(flip.chain, fake, 3); }),
            ErrorKind::RateNotContractive);
}

TEST(TailSup, MatchesClosedFormOnTwoState) {
  // Q^m g = 2^{1-m} f, so G_m(x,y) = 2^{-m}(f(x) - 2 f(y)) and the sup over
  // m > N is attained at m = N+1.
  const auto two = fixtures::two_state();
  const auto s = poisson_solve(two.chain, obs(two));
  for (long n = 0; n < 8; ++n) {
    double expected = 0.0;
    for (std::size_t x = 0; x < 2; ++x)
      for (std::size_t y = 0; y < 2; ++y) {
        const double gm = std::ldexp(two.f[x] - 2.0 * two.f[y], -static_cast<int>(n + 1));
        expected += 0.5 * two.chain.kernel()(x, y) * gm * gm;
      }
    EXPECT_NEAR(tail_sup_deviation(two.chain, s, n), expected, 1e-14 * (1 + expected));
  }
}

TEST(QuenchedDiagnostics, Examples) {
  const auto two = fixtures::two_state();
  const auto s = poisson_solve(two.chain, obs(two));
  const auto d = quenched_diagnostics(two.chain, s, 0, 3);
  EXPECT_NEAR(d.cond_mean, 0.875, 1e-15);
  EXPECT_NEAR(d.residual_msq, 1.75, 1e-12);
  EXPECT_NEAR(d.residual_over_n, 1.75 / 3.0, 1e-12);
  const auto iid = fixtures::iid();
  const auto si = poisson_solve(iid.chain, obs(iid));
  EXPECT_NEAR(quenched_diagnostics(iid.chain, si, 1, 10).residual_msq, 0.0, 1e-15);
  const double qg_inf = max_abs(s.qg);
  for (long n : {10L, 100L, 1000L}) {
    EXPECT_LE(quenched_diagnostics(two.chain, s, 1, n).residual_over_n,
              4.0 * qg_inf * qg_inf / static_cast<double>(n));
  }
}

TEST(ProjectionSeries, Examples) {
  const auto two = fixtures::two_state();
  const auto r = projection_series(two.chain, obs(two), 10);
  EXPECT_NEAR(r.mix[1], 0.5 + 0.25 / std::sqrt(2.0), 1e-12);
  double pr = 0.0;
  for (int k = 1; k <= 10; ++k) {
    pr += std::sqrt(0.75) * std::ldexp(1.0, -k);
    EXPECT_NEAR(r.pr[static_cast<std::size_t>(k - 1)], pr, 1e-12);
  }
  const auto iid = fixtures::iid();
  const auto ri = projection_series(iid.chain, obs(iid), 5);
  for (std::size_t k = 0; k < 5; ++k) {
    EXPECT_EQ(ri.pr[k], 0.0);
    EXPECT_EQ(ri.mix[k], 0.0);
  }
}

TEST(ProjectionSeries, OrthogonalityBound) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 10; ++trial) {
    const auto fx = fixtures::random_reversible(rng, 4 + static_cast<std::size_t>(trial));
    const auto f = obs(fx);
    Vector qj = fx.f;
    double acc = 0.0;
    for (int j = 0; j < 50; ++j) {
      const auto next = matvec(fx.chain.kernel(), qj);
      acc += inner_product(fx.chain, qj, qj) - inner_product(fx.chain, next, next);
      EXPECT_LE(acc, f.norm_sq() * (1 + 1e-12));
      qj = next;
    }
  }
}
