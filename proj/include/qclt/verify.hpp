#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "qclt/chain.hpp"
#include "qclt/error.hpp"
#include "qclt/fixtures.hpp"
#include "qclt/group_walk.hpp"
#include "qclt/inequalities.hpp"
#include "qclt/martingale.hpp"
#include "qclt/random.hpp"
#include "qclt/spectral.hpp"
#include "qclt/torus.hpp"

namespace qclt {

/// One line of the suite: passes when `value <= bound`.
struct CheckRow {
  std::string name;
  double value = 0.0;
  double bound = 0.0;
  bool pass = false;
};

struct SuiteReport {
  std::vector<CheckRow> rows;
  bool all_pass() const {
    return std::all_of(rows.begin(), rows.end(), [](const CheckRow& r) { return r.pass; });
  }
};

/// Family `index` of a reproducible collection used to exercise the
/// chaining inequality: ±1 walks, independent Gaussians, and drifting
/// walks with heteroscedastic steps. Level cycles through 1..5.
inline DyadicFamily random_wu_family(std::uint64_t seed, std::size_t index,
                                     std::size_t samples) {
  CounterStream stream(seed, index);
  const int level = 1 + static_cast<int>(index % 5);
  const std::size_t len = (std::size_t{1} << level) + 1;
  const int kind = static_cast<int>((index / 5) % 3);
  std::normal_distribution<double> gauss;
  const double drift = stream.uniform() - 0.5;
  std::vector<Vector> rows(samples, Vector(len, 0.0));
  for (auto& t : rows) {
    for (std::size_t k = 1; k < len; ++k) {
      switch (kind) {
        case 0:
          t[k] = t[k - 1] + (stream.uniform() < 0.5 ? -1.0 : 1.0);
          break;
        case 1:
          t[k] = gauss(stream);
          break;
        default:
          t[k] = t[k - 1] + drift + (1.0 + 0.1 * static_cast<double>(k)) * gauss(stream);
      }
    }
  }
  return DyadicFamily::from_samples(level, std::move(rows));
}

namespace detail {

inline void add_row(SuiteReport& rep, std::string name, double value, double bound) {
  rep.rows.push_back({std::move(name), value, bound, value <= bound});
}

inline Observable fixture_observable(const fixtures::NamedChain& c) {
  return Observable::from_values(c.chain, c.f);
}

}  // namespace detail

/// Identity and inequality checks over the built-in fixtures. `quick`
/// shrinks the randomized parts.
inline SuiteReport run_verify_suite(bool quick, std::uint64_t seed = 20240611) {
  SuiteReport rep;
  std::mt19937_64 rng(seed);

  {
    const int chains = quick ? 5 : 25;
    const int top = quick ? 16 : 64;
    double worst = 0.0;
    for (int c = 0; c < chains; ++c) {
      const auto fx = fixtures::random_reversible(rng, 3 + static_cast<std::size_t>(c) % 10);
      const auto f = detail::fixture_observable(fx);
      const auto mu = spectral_measure(fx.chain, f);
      for (int m = 1; m < top; ++m)
        for (int n = m + 1; n <= top; ++n) {
          const double direct = varH_direct(fx.chain, f, m, n);
          const double spec = varH_spectral(mu, m, n);
          worst = std::max(worst, std::abs(direct - spec) / (1.0 + std::abs(direct)));
        }
    }
    detail::add_row(rep, "varH_direct_vs_spectral", worst, 1e-9);
  }

  {
    double worst = 0.0;
    auto check = [&](const FiniteChain& chain, const Vector& fv) {
      const auto scheme = poisson_solve(chain, Observable::from_values(chain, fv));
      const auto& q = chain.kernel();
      for (std::size_t x = 0; x < chain.size(); ++x) {
        double s = 0.0;
        for (std::size_t y = 0; y < chain.size(); ++y) s += q(x, y) * scheme.H(x, y);
        worst = std::max(worst, std::abs(s));
      }
    };
    for (const auto& fx : fixtures::reversible_fixtures()) check(fx.chain, fx.f);
    for (int c = 0; c < 5; ++c) {
      const auto fx = fixtures::random_reversible(rng, 4 + static_cast<std::size_t>(c));
      check(fx.chain, fx.f);
    }
    detail::add_row(rep, "martingale_property", worst, 1e-12);
  }

  {
    const auto fx = fixtures::two_state();
    const auto scheme = poisson_solve(fx.chain, detail::fixture_observable(fx));
    const auto d = quenched_diagnostics(fx.chain, scheme, 0, 3);
    detail::add_row(rep, "quenched_residual_two_state", std::abs(d.residual_msq - 1.75), 1e-12);
  }

  {
    const auto exact = wu_check(DyadicFamily::from_distribution(1, {{0.0, 1.0, 0.0}}, {1.0}));
    detail::add_row(rep, "wu_exact_lhs", exact.lhs, exact.rhs);
    detail::add_row(rep, "wu_exact_rhs_sqrt2", std::abs(exact.rhs - std::numbers::sqrt2), 1e-12);
    const std::size_t families = quick ? 60 : 300;
    const std::size_t samples = quick ? 2000 : 10000;
    double violations = 0.0;
    for (std::size_t i = 0; i < families; ++i)
      if (!wu_check(random_wu_family(seed, i, samples)).verdict) violations += 1.0;
    detail::add_row(rep, "wu_random_violations", violations, 0.0);
  }

  {
    const auto fx = fixtures::two_state();
    const auto f = detail::fixture_observable(fx);
    const auto mu = spectral_measure(fx.chain, f);
    const long big_m = 8;
    const auto seq = lemme_sequence_from_chain(fx.chain, f, big_m);
    const auto rep_l = lemme_verify(AtomicWeightFamily::from_measure(mu), seq, big_m);
    detail::add_row(rep, "lemme_cond_equality_gap", rep_l.cond_max_rel_gap, 1e-9);
    detail::add_row(rep, "lemme_sup_bound", rep_l.sup_lhs, rep_l.sup_bound);
    detail::add_row(rep, "lemme_cond2_finite",
                    std::isfinite(rep_l.cond2_truncated + rep_l.cond2_tail) ? 0.0 : 1.0, 0.0);
    double shrunk_caught = 1.0;
    try {
      lemme_verify(AtomicWeightFamily::from_measure(mu, 0.5), seq, big_m);
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::CondViolated) shrunk_caught = 0.0;
    }
    detail::add_row(rep, "lemme_shrunken_mu_rejected", shrunk_caught, 0.0);
  }

  {
    const int depth = quick ? 6 : 10;
    for (const auto& fx : fixtures::reversible_fixtures()) {
      const auto r = dyadic_h_maxsum(fx.chain, detail::fixture_observable(fx), depth);
      double dips = 0.0;
      for (std::size_t i = 1; i < r.cumulative.size(); ++i)
        if (r.cumulative[i] < r.cumulative[i - 1]) dips += 1.0;
      detail::add_row(rep, "dyadic_h_" + fx.name, r.lhs_sum, r.rhs_bound + 1e-12);
      detail::add_row(rep, "dyadic_h_monotone_" + fx.name, dips, 0.0);
    }
  }

  {
    const std::vector<double> at = {0.99};
    const double a = l2_envelope_check(at, 40).worst_ratio;
    const double b = l2_envelope_check(at, 80).worst_ratio;
    detail::add_row(rep, "l2_envelope_doubling_change", std::abs(b - a) / a, 0.01);
    std::vector<double> grid;
    for (int i = -99; i <= 99; ++i) grid.push_back(i / 100.0);
    const auto g = l2_envelope_check(grid, 60);
    detail::add_row(rep, "l2_envelope_finite", std::isfinite(g.worst_ratio) ? 0.0 : 1.0, 0.0);
  }

  {
    const auto walk = build_group_walk({5}, {{{1}, 0.5}, {{4}, 0.5}});
    auto hat = nu_hat(walk);
    Vector from_fourier;
    for (const auto& z : hat) from_fourier.push_back(z.real());
    std::sort(from_fourier.begin(), from_fourier.end());
    const auto eig = symmetrized_spectrum(walk.chain());
    double worst = 0.0;
    for (std::size_t i = 0; i < from_fourier.size(); ++i)
      worst = std::max(worst, std::abs(from_fourier[i] - eig.values[i]));
    detail::add_row(rep, "group_eigenvalue_identity", worst, 1e-9);

    const auto f = harmonic_observable(walk, 1);
    const auto fourier = walk_fourier(walk, f);
    double parseval = 0.0;
    for (const auto& c : fourier.f_hat) parseval += std::norm(c);
    const double norm = inner_product(walk.chain(), f, f);
    detail::add_row(rep, "group_parseval", std::abs(parseval - norm), 1e-9);
    const auto g1 = check_g1(walk, f);
    detail::add_row(rep, "group_sr_vs_spectral", std::abs(g1.sr_sum - *g1.spectral_sr), 1e-9);
  }

  detail::add_row(rep, "torus_trig_identity",
                  torus_identity_max_error(golden_alpha(), quick ? 10'000 : 1'000'000), 1e-12);
  return rep;
}

}  // namespace qclt
