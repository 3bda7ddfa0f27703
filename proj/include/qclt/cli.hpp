#pragma once

#include <cmath>
#include <cstdint>
#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qclt/chain.hpp"
#include "qclt/chain_io.hpp"
#include "qclt/error.hpp"
#include "qclt/group_walk.hpp"
#include "qclt/martingale.hpp"
#include "qclt/simulate.hpp"
#include "qclt/spectral.hpp"
#include "qclt/torus.hpp"
#include "qclt/verify.hpp"

namespace qclt::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitSuiteFailure = 3;

/// 12 significant digits; "inf"/"nan" spelled out.
inline std::string num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

inline std::string join(const Vector& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ",";
    s += num(v[i]);
  }
  return s;
}

struct Options {
  std::string input;
  std::string observable;
  std::string start;
  std::vector<long> n_grid;
  long n = 1024;
  std::size_t paths = 1000;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  double tol = kDefaultClassifyTol;
  std::string dump;
  std::string moduli;
  std::string step;
  std::string harmonic;
  std::string alpha = "golden";
  double lazy = 0.0;
  std::string coeffs;
  long cutoff = 1000;
  bool quick = false;
};

namespace detail {

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  return out;
}

inline double parse_double(const std::string& s, const char* what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorKind::BadArgument, std::string("cannot parse ") + what + " '" + s + "'");
  }
}

inline long parse_long(const std::string& s, const char* what) {
  try {
    std::size_t used = 0;
    const long v = std::stol(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorKind::BadArgument, std::string("cannot parse ") + what + " '" + s + "'");
  }
}

// Group elements are written with '/' between components, e.g. "1/0".
inline std::vector<long> parse_element(const std::string& s) {
  std::vector<long> e;
  for (const auto& part : split(s, '/')) e.push_back(parse_long(part, "group element"));
  return e;
}

inline const Vector& pick_observable(const ChainDocument& doc, const std::string& name) {
  if (!name.empty()) return doc.observable(name);
  if (doc.observables.size() != 1) {
    throw Error(ErrorKind::BadArgument,
                "--observable is required when the document has " +
                    std::to_string(doc.observables.size()) + " observables");
  }
  return doc.observables.front().second;
}

inline std::string resolved_observable(const ChainDocument& doc, const std::string& name) {
  return name.empty() ? doc.observables.front().first : name;
}

inline void print_flags(std::ostream& out, const ChainFlags& f) {
  out << "reversible=" << (f.reversible ? "true" : "false") << '\n'
      << "normal=" << (f.normal ? "true" : "false") << '\n'
      << "irreducible=" << (f.irreducible ? "true" : "false") << '\n'
      << "aperiodic=" << (f.aperiodic ? "true" : "false") << '\n';
}

inline std::string integral_or_inf(const SpectralMeasure& m, SpectralWeight w) {
  try {
    return num(spectral_integral(m, w));
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::DivergentIntegral) return "inf";
    throw;
  }
}

inline int analyze(const Options& o, std::ostream& out) {
  const auto doc = load_chain_file(o.input, o.tol);
  const auto& raw = pick_observable(doc, o.observable);
  out << "command=analyze\ninput=" << o.input
      << "\nobservable=" << resolved_observable(doc, o.observable) << "\ntol=" << num(o.tol)
      << "\nsize=" << doc.chain.size() << '\n';
  print_flags(out, doc.chain.flags());
  out << "pi=" << join(doc.chain.stationary()) << '\n';
  const auto f = center_observable(doc.chain, raw);
  out << "observable_mean=" << num(Observable::from_values(doc.chain, raw).mean()) << '\n'
      << "observable_norm_sq=" << num(f.norm_sq()) << '\n';
  if (!doc.chain.flags().reversible) {
    out << "spectral=unavailable_not_reversible\n";
    return kExitOk;
  }
  const auto m = spectral_measure(doc.chain, f);
  out << "atoms=" << m.atoms.size() << '\n';
  for (std::size_t i = 0; i < m.atoms.size(); ++i)
    out << "atom[" << i << "]=" << num(m.atoms[i].location.real()) << ','
        << num(m.atoms[i].mass) << '\n';
  out << "total_mass=" << num(m.total()) << '\n'
      << "SR=" << integral_or_inf(m, SpectralWeight::SR) << '\n'
      << "SR2=" << integral_or_inf(m, SpectralWeight::SR2) << '\n'
      << "sigma_sq=" << integral_or_inf(m, SpectralWeight::SigmaSq) << '\n';
  return kExitOk;
}

inline int approx(const Options& o, std::ostream& out) {
  const auto doc = load_chain_file(o.input, o.tol);
  const auto f = Observable::from_values(doc.chain, pick_observable(doc, o.observable));
  std::vector<long> grid = o.n_grid;
  if (grid.empty())
    for (long n = 1; n <= 1024; n *= 2) grid.push_back(n);
  const auto scheme = poisson_solve(doc.chain, f);
  out << "command=approx\ninput=" << o.input
      << "\nobservable=" << resolved_observable(doc, o.observable) << "\ntol=" << num(o.tol)
      << "\ng=" << join(scheme.g) << "\nqg=" << join(scheme.qg)
      << "\nsigma_sq=" << num(scheme.sigma_sq) << "\nrate=" << num(scheme.rate) << '\n';
  out << "n,x,cond_mean,residual_msq,residual_over_n,asdl_sup\n";
  for (long n : grid)
    for (std::size_t x = 0; x < doc.chain.size(); ++x) {
      const auto d = quenched_diagnostics(doc.chain, scheme, x, n);
      out << n << ',' << doc.chain.labels()[x] << ',' << num(d.cond_mean) << ','
          << num(d.residual_msq) << ',' << num(d.residual_over_n) << ',' << num(d.asdl_sup)
          << '\n';
    }
  return kExitOk;
}

inline void print_report(std::ostream& out, const SimulationReport& r) {
  out << "n=" << r.n << "\nnum_paths=" << r.num_paths << "\nseed=" << r.seed
      << "\nsample_mean=" << num(r.sample_mean) << "\nsample_var=" << num(r.sample_var)
      << "\nks_distance=" << num(r.ks_distance) << "\nresidual_max=" << num(r.residual_max)
      << "\nsigma_sq_used=" << num(r.sigma_sq_used) << '\n';
}

inline void write_dump(const std::string& path, const std::vector<PathSample>& samples) {
  std::ofstream d(path);
  if (!d) throw Error(ErrorKind::BadArgument, "cannot write dump file " + path);
  d << "path_index,s_scaled,m_scaled\n";
  for (std::size_t i = 0; i < samples.size(); ++i)
    d << i << ',' << num(samples[i].s_scaled) << ',' << num(samples[i].m_scaled) << '\n';
}

inline int simulate(const Options& o, std::ostream& out) {
  const auto doc = load_chain_file(o.input, o.tol);
  const auto f = Observable::from_values(doc.chain, pick_observable(doc, o.observable));
  const auto scheme = poisson_solve(doc.chain, f);
  SimulationConfig cfg;
  cfg.start = o.start.empty() ? 0 : doc.chain.index_of(o.start);
  cfg.n = o.n;
  cfg.num_paths = o.paths;
  cfg.seed = o.seed;
  cfg.workers = o.threads;
  std::vector<PathSample> samples;
  const auto r = simulate_quenched(doc.chain, scheme, cfg, o.dump.empty() ? nullptr : &samples);
  out << "command=simulate\ninput=" << o.input
      << "\nobservable=" << resolved_observable(doc, o.observable)
      << "\nstart=" << doc.chain.labels()[cfg.start] << "\nthreads=" << o.threads
      << "\ndump=" << o.dump << '\n';
  print_report(out, r);
  if (!o.dump.empty()) write_dump(o.dump, samples);
  return kExitOk;
}

inline int group(const Options& o, std::ostream& out) {
  std::vector<long> moduli;
  for (const auto& m : split(o.moduli, ',')) moduli.push_back(parse_long(m, "modulus"));
  std::vector<GroupAtom> nu;
  for (const auto& atom : split(o.step, ',')) {
    const auto parts = split(atom, ':');
    if (parts.size() != 2) {
      throw Error(ErrorKind::BadArgument, "step atoms are written element:probability");
    }
    nu.push_back({parse_element(parts[0]), parse_double(parts[1], "probability")});
  }
  const auto walk = build_group_walk(moduli, nu);
  std::vector<std::pair<std::string, Vector>> obs;
  json meta = json::object();
  meta["moduli"] = o.moduli;
  meta["step"] = o.step;
  meta["symmetric"] = walk.symmetric();
  meta["ergodic"] = walk.ergodic();
  if (!o.harmonic.empty()) {
    const auto k = walk.index_of(parse_element(o.harmonic));
    obs.emplace_back("f", harmonic_observable(walk, k));
    meta["harmonic"] = o.harmonic;
  }
  out << to_json(walk.chain(), obs, meta).dump(2) << '\n';
  return kExitOk;
}

inline std::vector<TorusCoefficient> read_coeffs(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::BadArgument, "cannot open coefficient file " + path);
  std::vector<TorusCoefficient> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto parts = split(line, ',');
    if (parts.size() != 3) throw Error(ErrorKind::BadArgument, "expected n,re,im: " + line);
    if (parts[0] == "n") continue;
    out.push_back({parse_long(parts[0], "frequency"),
                   {parse_double(parts[1], "real part"), parse_double(parts[2], "imaginary part")}});
  }
  // A frequency listed without its mirror gets the conjugate coefficient.
  const std::size_t listed = out.size();
  for (std::size_t i = 0; i < listed; ++i) {
    const long n = out[i].n;
    const bool has_mirror = std::any_of(out.begin(), out.end(),
                                        [&](const TorusCoefficient& c) { return c.n == -n; });
    if (!has_mirror) out.push_back({-n, std::conj(out[i].c)});
  }
  return out;
}

inline int torus(const Options& o, std::ostream& out) {
  TorusWalk w;
  w.alpha = o.alpha == "golden" ? golden_alpha() : parse_double(o.alpha, "alpha");
  w.lazy = o.lazy;
  if (!o.coeffs.empty()) w.fhat = read_coeffs(o.coeffs);
  const auto rep = torus_condition(w, o.cutoff);
  out << "# command=torus\n# alpha=" << num(w.alpha) << "\n# lazy=" << num(w.lazy)
      << "\n# coeffs=" << o.coeffs << "\n# cutoff=" << o.cutoff
      << "\n# sigma_sq=" << num(torus_sigma_sq(w)) << '\n';
  for (const auto& c : rep.convergents) out << "# convergent=" << c.p << '/' << c.q << '\n';
  out << "n,dist,one_minus_nuhat,ratio,partial_sum\n";
  for (const auto& row : rep.rows)
    out << row.n << ',' << num(row.dist) << ',' << num(row.one_minus_nuhat) << ','
        << num(row.ratio) << ',' << num(row.partial_sum) << '\n';
  return kExitOk;
}

inline int verify(const Options& o, std::ostream& out) {
  const auto rep = run_verify_suite(o.quick, o.seed == 0 ? 20240611 : o.seed);
  out << "command=verify\nquick=" << (o.quick ? "true" : "false") << '\n'
      << "check,value,bound,status\n";
  for (const auto& r : rep.rows)
    out << r.name << ',' << num(r.value) << ',' << num(r.bound) << ','
        << (r.pass ? "PASS" : "FAIL") << '\n';
  return rep.all_pass() ? kExitOk : kExitSuiteFailure;
}

}  // namespace detail

inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Quenched CLT diagnostics for finite Markov chains"};
  app.require_subcommand(1);
  Options o;

  auto add_chain = [&](CLI::App* sub) {
    sub->add_option("input", o.input, "chain document (JSON)")->required();
    sub->add_option("--observable", o.observable, "observable name in the document");
    sub->add_option("--tol", o.tol, "classification tolerance");
  };
  auto* analyze = app.add_subcommand("analyze", "classification and spectral report");
  add_chain(analyze);
  auto* approx = app.add_subcommand("approx", "martingale diagnostics over a grid of n");
  add_chain(approx);
  approx->add_option("--n", o.n_grid, "grid of path lengths")->delimiter(',');
  auto* simulate = app.add_subcommand("simulate", "quenched Monte Carlo");
  add_chain(simulate);
  simulate->add_option("--start", o.start, "start state label");
  simulate->add_option("--n", o.n, "path length")->check(CLI::PositiveNumber);
  simulate->add_option("--paths", o.paths, "number of paths");
  simulate->add_option("--seed", o.seed, "random seed");
  simulate->add_option("--threads", o.threads, "worker threads")->check(CLI::PositiveNumber);
  simulate->add_option("--dump", o.dump, "write per-path samples to this file");
  auto* group = app.add_subcommand("group", "random walk on a finite abelian group");
  group->add_option("--moduli", o.moduli, "comma-separated moduli")->required();
  group->add_option("--step", o.step, "step law, e.g. 1:0.5,4:0.5")->required();
  group->add_option("--harmonic", o.harmonic, "character index for a harmonic observable");
  auto* torus = app.add_subcommand("torus", "rotation walk diagnostics on R/Z");
  torus->add_option("--alpha", o.alpha, "golden or a decimal in (0,1)");
  torus->add_option("--lazy", o.lazy, "holding probability");
  torus->add_option("--coeffs", o.coeffs, "file of n,re,im lines");
  torus->add_option("--cutoff", o.cutoff, "convergent denominator cap");
  auto* verify = app.add_subcommand("verify", "identity and inequality suite");
  verify->add_flag("--quick", o.quick, "smaller randomized checks");
  verify->add_option("--seed", o.seed, "random seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitValidation;
  }

  try {
    if (*analyze) return detail::analyze(o, out);
    if (*approx) return detail::approx(o, out);
    if (*simulate) return detail::simulate(o, out);
    if (*group) return detail::group(o, out);
    if (*torus) return detail::torus(o, out);
    return detail::verify(o, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  }
}

}  // namespace qclt::cli
