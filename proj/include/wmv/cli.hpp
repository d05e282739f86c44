#pragma once

// Command-line front end. Every subcommand writes CSV: '#' comment lines
// first (the first one is the canonical command that regenerates the file),
// then a header row, then data rows. Numbers use 12 significant digits.
//
// Exit status: 0 success, 2 invalid input, 3 enumeration capacity exceeded.

#include <charconv>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <CLI11.hpp>

#include "wmv/bounds.hpp"
#include "wmv/core.hpp"
#include "wmv/exact.hpp"
#include "wmv/sim.hpp"

namespace wmv::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalid = 2;
inline constexpr int kExitCapacity = 3;

namespace parse {

inline std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = s.find(sep, start);
    out.emplace_back(s.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline double real(std::string_view tok, std::string_view what) {
  double v = 0.0;
  const auto* end = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(tok.data(), end, v);
  if (ec != std::errc{} || ptr != end || tok.empty())
    throw InvalidInput("cannot parse " + std::string(what) + " value '" + std::string(tok) + "'");
  return v;
}

inline long long integer(std::string_view tok, std::string_view what) {
  long long v = 0;
  const auto* end = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(tok.data(), end, v);
  if (ec != std::errc{} || ptr != end || tok.empty())
    throw InvalidInput("cannot parse " + std::string(what) + " value '" + std::string(tok) + "'");
  return v;
}

/// "0.8,0.7,0.6"
inline Committee committee(const std::string& s) {
  std::vector<double> p;
  for (const auto& tok : split(s, ',')) p.push_back(real(tok, "--p"));
  return Committee(std::move(p));
}

/// "9/10,7/10" as k/m pairs.
inline CommitteeProfile profile(const std::string& s) {
  std::vector<ExpertSample> out;
  for (const auto& tok : split(s, ',')) {
    const auto km = split(tok, '/');
    if (km.size() != 2) throw InvalidInput("profile entry '" + tok + "' is not of the form k/m");
    out.push_back({integer(km[1], "--profile"), integer(km[0], "--profile")});
  }
  return CommitteeProfile(std::move(out));
}

/// "1:1,2:3" as alpha:beta pairs.
inline BetaPriorSet priors(const std::string& s) {
  std::vector<BetaPrior> out;
  for (const auto& tok : split(s, ',')) {
    const auto ab = split(tok, ':');
    if (ab.size() != 2) throw InvalidInput("prior entry '" + tok + "' is not of the form a:b");
    out.push_back({real(ab[0], "--prior"), real(ab[1], "--prior")});
  }
  return BetaPriorSet(std::move(out));
}

/// "lo:hi[:step]", inclusive.
inline std::vector<long long> grid(const std::string& s) {
  const auto parts = split(s, ':');
  if (parts.size() < 2 || parts.size() > 3) throw InvalidInput("--m-grid must be lo:hi[:step], got '" + s + "'");
  const long long lo = integer(parts[0], "--m-grid"), hi = integer(parts[1], "--m-grid");
  const long long step = parts.size() == 3 ? integer(parts[2], "--m-grid") : 1;
  if (lo < 0 || hi < lo || step < 1) throw InvalidInput("--m-grid needs 0 <= lo <= hi and step >= 1, got '" + s + "'");
  std::vector<long long> g;
  for (long long m = lo; m <= hi; m += step) g.push_back(m);
  return g;
}

inline std::vector<Rule> rules(const std::string& s) {
  std::vector<Rule> out;
  for (const auto& tok : split(s, ',')) out.push_back(parse_rule(tok));
  return out;
}

}  // namespace parse

namespace fmt {

inline std::string num(double v) { return detail::num(v); }

/// Shortest representation that parses back to the same double.
inline std::string exact(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

inline std::string join(std::span<const double> v, char sep = ',') {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += sep;
    s += exact(v[i]);
  }
  return s;
}

inline std::string profile(const CommitteeProfile& k) {
  std::string s;
  for (std::size_t i = 0; i < k.size(); ++i) {
    if (i) s += ',';
    s += std::to_string(k[i].k) + "/" + std::to_string(k[i].m);
  }
  return s;
}

inline std::string priors(const BetaPriorSet& a) {
  std::string s;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (i) s += ',';
    s += exact(a[i].alpha) + ":" + exact(a[i].beta);
  }
  return s;
}

inline std::string rules(std::span<const Rule> r) {
  std::string s;
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (i) s += ',';
    s += rule_name(r[i]);
  }
  return s;
}

inline void sweep(std::ostream& out, const SweepResult& s) {
  out << "m,rule,error,stderr\n";
  for (const auto& r : s.rows)
    out << r.m << ',' << rule_name(r.rule) << ',' << num(r.error) << ',' << num(r.stderr_) << '\n';
}

}  // namespace fmt

/// Raw option strings shared by the subcommands.
struct RunSpec {
  std::string subcommand;
  std::string p, profile, prior, rule, m_grid = "1:100", estimator = "mc", fallback = "decline", out;
  std::uint64_t trials = 100000;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  unsigned restarts = 0;
  unsigned n = 5;
};

namespace detail_cli {

inline std::vector<long long> grid_of(const RunSpec& rs) { return parse::grid(rs.m_grid); }

inline Estimator estimator_of(const RunSpec& rs) {
  if (rs.estimator == "mc") return Estimator::MonteCarlo;
  if (rs.estimator == "rb") return Estimator::RaoBlackwell;
  throw InvalidInput("--estimator must be mc or rb, got '" + rs.estimator + "'");
}

inline std::string grid_text(const std::vector<long long>& g, const RunSpec& rs) {
  // Echo the normalized lo:hi:step triple.
  const auto parts = parse::split(rs.m_grid, ':');
  const long long step = parts.size() == 3 ? parse::integer(parts[2], "--m-grid") : 1;
  return std::to_string(g.front()) + ":" + std::to_string(g.back()) + ":" + std::to_string(step);
}

inline void run_exact(const RunSpec& rs, std::ostream& out) {
  const Committee c = parse::committee(rs.p);
  const Rule rule = parse_rule(rs.rule.empty() ? "opt" : rs.rule);
  std::optional<CommitteeProfile> k;
  if (!rs.profile.empty()) {
    k = parse::profile(rs.profile);
    detail::require(k->size() == c.size(), "--profile and --p differ in length");
  }
  std::string cmd = "# wmv exact --p " + fmt::join(c.competences()) + " --rule " + std::string(rule_name(rule));
  if (k) cmd += " --profile " + fmt::profile(*k);
  WeightVector w;
  switch (rule) {
    case Rule::Opt: w = np_weights(c); break;
    case Rule::Maj: w = majority_weights(c.size()); break;
    case Rule::Lc: w = k ? lc_weights(*k) : centered_weights(c); break;
    case Rule::Hc:
      detail::require(k.has_value(), "rule hc needs --profile");
      w = hc_weights(*k);
      break;
    case Rule::Bayes: {
      detail::require(k.has_value(), "rule bayes needs --profile");
      const BetaPriorSet a = rs.prior.empty() ? BetaPriorSet::uniform(c.size()) : parse::priors(rs.prior);
      cmd += " --prior " + fmt::priors(a);
      w = bayes_weights(*k, a);
      break;
    }
    case Rule::Adapt: {
      detail::require(k.has_value(), "rule adapt needs --profile");
      const GateReport g = adaptive_gate(*k);
      const bool lc = rs.fallback == "lc";
      detail::require(lc || rs.fallback == "decline", "--fallback must be decline or lc");
      cmd += std::string(" --fallback ") + (lc ? "lc" : "decline");
      if (g.holds)
        w = hc_weights(*k);
      else if (lc)
        w = lc_weights(*k);
      else
        w = WeightVector(std::vector<double>(c.size(), 0.0));  // declining is always an error
      break;
    }
  }
  const ErrorEstimate e = exact_error(c, w);
  out << cmd << '\n' << "rule,error\n" << rule_name(rule) << ',' << fmt::num(e.value) << '\n';
}

inline void run_bounds(const RunSpec& rs, std::ostream& out) {
  const Committee c = parse::committee(rs.p);
  const BoundReport b = bound_report(c);
  out << "# wmv bounds --p " << fmt::join(c.competences()) << '\n'
      << "phi,upper,lower,hoeffding,lc_bound\n"
      << fmt::num(b.phi) << ',' << fmt::num(b.upper) << ',' << fmt::num(b.lower) << ',' << fmt::num(*b.hoeffding)
      << ',' << fmt::num(*b.lc_bound) << '\n';
}

inline void run_gate(const RunSpec& rs, std::ostream& out) {
  detail::require(!rs.profile.empty(), "gate needs --profile");
  const CommitteeProfile k = parse::profile(rs.profile);
  const GateReport g = adaptive_gate(k);
  out << "# wmv gate --profile " << fmt::profile(k) << '\n'
      << "delta,gate_value,holds\n"
      << fmt::num(g.delta) << ',' << fmt::num(g.gate_value) << ',' << (g.holds ? "true" : "false") << '\n';
}

inline void run_simulate(const RunSpec& rs, std::ostream& out) {
  detail::require(!rs.p.empty(), "simulate needs --p");
  SimConfig cfg;
  cfg.committee = parse::committee(rs.p);
  const std::size_t n = cfg.committee->size();
  cfg.rules = parse::rules(rs.rule.empty() ? "opt,maj,lc,hc,bayes" : rs.rule);
  cfg.bayes_prior = rs.prior.empty() ? BetaPriorSet::uniform(n) : parse::priors(rs.prior);
  cfg.trials = rs.trials;
  cfg.seed = rs.seed;
  cfg.threads = rs.threads;
  detail::require(rs.fallback == "decline" || rs.fallback == "lc", "--fallback must be decline or lc");
  cfg.adaptive_fallback = rs.fallback == "lc" ? GateFallback::LowConfidence : GateFallback::Decline;
  const auto grid = grid_of(rs);
  const Estimator est = estimator_of(rs);
  const SweepResult s = sweep(cfg, grid, est);
  out << "# wmv simulate --p " << fmt::join(cfg.committee->competences()) << " --rule " << fmt::rules(cfg.rules)
      << " --prior " << fmt::priors(*cfg.bayes_prior) << " --m-grid " << grid_text(grid, rs) << " --trials "
      << cfg.trials << " --seed " << cfg.seed << " --estimator " << rs.estimator << " --fallback " << rs.fallback
      << '\n';
  fmt::sweep(out, s);
}

inline void run_figure1(const RunSpec& rs, std::ostream& out) {
  const auto grid = grid_of(rs);
  const Estimator est = estimator_of(rs);
  const unsigned restarts = rs.restarts == 0 ? 100 : rs.restarts;
  std::optional<Committee> c;
  if (!rs.p.empty()) c = parse::committee(rs.p);
  const Figure1Result f = figure1_sweep(grid, rs.trials, rs.seed, c, restarts, rs.threads, est);
  out << "# wmv figure1";
  if (c) out << " --p " << fmt::join(c->competences());
  out << " --restarts " << restarts << " --m-grid " << grid_text(grid, rs) << " --trials " << rs.trials
      << " --seed " << rs.seed << " --estimator " << rs.estimator << '\n';
  out << "# committee " << fmt::join(f.committee.competences(), ' ') << '\n';
  out << "# lc_gap " << fmt::num(f.gap) << '\n';
  if (auto x = first_crossover(f.sweep, grid, Rule::Hc, Rule::Lc)) out << "# hc_below_lc_from " << *x << '\n';
  fmt::sweep(out, f.sweep);
}

inline void run_figure2(const RunSpec& rs, std::ostream& out) {
  const auto grid = grid_of(rs);
  const Estimator est = estimator_of(rs);
  const SweepResult s = figure2_sweep(grid, rs.trials, rs.seed, rs.threads, est);
  out << "# wmv figure2 --m-grid " << grid_text(grid, rs) << " --trials " << rs.trials << " --seed " << rs.seed
      << " --estimator " << rs.estimator << '\n';
  if (auto x = first_crossover(s, grid, Rule::Hc, Rule::Lc)) out << "# hc_below_lc_from " << *x << '\n';
  fmt::sweep(out, s);
}

inline void run_gap(const RunSpec& rs, std::ostream& out) {
  const unsigned restarts = rs.restarts == 0 ? 1000 : rs.restarts;
  GapSearchOptions opt;
  opt.threads = rs.threads;
  const GapResult g = gap_search(rs.n, restarts, rs.seed, opt);
  out << "# wmv gap --n " << rs.n << " --restarts " << restarts << " --seed " << rs.seed << '\n';
  out << "n,gap";
  for (std::size_t i = 0; i < g.p.size(); ++i) out << ",p" << i + 1;
  out << '\n' << rs.n << ',' << fmt::num(g.gap);
  for (double v : g.p) out << ',' << fmt::num(v);
  out << '\n';
}

}  // namespace detail_cli

/// Parses argv (argv[0] is the program name) and runs one subcommand. Output
/// goes to `out` unless --out names a file; diagnostics go to `err`.
inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Weighted-majority committee error calculator"};
  app.require_subcommand(1);
  RunSpec rs;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--out", rs.out, "Write CSV here instead of standard output");
  };
  auto add_sim = [&](CLI::App* sub) {
    sub->add_option("--m-grid", rs.m_grid, "Sample sizes lo:hi[:step], inclusive");
    sub->add_option("--trials", rs.trials, "Monte-Carlo trials per grid point")->check(CLI::PositiveNumber);
    sub->add_option("--seed", rs.seed, "Seed of the counter-based generator");
    sub->add_option("--threads", rs.threads, "Worker threads (0 = all cores); output does not depend on it");
    sub->add_option("--estimator", rs.estimator, "mc (plain) or rb (Rao-Blackwellized)");
  };

  auto* exact = app.add_subcommand("exact", "Exact error of a rule by enumeration");
  exact->add_option("--p", rs.p, "Competences, comma separated")->required();
  exact->add_option("--rule", rs.rule, "opt, maj, lc, hc, bayes or adapt");
  exact->add_option("--profile", rs.profile, "Observed k/m per expert");
  exact->add_option("--prior", rs.prior, "Beta priors a:b per expert (bayes)");
  exact->add_option("--fallback", rs.fallback, "adapt rule on gate failure: decline or lc");
  add_common(exact);

  auto* bounds = app.add_subcommand("bounds", "Committee potential and error bounds");
  bounds->add_option("--p", rs.p, "Competences, comma separated")->required();
  add_common(bounds);

  auto* gate = app.add_subcommand("gate", "Adaptive gate report for a profile");
  gate->add_option("--profile", rs.profile, "Observed k/m per expert")->required();
  add_common(gate);

  auto* simulate = app.add_subcommand("simulate", "Monte-Carlo error of rules over a sample-size grid");
  simulate->add_option("--p", rs.p, "Competences, comma separated")->required();
  simulate->add_option("--rule", rs.rule, "Comma-separated rules (default opt,maj,lc,hc,bayes)");
  simulate->add_option("--prior", rs.prior, "Beta priors a:b per expert (bayes)");
  simulate->add_option("--fallback", rs.fallback, "adapt rule on gate failure: decline or lc");
  add_sim(simulate);
  add_common(simulate);

  auto* fig1 = app.add_subcommand("figure1", "LC vs HC on a gap-maximizing committee");
  fig1->add_option("--p", rs.p, "Use this committee instead of searching for one");
  fig1->add_option("--restarts", rs.restarts, "Gap-search restarts (default 100)");
  add_sim(fig1);
  add_common(fig1);

  auto* fig2 = app.add_subcommand("figure2", "Rules under uniformly random competences");
  add_sim(fig2);
  add_common(fig2);

  auto* gap = app.add_subcommand("gap", "Search for the largest LC-vs-optimal gap");
  gap->add_option("--n", rs.n, "Committee size")->check(CLI::Range(1u, static_cast<unsigned>(kEnumerationCap)));
  gap->add_option("--restarts", rs.restarts, "Random restarts (default 1000)");
  gap->add_option("--seed", rs.seed, "Seed of the counter-based generator");
  gap->add_option("--threads", rs.threads, "Worker threads (0 = all cores)");
  add_common(gap);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInvalid;
  }

  std::ostringstream buf;
  try {
    if (*exact) detail_cli::run_exact(rs, buf);
    else if (*bounds) detail_cli::run_bounds(rs, buf);
    else if (*gate) detail_cli::run_gate(rs, buf);
    else if (*simulate) detail_cli::run_simulate(rs, buf);
    else if (*fig1) detail_cli::run_figure1(rs, buf);
    else if (*fig2) detail_cli::run_figure2(rs, buf);
    else if (*gap) detail_cli::run_gap(rs, buf);
  } catch (const CapacityError& e) {
    err << "error: " << e.what() << '\n';
    return kExitCapacity;
  } catch (const InvalidInput& e) {
    err << "error: " << e.what() << '\n';
    return kExitInvalid;
  }

  if (rs.out.empty()) {
    out << buf.str();
  } else {
    std::ofstream f(rs.out, std::ios::binary);
    if (!f) {
      err << "error: cannot open " << rs.out << " for writing\n";
      return kExitInvalid;
    }
    f << buf.str();
  }
  return kExitOk;
}

}  // namespace wmv::cli
