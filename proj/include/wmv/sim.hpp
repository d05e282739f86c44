#pragma once

// Monte-Carlo estimation of rule errors, the two sample-size sweeps, and the
// search for committees that maximize the LC-vs-optimal gap.
//
// Every trial t of a run with seed s draws from CounterRng(s, t) and consumes
// it in a fixed order: competences (when drawn from a prior), then the
// profile k_1..k_n, then the label Y, then the votes X_1..X_n. Per-trial
// results are folded in trial order, so the thread count never changes output.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "wmv/bounds.hpp"
#include "wmv/core.hpp"
#include "wmv/exact.hpp"
#include "wmv/rng.hpp"

namespace wmv {

enum class Rule { Opt, Maj, Lc, Hc, Adapt, Bayes };

inline constexpr std::array kAllRules = {Rule::Opt, Rule::Maj, Rule::Lc,
                                         Rule::Hc,  Rule::Adapt, Rule::Bayes};

inline std::string_view rule_name(Rule r) {
  switch (r) {
    case Rule::Opt: return "opt";
    case Rule::Maj: return "maj";
    case Rule::Lc: return "lc";
    case Rule::Hc: return "hc";
    case Rule::Adapt: return "adapt";
    case Rule::Bayes: return "bayes";
  }
  return "?";
}

inline Rule parse_rule(std::string_view s) {
  for (Rule r : kAllRules)
    if (rule_name(r) == s) return r;
  throw InvalidInput("unknown rule '" + std::string(s) + "' (expected opt, maj, lc, hc, adapt or bayes)");
}

inline bool needs_profile(Rule r) { return r == Rule::Lc || r == Rule::Hc || r == Rule::Adapt; }

// ---------------------------------------------------------------------------
// Samplers

struct Outcome {
  int y = 1;
  std::vector<int> votes;
};

/// Y uniform on {+1,-1}; X_i = Y with probability p_i, independently.
/// Takes raw competences so that degenerate p_i in [0,1] can be exercised.
inline Outcome sample_outcome(std::span<const double> p, CounterRng& rng) {
  Outcome o;
  o.y = rng.bernoulli(0.5) ? 1 : -1;
  o.votes.resize(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) o.votes[i] = rng.bernoulli(p[i]) ? o.y : -o.y;
  return o;
}

inline Outcome sample_outcome(const Committee& c, CounterRng& rng) {
  return sample_outcome(c.competences(), rng);
}

/// k_i ~ Binomial(m_i, p_i), independently.
inline CommitteeProfile sample_profile(std::span<const double> p, std::span<const long long> m,
                                       CounterRng& rng) {
  detail::require(p.size() == m.size(), "competences and sample counts differ in length");
  std::vector<ExpertSample> s(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    detail::require(m[i] >= 0, "sample counts must be nonnegative");
    s[i] = {m[i], sample_binomial(m[i], p[i], rng)};
  }
  return CommitteeProfile(std::move(s));
}

inline CommitteeProfile sample_profile(const Committee& c, std::span<const long long> m, CounterRng& rng) {
  return sample_profile(c.competences(), m, rng);
}

inline Committee sample_committee(const BetaPriorSet& prior, CounterRng& rng) {
  std::vector<double> p(prior.size());
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = sample_beta(prior[i].alpha, prior[i].beta, rng);
  return Committee(std::move(p));
}

// ---------------------------------------------------------------------------
// Configuration

enum class Estimator { MonteCarlo, RaoBlackwell };

struct SimConfig {
  std::optional<Committee> committee;           // fixed ground truth, or
  std::optional<BetaPriorSet> competence_prior;  // competences drawn afresh each trial
  std::vector<long long> m;                     // per-expert query counts
  std::uint64_t trials = 100000;
  std::uint64_t seed = 0;
  std::vector<Rule> rules;
  std::optional<BetaPriorSet> bayes_prior;  // required by Rule::Bayes
  GateFallback adaptive_fallback = GateFallback::Decline;
  unsigned threads = 1;  // 0 = hardware concurrency

  std::size_t experts() const { return committee ? committee->size() : competence_prior->size(); }

  void validate() const {
    detail::require(committee.has_value() != competence_prior.has_value(),
                    "exactly one of a committee or a competence prior is required");
    const std::size_t n = experts();
    detail::require(n >= 1, "need at least one expert");
    detail::require(m.size() == n, "need one query count per expert");
    detail::require(trials >= 1, "trials must be at least 1");
    detail::require(!rules.empty(), "rule set is empty");
    for (long long mi : m) detail::require(mi >= 0, "query counts must be nonnegative");
    for (Rule r : rules) {
      if (r == Rule::Bayes) {
        detail::require(bayes_prior.has_value(), "the bayes rule needs a Beta prior set");
        detail::require(bayes_prior->size() == n, "bayes prior has the wrong length");
      }
      if (needs_profile(r))
        for (long long mi : m)
          detail::require(mi >= 1, "rule " + std::string(rule_name(r)) + " needs m_i >= 1");
    }
  }
};

namespace detail {

/// Draws everything that precedes the votes: competences, then the profile.
struct TrialSetup {
  Committee committee;
  CommitteeProfile profile;
};

inline TrialSetup draw_setup(const SimConfig& cfg, CounterRng& rng) {
  Committee c = cfg.committee ? *cfg.committee : sample_committee(*cfg.competence_prior, rng);
  CommitteeProfile k = sample_profile(c, cfg.m, rng);
  return {std::move(c), std::move(k)};
}

/// Weights of a non-adaptive rule.
inline WeightVector rule_weights(Rule r, const SimConfig& cfg, const TrialSetup& s) {
  switch (r) {
    case Rule::Opt: return np_weights(s.committee);
    case Rule::Maj: return majority_weights(s.committee.size());
    case Rule::Lc: return lc_weights(s.profile);
    case Rule::Hc: return hc_weights(s.profile);
    case Rule::Bayes: return bayes_weights(s.profile, *cfg.bayes_prior);
    case Rule::Adapt: break;
  }
  throw InvalidInput("adaptive rule has no fixed weights");
}

/// Weights the adaptive rule ends up using for this profile; empty when it declines.
inline std::optional<WeightVector> adaptive_weights(const SimConfig& cfg, const CommitteeProfile& k) {
  if (adaptive_gate(k).holds) return hc_weights(k);
  if (cfg.adaptive_fallback == GateFallback::LowConfidence) return lc_weights(k);
  return std::nullopt;
}

/// Runs body(trial, out) for every trial, where out is that trial's row of
/// `width` doubles, then returns the table in trial order.
template <class Body>
std::vector<double> run_trials(std::uint64_t trials, std::size_t width, unsigned threads, const Body& body) {
  std::vector<double> table(trials * width, 0.0);
  unsigned workers = threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : threads;
  workers = static_cast<unsigned>(std::min<std::uint64_t>(workers, trials));
  auto chunk = [&](std::uint64_t lo, std::uint64_t hi) {
    for (std::uint64_t t = lo; t < hi; ++t) body(t, std::span<double>(table.data() + t * width, width));
  };
  if (workers <= 1) {
    chunk(0, trials);
    return table;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    const std::uint64_t lo = trials * w / workers, hi = trials * (w + 1) / workers;
    pool.emplace_back(chunk, lo, hi);
  }
  for (auto& th : pool) th.join();
  return table;
}

inline std::vector<ErrorEstimate> summarize(const std::vector<double>& table, std::size_t width,
                                            const SimConfig& cfg, bool bernoulli) {
  std::vector<ErrorEstimate> out;
  const double T = static_cast<double>(cfg.trials);
  for (std::size_t r = 0; r < width; ++r) {
    double sum = 0.0;
    for (std::uint64_t t = 0; t < cfg.trials; ++t) sum += table[t * width + r];
    const double mean = sum / T;
    double var;
    if (bernoulli) {
      var = mean * (1.0 - mean);
    } else {
      double ss = 0.0;
      for (std::uint64_t t = 0; t < cfg.trials; ++t) {
        const double d = table[t * width + r] - mean;
        ss += d * d;
      }
      var = cfg.trials > 1 ? ss / (T - 1.0) : 0.0;
    }
    out.push_back(ErrorEstimate::monte_carlo(mean, std::sqrt(std::max(0.0, var) / T), cfg.seed, cfg.trials));
  }
  return out;
}

}  // namespace detail

/// Plain Monte Carlo: per trial draw a profile and an outcome, score every rule
/// on the same draw. Abstentions and declined adaptive decisions count as errors.
/// Returns one estimate per rule, in cfg.rules order.
inline std::vector<ErrorEstimate> mc_error(const SimConfig& cfg) {
  cfg.validate();
  const std::size_t width = cfg.rules.size();
  const auto table = detail::run_trials(cfg.trials, width, cfg.threads, [&](std::uint64_t t, std::span<double> row) {
    CounterRng rng(cfg.seed, t);
    const auto setup = detail::draw_setup(cfg, rng);
    const Outcome o = sample_outcome(setup.committee, rng);
    for (std::size_t r = 0; r < width; ++r) {
      Decision d = Decision::Abstain;
      if (cfg.rules[r] == Rule::Adapt) {
        if (auto w = detail::adaptive_weights(cfg, setup.profile)) d = decide(*w, o.votes);
      } else {
        d = decide(detail::rule_weights(cfg.rules[r], cfg, setup), o.votes);
      }
      row[r] = is_error(d, o.y) ? 1.0 : 0.0;
    }
  });
  return detail::summarize(table, width, cfg, true);
}

/// Rao-Blackwellized estimate: per trial draw only the profile and replace the
/// outcome draw by the exact conditional error of the induced weights.
inline std::vector<ErrorEstimate> rb_error(const SimConfig& cfg) {
  cfg.validate();
  detail::check_cap(cfg.experts());
  const std::size_t width = cfg.rules.size();
  const auto table = detail::run_trials(cfg.trials, width, cfg.threads, [&](std::uint64_t t, std::span<double> row) {
    CounterRng rng(cfg.seed, t);
    const auto setup = detail::draw_setup(cfg, rng);
    for (std::size_t r = 0; r < width; ++r) {
      if (cfg.rules[r] == Rule::Adapt) {
        const auto w = detail::adaptive_weights(cfg, setup.profile);
        row[r] = w ? exact_error(setup.committee, *w).value : 1.0;
      } else {
        row[r] = exact_error(setup.committee, detail::rule_weights(cfg.rules[r], cfg, setup)).value;
      }
    }
  });
  return detail::summarize(table, width, cfg, false);
}

inline std::vector<ErrorEstimate> estimate_error(const SimConfig& cfg, Estimator e) {
  return e == Estimator::MonteCarlo ? mc_error(cfg) : rb_error(cfg);
}

/// Estimate of P(R and the plug-in rule errs), the event the adaptive guarantee
/// bounds by delta. Also reports the mean delta over trials (constant when m is fixed).
struct FooledEstimate {
  ErrorEstimate fooled;
  double delta = 0.0;
  double gate_rate = 0.0;  // fraction of trials where R held
};

inline FooledEstimate adaptive_fooled_rate(const SimConfig& cfg) {
  cfg.validate();
  for (long long mi : cfg.m) detail::require(mi >= 1, "adaptive gate needs m_i >= 1");
  const auto table = detail::run_trials(cfg.trials, 2, cfg.threads, [&](std::uint64_t t, std::span<double> row) {
    CounterRng rng(cfg.seed, t);
    const auto setup = detail::draw_setup(cfg, rng);
    const Outcome o = sample_outcome(setup.committee, rng);
    const GateReport g = adaptive_gate(setup.profile);
    row[1] = g.holds ? 1.0 : 0.0;
    row[0] = g.holds && is_error(decide(hc_weights(setup.profile), o.votes), o.y) ? 1.0 : 0.0;
  });
  const auto est = detail::summarize(table, 2, cfg, true);
  double delta = 0.0;
  for (long long mi : cfg.m) delta += 1.0 / std::sqrt(static_cast<double>(mi));
  return {est[0], delta, est[1].value};
}

// ---------------------------------------------------------------------------
// Sweeps

struct SweepRow {
  long long m = 0;
  Rule rule = Rule::Opt;
  double error = 0.0;
  double stderr_ = 0.0;
};

struct SweepResult {
  std::vector<SweepRow> rows;

  /// Error of `rule` at sample size m; throws if absent.
  const SweepRow& at(long long m, Rule rule) const {
    for (const auto& r : rows)
      if (r.m == m && r.rule == rule) return r;
    throw InvalidInput("no sweep row for m = " + std::to_string(m) + ", rule " + std::string(rule_name(rule)));
  }
};

/// Runs `base` at m_i = m for every m in the grid. Each grid point reuses the
/// same seed, so neighbouring points share their competence draws.
inline SweepResult sweep(SimConfig base, std::span<const long long> grid, Estimator est) {
  SweepResult out;
  for (long long m : grid) {
    base.m.assign(base.experts(), m);
    const auto e = estimate_error(base, est);
    for (std::size_t r = 0; r < base.rules.size(); ++r)
      out.rows.push_back({m, base.rules[r], e[r].value, *e[r].stderr_});
  }
  return out;
}

/// First grid value at which rule `a` is strictly below rule `b`, scanning the
/// grid in order.
inline std::optional<long long> first_crossover(const SweepResult& s, std::span<const long long> grid, Rule a,
                                                Rule b) {
  for (long long m : grid)
    if (s.at(m, a).error < s.at(m, b).error) return m;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Gap search

/// Absolute gap between the LC rule at the true competences, sign(sum (p_i - 1/2) x_i),
/// and the optimal rule.
inline double lc_gap(const Committee& c) {
  return exact_error(c, centered_weights(c)).value - exact_error_optimal(c).value;
}

namespace detail {

/// lc_gap, or -inf where either rule has a tying atom. Ties are errors, so
/// the gap jumps up on the tie set; excluding it keeps the search on the
/// continuous part of the objective.
inline double tie_free_gap(const std::vector<double>& p) {
  const Committee c(p);
  if (has_tying_atom(c, centered_weights(c)) || has_tying_atom(c, np_weights(c)))
    return -std::numeric_limits<double>::infinity();
  return lc_gap(c);
}

}  // namespace detail

struct GapResult {
  std::vector<double> p;
  double gap = 0.0;
};

struct GapSearchOptions {
  double lo = 0.05;
  double hi = 0.95;
  double initial_step = 0.2;
  double min_step = 1e-5;
  unsigned threads = 1;
};

/// Multi-restart coordinate search maximizing lc_gap over [lo, hi]^n. Restart r
/// starts from a uniform point drawn from CounterRng(seed, r); each pass tries
/// p_i +- step on every coordinate and halves the step when nothing improves.
/// Points where either rule has a tying atom are never accepted. Ties between
/// restarts go to the lower restart index.
inline GapResult gap_search(std::size_t n, unsigned restarts, std::uint64_t seed,
                            const GapSearchOptions& opt = {}) {
  detail::require(n >= 1, "gap search needs n >= 1");
  detail::require(restarts >= 1, "gap search needs at least one restart");
  detail::check_cap(n);
  const std::size_t width = n + 1;
  const auto table = detail::run_trials(restarts, width, opt.threads, [&](std::uint64_t r, std::span<double> row) {
    CounterRng rng(seed, r);
    std::vector<double> p(n);
    for (double& v : p) v = opt.lo + (opt.hi - opt.lo) * rng.uniform();
    double best = detail::tie_free_gap(p);
    for (double step = opt.initial_step; step >= opt.min_step;) {
      bool improved = false;
      for (std::size_t i = 0; i < n; ++i) {
        for (double dir : {1.0, -1.0}) {
          const double old = p[i];
          p[i] = std::clamp(old + dir * step, opt.lo, opt.hi);
          if (p[i] == old) continue;
          const double g = detail::tie_free_gap(p);
          if (g > best) {
            best = g;
            improved = true;
            break;
          }
          p[i] = old;
        }
      }
      if (!improved) step *= 0.5;
    }
    std::copy(p.begin(), p.end(), row.begin());
    row[n] = best;
  });
  GapResult out;
  out.gap = -1.0;
  for (unsigned r = 0; r < restarts; ++r) {
    const double g = table[r * width + n];
    if (g > out.gap) {
      out.gap = g;
      out.p.assign(table.begin() + r * width, table.begin() + r * width + n);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// The two published experiments

inline std::vector<long long> default_grid() {
  std::vector<long long> g(100);
  for (long long i = 0; i < 100; ++i) g[i] = i + 1;
  return g;
}

struct Figure1Result {
  Committee committee;
  double gap = 0.0;  // lc_gap of the committee
  SweepResult sweep;
};

/// OPT, MAJ, LC, HC and BAYES(1,1) on a fixed five-expert committee. When no
/// committee is supplied it is regenerated by gap_search(5, restarts, seed).
inline Figure1Result figure1_sweep(std::span<const long long> grid, std::uint64_t trials, std::uint64_t seed,
                                   std::optional<Committee> committee = std::nullopt, unsigned restarts = 100,
                                   unsigned threads = 1, Estimator est = Estimator::MonteCarlo) {
  if (!committee) {
    GapSearchOptions opt;
    opt.threads = threads;
    committee = Committee(gap_search(5, restarts, seed, opt).p);
  }
  SimConfig cfg;
  cfg.committee = committee;
  cfg.trials = trials;
  cfg.seed = seed;
  cfg.threads = threads;
  cfg.rules = {Rule::Opt, Rule::Maj, Rule::Lc, Rule::Hc, Rule::Bayes};
  cfg.bayes_prior = BetaPriorSet::uniform(committee->size());
  return {*committee, lc_gap(*committee), sweep(cfg, grid, est)};
}

/// MAJ, LC, HC and BAYES(1,1) with five competences drawn from Beta(1,1) per trial.
inline SweepResult figure2_sweep(std::span<const long long> grid, std::uint64_t trials, std::uint64_t seed,
                                 unsigned threads = 1, Estimator est = Estimator::MonteCarlo) {
  SimConfig cfg;
  cfg.competence_prior = BetaPriorSet::uniform(5);
  cfg.bayes_prior = BetaPriorSet::uniform(5);
  cfg.trials = trials;
  cfg.seed = seed;
  cfg.threads = threads;
  cfg.rules = {Rule::Maj, Rule::Lc, Rule::Hc, Rule::Bayes};
  return sweep(cfg, grid, est);
}

}  // namespace wmv
