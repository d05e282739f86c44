#pragma once

// Committee potential, error bounds for the optimal and empirical rules, and
// the agent-side gate that certifies the plug-in rule.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <utility>

#include "wmv/core.hpp"

namespace wmv {

/// Phi = sum_i (p_i - 1/2) log(p_i / q_i). Every summand is >= 0.
inline double committee_potential(const Committee& c) {
  double phi = 0.0;
  for (double p : c.competences()) phi += (p - 0.5) * log_odds(p);
  return phi;
}

/// exp(-Phi/2), the upper bound on the optimal rule's error.
inline double upper_bound_opt(double phi) {
  detail::require(phi >= 0.0, "committee potential must be nonnegative");
  return std::exp(-0.5 * phi);
}

/// 3 / (4 (1 + exp(2 Phi + 4 sqrt(Phi)))), the matching lower bound.
inline double lower_bound_opt(double phi) {
  detail::require(phi >= 0.0, "committee potential must be nonnegative");
  return 0.75 / (1.0 + std::exp(2.0 * phi + 4.0 * std::sqrt(phi)));
}

/// Plain Hoeffding bound exp(-2 Phi^2 / sum w_i^2) for log-odds weights.
/// The 0/0 case of an all-1/2 committee is completed as 1.
inline double hoeffding_bound(const Committee& c) {
  double w2 = 0.0;
  for (double p : c.competences()) {
    const double w = log_odds(p);
    w2 += w * w;
  }
  if (w2 == 0.0) return 1.0;
  const double phi = committee_potential(c);
  return std::exp(-2.0 * phi * phi / w2);
}

/// exp(-(8/n) (sum (p_i - 1/2)^2)^2), valid for the LC rule at any sample size.
inline double lc_error_bound(const Committee& c) {
  double s = 0.0;
  for (double p : c.competences()) s += (p - 0.5) * (p - 0.5);
  return std::exp(-8.0 / static_cast<double>(c.size()) * s * s);
}

struct BoundReport {
  double phi = 0.0;
  double upper = 1.0;
  double lower = 0.0;
  std::optional<double> hoeffding;
  std::optional<double> lc_bound;
};

inline BoundReport bound_report(const Committee& c) {
  BoundReport r;
  r.phi = committee_potential(c);
  r.upper = upper_bound_opt(r.phi);
  r.lower = lower_bound_opt(r.phi);
  r.hoeffding = hoeffding_bound(c);
  r.lc_bound = lc_error_bound(c);
  return r;
}

// ---------------------------------------------------------------------------
// Inequalities used by the consistency arguments

struct KearnsSaulSides {
  double lhs = 0.0;
  double rhs = 0.0;
};

/// Quadratic MGF coefficient (1-2p) / (4 log((1-p)/p)); 1/8 at p = 1/2.
inline double kearns_saul_coefficient(double p) {
  detail::require(p > 0.0 && p < 1.0, "Kearns-Saul needs p in (0,1)");
  if (p == 0.5) return 0.125;
  // (1-2p) / (4 log((1-p)/p)) = u / (8 atanh u) with u = 1 - 2p
  const double u = 1.0 - 2.0 * p;
  return u / (8.0 * std::atanh(u));
}

/// Both sides of (1-p)e^{-tp} + p e^{t(1-p)} <= exp(c(p) t^2).
inline KearnsSaulSides kearns_saul_gap(double p, double t) {
  const double c = kearns_saul_coefficient(p);
  return {(1.0 - p) * std::exp(-t * p) + p * std::exp(t * (1.0 - p)), std::exp(c * t * t)};
}

/// F(x) = x(1-x) log(x/(1-x)) / (2x-1), extended by F(1/2) = 1/2.
inline double lemma_F(double x) {
  detail::require(x > 0.0 && x < 1.0, "F is defined on (0,1)");
  const double u = 2.0 * x - 1.0;
  if (u == 0.0) return 0.5;
  // x(1-x) = (1-u^2)/4 and log(x/(1-x)) = 2 atanh(u)
  return (1.0 - u * u) * std::atanh(u) / (2.0 * u);
}

/// The root in (0,1) of 2e + 4e^2 = eps, for 0 < eps <= 5.
inline double eps_tilde(double eps) {
  detail::require(eps > 0.0 && eps <= 5.0, "eps must lie in (0, 5]");
  // (sqrt(4eps+1) - 1)/4 without the cancellation
  return eps / (std::sqrt(4.0 * eps + 1.0) + 1.0);
}

struct NonadaptiveReport {
  bool condition_met = false;
  double required_samples = 0.0;  // 3 eps~^-2 log(4n/delta), compared with m_i min{p_i,q_i}
  double bound = 1.0;
};

/// Oracle-side guarantee for the plug-in rule: if every m_i min{p_i,q_i}
/// clears the threshold then P(error) <= delta + exp(-(2Phi - eps n)^2 / (8 Phi)).
inline NonadaptiveReport nonadaptive_report(const Committee& c, std::span<const long long> m,
                                            double eps, double delta) {
  detail::require(m.size() == c.size(), "sample counts and committee differ in length");
  detail::require(delta > 0.0 && delta < 1.0, "delta must lie in (0,1)");
  const double n = static_cast<double>(c.size());
  const double phi = committee_potential(c);
  detail::require(eps > 0.0 && eps < std::min(5.0, 2.0 * phi / n),
                  "eps must satisfy 0 < eps < min(5, 2 Phi / n) = " +
                      detail::num(std::min(5.0, 2.0 * phi / n)));
  const double et = eps_tilde(eps);
  NonadaptiveReport r;
  r.required_samples = 3.0 / (et * et) * std::log(4.0 * n / delta);
  r.condition_met = true;
  for (std::size_t i = 0; i < c.size(); ++i) {
    const double mq = static_cast<double>(m[i]) * std::min(c[i], 1.0 - c[i]);
    if (mq < r.required_samples) r.condition_met = false;
  }
  const double gap = 2.0 * phi - eps * n;
  r.bound = delta + std::exp(-gap * gap / (8.0 * phi));
  return r;
}

struct PerturbationCheck {
  bool hypothesis = false;  // 1 - e~ <= p^/p, q^/q <= 1 + e~
  double difference = 0.0;  // |log(p/q) - log(p^/q^)|
  bool holds = false;       // hypothesis implies difference <= eps
};

/// Checks that a multiplicative (1 +- eps~) estimate of p and q moves the
/// log-odds weight by at most eps.
inline PerturbationCheck weight_perturbation_check(double p, double p_hat, double eps) {
  detail::require(p > 0.0 && p < 1.0, "p must lie in (0,1)");
  detail::require(p_hat > 0.0 && p_hat < 1.0, "p_hat must lie in (0,1)");
  const double et = eps_tilde(eps);
  const double q = 1.0 - p, q_hat = 1.0 - p_hat;
  const double rp = p_hat / p, rq = q_hat / q;
  PerturbationCheck r;
  r.hypothesis = rp >= 1.0 - et && rp <= 1.0 + et && rq >= 1.0 - et && rq <= 1.0 + et;
  r.difference = std::fabs(log_odds(p) - log_odds(p_hat));
  r.holds = !r.hypothesis || r.difference <= eps;
  return r;
}

// ---------------------------------------------------------------------------
// Adaptive gate

struct GateReport {
  double delta = 0.0;
  double gate_value = 1.0;
  bool holds = false;  // gate_value <= delta / 2
};

/// delta = sum 1/sqrt(m_i) and gate value exp(-1/2 sum (p^_i - 1/2) w^HC_i).
/// An infinite plug-in weight always has p^ in {0,1}, so its summand is +inf
/// and drives the gate value to zero.
inline GateReport adaptive_gate(const CommitteeProfile& profile) {
  detail::require(profile.all_queried(), "adaptive gate needs m_i >= 1 for every expert");
  GateReport g;
  double exponent = 0.0;
  for (const auto& s : profile.samples()) {
    g.delta += 1.0 / std::sqrt(static_cast<double>(s.m));
    if (2 * s.k == s.m) continue;
    const double w = hc_weight(s);
    exponent += std::isfinite(w) ? (s.p_hat() - 0.5) * w : std::numeric_limits<double>::infinity();
  }
  g.gate_value = std::exp(-0.5 * exponent);
  g.holds = g.gate_value <= 0.5 * g.delta;
  return g;
}

enum class GateFallback { Decline, LowConfidence };

/// Predicts with the plug-in rule when the gate certifies the profile; otherwise
/// declines, or uses the LC rule if asked to.
inline AdaptiveOutcome adaptive_rule(const CommitteeProfile& profile, std::span<const int> votes,
                                     GateFallback fallback = GateFallback::Decline) {
  const GateReport g = adaptive_gate(profile);
  if (g.holds) return {decide(hc_weights(profile), votes), false};
  if (fallback == GateFallback::LowConfidence) return {decide(lc_weights(profile), votes), true};
  return {};
}

}  // namespace wmv
