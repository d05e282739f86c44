#pragma once

// Committees, weight vectors and the weighted-majority decision rules.

#include <cmath>
#include <cstdio>
#include <cstddef>
#include <limits>
#include <optional>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace wmv {

class InvalidInput : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

namespace detail {

inline void require(bool ok, const std::string& what) {
  if (!ok) throw InvalidInput(what);
}

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

}  // namespace detail

/// True competences p_i of n independent experts, each strictly inside (0,1).
class Committee {
public:
  Committee() = default;
  explicit Committee(std::vector<double> competences) : p_(std::move(competences)) {
    detail::require(!p_.empty(), "committee must have at least one expert");
    for (std::size_t i = 0; i < p_.size(); ++i) {
      detail::require(p_[i] > 0.0 && p_[i] < 1.0,
                      "competence p_" + std::to_string(i) + " = " + detail::num(p_[i]) +
                          " is outside (0,1)");
    }
  }

  std::size_t size() const { return p_.size(); }
  double operator[](std::size_t i) const { return p_[i]; }
  std::span<const double> competences() const { return p_; }

private:
  std::vector<double> p_;
};

/// Per-expert weights over the extended reals. NaN is rejected; +-inf are legal.
class WeightVector {
public:
  WeightVector() = default;
  explicit WeightVector(std::vector<double> w) : w_(std::move(w)) {
    for (std::size_t i = 0; i < w_.size(); ++i)
      detail::require(!std::isnan(w_[i]), "weight " + std::to_string(i) + " is NaN");
  }

  std::size_t size() const { return w_.size(); }
  double operator[](std::size_t i) const { return w_[i]; }
  std::span<const double> values() const { return w_; }

  bool all_finite() const {
    for (double v : w_)
      if (!std::isfinite(v)) return false;
    return true;
  }

private:
  std::vector<double> w_;
};

/// Observation counts for one expert: queried `m` times, correct `k` times.
struct ExpertSample {
  long long m = 0;
  long long k = 0;

  double p_hat() const { return static_cast<double>(k) / static_cast<double>(m); }
  friend bool operator==(const ExpertSample&, const ExpertSample&) = default;
};

/// The agent's empirical knowledge of the committee.
class CommitteeProfile {
public:
  CommitteeProfile() = default;
  explicit CommitteeProfile(std::vector<ExpertSample> samples) : s_(std::move(samples)) {
    for (std::size_t i = 0; i < s_.size(); ++i) {
      detail::require(s_[i].m >= 0 && s_[i].k >= 0 && s_[i].k <= s_[i].m,
                      "profile entry " + std::to_string(i) + " needs 0 <= k <= m, got " +
                          std::to_string(s_[i].k) + "/" + std::to_string(s_[i].m));
    }
  }

  std::size_t size() const { return s_.size(); }
  const ExpertSample& operator[](std::size_t i) const { return s_[i]; }
  std::span<const ExpertSample> samples() const { return s_; }

  bool all_queried() const {
    for (const auto& s : s_)
      if (s.m < 1) return false;
    return true;
  }

private:
  std::vector<ExpertSample> s_;
};

struct BetaPrior {
  double alpha = 1.0;
  double beta = 1.0;
};

class BetaPriorSet {
public:
  BetaPriorSet() = default;
  explicit BetaPriorSet(std::vector<BetaPrior> params) : a_(std::move(params)) {
    for (std::size_t i = 0; i < a_.size(); ++i)
      detail::require(a_[i].alpha > 0.0 && a_[i].beta > 0.0 && std::isfinite(a_[i].alpha) &&
                          std::isfinite(a_[i].beta),
                      "prior " + std::to_string(i) + " needs alpha > 0 and beta > 0");
  }
  static BetaPriorSet uniform(std::size_t n) { return BetaPriorSet(std::vector<BetaPrior>(n)); }

  std::size_t size() const { return a_.size(); }
  const BetaPrior& operator[](std::size_t i) const { return a_[i]; }

private:
  std::vector<BetaPrior> a_;
};

enum class Decision { Plus, Minus, Abstain };

/// Outcome of the adaptive rule: a decision, or a refusal when the gate fails.
struct AdaptiveOutcome {
  std::optional<Decision> decision;  // empty = declined
  bool fell_back = false;            // decision came from the LC fallback

  bool declined() const { return !decision.has_value(); }
};

// ---------------------------------------------------------------------------
// Weight assignment

inline double log_odds(double p) { return std::log(p / (1.0 - p)); }

inline WeightVector np_weights(const Committee& c) {
  std::vector<double> w(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) w[i] = log_odds(c[i]);
  return WeightVector(std::move(w));
}

inline WeightVector majority_weights(std::size_t n) {
  detail::require(n >= 1, "majority rule needs n >= 1");
  return WeightVector(std::vector<double>(n, 1.0));
}

/// p_i - 1/2 at the true competences (the LC rule of the gap experiment).
inline WeightVector centered_weights(const Committee& c) {
  std::vector<double> w(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) w[i] = c[i] - 0.5;
  return WeightVector(std::move(w));
}

inline WeightVector lc_weights(const CommitteeProfile& profile) {
  std::vector<double> w(profile.size());
  for (std::size_t i = 0; i < profile.size(); ++i) {
    const auto& s = profile[i];
    detail::require(s.m >= 1, "LC weight undefined for expert " + std::to_string(i) + " with m = 0");
    // (2k - m) / 2m is a single correctly rounded division
    w[i] = static_cast<double>(2 * s.k - s.m) / static_cast<double>(2 * s.m);
  }
  return WeightVector(std::move(w));
}

inline double hc_weight(const ExpertSample& s) {
  if (s.k == s.m) return std::numeric_limits<double>::infinity();
  if (s.k == 0) return -std::numeric_limits<double>::infinity();
  return std::log(static_cast<double>(s.k) / static_cast<double>(s.m - s.k));
}

inline WeightVector hc_weights(const CommitteeProfile& profile) {
  std::vector<double> w(profile.size());
  for (std::size_t i = 0; i < profile.size(); ++i) {
    detail::require(profile[i].m >= 1,
                    "HC weight undefined for expert " + std::to_string(i) + " with m = 0");
    w[i] = hc_weight(profile[i]);
  }
  return WeightVector(std::move(w));
}

/// Posterior log-odds under independent Beta(alpha_i, beta_i) priors.
inline WeightVector bayes_weights(const CommitteeProfile& profile, const BetaPriorSet& priors) {
  detail::require(profile.size() == priors.size(), "profile and prior lengths differ");
  std::vector<double> w(profile.size());
  for (std::size_t i = 0; i < profile.size(); ++i) {
    const auto& s = profile[i];
    w[i] = std::log((priors[i].alpha + static_cast<double>(s.k)) /
                    (priors[i].beta + static_cast<double>(s.m - s.k)));
  }
  return WeightVector(std::move(w));
}

// ---------------------------------------------------------------------------
// Decision

/// Running value of sum_i w_i * x_i over the extended reals.
///
/// Infinite contributions are counted by sign instead of summed. A finite sum
/// within kTieTolerance * sum_i |w_i x_i| of zero is a tie, so that ties which
/// hold in exact arithmetic (e.g. ln 4 = ln 2 + ln 2) are not lost to rounding.
class VoteTally {
public:
  static constexpr double kTieTolerance = 1e-12;

  void add(double contribution) {
    if (contribution == std::numeric_limits<double>::infinity()) {
      ++pos_inf_;
    } else if (contribution == -std::numeric_limits<double>::infinity()) {
      ++neg_inf_;
    } else {
      sum_ += contribution;
      abs_ += std::fabs(contribution);
    }
  }

  Decision decision() const {
    if (pos_inf_ > 0 && neg_inf_ > 0) return Decision::Abstain;
    if (pos_inf_ > 0) return Decision::Plus;
    if (neg_inf_ > 0) return Decision::Minus;
    if (std::fabs(sum_) <= kTieTolerance * abs_) return Decision::Abstain;
    return sum_ > 0.0 ? Decision::Plus : Decision::Minus;
  }

private:
  double sum_ = 0.0;
  double abs_ = 0.0;
  int pos_inf_ = 0;
  int neg_inf_ = 0;
};

/// w * x for a +-1 vote; exact, and never NaN for infinite w.
inline double contribution(double w, int vote) { return vote > 0 ? w : -w; }

/// sign(sum_i w_i x_i) with ties and conflicting infinities mapped to Abstain.
inline Decision decide(const WeightVector& weights, std::span<const int> votes) {
  detail::require(weights.size() == votes.size(), "weights and votes differ in length");
  VoteTally tally;
  for (std::size_t i = 0; i < votes.size(); ++i) {
    detail::require(votes[i] == 1 || votes[i] == -1, "votes must be +1 or -1");
    tally.add(contribution(weights[i], votes[i]));
  }
  return tally.decision();
}

inline Decision decide(const WeightVector& weights, std::initializer_list<int> votes) {
  return decide(weights, std::span<const int>(votes.begin(), votes.size()));
}

/// Label y in {+1,-1}; Abstain is never correct.
inline bool is_error(Decision d, int y) {
  if (d == Decision::Abstain) return true;
  return (d == Decision::Plus) != (y > 0);
}

}  // namespace wmv
