#pragma once

// Exact error probabilities by enumerating the 2^n correctness atoms.
//
// Atoms are indexed by bitmask 0..2^n-1, bit i set meaning expert i is
// correct (eta_i = +1). Masses are summed with a fixed pairwise tree over
// that index order, so results are reproducible bit for bit.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "wmv/core.hpp"

namespace wmv {

inline constexpr std::size_t kEnumerationCap = 24;

class CapacityError : public std::length_error {
public:
  using std::length_error::length_error;
};

enum class Method { Exact, MonteCarlo };

/// An error probability and where it came from.
struct ErrorEstimate {
  double value = 0.0;
  Method method = Method::Exact;
  std::optional<double> stderr_;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> trials;

  static ErrorEstimate exact(double v) { return {v, Method::Exact, std::nullopt, std::nullopt, std::nullopt}; }
  static ErrorEstimate monte_carlo(double v, double se, std::uint64_t seed, std::uint64_t trials) {
    return {v, Method::MonteCarlo, se, seed, trials};
  }
};

/// eta in {+1,-1}^n.
class CorrectnessAtom {
public:
  explicit CorrectnessAtom(std::vector<int> eta) : eta_(std::move(eta)) {
    for (int e : eta_) detail::require(e == 1 || e == -1, "atom entries must be +1 or -1");
  }
  static CorrectnessAtom from_mask(std::uint64_t mask, std::size_t n) {
    std::vector<int> eta(n);
    for (std::size_t i = 0; i < n; ++i) eta[i] = (mask >> i) & 1u ? 1 : -1;
    return CorrectnessAtom(std::move(eta));
  }

  std::size_t size() const { return eta_.size(); }
  int operator[](std::size_t i) const { return eta_[i]; }
  std::span<const int> values() const { return eta_; }
  CorrectnessAtom antipode() const {
    std::vector<int> e(eta_);
    for (int& v : e) v = -v;
    return CorrectnessAtom(std::move(e));
  }

private:
  std::vector<int> eta_;
};

inline double atom_probability(const Committee& c, const CorrectnessAtom& atom) {
  detail::require(c.size() == atom.size(), "committee and atom differ in length");
  double prob = 1.0;
  for (std::size_t i = 0; i < c.size(); ++i) prob *= atom[i] > 0 ? c[i] : 1.0 - c[i];
  return prob;
}

namespace detail {

inline void check_cap(std::size_t n) {
  if (n > kEnumerationCap)
    throw CapacityError("exact enumeration supports n <= " + std::to_string(kEnumerationCap) +
                        " experts, got " + std::to_string(n) + "; use Monte Carlo instead");
}

inline double mask_probability(std::span<const double> p, std::uint64_t mask) {
  double prob = 1.0;
  for (std::size_t i = 0; i < p.size(); ++i) prob *= (mask >> i) & 1u ? p[i] : 1.0 - p[i];
  return prob;
}

/// Pairwise sum of term(mask) over masks in [lo, hi).
template <class Term>
double pairwise_sum(std::uint64_t lo, std::uint64_t hi, const Term& term) {
  constexpr std::uint64_t kLeaf = 32;
  if (hi - lo <= kLeaf) {
    double s = 0.0;
    for (std::uint64_t m = lo; m < hi; ++m) s += term(m);
    return s;
  }
  const std::uint64_t mid = lo + (hi - lo) / 2;
  return pairwise_sum(lo, mid, term) + pairwise_sum(mid, hi, term);
}

/// Whether the rule errs on atom `mask` with truth Y = +1 (votes x = eta).
/// By label symmetry this is also the verdict for Y = -1.
inline bool atom_is_error(std::span<const double> w, std::uint64_t mask) {
  VoteTally tally;
  for (std::size_t i = 0; i < w.size(); ++i) tally.add(contribution(w[i], (mask >> i) & 1u ? 1 : -1));
  return tally.decision() != Decision::Plus;
}

}  // namespace detail

/// P(rule errs) where the rule is sign(w . x). Ties and conflicting
/// infinities count as errors.
inline ErrorEstimate exact_error(const Committee& c, const WeightVector& w) {
  detail::require(c.size() == w.size(), "committee and weights differ in length");
  detail::check_cap(c.size());
  const auto p = c.competences();
  const auto wv = w.values();
  const std::uint64_t atoms = std::uint64_t{1} << c.size();
  const double err = detail::pairwise_sum(0, atoms, [&](std::uint64_t mask) {
    return detail::atom_is_error(wv, mask) ? detail::mask_probability(p, mask) : 0.0;
  });
  return ErrorEstimate::exact(std::min(1.0, err));
}

/// Error of the optimal rule as sum over antipodal pairs of the lighter atom.
/// Agrees with exact_error(c, np_weights(c)) whenever no atom ties; on tying
/// atoms it charges half the pair where the tie convention charges all of it.
inline ErrorEstimate exact_error_optimal(const Committee& c) {
  detail::check_cap(c.size());
  const auto p = c.competences();
  const std::uint64_t atoms = std::uint64_t{1} << c.size();
  const std::uint64_t full = atoms - 1;
  // Each antipodal pair {mask, ~mask} is visited once, from the half with bit n-1 clear.
  const double err = detail::pairwise_sum(0, atoms / 2, [&](std::uint64_t mask) {
    return std::min(detail::mask_probability(p, mask), detail::mask_probability(p, full ^ mask));
  });
  return ErrorEstimate::exact(err);
}

/// Whether some atom puts sign(w . eta) exactly on a tie.
inline bool has_tying_atom(const Committee& c, const WeightVector& w) {
  detail::require(c.size() == w.size(), "committee and weights differ in length");
  detail::check_cap(c.size());
  const std::uint64_t atoms = std::uint64_t{1} << c.size();
  for (std::uint64_t mask = 0; mask < atoms; ++mask) {
    VoteTally tally;
    for (std::size_t i = 0; i < w.size(); ++i) tally.add(contribution(w[i], (mask >> i) & 1u ? 1 : -1));
    if (tally.decision() == Decision::Abstain) return true;
  }
  return false;
}

struct Moments {
  double mean = 0.0;
  double variance = 0.0;
};

/// Mean and variance of w . eta.
inline Moments exact_moments(const Committee& c, const WeightVector& w) {
  detail::require(c.size() == w.size(), "committee and weights differ in length");
  detail::require(w.all_finite(), "moments need finite weights");
  Moments mo;
  for (std::size_t i = 0; i < c.size(); ++i) {
    const double p = c[i], q = 1.0 - p;
    mo.mean += (p - q) * w[i];
    mo.variance += 4.0 * p * q * w[i] * w[i];
  }
  return mo;
}

/// Total atom mass with w . eta inside [lo, hi]. Finite weights only.
inline double atom_mass_in(const Committee& c, const WeightVector& w, double lo, double hi) {
  detail::require(c.size() == w.size(), "committee and weights differ in length");
  detail::require(w.all_finite(), "interval mass needs finite weights");
  detail::check_cap(c.size());
  const auto p = c.competences();
  const std::uint64_t atoms = std::uint64_t{1} << c.size();
  return detail::pairwise_sum(0, atoms, [&](std::uint64_t mask) {
    double dot = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i) dot += (mask >> i) & 1u ? w[i] : -w[i];
    return dot >= lo && dot <= hi ? detail::mask_probability(p, mask) : 0.0;
  });
}

}  // namespace wmv
