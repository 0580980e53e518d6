#pragma once

#include <cstdint>
#include <span>

namespace wlanprobe {

/// S = sum over i<j of sign(y_j - y_i), sign(0) = 0.
int kendall_score(std::span<const double> y);

/// Exact one-sided upper tail of S under the permutation null: the number of
/// orderings of the observed values with score >= the observed score.
struct KendallTail {
  int score = 0;
  std::uint64_t at_least = 0;
  std::uint64_t orderings = 0;

  double p_value() const { return static_cast<double>(at_least) / static_cast<double>(orderings); }
};

/// Distinct values use the inversion-count distribution; tied samples
/// enumerate the distinct permutations of the multiset (n <= 12).
KendallTail kendall_upper_tail(std::span<const double> y);

}  // namespace wlanprobe
