#include "wlanprobe/kendall.hpp"

#include <algorithm>
#include <stdexcept>
#include <vector>

namespace wlanprobe {

namespace {

int sign(double v) { return (v > 0.0) - (v < 0.0); }

// counts[k] = number of permutations of n distinct items with k inversions.
std::vector<std::uint64_t> inversion_counts(std::size_t n) {
  std::vector<std::uint64_t> counts{1};
  for (std::size_t m = 2; m <= n; ++m) {
    std::vector<std::uint64_t> next(counts.size() + m - 1, 0);
    for (std::size_t k = 0; k < counts.size(); ++k) {
      for (std::size_t j = 0; j < m; ++j) next[k + j] += counts[k];
    }
    counts = std::move(next);
  }
  return counts;
}

}  // namespace

int kendall_score(std::span<const double> y) {
  int s = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    for (std::size_t j = i + 1; j < y.size(); ++j) s += sign(y[j] - y[i]);
  }
  return s;
}

KendallTail kendall_upper_tail(std::span<const double> y) {
  if (y.empty()) throw std::invalid_argument("Kendall test on an empty sample");
  KendallTail tail;
  tail.score = kendall_score(y);

  std::vector<double> sorted(y.begin(), y.end());
  std::ranges::sort(sorted);
  const bool ties = std::ranges::adjacent_find(sorted) != sorted.end();

  if (!ties) {
    // With distinct values S = C(n,2) - 2 * inversions.
    const auto counts = inversion_counts(y.size());
    const long pairs = static_cast<long>(y.size() * (y.size() - 1) / 2);
    for (std::size_t k = 0; k < counts.size(); ++k) {
      tail.orderings += counts[k];
      if (pairs - 2 * static_cast<long>(k) >= tail.score) tail.at_least += counts[k];
    }
    return tail;
  }

  if (y.size() > 12) throw std::invalid_argument("tied Kendall enumeration limited to n <= 12");
  do {
    ++tail.orderings;
    if (kendall_score(sorted) >= tail.score) ++tail.at_least;
  } while (std::ranges::next_permutation(sorted).found);
  return tail;
}

}  // namespace wlanprobe
