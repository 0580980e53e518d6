#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace wlanprobe::stats {

/// Median; even counts average the two middle values. Requires a non-empty sample.
double median(std::vector<double> values);

/// Nearest-rank percentile: the ceil(p/100 * n)-th smallest value (1-based),
/// p in (0, 100]. Requires a non-empty sample.
template <typename T>
T nearest_rank(std::vector<T> values, double percent);

/// Sample standard deviation (n - 1 denominator); 0 for fewer than two values.
double sample_stddev(std::span<const double> values);

double mean(std::span<const double> values);

extern template std::int64_t nearest_rank<std::int64_t>(std::vector<std::int64_t>, double);
extern template double nearest_rank<double>(std::vector<double>, double);

}  // namespace wlanprobe::stats
