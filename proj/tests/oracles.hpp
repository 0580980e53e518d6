#pragma once

// Independent reference computations used to check the library.

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <optional>
#include <vector>

#include "wlanprobe/diagnose.hpp"
#include "wlanprobe/trace.hpp"

namespace oracle {

/// Upper-tail p-value of Kendall's S by visiting all n! orderings.
inline double kendall_p_bruteforce(const std::vector<double>& y) {
  auto score = [](const std::vector<double>& v) {
    int s = 0;
    for (std::size_t i = 0; i < v.size(); ++i)
      for (std::size_t j = i + 1; j < v.size(); ++j) s += (v[j] > v[i]) - (v[j] < v[i]);
    return s;
  };
  const int observed = score(y);
  std::vector<std::size_t> idx(y.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::uint64_t total = 0, hits = 0;
  std::vector<double> perm(y.size());
  do {
    for (std::size_t k = 0; k < idx.size(); ++k) perm[k] = y[idx[k]];
    ++total;
    if (score(perm) >= observed) ++hits;
  } while (std::next_permutation(idx.begin(), idx.end()));
  return static_cast<double>(hits) / static_cast<double>(total);
}

struct Counts {
  double p_u = 0, p_c = 0, ratio = 0;
  bool defined = false;
};

/// p_u and p_c counted straight from their definitions on a flat list of
/// (train, label) pairs.
inline Counts ratio_by_counting(const std::vector<std::pair<int, wlanprobe::EventLabel>>& seq) {
  using wlanprobe::EventLabel;
  long labeled = 0, triggers = 0, with_next = 0, next_hit = 0;
  for (std::size_t k = 0; k < seq.size(); ++k) {
    const EventLabel l = seq[k].second;
    if (l == EventLabel::Unlabeled) continue;
    ++labeled;
    if (l != EventLabel::OD && l != EventLabel::L3) continue;
    ++triggers;
    if (k + 1 < seq.size() && seq[k + 1].first == seq[k].first) {
      ++with_next;
      const EventLabel n = seq[k + 1].second;
      if (n == EventLabel::LD || n == EventLabel::L3) ++next_hit;
    }
  }
  Counts c;
  if (with_next == 0) return c;
  c.defined = true;
  c.p_u = static_cast<double>(triggers) / static_cast<double>(labeled);
  c.p_c = static_cast<double>(next_hit) / static_cast<double>(with_next);
  c.ratio = c.p_c / c.p_u;
  return c;
}

/// A train whose records carry the given raw one-way delays (nullopt = lost),
/// sent 1000 µs apart with the smallest probe size.
inline wlanprobe::Train train_from_owds(const std::vector<std::optional<wlanprobe::Micros>>& owds,
                                        wlanprobe::Micros offset = 0) {
  wlanprobe::Train t;
  for (std::size_t i = 0; i < owds.size(); ++i) {
    wlanprobe::ProbeRecord r;
    r.seq = static_cast<int>(i);
    r.size_ip = 236;
    r.send_ts = 1'000'000 + static_cast<wlanprobe::Micros>(i) * 1000;
    if (owds[i]) r.recv_ts = r.send_ts + *owds[i] + offset;
    t.records.push_back(r);
  }
  return t;
}

}  // namespace oracle
