#pragma once

#include "macid/capture.hpp"
#include "macid/mac.hpp"
#include "macid/observe.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <stdexcept>
#include <vector>

namespace macid {

/// Capture timestamps of one device, ascending. Ties are allowed.
struct ArrivalSeries {
  MacAddress mac;
  std::vector<Nanos> timestamps;
};

using SeriesMap = std::map<MacAddress, ArrivalSeries>;

template <class Range>
auto build_series(const Range& observations) -> SeriesMap {
  SeriesMap out;
  for (const Observation& o : observations) {
    auto& s = out[o.mac];
    s.mac = o.mac;
    s.timestamps.push_back(o.timestamp);
  }
  for (auto& [mac, s] : out)
    std::stable_sort(s.timestamps.begin(), s.timestamps.end());
  return out;
}

/// Time between each pair of consecutive packets of one device.
inline auto arrival_gaps(const ArrivalSeries& s) -> std::vector<Nanos> {
  std::vector<Nanos> gaps;
  if (s.timestamps.size() < 2)
    return gaps;
  gaps.reserve(s.timestamps.size() - 1);
  for (std::size_t i = 1; i < s.timestamps.size(); ++i)
    gaps.push_back(s.timestamps[i] - s.timestamps[i - 1]);
  return gaps;
}

/// Five-number summary of the gaps, quantiles interpolated linearly between
/// closest ranks.
struct GapQuartiles {
  double min = 0;
  double q1 = 0;
  double median = 0;
  double q3 = 0;
  double max = 0;
};

/// Per-device interarrival statistics. `mean`, `max` and `quartiles` are
/// empty when the device was seen fewer than two times.
struct ArrivalStats {
  MacAddress mac;
  std::size_t packet_count = 0;
  std::size_t gap_count = 0;
  Nanos total_gap{0};
  std::optional<double> mean; // seconds
  std::optional<Nanos> max;
  std::optional<GapQuartiles> quartiles;

  auto defined() const noexcept -> bool { return max.has_value(); }
};

/// Linear interpolation between closest ranks on sorted data.
inline auto quantile_sorted(const std::vector<double>& sorted, double q)
    -> double {
  if (sorted.empty())
    throw std::invalid_argument("quantile of empty data");
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + (sorted[hi] - sorted[lo]) * frac;
}

inline auto stats(const ArrivalSeries& s) -> ArrivalStats {
  ArrivalStats st;
  st.mac = s.mac;
  st.packet_count = s.timestamps.size();
  const auto gaps = arrival_gaps(s);
  st.gap_count = gaps.size();
  if (gaps.empty())
    return st;
  Nanos total{0};
  Nanos largest{0};
  std::vector<double> secs;
  secs.reserve(gaps.size());
  for (auto g : gaps) {
    total += g;
    largest = std::max(largest, g);
    secs.push_back(to_seconds(g));
  }
  st.total_gap = total;
  st.mean = to_seconds(total) / static_cast<double>(gaps.size());
  st.max = largest;
  std::sort(secs.begin(), secs.end());
  st.quartiles = GapQuartiles{secs.front(), quantile_sorted(secs, 0.25),
                              quantile_sorted(secs, 0.5),
                              quantile_sorted(secs, 0.75), secs.back()};
  return st;
}

using StatsMap = std::map<MacAddress, ArrivalStats>;

inline auto all_stats(const SeriesMap& series) -> StatsMap {
  StatsMap out;
  for (const auto& [mac, s] : series)
    out.emplace(mac, stats(s));
  return out;
}

struct CoverageEstimate {
  Nanos coverage{0};
  MacAddress limiting_mac;
};

class coverage_error : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

/// Largest per-device maximum gap; ties go to the lowest MAC. Throws
/// coverage_error when no device has two or more observations.
inline auto coverage(const StatsMap& all) -> CoverageEstimate {
  std::optional<CoverageEstimate> best;
  for (const auto& [mac, st] : all) {
    if (!st.max)
      continue;
    if (!best || *st.max > best->coverage ||
        (*st.max == best->coverage && mac < best->limiting_mac))
      best = CoverageEstimate{*st.max, mac};
  }
  if (!best)
    throw coverage_error(
        "coverage undefined: no device was observed more than once");
  return *best;
}

} // namespace macid
