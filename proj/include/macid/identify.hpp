#pragma once

#include "macid/device_db.hpp"
#include "macid/mac.hpp"
#include "macid/registry.hpp"

#include <algorithm>
#include <optional>
#include <string_view>
#include <vector>

namespace macid {

enum class Category { ExactOrProductGuess, VendorOnly, NoIdentification };

inline auto to_string(Category c) -> std::string_view {
  switch (c) {
  case Category::ExactOrProductGuess:
    return "product_guess";
  case Category::VendorOnly:
    return "vendor_only";
  case Category::NoIdentification:
    break;
  }
  return "none";
}

/// Reporting convention for how far a product guess is from its reference
/// device. The cut points are this tool's own; only "smaller is better" has
/// any grounding.
enum class ConfidenceBand { Exact, High, Medium, Low, Distant };

inline auto to_string(ConfidenceBand b) -> std::string_view {
  switch (b) {
  case ConfidenceBand::Exact:
    return "exact";
  case ConfidenceBand::High:
    return "high";
  case ConfidenceBand::Medium:
    return "medium";
  case ConfidenceBand::Low:
    return "low";
  case ConfidenceBand::Distant:
    break;
  }
  return "distant";
}

constexpr auto confidence_band(MacDistance d) noexcept -> ConfidenceBand {
  if (d.magnitude == 0)
    return ConfidenceBand::Exact;
  if (d.magnitude <= 0xFFF)
    return ConfidenceBand::High;
  if (d.magnitude <= 0xFFFFF)
    return ConfidenceBand::Medium;
  if (d.magnitude <= 0xFFFFFF)
    return ConfidenceBand::Low;
  return ConfidenceBand::Distant;
}

struct IdentificationResult {
  MacAddress query;
  /// Product guess; set only when the nearest device is within threshold.
  std::optional<KnownDevice> match;
  /// Distance to the nearest known device, whether or not it was accepted.
  std::optional<MacDistance> distance;
  std::optional<VendorMatch> registry_vendor;
  Category category = Category::NoIdentification;
  std::optional<ConfidenceBand> band; // set with `match`

  /// Best available vendor name: the matched device's, else the registry's.
  auto vendor() const -> std::optional<std::string> {
    if (match)
      return match->vendor;
    if (registry_vendor)
      return registry_vendor->organization;
    return std::nullopt;
  }
};

inline auto categorize(MacAddress m, const std::optional<Neighbor>& near,
                       const Registry& reg, MacDistance threshold = ma_l_span)
    -> IdentificationResult {
  IdentificationResult r;
  r.query = m;
  r.registry_vendor = reg.lookup(m);
  if (near) {
    r.distance = near->distance;
    if (near->distance <= threshold) {
      r.match = near->device;
      r.category = Category::ExactOrProductGuess;
      r.band = confidence_band(near->distance);
      return r;
    }
  }
  r.category = r.registry_vendor ? Category::VendorOnly
                                 : Category::NoIdentification;
  return r;
}

inline auto identify(const DeviceDatabase& db, const Registry& reg,
                     MacAddress m, MacDistance threshold = ma_l_span)
    -> IdentificationResult {
  return categorize(m, db.nearest(m), reg, threshold);
}

/// One result per distinct address, ascending by address.
template <class Range>
auto identify_all(const DeviceDatabase& db, const Registry& reg,
                  const Range& macs, MacDistance threshold = ma_l_span)
    -> std::vector<IdentificationResult> {
  std::vector<MacAddress> sorted(std::begin(macs), std::end(macs));
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  std::vector<IdentificationResult> out;
  out.reserve(sorted.size());
  for (auto m : sorted)
    out.push_back(identify(db, reg, m, threshold));
  return out;
}

} // namespace macid
