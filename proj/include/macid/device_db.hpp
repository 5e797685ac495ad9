#pragma once

#include "macid/csv.hpp"
#include "macid/mac.hpp"
#include "macid/vulnmap.hpp"

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

namespace macid {

struct KnownDevice {
  MacAddress mac;
  std::string vendor;
  std::string product;
  std::string source; // free-form provenance note, may be empty

  friend bool operator==(const KnownDevice&, const KnownDevice&) = default;
};

struct Neighbor {
  KnownDevice device;
  MacDistance distance;
};

using MacSet = std::unordered_set<MacAddress>;

/// Known devices sorted by address, one entry per address. Immutable once
/// built.
class DeviceDatabase {
public:
  DeviceDatabase() = default;

  /// Throws load_error when one address carries two different
  /// vendor/product pairs or a device has an empty vendor or product.
  /// Identical repeats are merged, keeping the first.
  explicit DeviceDatabase(std::vector<KnownDevice> devices) {
    for (const auto& d : devices)
      if (trim(d.vendor).empty() || trim(d.product).empty())
        throw load_error("device " + format_mac(d.mac) +
                         " has an empty vendor or product");
    std::stable_sort(devices.begin(), devices.end(),
                     [](const KnownDevice& a, const KnownDevice& b) {
                       return a.mac < b.mac;
                     });
    for (auto& d : devices) {
      if (!devices_.empty() && devices_.back().mac == d.mac) {
        const auto& prev = devices_.back();
        if (prev.vendor != d.vendor || prev.product != d.product)
          throw load_error("conflicting entries for " + format_mac(d.mac) +
                           ": '" + prev.vendor + " " + prev.product +
                           "' vs '" + d.vendor + " " + d.product + "'");
        ++merged_;
        continue;
      }
      devices_.push_back(std::move(d));
    }
  }

  auto devices() const noexcept -> std::span<const KnownDevice> {
    return devices_;
  }
  auto size() const noexcept -> std::size_t { return devices_.size(); }
  auto empty() const noexcept -> bool { return devices_.empty(); }
  auto merged_duplicates() const noexcept -> std::size_t { return merged_; }

  auto find(MacAddress m) const -> const KnownDevice* {
    auto it = lower(m);
    return it != devices_.end() && it->mac == m ? &*it : nullptr;
  }

  /// Closest device by absolute address difference; on a tie the lower
  /// address wins. Binary search for the insertion point, then compare the
  /// two neighbours.
  auto nearest(MacAddress m) const -> std::optional<Neighbor> {
    if (devices_.empty())
      return std::nullopt;
    auto it = lower(m);
    if (it == devices_.end())
      return Neighbor{devices_.back(), mac_distance(m, devices_.back().mac)};
    if (it == devices_.begin() || it->mac == m)
      return Neighbor{*it, mac_distance(m, it->mac)};
    const auto& above = *it;
    const auto& below = *(it - 1);
    const auto d_above = mac_distance(m, above.mac);
    const auto d_below = mac_distance(m, below.mac);
    if (d_below <= d_above)
      return Neighbor{below, d_below};
    return Neighbor{above, d_above};
  }

  /// Copy without the given addresses.
  auto without(const MacSet& excluded) const -> DeviceDatabase {
    DeviceDatabase out;
    for (const auto& d : devices_)
      if (!excluded.contains(d.mac))
        out.devices_.push_back(d);
    return out;
  }

private:
  auto lower(MacAddress m) const -> std::vector<KnownDevice>::const_iterator {
    return std::lower_bound(
        devices_.begin(), devices_.end(), m,
        [](const KnownDevice& d, MacAddress v) { return d.mac < v; });
  }

  std::vector<KnownDevice> devices_;
  std::size_t merged_ = 0;
};

inline auto nearest_known(const DeviceDatabase& db, MacAddress m)
    -> std::optional<Neighbor> {
  return db.nearest(m);
}

struct DeviceDbLoad {
  DeviceDatabase db;
  std::size_t rows = 0;
  std::size_t blacklisted = 0;
};

/// CSV with header `mac,vendor,product[,source]`. Rows whose address is in
/// `blacklist` are dropped before conflict checks.
inline auto load_device_db(std::istream& in, const MacSet& blacklist = {})
    -> DeviceDbLoad {
  CsvReader reader{in};
  auto header_row = reader.next();
  if (!header_row)
    throw load_error("device database has no header row");
  const CsvHeader header{*header_row};
  const auto mac_col = header.require("mac");
  const auto vendor_col = header.require("vendor");
  const auto product_col = header.require("product");
  const auto source_col = header.find("source");

  DeviceDbLoad out;
  std::vector<KnownDevice> devices;
  while (auto row = reader.next()) {
    const auto line = reader.line();
    ++out.rows;
    KnownDevice d;
    try {
      d.mac = parse_mac(trim(field_at(*row, mac_col)));
    } catch (const mac_parse_error& e) {
      throw load_error(std::string("malformed MAC: ") + e.what(), line);
    }
    d.vendor = std::string(trim(field_at(*row, vendor_col)));
    d.product = std::string(trim(field_at(*row, product_col)));
    if (source_col)
      d.source = std::string(trim(field_at(*row, *source_col)));
    if (d.vendor.empty() || d.product.empty())
      throw load_error("empty vendor or product", line);
    if (blacklist.contains(d.mac)) {
      ++out.blacklisted;
      continue;
    }
    devices.push_back(std::move(d));
  }
  out.db = DeviceDatabase{std::move(devices)};
  return out;
}

/// One MAC per line; blank lines and '#' comments are ignored.
inline auto load_mac_list(std::istream& in) -> MacSet {
  MacSet out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    auto t = trim(line);
    if (auto hash = t.find('#'); hash != std::string_view::npos)
      t = trim(t.substr(0, hash));
    if (t.empty())
      continue;
    try {
      out.insert(parse_mac(t));
    } catch (const mac_parse_error& e) {
      throw load_error(std::string("malformed MAC: ") + e.what(), n);
    }
  }
  return out;
}

/// Device counts per equal-width bucket of the 24-bit address space below
/// one MA-L prefix.
struct OuiHistogram {
  std::uint32_t oui = 0;
  std::vector<std::uint64_t> counts;

  auto total() const -> std::uint64_t {
    std::uint64_t n = 0;
    for (auto c : counts)
      n += c;
    return n;
  }
};

/// `vendor_filter`, when given, keeps devices whose vendor contains every
/// token of the filter (case and punctuation are ignored).
inline auto ma_l_histogram(const DeviceDatabase& db,
                           std::optional<std::string_view> vendor_filter = {},
                           std::size_t buckets = 64)
    -> std::vector<OuiHistogram> {
  constexpr std::uint64_t space = std::uint64_t{1} << 24;
  if (buckets == 0 || buckets > space)
    throw std::invalid_argument("bucket count must be in 1..2^24");
  std::vector<std::string> filter;
  if (vendor_filter)
    filter = normalize(*vendor_filter);

  std::map<std::uint32_t, OuiHistogram> by_oui;
  for (const auto& d : db.devices()) {
    if (vendor_filter &&
        token_overlap(filter, normalize(d.vendor)) != filter.size())
      continue;
    const auto oui = static_cast<std::uint32_t>(d.mac.value() >> 24);
    const auto low = d.mac.value() & (space - 1);
    auto& h = by_oui[oui];
    if (h.counts.empty()) {
      h.oui = oui;
      h.counts.assign(buckets, 0);
    }
    ++h.counts[static_cast<std::size_t>(low * buckets / space)];
  }
  std::vector<OuiHistogram> out;
  out.reserve(by_oui.size());
  for (auto& [oui, h] : by_oui)
    out.push_back(std::move(h));
  return out;
}

} // namespace macid
