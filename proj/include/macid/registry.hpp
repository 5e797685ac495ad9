#pragma once

#include "macid/csv.hpp"
#include "macid/mac.hpp"

#include <array>
#include <cstddef>
#include <istream>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace macid {

struct RegistryEntry {
  OuiPrefix prefix;
  std::string organization;

  auto kind() const noexcept -> PrefixKind { return prefix.kind; }
};

struct VendorMatch {
  std::string organization;
  PrefixKind kind = PrefixKind::MA_L;

  friend bool operator==(const VendorMatch&, const VendorMatch&) = default;
};

/// IEEE assignment registry: one prefix map per block kind. Immutable once
/// loaded.
class Registry {
public:
  /// Throws load_error on a duplicate prefix or an empty organization.
  void add(RegistryEntry entry) {
    if (!entry.prefix.valid())
      throw load_error("prefix does not fit " +
                       std::string(to_string(entry.kind())) + " width");
    if (trim(entry.organization).empty())
      throw load_error("empty organization for prefix " +
                       hex_prefix(entry.prefix));
    auto& map = maps_[slot(entry.kind())];
    const auto bits = entry.prefix.bits;
    if (map.contains(bits))
      throw load_error("duplicate " + std::string(to_string(entry.kind())) +
                       " prefix " + hex_prefix(entry.prefix));
    map.emplace(bits, std::move(entry.organization));
  }

  /// Longest prefix wins: MA-S, then MA-M, then MA-L. CID entries never
  /// match a device address.
  auto lookup(MacAddress m) const -> std::optional<VendorMatch> {
    for (auto kind : {PrefixKind::MA_S, PrefixKind::MA_M, PrefixKind::MA_L}) {
      const auto& map = maps_[slot(kind)];
      if (auto it = map.find(prefix(m, kind).bits); it != map.end())
        return VendorMatch{it->second, kind};
    }
    return std::nullopt;
  }

  auto size(PrefixKind kind) const -> std::size_t {
    return maps_[slot(kind)].size();
  }

  auto size() const -> std::size_t {
    std::size_t n = 0;
    for (const auto& m : maps_)
      n += m.size();
    return n;
  }

  auto empty() const -> bool { return size() == 0; }

  auto entries() const -> std::vector<RegistryEntry> {
    std::vector<RegistryEntry> out;
    for (auto kind : {PrefixKind::MA_L, PrefixKind::MA_M, PrefixKind::MA_S,
                      PrefixKind::CID})
      for (const auto& [bits, org] : maps_[slot(kind)])
        out.push_back({{kind, bits}, org});
    return out;
  }

  static auto hex_prefix(const OuiPrefix& p) -> std::string {
    const auto digits = static_cast<int>(p.width() / 4);
    auto s = format_distance(MacDistance{p.bits}, digits);
    return s.substr(2);
  }

private:
  static constexpr auto slot(PrefixKind kind) noexcept -> std::size_t {
    return static_cast<std::size_t>(kind);
  }

  std::array<std::unordered_map<std::uint64_t, std::string>, 4> maps_;
};

/// Reads one IEEE CSV snapshot (columns "Assignment" and "Organization Name",
/// matched case-insensitively) into `registry`. Returns the number of rows.
inline auto load_registry_file(Registry& registry, PrefixKind kind,
                               std::istream& in) -> std::size_t {
  CsvReader reader{in};
  auto header_row = reader.next();
  if (!header_row)
    throw load_error("registry file has no header row");
  const CsvHeader header{*header_row};
  const auto assignment_col = header.require("Assignment");
  const auto org_col = header.require("Organization Name");

  const auto digits = prefix_width(kind) / 4;
  std::size_t rows = 0;
  while (auto row = reader.next()) {
    const auto line = reader.line();
    const auto assignment = trim(field_at(*row, assignment_col));
    if (assignment.size() != digits)
      throw load_error("assignment '" + std::string(assignment) +
                           "' is not " + std::to_string(digits) +
                           " hex digits as required for " +
                           std::string(to_string(kind)),
                       line);
    std::uint64_t bits = 0;
    try {
      bits = parse_hex(assignment);
    } catch (const std::invalid_argument& e) {
      throw load_error("assignment '" + std::string(assignment) +
                           "': " + e.what(),
                       line);
    }
    try {
      registry.add({{kind, bits}, std::string(field_at(*row, org_col))});
    } catch (const load_error& e) {
      throw load_error(e.what(), line);
    }
    ++rows;
  }
  return rows;
}

struct RegistrySource {
  PrefixKind kind;
  std::istream* stream;
};

inline auto load_registry(const std::vector<RegistrySource>& files)
    -> Registry {
  Registry registry;
  for (const auto& f : files)
    load_registry_file(registry, f.kind, *f.stream);
  return registry;
}

} // namespace macid
