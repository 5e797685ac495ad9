#pragma once

// Explicit snapshot refresh. Nothing else in the library touches the
// network; callers supply the transport.

#include "macid/registry.hpp"
#include "macid/vulnmap.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>

namespace macid {

/// Returns the body of `url` or throws.
using Fetcher = std::function<std::string(const std::string& url)>;

enum class SnapshotKind { Raw, RegistryMaL, RegistryMaM, RegistryMaS, Cve };

struct IeeeSource {
  PrefixKind kind;
  std::string_view url;
  std::string_view file_name;
};

inline constexpr IeeeSource ieee_sources[] = {
    {PrefixKind::MA_L, "https://standards-oui.ieee.org/oui/oui.csv", "mal.csv"},
    {PrefixKind::MA_M, "https://standards-oui.ieee.org/oui28/mam.csv",
     "mam.csv"},
    {PrefixKind::MA_S, "https://standards-oui.ieee.org/oui36/oui36.csv",
     "mas.csv"},
};

/// Checks that `body` loads as the given snapshot kind; returns a short
/// description such as "3 entries".
inline auto validate_snapshot(const std::string& body, SnapshotKind kind)
    -> std::string {
  std::istringstream in{body};
  switch (kind) {
  case SnapshotKind::Raw:
    return std::to_string(body.size()) + " bytes";
  case SnapshotKind::RegistryMaL:
  case SnapshotKind::RegistryMaM:
  case SnapshotKind::RegistryMaS: {
    const auto pk = kind == SnapshotKind::RegistryMaL   ? PrefixKind::MA_L
                    : kind == SnapshotKind::RegistryMaM ? PrefixKind::MA_M
                                                        : PrefixKind::MA_S;
    Registry r;
    return std::to_string(load_registry_file(r, pk, in)) + " entries";
  }
  case SnapshotKind::Cve: {
    const auto store = load_cve_snapshot(in);
    return std::to_string(store.size()) + " records, " +
           std::to_string(store.skipped().size()) + " skipped";
  }
  }
  return {};
}

/// Downloads `url`, validates it, and replaces `destination` atomically.
/// The existing file is left untouched on any failure.
inline auto fetch_snapshot(const Fetcher& fetch, const std::string& url,
                           const std::filesystem::path& destination,
                           SnapshotKind kind = SnapshotKind::Raw)
    -> std::string {
  const auto body = fetch(url);
  const auto summary = validate_snapshot(body, kind);
  auto tmp = destination;
  tmp += ".partial";
  {
    std::ofstream out{tmp, std::ios::binary | std::ios::trunc};
    if (!out)
      throw std::runtime_error("cannot write '" + tmp.string() + "'");
    out.write(body.data(), static_cast<std::streamsize>(body.size()));
    if (!out)
      throw std::runtime_error("write failed for '" + tmp.string() + "'");
  }
  std::filesystem::rename(tmp, destination);
  return summary;
}

} // namespace macid
