#pragma once

#include "macid/csv.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <cstddef>
#include <istream>
#include <map>
#include <optional>
#include <regex>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace macid {

/// Lowercase alphanumeric tokens in order of first appearance, duplicates
/// removed: "WAGO Kontakttechnik" -> {"wago", "kontakttechnik"}.
inline auto normalize(std::string_view name) -> std::vector<std::string> {
  std::vector<std::string> tokens;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty() &&
        std::find(tokens.begin(), tokens.end(), cur) == tokens.end())
      tokens.push_back(cur);
    cur.clear();
  };
  for (char ch : name) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isalnum(c) && c < 0x80)
      cur += static_cast<char>(std::tolower(c));
    else
      flush();
  }
  flush();
  return tokens;
}

inline auto join_tokens(const std::vector<std::string>& tokens,
                        std::string_view sep = "_") -> std::string {
  std::string out;
  for (const auto& t : tokens) {
    if (!out.empty())
      out += sep;
    out += t;
  }
  return out;
}

inline auto token_overlap(const std::vector<std::string>& a,
                          const std::vector<std::string>& b) -> std::size_t {
  std::size_t n = 0;
  for (const auto& t : a)
    if (std::find(b.begin(), b.end(), t) != b.end())
      ++n;
  return n;
}

struct CveRecord {
  std::string cve_id;
  std::string vendor;  // as given in the snapshot
  std::string product; // as given in the snapshot
  std::vector<std::string> vendor_tokens;
  std::vector<std::string> product_tokens;
  std::string summary;
  std::optional<double> cvss;

  auto vendor_key() const -> std::string { return join_tokens(vendor_tokens); }
  auto product_key() const -> std::string {
    return join_tokens(product_tokens);
  }
};

inline auto is_cve_id(std::string_view id) -> bool {
  static const std::regex pattern{R"(CVE-\d{4}-\d{4,})"};
  return std::regex_match(id.begin(), id.end(), pattern);
}

struct SkippedRecord {
  std::size_t line = 0;
  std::string reason;
};

/// Offline CVE snapshot, indexed by vendor token and then product token.
class CveStore {
public:
  void add(CveRecord r) {
    const auto id = records_.size();
    ++per_vendor_[r.vendor_key()];
    for (const auto& v : r.vendor_tokens) {
      auto& by_product = index_[v];
      for (const auto& p : r.product_tokens)
        by_product[p].push_back(id);
      by_vendor_[v].push_back(id);
    }
    records_.push_back(std::move(r));
  }

  auto records() const noexcept -> const std::vector<CveRecord>& {
    return records_;
  }
  auto size() const noexcept -> std::size_t { return records_.size(); }
  auto empty() const noexcept -> bool { return records_.empty(); }

  /// Record count per normalized vendor name ("siemens", "schneider_electric").
  auto vendor_counts() const -> const std::map<std::string, std::size_t>& {
    return per_vendor_;
  }

  auto vendor_count(std::string_view vendor) const -> std::size_t {
    auto it = per_vendor_.find(join_tokens(normalize(vendor)));
    return it == per_vendor_.end() ? 0 : it->second;
  }

  /// Ids of records sharing at least one vendor token with `tokens`.
  auto by_vendor(const std::vector<std::string>& tokens) const
      -> std::vector<std::size_t> {
    std::vector<std::size_t> ids;
    for (const auto& v : tokens)
      if (auto it = by_vendor_.find(v); it != by_vendor_.end())
        ids.insert(ids.end(), it->second.begin(), it->second.end());
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    return ids;
  }

  /// Ids of records sharing a vendor token and a product token.
  auto by_vendor_product(const std::vector<std::string>& vendor_tokens,
                         const std::vector<std::string>& product_tokens) const
      -> std::vector<std::size_t> {
    std::vector<std::size_t> ids;
    for (const auto& v : vendor_tokens) {
      auto vit = index_.find(v);
      if (vit == index_.end())
        continue;
      for (const auto& p : product_tokens)
        if (auto pit = vit->second.find(p); pit != vit->second.end())
          ids.insert(ids.end(), pit->second.begin(), pit->second.end());
    }
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    return ids;
  }

  auto skipped() const noexcept -> const std::vector<SkippedRecord>& {
    return skipped_;
  }
  void note_skipped(SkippedRecord s) { skipped_.push_back(std::move(s)); }

private:
  std::vector<CveRecord> records_;
  std::unordered_map<std::string,
                     std::unordered_map<std::string, std::vector<std::size_t>>>
      index_;
  std::unordered_map<std::string, std::vector<std::size_t>> by_vendor_;
  std::map<std::string, std::size_t> per_vendor_;
  std::vector<SkippedRecord> skipped_;
};

namespace detail {

inline auto parse_cve_line(std::string_view line) -> CveRecord {
  using nlohmann::json;
  const auto j = json::parse(line);
  if (!j.is_object())
    throw std::invalid_argument("record is not an object");
  auto text_field = [&](const char* key, bool required) -> std::string {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) {
      if (required)
        throw std::invalid_argument(std::string("missing ") + key);
      return {};
    }
    if (!it->is_string())
      throw std::invalid_argument(std::string(key) + " is not a string");
    return it->get<std::string>();
  };
  CveRecord r;
  r.cve_id = text_field("cve_id", true);
  if (!is_cve_id(r.cve_id))
    throw std::invalid_argument("cve_id '" + r.cve_id +
                                "' does not match CVE-YYYY-NNNN");
  r.vendor = text_field("vendor", true);
  r.product = text_field("product", true);
  r.summary = text_field("summary", false);
  r.vendor_tokens = normalize(r.vendor);
  r.product_tokens = normalize(r.product);
  if (r.vendor_tokens.empty())
    throw std::invalid_argument("vendor has no alphanumeric characters");
  if (r.product_tokens.empty())
    throw std::invalid_argument("product has no alphanumeric characters");
  if (auto it = j.find("cvss"); it != j.end() && !it->is_null()) {
    if (!it->is_number())
      throw std::invalid_argument("cvss is not a number");
    const auto v = it->get<double>();
    if (!(v >= 0.0 && v <= 10.0))
      throw std::invalid_argument("cvss outside 0.0-10.0");
    r.cvss = v;
  }
  return r;
}

} // namespace detail

/// Loads newline-delimited JSON records with fields cve_id, vendor, product,
/// summary and optional cvss. Malformed lines are skipped and recorded.
inline auto load_cve_snapshot(std::istream& in) -> CveStore {
  CveStore store;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (trim(line).empty())
      continue;
    try {
      store.add(detail::parse_cve_line(line));
    } catch (const std::exception& e) {
      store.note_skipped({n, e.what()});
    }
  }
  return store;
}

enum class MatchQuality { VendorAndProduct, VendorOnly };

inline auto to_string(MatchQuality q) -> std::string_view {
  return q == MatchQuality::VendorAndProduct ? "vendor_and_product"
                                             : "vendor_only";
}

struct MatchOptions {
  /// Report every record of the vendor when no product matches.
  bool vendor_fallback = false;
  std::size_t min_product_overlap = 1;
};

struct VulnMatches {
  std::optional<MatchQuality> quality; // empty when nothing matched
  std::vector<CveRecord> records;
};

/// cvss descending (absent last), then cve_id ascending.
inline auto cve_order(const CveRecord& a, const CveRecord& b) -> bool {
  if (a.cvss.has_value() != b.cvss.has_value())
    return a.cvss.has_value();
  if (a.cvss && *a.cvss != *b.cvss)
    return *a.cvss > *b.cvss;
  return a.cve_id < b.cve_id;
}

/// Version-agnostic: no firmware filtering is applied.
inline auto match_vulns(const CveStore& store, std::string_view vendor,
                        std::string_view product, MatchOptions opts = {})
    -> VulnMatches {
  const auto vendor_tokens = normalize(vendor);
  const auto product_tokens = normalize(product);
  VulnMatches out;
  if (vendor_tokens.empty())
    return out;

  auto collect = [&](const std::vector<std::size_t>& ids, auto&& keep) {
    std::vector<CveRecord> recs;
    for (auto id : ids)
      if (keep(store.records()[id]))
        recs.push_back(store.records()[id]);
    std::sort(recs.begin(), recs.end(), cve_order);
    std::unordered_set<std::string> seen;
    std::erase_if(recs, [&](const CveRecord& r) {
      return !seen.insert(r.cve_id).second;
    });
    return recs;
  };

  if (!product_tokens.empty() && opts.min_product_overlap > 0) {
    out.records = collect(
        store.by_vendor_product(vendor_tokens, product_tokens),
        [&](const CveRecord& r) {
          return token_overlap(product_tokens, r.product_tokens) >=
                 opts.min_product_overlap;
        });
    if (!out.records.empty()) {
      out.quality = MatchQuality::VendorAndProduct;
      return out;
    }
  }
  if (opts.vendor_fallback) {
    out.records =
        collect(store.by_vendor(vendor_tokens), [](const CveRecord&) {
          return true;
        });
    if (!out.records.empty())
      out.quality = MatchQuality::VendorOnly;
  }
  return out;
}

} // namespace macid
