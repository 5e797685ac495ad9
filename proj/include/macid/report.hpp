#pragma once

// Text and newline-delimited JSON renderings of scan, coverage, evaluation
// and database-check results. Record layouts are described in
// docs/records.md; bump `schema_version` on any incompatible change.

#include "macid/device_db.hpp"
#include "macid/pipeline.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <ostream>
#include <string>

namespace macid {

inline constexpr int schema_version = 1;

inline constexpr std::string_view band_convention =
    "exact: 0, high: <=0xFFF, medium: <=0xFFFFF, low: <=0xFFFFFF, "
    "distant: above (tool-defined bands)";

namespace detail {

using record = nlohmann::ordered_json;

inline auto new_record(std::string_view kind) -> record {
  record r;
  r["record"] = kind;
  r["schema_version"] = schema_version;
  return r;
}

inline void emit(std::ostream& out, const record& r) {
  out << r.dump() << '\n';
}

inline auto optional_text(const std::optional<std::string>& s) -> record {
  return s ? record(*s) : record(nullptr);
}

inline auto seconds_or_null(const std::optional<Nanos>& t) -> record {
  return t ? record(to_seconds(*t)) : record(nullptr);
}

inline auto seconds_text(std::optional<double> s) -> std::string {
  return s ? fmt::format("{:.3f}", *s) : std::string("-");
}

inline auto capture_json(const CaptureStats& s) -> record {
  record r;
  r["total_packets"] = s.total_packets;
  r["arp_packets"] = s.arp_packets;
  r["arp_fraction"] = s.arp_fraction();
  r["observations"] = s.observations;
  r["malformed_arp"] = s.malformed_arp;
  r["group_senders"] = s.group_senders;
  r["distinct_macs"] = s.distinct_macs;
  return r;
}

inline void arrival_json(record& r, const ArrivalStats& a) {
  r["packets"] = a.packet_count;
  r["gaps"] = a.gap_count;
  r["mean_s"] = a.mean ? record(*a.mean) : record(nullptr);
  r["max_s"] = seconds_or_null(a.max);
  if (a.quartiles) {
    r["min_s"] = a.quartiles->min;
    r["q1_s"] = a.quartiles->q1;
    r["median_s"] = a.quartiles->median;
    r["q3_s"] = a.quartiles->q3;
  } else {
    r["min_s"] = nullptr;
    r["q1_s"] = nullptr;
    r["median_s"] = nullptr;
    r["q3_s"] = nullptr;
  }
}

inline void identification_json(record& r, const IdentificationResult& id) {
  r["category"] = to_string(id.category);
  r["vendor"] = optional_text(id.vendor());
  r["product_guess"] =
      id.match ? record(id.match->product) : record(nullptr);
  r["guess_mac"] =
      id.match ? record(format_mac(id.match->mac)) : record(nullptr);
  r["distance"] =
      id.distance ? record(format_distance(*id.distance)) : record(nullptr);
  r["band"] = id.band ? record(to_string(*id.band)) : record(nullptr);
  if (id.registry_vendor) {
    r["registry_vendor"] = id.registry_vendor->organization;
    r["registry_block"] = to_string(id.registry_vendor->kind);
  } else {
    r["registry_vendor"] = nullptr;
    r["registry_block"] = nullptr;
  }
}

inline auto capture_summary_line(const CaptureStats& s) -> std::string {
  return fmt::format("packets: {} total, {} ARP ({:.2f}%), {} malformed ARP, "
                     "{} observations",
                     s.total_packets, s.arp_packets, 100.0 * s.arp_fraction(),
                     s.malformed_arp, s.observations);
}

} // namespace detail

inline void write_scan_records(std::ostream& out, const ScanReport& rep) {
  using detail::record;
  for (const auto& d : rep.devices) {
    auto r = detail::new_record("device");
    r["mac"] = format_mac(d.id.query);
    auto ips = record::array();
    for (auto ip : d.ips)
      ips.push_back(format_ipv4(ip));
    r["ips"] = std::move(ips);
    detail::identification_json(r, d.id);
    detail::arrival_json(r, d.arrival);
    r["vuln_match"] =
        d.vulns.quality ? record(to_string(*d.vulns.quality)) : record(nullptr);
    r["version_agnostic"] = true;
    auto vulns = record::array();
    for (const auto& c : d.vulns.records) {
      record v;
      v["cve_id"] = c.cve_id;
      v["cvss"] = c.cvss ? record(*c.cvss) : record(nullptr);
      v["summary"] = c.summary;
      vulns.push_back(std::move(v));
    }
    r["vulnerabilities"] = std::move(vulns);
    detail::emit(out, r);
  }
  auto s = detail::new_record("summary");
  s["capture"] = detail::capture_json(rep.capture);
  s["hosts_discovered"] = rep.hosts_discovered();
  s["identified"] = rep.identified();
  s["vendor_only"] = rep.count(Category::VendorOnly);
  s["unidentified"] = rep.count(Category::NoIdentification);
  s["identification_rate"] = rep.identification_rate();
  s["coverage_s"] = rep.coverage ? record(to_seconds(rep.coverage->coverage))
                                 : record(nullptr);
  s["coverage_mac"] = rep.coverage
                          ? record(format_mac(rep.coverage->limiting_mac))
                          : record(nullptr);
  s["known_devices"] = rep.known_devices;
  s["registry_entries"] = rep.registry_entries;
  s["cve_records"] =
      rep.cve_records ? record(*rep.cve_records) : record(nullptr);
  s["band_convention"] = band_convention;
  detail::emit(out, s);
}

inline void write_scan_text(std::ostream& out, const ScanReport& rep) {
  out << detail::capture_summary_line(rep.capture) << '\n';
  out << fmt::format("{:<17}  {:<15}  {:<22}  {:<20}  {:<8}  {:<7}  {:>6}  "
                     "{:>8}  {:>8}  {}\n",
                     "MAC", "IP", "VENDOR", "PRODUCT GUESS", "DISTANCE",
                     "BAND", "PKTS", "MEAN S", "MAX S", "CVES");
  for (const auto& d : rep.devices) {
    const auto vendor = d.id.vendor().value_or("-");
    const auto product = d.id.match ? d.id.match->product : "-";
    const auto dist =
        d.id.distance ? format_distance(*d.id.distance) : std::string("-");
    const auto band =
        d.id.band ? std::string(to_string(*d.id.band)) : std::string("-");
    const auto ip = d.ips.empty() ? std::string("-") : format_ipv4(d.ips[0]);
    std::string cves = std::to_string(d.vulns.records.size());
    if (d.vulns.quality == MatchQuality::VendorOnly)
      cves += " (vendor-level)";
    out << fmt::format(
        "{:<17}  {:<15}  {:<22.22}  {:<20.20}  {:<8}  {:<7}  {:>6}  {:>8}  "
        "{:>8}  {}\n",
        format_mac(d.id.query), ip, vendor, product,
        d.id.category == Category::ExactOrProductGuess ? dist : "-", band,
        d.arrival.packet_count, detail::seconds_text(d.arrival.mean),
        detail::seconds_text(d.arrival.max
                                 ? std::optional(to_seconds(*d.arrival.max))
                                 : std::nullopt),
        cves);
    for (const auto& c : d.vulns.records)
      out << fmt::format("    {:<16} cvss {:>4}  {}\n", c.cve_id,
                         c.cvss ? fmt::format("{:.1f}", *c.cvss) : "-",
                         c.summary);
  }
  if (rep.coverage)
    out << fmt::format("coverage: {:.3f} s (limited by {})\n",
                       to_seconds(rep.coverage->coverage),
                       format_mac(rep.coverage->limiting_mac));
  else
    out << "coverage: undefined (no device observed more than once)\n";
  out << fmt::format("hosts discovered: {}, identified: {}, vendor only: {}, "
                     "unidentified: {}, identification rate: {:.2f}%\n",
                     rep.hosts_discovered(), rep.identified(),
                     rep.count(Category::VendorOnly),
                     rep.count(Category::NoIdentification),
                     100.0 * rep.identification_rate());
  out << "vulnerability matches ignore firmware versions\n";
  out << "bands: " << band_convention << '\n';
}

inline void write_scan(std::ostream& out, const ScanReport& rep,
                       OutputFormat fmt) {
  if (fmt == OutputFormat::Records)
    write_scan_records(out, rep);
  else
    write_scan_text(out, rep);
}

inline void write_coverage(std::ostream& out, const CoverageReport& rep,
                           OutputFormat format) {
  using detail::record;
  if (format == OutputFormat::Records) {
    for (const auto& [mac, a] : rep.devices) {
      auto r = detail::new_record("arrival");
      r["mac"] = format_mac(mac);
      detail::arrival_json(r, a);
      detail::emit(out, r);
    }
    auto s = detail::new_record("coverage");
    s["capture"] = detail::capture_json(rep.capture);
    s["devices"] = rep.devices.size();
    s["coverage_s"] = rep.coverage ? record(to_seconds(rep.coverage->coverage))
                                   : record(nullptr);
    s["coverage_mac"] = rep.coverage
                            ? record(format_mac(rep.coverage->limiting_mac))
                            : record(nullptr);
    detail::emit(out, s);
    return;
  }
  out << detail::capture_summary_line(rep.capture) << '\n';
  out << fmt::format("{:<17}  {:>6}  {:>9}  {:>9}  {:>9}  {:>9}  {:>9}  "
                     "{:>9}\n",
                     "MAC", "PKTS", "MEAN S", "MIN S", "Q1 S", "MEDIAN S",
                     "Q3 S", "MAX S");
  for (const auto& [mac, a] : rep.devices) {
    auto q = [&](double GapQuartiles::*field) -> std::optional<double> {
      if (!a.quartiles)
        return std::nullopt;
      return (*a.quartiles).*field;
    };
    out << fmt::format(
        "{:<17}  {:>6}  {:>9}  {:>9}  {:>9}  {:>9}  {:>9}  {:>9}\n",
        format_mac(mac), a.packet_count, detail::seconds_text(a.mean),
        detail::seconds_text(q(&GapQuartiles::min)),
        detail::seconds_text(q(&GapQuartiles::q1)),
        detail::seconds_text(q(&GapQuartiles::median)),
        detail::seconds_text(q(&GapQuartiles::q3)),
        detail::seconds_text(q(&GapQuartiles::max)));
  }
  if (rep.coverage)
    out << fmt::format("coverage: {:.3f} s (limited by {})\n",
                       to_seconds(rep.coverage->coverage),
                       format_mac(rep.coverage->limiting_mac));
  else
    out << "coverage: undefined (no device observed more than once)\n";
}

inline void write_evaluation(std::ostream& out, const EvaluationReport& rep,
                             OutputFormat format) {
  using detail::record;
  const auto& ev = rep.evaluation;
  if (format == OutputFormat::Records) {
    for (const auto& row : ev.rows) {
      auto r = detail::new_record("evaluation");
      r["label"] = row.truth.label;
      r["mac"] = format_mac(row.truth.mac);
      r["truth_vendor"] = row.truth.vendor;
      r["truth_product"] = row.truth.product;
      detail::identification_json(r, row.result);
      r["verdict"] = to_string(row.verdict);
      detail::emit(out, r);
    }
    for (const auto& t : ev.not_in_capture) {
      auto r = detail::new_record("not_in_capture");
      r["label"] = t.label;
      r["mac"] = format_mac(t.mac);
      detail::emit(out, r);
    }
    auto s = detail::new_record("evaluation_summary");
    s["capture"] = detail::capture_json(rep.capture);
    s["scored"] = ev.scored();
    s["not_in_capture"] = ev.not_in_capture.size();
    for (auto v : {Verdict::Correct, Verdict::CorrectVendorWrongDevice,
                   Verdict::OnlyVendor, Verdict::NoIdentification,
                   Verdict::WrongVendor})
      s[std::string(to_string(v))] = ev.count(v);
    s["identification_rate"] = ev.identification_rate();
    s["discovery_rate"] = ev.discovery_rate();
    s["threshold"] = format_distance(rep.threshold);
    s["truth_blacklisted"] = rep.blacklist_truth;
    detail::emit(out, s);
    return;
  }
  out << fmt::format("{:<8}  {:<17}  {:<10}  {:<28}  {}\n", "DEVICE", "MAC",
                     "DISTANCE", "RESULT", "GUESS");
  for (const auto& row : ev.rows) {
    const auto& id = row.result;
    out << fmt::format(
        "{:<8}  {:<17}  {:<10}  {:<28}  {}\n",
        row.truth.label.empty() ? "-" : row.truth.label,
        format_mac(row.truth.mac),
        id.distance ? format_distance(*id.distance) : std::string("-"),
        to_string(row.verdict),
        id.match ? id.match->vendor + " " + id.match->product
                 : id.vendor().value_or("-"));
  }
  for (const auto& t : ev.not_in_capture)
    out << fmt::format("not in capture: {} {}\n", format_mac(t.mac), t.label);
  out << fmt::format(
      "scored: {}, correct: {}, correct vendor/wrong device: {}, only "
      "vendor: {}, none: {}, wrong vendor: {}\n",
      ev.scored(), ev.count(Verdict::Correct),
      ev.count(Verdict::CorrectVendorWrongDevice),
      ev.count(Verdict::OnlyVendor), ev.count(Verdict::NoIdentification),
      ev.count(Verdict::WrongVendor));
  out << fmt::format("discovery rate: {:.2f}%, identification rate: {:.2f}%\n",
                     100.0 * ev.discovery_rate(),
                     100.0 * ev.identification_rate());
}

struct DbCheckReport {
  std::size_t rows = 0;
  std::size_t blacklisted = 0;
  std::size_t devices = 0;
  std::size_t merged_duplicates = 0;
  std::map<std::string, std::size_t> devices_per_vendor;
  std::vector<OuiHistogram> histogram;
  std::size_t buckets = 64;
  std::optional<std::size_t> registry_entries;
  std::optional<CveStore> cves;
};

inline auto run_db_check(const RunConfig& cfg,
                         std::optional<std::string> vendor_filter = {})
    -> DbCheckReport {
  const auto in = load_inputs(cfg, true);
  DbCheckReport r;
  r.rows = in.db_rows;
  r.blacklisted = in.db_blacklisted;
  r.devices = in.db.size();
  r.merged_duplicates = in.db.merged_duplicates();
  for (const auto& d : in.db.devices())
    ++r.devices_per_vendor[d.vendor];
  r.buckets = cfg.buckets;
  r.histogram = detail::in_stage("device-db", [&] {
    return ma_l_histogram(in.db, vendor_filter
                                     ? std::optional<std::string_view>(
                                           *vendor_filter)
                                     : std::nullopt,
                          cfg.buckets);
  });
  if (cfg.registry_mal || cfg.registry_mam || cfg.registry_mas)
    r.registry_entries = in.registry.size();
  r.cves = in.cves;
  return r;
}

inline void write_db_check(std::ostream& out, const DbCheckReport& rep,
                           OutputFormat format) {
  using detail::record;
  if (format == OutputFormat::Records) {
    for (const auto& h : rep.histogram) {
      auto r = detail::new_record("ma_l_histogram");
      r["oui"] = Registry::hex_prefix({PrefixKind::MA_L, h.oui});
      r["buckets"] = h.counts.size();
      r["counts"] = h.counts;
      r["total"] = h.total();
      detail::emit(out, r);
    }
    auto s = detail::new_record("db_check");
    s["rows"] = rep.rows;
    s["blacklisted"] = rep.blacklisted;
    s["devices"] = rep.devices;
    s["merged_duplicates"] = rep.merged_duplicates;
    s["devices_per_vendor"] = rep.devices_per_vendor;
    s["registry_entries"] = rep.registry_entries
                                ? record(*rep.registry_entries)
                                : record(nullptr);
    if (rep.cves) {
      s["cve_records"] = rep.cves->size();
      s["cve_per_vendor"] = rep.cves->vendor_counts();
      auto skipped = record::array();
      for (const auto& k : rep.cves->skipped())
        skipped.push_back({{"line", k.line}, {"reason", k.reason}});
      s["cve_skipped"] = std::move(skipped);
    } else {
      s["cve_records"] = nullptr;
    }
    detail::emit(out, s);
    return;
  }
  out << fmt::format("device rows: {}, blacklisted: {}, devices: {}, merged "
                     "duplicates: {}\n",
                     rep.rows, rep.blacklisted, rep.devices,
                     rep.merged_duplicates);
  for (const auto& [vendor, n] : rep.devices_per_vendor)
    out << fmt::format("  {:<32} {:>6}\n", vendor, n);
  if (rep.registry_entries)
    out << fmt::format("registry entries: {}\n", *rep.registry_entries);
  if (rep.cves) {
    out << fmt::format("cve records: {} ({} skipped)\n", rep.cves->size(),
                       rep.cves->skipped().size());
    for (const auto& [vendor, n] : rep.cves->vendor_counts())
      out << fmt::format("  {:<32} {:>6}\n", vendor, n);
    for (const auto& k : rep.cves->skipped())
      out << fmt::format("  skipped line {}: {}\n", k.line, k.reason);
  }
  out << fmt::format("MA-L histograms ({} buckets of {} addresses):\n",
                     rep.buckets, (std::uint64_t{1} << 24) / rep.buckets);
  for (const auto& h : rep.histogram) {
    out << fmt::format("  {} ({} devices):",
                       Registry::hex_prefix({PrefixKind::MA_L, h.oui}),
                       h.total());
    for (auto c : h.counts)
      out << ' ' << c;
    out << '\n';
  }
}

} // namespace macid
