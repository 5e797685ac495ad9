#pragma once

// Orchestration of a scan: load the device list, the CVE snapshot and the
// IEEE registries, observe the capture, identify every host, attach
// vulnerabilities.

#include "macid/bounded_queue.hpp"
#include "macid/capture.hpp"
#include "macid/device_db.hpp"
#include "macid/evaluate.hpp"
#include "macid/identify.hpp"
#include "macid/interarrival.hpp"
#include "macid/live.hpp"
#include "macid/observe.hpp"
#include "macid/registry.hpp"
#include "macid/vulnmap.hpp"

#include <cstddef>
#include <exception>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace macid {

enum class OutputFormat { Text, Records };

struct RunConfig {
  std::optional<std::string> pcap;
  std::optional<std::string> iface;
  std::optional<std::string> registry_mal;
  std::optional<std::string> registry_mam;
  std::optional<std::string> registry_mas;
  std::optional<std::string> device_db;
  std::optional<std::string> blacklist;
  std::optional<std::string> truth;
  std::optional<std::string> cve;
  MacDistance threshold = ma_l_span;
  ObservationPolicy policy;
  MatchOptions vuln;
  OutputFormat format = OutputFormat::Text;
  std::size_t buckets = 64;
  bool blacklist_truth = true;
  std::size_t queue_capacity = 4096;
  // live capture limits
  std::optional<double> duration_seconds;
  std::optional<std::uint64_t> packet_limit;
  const std::atomic<bool>* stop = nullptr;
};

/// Bad invocation or configuration; maps to exit status 2.
class input_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A pipeline stage failed; maps to exit status 3.
class stage_error : public std::runtime_error {
public:
  stage_error(std::string stage, const std::string& cause)
      : std::runtime_error("[" + stage + "] " + cause),
        stage_{std::move(stage)} {}

  auto stage() const noexcept -> const std::string& { return stage_; }

private:
  std::string stage_;
};

/// Exactly one of pcap / iface must be set.
inline void require_capture_input(const RunConfig& cfg) {
  if (cfg.pcap.has_value() == cfg.iface.has_value())
    throw input_error("exactly one of --pcap or --iface is required");
}

namespace detail {

inline auto open_input(const std::string& path, const std::string& stage)
    -> std::ifstream {
  std::ifstream in{path, std::ios::binary};
  if (!in)
    throw stage_error(stage, "cannot open '" + path + "'");
  return in;
}

template <class F>
auto in_stage(const std::string& stage, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const stage_error&) {
    throw;
  } catch (const std::exception& e) {
    throw stage_error(stage, e.what());
  }
}

} // namespace detail

/// Producer thread reads the source into a bounded queue; the calling
/// thread dissects packets in order. Source errors are rethrown here.
template <PacketSource Source>
auto observe_pipelined(Source& source, ObservationPolicy policy,
                       std::size_t capacity = 4096) -> ObservationResult {
  BoundedQueue<RawPacket> queue{capacity};
  std::exception_ptr failure;
  std::thread producer{[&] {
    try {
      while (auto p = source.next())
        if (!queue.push(std::move(*p)))
          break;
    } catch (...) {
      failure = std::current_exception();
    }
    queue.close();
  }};
  Observer obs{policy};
  try {
    while (auto p = queue.pop())
      obs.feed(*p);
  } catch (...) {
    queue.close();
    producer.join();
    throw;
  }
  producer.join();
  if (failure)
    std::rethrow_exception(failure);
  return {obs.take_observations(), obs.stats()};
}

struct LoadedInputs {
  DeviceDatabase db;
  std::size_t db_rows = 0;
  std::size_t db_blacklisted = 0;
  MacSet blacklist;
  std::optional<CveStore> cves;
  Registry registry;
};

/// Loads inputs in dataflow order. A missing device database is an error
/// only when `need_db` is set.
inline auto load_inputs(const RunConfig& cfg, bool need_db) -> LoadedInputs {
  LoadedInputs in;
  if (cfg.blacklist) {
    auto f = detail::open_input(*cfg.blacklist, "blacklist");
    in.blacklist = detail::in_stage("blacklist", [&] { return load_mac_list(f); });
  }
  if (cfg.device_db) {
    auto f = detail::open_input(*cfg.device_db, "device-db");
    auto loaded = detail::in_stage(
        "device-db", [&] { return load_device_db(f, in.blacklist); });
    in.db = std::move(loaded.db);
    in.db_rows = loaded.rows;
    in.db_blacklisted = loaded.blacklisted;
  } else if (need_db) {
    throw stage_error("device-db", "no device database configured "
                                   "(--device-db)");
  }
  if (cfg.cve) {
    auto f = detail::open_input(*cfg.cve, "cve");
    in.cves = detail::in_stage("cve", [&] { return load_cve_snapshot(f); });
  }
  const std::pair<const std::optional<std::string>*, PrefixKind> regs[] = {
      {&cfg.registry_mal, PrefixKind::MA_L},
      {&cfg.registry_mam, PrefixKind::MA_M},
      {&cfg.registry_mas, PrefixKind::MA_S}};
  for (const auto& [path, kind] : regs) {
    if (!*path)
      continue;
    auto f = detail::open_input(**path, "registry");
    detail::in_stage("registry", [&] {
      return load_registry_file(in.registry, kind, f);
    });
  }
  return in;
}

/// Observes the configured capture file or interface.
inline auto observe_configured(const RunConfig& cfg) -> ObservationResult {
  require_capture_input(cfg);
  if (cfg.pcap) {
    auto f = detail::open_input(*cfg.pcap, "capture");
    return detail::in_stage("capture", [&] {
      CaptureReader reader{f};
      return observe_pipelined(reader, cfg.policy, cfg.queue_capacity);
    });
  }
  return detail::in_stage("capture", [&] {
    LiveOptions opts;
    opts.interface = *cfg.iface;
    if (cfg.duration_seconds)
      opts.duration = std::chrono::milliseconds{
          static_cast<long long>(*cfg.duration_seconds * 1000.0)};
    opts.max_packets = cfg.packet_limit;
    opts.stop = cfg.stop;
    LiveCapture live{opts};
    return observe_pipelined(live, cfg.policy, cfg.queue_capacity);
  });
}

struct DeviceReport {
  IdentificationResult id;
  ArrivalStats arrival;
  std::vector<Ipv4Address> ips; // distinct, ascending
  VulnMatches vulns;
};

struct ScanReport {
  CaptureStats capture;
  std::vector<DeviceReport> devices; // ascending by MAC
  std::optional<CoverageEstimate> coverage;
  std::size_t known_devices = 0;
  std::size_t registry_entries = 0;
  std::optional<std::size_t> cve_records;

  auto hosts_discovered() const noexcept -> std::size_t {
    return devices.size();
  }
  auto count(Category c) const -> std::size_t {
    std::size_t n = 0;
    for (const auto& d : devices)
      n += d.id.category == c;
    return n;
  }
  auto identified() const -> std::size_t {
    return count(Category::ExactOrProductGuess);
  }
  auto identification_rate() const -> double {
    return devices.empty() ? 0.0
                           : static_cast<double>(identified()) /
                                 static_cast<double>(devices.size());
  }
};

inline auto ips_by_mac(const std::vector<Observation>& obs)
    -> std::map<MacAddress, std::vector<Ipv4Address>> {
  std::map<MacAddress, std::set<Ipv4Address>> sets;
  for (const auto& o : obs)
    sets[o.mac].insert(o.ip);
  std::map<MacAddress, std::vector<Ipv4Address>> out;
  for (auto& [mac, s] : sets)
    out.emplace(mac, std::vector<Ipv4Address>(s.begin(), s.end()));
  return out;
}

inline auto vulns_for(const IdentificationResult& id,
                      const std::optional<CveStore>& cves,
                      const MatchOptions& opts) -> VulnMatches {
  if (!cves)
    return {};
  if (id.match)
    return match_vulns(*cves, id.match->vendor, id.match->product, opts);
  if (id.registry_vendor && opts.vendor_fallback)
    return match_vulns(*cves, id.registry_vendor->organization, "", opts);
  return {};
}

/// Merges observations with the loaded inputs.
inline auto build_scan_report(const LoadedInputs& in,
                              const ObservationResult& observed,
                              const RunConfig& cfg) -> ScanReport {
  ScanReport report;
  report.capture = observed.stats;
  report.known_devices = in.db.size();
  report.registry_entries = in.registry.size();
  if (in.cves)
    report.cve_records = in.cves->size();

  const auto series = build_series(observed.observations);
  const auto arrival = all_stats(series);
  const auto ips = ips_by_mac(observed.observations);
  std::vector<MacAddress> macs;
  macs.reserve(series.size());
  for (const auto& [mac, s] : series)
    macs.push_back(mac);

  auto ids = detail::in_stage("merge", [&] {
    return identify_all(in.db, in.registry, macs, cfg.threshold);
  });
  for (auto& id : ids) {
    DeviceReport d;
    d.arrival = arrival.at(id.query);
    d.ips = ips.at(id.query);
    d.vulns = detail::in_stage(
        "vulnmap", [&] { return vulns_for(id, in.cves, cfg.vuln); });
    d.id = std::move(id);
    report.devices.push_back(std::move(d));
  }
  try {
    report.coverage = coverage(arrival);
  } catch (const coverage_error&) {
  }
  return report;
}

/// Runs the full scan over an already opened packet source.
template <PacketSource Source>
auto analyze_source(const RunConfig& cfg, Source& source) -> ScanReport {
  const auto in = load_inputs(cfg, true);
  const auto observed = detail::in_stage("capture", [&] {
    return observe_pipelined(source, cfg.policy, cfg.queue_capacity);
  });
  return build_scan_report(in, observed, cfg);
}

inline auto run_analyze(const RunConfig& cfg) -> ScanReport {
  require_capture_input(cfg);
  const auto in = load_inputs(cfg, true);
  const auto observed = observe_configured(cfg);
  return build_scan_report(in, observed, cfg);
}

struct CoverageReport {
  CaptureStats capture;
  StatsMap devices;
  std::optional<CoverageEstimate> coverage;
};

inline auto coverage_from(const ObservationResult& observed)
    -> CoverageReport {
  CoverageReport r;
  r.capture = observed.stats;
  r.devices = all_stats(build_series(observed.observations));
  try {
    r.coverage = coverage(r.devices);
  } catch (const coverage_error&) {
  }
  return r;
}

inline auto run_coverage(const RunConfig& cfg) -> CoverageReport {
  return coverage_from(observe_configured(cfg));
}

struct EvaluationReport {
  CaptureStats capture;
  Evaluation evaluation;
  MacDistance threshold;
  bool blacklist_truth = true;
};

inline auto run_evaluate(const RunConfig& cfg) -> EvaluationReport {
  require_capture_input(cfg);
  const auto in = load_inputs(cfg, true);
  if (!cfg.truth)
    throw stage_error("truth", "no truth file configured (--truth)");
  auto tf = detail::open_input(*cfg.truth, "truth");
  const auto truth = detail::in_stage("truth", [&] { return load_truth(tf); });
  const auto observed = observe_configured(cfg);
  MacSet seen;
  for (const auto& o : observed.observations)
    seen.insert(o.mac);
  EvaluationReport r;
  r.capture = observed.stats;
  r.threshold = cfg.threshold;
  r.blacklist_truth = cfg.blacklist_truth;
  r.evaluation = detail::in_stage("merge", [&] {
    return evaluate(in.db, in.registry, truth, seen,
                    {cfg.threshold, cfg.blacklist_truth});
  });
  return r;
}

} // namespace macid
