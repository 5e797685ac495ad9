// macid: passive MAC-based asset discovery and identification.

#include "curl_fetcher.hpp"

#include <macid/config.hpp>
#include <macid/fetch.hpp>
#include <macid/pipeline.hpp>
#include <macid/report.hpp>

#include <CLI11.hpp>

#include <atomic>
#include <csignal>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>

namespace {

constexpr int exit_input_error = 2;
constexpr int exit_stage_failure = 3;

std::atomic<bool> stop_requested{false};

extern "C" void on_signal(int) { stop_requested.store(true); }

/// Flags shared by the scanning subcommands. Only flags that were given on
/// the command line override the config file.
struct Flags {
  std::string config;
  std::string pcap, iface, device_db, blacklist, truth, cve;
  std::string registry_mal, registry_mam, registry_mas;
  std::string threshold, format, out;
  std::size_t buckets = 64;
  std::size_t min_product_overlap = 1;
  bool include_replies = false;
  bool vuln_fallback = false;
  bool no_blacklist_truth = false;
  double duration = 0;
  std::uint64_t count = 0;

  std::map<std::string, CLI::Option*> opts;

  auto given(const std::string& name) const -> bool {
    auto it = opts.find(name);
    return it != opts.end() && it->second->count() > 0;
  }
};

void add_common(CLI::App& cmd, Flags& f, bool capture, bool identification) {
  f.opts["config"] = cmd.add_option("--config", f.config,
                                    "JSON config file; flags override it");
  if (capture) {
    f.opts["pcap"] = cmd.add_option("--pcap", f.pcap, "pcap or pcap-ng file");
    f.opts["iface"] =
        cmd.add_option("--iface", f.iface, "interface for receive-only capture");
    f.opts["include-replies"] = cmd.add_flag(
        "--include-replies", f.include_replies,
        "also observe senders of unicast ARP replies");
  }
  if (identification) {
    f.opts["device-db"] =
        cmd.add_option("--device-db", f.device_db, "known-device CSV");
    f.opts["registry-mal"] =
        cmd.add_option("--registry-mal", f.registry_mal, "IEEE MA-L CSV");
    f.opts["registry-mam"] =
        cmd.add_option("--registry-mam", f.registry_mam, "IEEE MA-M CSV");
    f.opts["registry-mas"] =
        cmd.add_option("--registry-mas", f.registry_mas, "IEEE MA-S CSV");
    f.opts["cve"] = cmd.add_option("--cve", f.cve, "CVE snapshot (JSON lines)");
    f.opts["blacklist"] = cmd.add_option(
        "--blacklist", f.blacklist, "MACs to drop from the device database");
    f.opts["threshold"] = cmd.add_option(
        "--threshold", f.threshold,
        "largest distance (hex) accepted for a product guess [0xFFFFFF]");
    f.opts["vuln-fallback"] =
        cmd.add_flag("--vuln-fallback", f.vuln_fallback,
                     "list vendor-level CVEs when no product matches");
    f.opts["min-product-overlap"] = cmd.add_option(
        "--min-product-overlap", f.min_product_overlap,
        "product tokens that must match a CVE record [1]");
  }
  f.opts["format"] =
      cmd.add_option("--format", f.format, "text or records [text]");
  f.opts["buckets"] =
      cmd.add_option("--buckets", f.buckets, "histogram buckets [64]");
  f.opts["out"] = cmd.add_option("--out", f.out, "write report to a file");
}

auto build_config(const Flags& f) -> macid::RunConfig {
  macid::RunConfig cfg;
  if (f.given("config"))
    macid::apply_config_file(cfg, f.config);
  auto set = [&](const char* name, std::optional<std::string>& dst,
                 const std::string& v) {
    if (f.given(name))
      dst = v;
  };
  set("pcap", cfg.pcap, f.pcap);
  set("iface", cfg.iface, f.iface);
  set("device-db", cfg.device_db, f.device_db);
  set("blacklist", cfg.blacklist, f.blacklist);
  set("truth", cfg.truth, f.truth);
  set("cve", cfg.cve, f.cve);
  set("registry-mal", cfg.registry_mal, f.registry_mal);
  set("registry-mam", cfg.registry_mam, f.registry_mam);
  set("registry-mas", cfg.registry_mas, f.registry_mas);
  if (f.given("threshold"))
    cfg.threshold = macid::parse_threshold(f.threshold);
  if (f.given("format"))
    cfg.format = macid::parse_output_format(f.format);
  if (f.given("buckets"))
    cfg.buckets = f.buckets;
  if (f.given("include-replies"))
    cfg.policy.include_replies = f.include_replies;
  if (f.given("vuln-fallback"))
    cfg.vuln.vendor_fallback = f.vuln_fallback;
  if (f.given("min-product-overlap"))
    cfg.vuln.min_product_overlap = f.min_product_overlap;
  if (f.given("no-blacklist-truth"))
    cfg.blacklist_truth = !f.no_blacklist_truth;
  if (f.given("duration"))
    cfg.duration_seconds = f.duration;
  if (f.given("count"))
    cfg.packet_limit = f.count;
  macid::check_settings(cfg);
  return cfg;
}

/// Runs `write` against stdout or the --out file.
template <class Write>
void with_output(const Flags& f, Write&& write) {
  if (!f.given("out")) {
    write(std::cout);
    return;
  }
  std::ofstream out{f.out, std::ios::binary | std::ios::trunc};
  if (!out)
    throw macid::input_error("cannot write '" + f.out + "'");
  write(out);
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Passive MAC-based asset discovery and identification"};
  app.require_subcommand(1);

  Flags analyze_f, live_f, coverage_f, evaluate_f, db_f;

  auto* analyze = app.add_subcommand(
      "analyze", "identify hosts in a capture and map vulnerabilities");
  add_common(*analyze, analyze_f, true, true);

  auto* live = app.add_subcommand(
      "live", "capture from an interface (receive-only), then analyze");
  add_common(*live, live_f, true, true);
  live_f.opts["duration"] = live->add_option(
      "--duration", live_f.duration, "stop after this many seconds");
  live_f.opts["count"] =
      live->add_option("--count", live_f.count, "stop after this many packets");

  auto* cov = app.add_subcommand(
      "coverage", "per-device ARP interarrival statistics and coverage time");
  add_common(*cov, coverage_f, true, false);

  auto* eval = app.add_subcommand(
      "evaluate", "score identification against a ground-truth file");
  add_common(*eval, evaluate_f, true, true);
  evaluate_f.opts["truth"] = eval->add_option(
      "--truth", evaluate_f.truth, "ground truth CSV (mac,vendor,product)");
  evaluate_f.opts["no-blacklist-truth"] = eval->add_flag(
      "--no-blacklist-truth", evaluate_f.no_blacklist_truth,
      "keep truth devices in the database while matching");

  auto* db = app.add_subcommand("db", "device database utilities");
  db->require_subcommand(1);
  auto* db_check = db->add_subcommand(
      "check", "validate the device database and print MA-L histograms");
  add_common(*db_check, db_f, false, true);
  std::string vendor_filter;
  auto* vendor_opt = db_check->add_option(
      "--vendor", vendor_filter, "restrict histograms to one vendor");

  auto* fetch = app.add_subcommand(
      "fetch", "download registry or CVE snapshots (the only network access)");
  std::string fetch_url, fetch_out, fetch_kind = "raw", ieee_dir;
  fetch->add_option("--url", fetch_url, "source URL");
  fetch->add_option("--out", fetch_out, "destination file");
  fetch->add_option("--kind", fetch_kind,
                    "raw, registry-mal, registry-mam, registry-mas or cve");
  fetch->add_option("--ieee-dir", ieee_dir,
                    "download all three IEEE registries into a directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : exit_input_error;
  }

  try {
    if (analyze->parsed()) {
      const auto cfg = build_config(analyze_f);
      const auto report = macid::run_analyze(cfg);
      with_output(analyze_f, [&](std::ostream& out) {
        macid::write_scan(out, report, cfg.format);
      });
    } else if (live->parsed()) {
      auto cfg = build_config(live_f);
      if (!cfg.iface)
        throw macid::input_error("live requires --iface");
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      cfg.stop = &stop_requested;
      const auto report = macid::run_analyze(cfg);
      with_output(live_f, [&](std::ostream& out) {
        macid::write_scan(out, report, cfg.format);
      });
    } else if (cov->parsed()) {
      const auto cfg = build_config(coverage_f);
      const auto report = macid::run_coverage(cfg);
      with_output(coverage_f, [&](std::ostream& out) {
        macid::write_coverage(out, report, cfg.format);
      });
    } else if (eval->parsed()) {
      const auto cfg = build_config(evaluate_f);
      const auto report = macid::run_evaluate(cfg);
      with_output(evaluate_f, [&](std::ostream& out) {
        macid::write_evaluation(out, report, cfg.format);
      });
    } else if (db_check->parsed()) {
      const auto cfg = build_config(db_f);
      const auto report = macid::run_db_check(
          cfg, vendor_opt->count() ? std::optional(vendor_filter)
                                   : std::nullopt);
      with_output(db_f, [&](std::ostream& out) {
        macid::write_db_check(out, report, cfg.format);
      });
    } else if (fetch->parsed()) {
      const macid::Fetcher fetcher = macid_tools::curl_fetch;
      if (!ieee_dir.empty()) {
        for (const auto& src : macid::ieee_sources) {
          const auto kind = src.kind == macid::PrefixKind::MA_L
                                ? macid::SnapshotKind::RegistryMaL
                            : src.kind == macid::PrefixKind::MA_M
                                ? macid::SnapshotKind::RegistryMaM
                                : macid::SnapshotKind::RegistryMaS;
          const auto dest = std::filesystem::path(ieee_dir) / src.file_name;
          const auto summary =
              macid::fetch_snapshot(fetcher, std::string(src.url), dest, kind);
          std::cout << dest.string() << ": " << summary << '\n';
        }
      } else {
        if (fetch_url.empty() || fetch_out.empty())
          throw macid::input_error("fetch needs --url and --out, or --ieee-dir");
        macid::SnapshotKind kind;
        if (fetch_kind == "raw")
          kind = macid::SnapshotKind::Raw;
        else if (fetch_kind == "registry-mal")
          kind = macid::SnapshotKind::RegistryMaL;
        else if (fetch_kind == "registry-mam")
          kind = macid::SnapshotKind::RegistryMaM;
        else if (fetch_kind == "registry-mas")
          kind = macid::SnapshotKind::RegistryMaS;
        else if (fetch_kind == "cve")
          kind = macid::SnapshotKind::Cve;
        else
          throw macid::input_error("unknown --kind '" + fetch_kind + "'");
        const auto summary =
            macid::fetch_snapshot(fetcher, fetch_url, fetch_out, kind);
        std::cout << fetch_out << ": " << summary << '\n';
      }
    }
  } catch (const macid::input_error& e) {
    std::cerr << "macid: " << e.what() << '\n';
    return exit_input_error;
  } catch (const macid::stage_error& e) {
    std::cerr << "macid: " << e.what() << '\n';
    return exit_stage_failure;
  } catch (const std::exception& e) {
    std::cerr << "macid: " << e.what() << '\n';
    return exit_stage_failure;
  }
  return 0;
}
