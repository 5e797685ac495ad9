#include "test_support.hpp"

#include <macid/bounded_queue.hpp>
#include <macid/config.hpp>
#include <macid/fetch.hpp>
#include <macid/live.hpp>
#include <macid/pipeline.hpp>
#include <macid/report.hpp>

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

using namespace macid;
using namespace macid::test;
namespace fs = std::filesystem;

namespace {

auto bundle_config() -> RunConfig {
  RunConfig cfg;
  cfg.pcap = data_path("bundle/capture.pcap");
  cfg.device_db = data_path("bundle/devices.csv");
  cfg.registry_mal = data_path("bundle/mal.csv");
  cfg.cve = data_path("bundle/cve.jsonl");
  return cfg;
}

// Stand-in for a network link: yields frames and counts anything sent.
struct CountingLink {
  std::vector<RawPacket> frames;
  std::size_t at = 0;
  std::size_t transmitted = 0;

  auto next() -> std::optional<RawPacket> {
    if (at == frames.size())
      return std::nullopt;
    return frames[at++];
  }
  void send(std::span<const std::uint8_t>) { ++transmitted; }
};

template <class T>
concept CanTransmit = requires(T& t, std::span<const std::uint8_t> frame) {
  t.send(frame);
} || requires(T& t, std::span<const std::uint8_t> frame) {
  t.write(frame);
} || requires(T& t, std::span<const std::uint8_t> frame) {
  t.inject(frame);
} || requires(T& t, const RawPacket& p) { t.send(p); } ||
                      requires(T& t, const RawPacket& p) { t.write(p); };

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("macid-test-" + std::to_string(::getpid()) + "-" +
            std::to_string(std::hash<std::thread::id>{}(std::this_thread::get_id())));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

} // namespace

TEST(Analyze, BundleReport) {
  const auto rep = run_analyze(bundle_config());
  EXPECT_EQ(rep.capture.total_packets, 10u);
  EXPECT_EQ(rep.capture.arp_packets, 3u);
  ASSERT_EQ(rep.hosts_discovered(), 1u);
  const auto& d = rep.devices[0];
  EXPECT_EQ(format_mac(d.id.query), "28:63:36:C6:C7:D4");
  EXPECT_EQ(d.id.category, Category::ExactOrProductGuess);
  EXPECT_EQ(d.id.match->product, "CPU 1211C");
  EXPECT_EQ(format_distance(*d.id.distance), "0x000493");
  EXPECT_EQ(d.id.band, ConfidenceBand::High);
  EXPECT_EQ(d.id.registry_vendor->organization, "Siemens AG");
  EXPECT_DOUBLE_EQ(*d.arrival.mean, 15.0);
  EXPECT_EQ(*d.arrival.max, seconds(20));
  ASSERT_EQ(d.ips.size(), 1u);
  EXPECT_EQ(format_ipv4(d.ips[0]), "192.168.0.10");
  ASSERT_EQ(d.vulns.records.size(), 1u);
  EXPECT_EQ(d.vulns.records[0].cve_id, "CVE-2000-0001");
  ASSERT_TRUE(rep.coverage);
  EXPECT_EQ(rep.coverage->coverage, seconds(20));
  EXPECT_EQ(rep.known_devices, 3u);
  EXPECT_EQ(rep.registry_entries, 2u);
  EXPECT_DOUBLE_EQ(rep.identification_rate(), 1.0);
}

TEST(Analyze, RecordsAreDeterministic) {
  auto render = [] {
    auto cfg = bundle_config();
    cfg.format = OutputFormat::Records;
    std::ostringstream out;
    write_scan(out, run_analyze(cfg), cfg.format);
    return out.str();
  };
  const auto first = render();
  EXPECT_EQ(first, render());
  // Every line is a standalone JSON object carrying the schema version.
  std::istringstream lines{first};
  std::string line;
  std::size_t n = 0;
  while (std::getline(lines, line)) {
    const auto j = nlohmann::json::parse(line);
    EXPECT_EQ(j.at("schema_version"), schema_version);
    ++n;
  }
  EXPECT_GE(n, 2u);
}

TEST(Analyze, TextOutputMentionsTheDevice) {
  std::ostringstream out;
  write_scan(out, run_analyze(bundle_config()), OutputFormat::Text);
  EXPECT_NE(out.str().find("28:63:36:C6:C7:D4"), std::string::npos);
  EXPECT_NE(out.str().find("0x000493"), std::string::npos);
}

TEST(Analyze, MissingDeviceDbIsAStageError) {
  auto cfg = bundle_config();
  cfg.device_db.reset();
  try {
    run_analyze(cfg);
    FAIL();
  } catch (const stage_error& e) {
    EXPECT_EQ(e.stage(), "device-db");
  }
  cfg = bundle_config();
  cfg.device_db = data_path("bundle/does-not-exist.csv");
  try {
    run_analyze(cfg);
    FAIL();
  } catch (const stage_error& e) {
    EXPECT_EQ(e.stage(), "device-db");
  }
}

TEST(Analyze, CaptureInputIsRequiredExactlyOnce) {
  auto cfg = bundle_config();
  cfg.iface = "lo";
  EXPECT_THROW(run_analyze(cfg), input_error);
  cfg.iface.reset();
  cfg.pcap.reset();
  EXPECT_THROW(run_analyze(cfg), input_error);
}

TEST(Analyze, CorruptCaptureIsAStageError) {
  TempDir tmp;
  const auto bad = tmp.path / "bad.pcap";
  std::ofstream{bad} << "not a capture";
  auto cfg = bundle_config();
  cfg.pcap = bad.string();
  try {
    run_analyze(cfg);
    FAIL();
  } catch (const stage_error& e) {
    EXPECT_EQ(e.stage(), "capture");
  }
}

TEST(Coverage, TwoDeviceFixture) {
  RunConfig cfg;
  cfg.pcap = data_path("two_devices.pcap");
  const auto rep = run_coverage(cfg);
  ASSERT_TRUE(rep.coverage);
  EXPECT_EQ(rep.coverage->coverage, seconds(55));
  EXPECT_EQ(format_mac(rep.coverage->limiting_mac), "00:1C:06:35:C0:7C");
  EXPECT_EQ(rep.devices.size(), 3u);
  EXPECT_FALSE(rep.devices.at(parse_mac("00:30:DE:0C:AA:68")).defined());
  std::ostringstream out;
  write_coverage(out, rep, OutputFormat::Records);
  EXPECT_NE(out.str().find("\"coverage\""), std::string::npos);
}

TEST(Evaluate, BundleWithBlacklistedTruth) {
  auto cfg = bundle_config();
  cfg.truth = data_path("bundle/truth.csv");
  const auto rep = run_evaluate(cfg);
  ASSERT_EQ(rep.evaluation.rows.size(), 1u);
  EXPECT_EQ(rep.evaluation.rows[0].verdict, Verdict::Correct);
  EXPECT_EQ(rep.evaluation.not_in_capture.size(), 1u);
  EXPECT_DOUBLE_EQ(rep.evaluation.discovery_rate(), 0.5);
  cfg.truth.reset();
  try {
    run_evaluate(cfg);
    FAIL();
  } catch (const stage_error& e) {
    EXPECT_EQ(e.stage(), "truth");
  }
}

TEST(Pipeline, MatchesSequentialObservation) {
  std::mt19937_64 rng{61};
  std::vector<RawPacket> packets;
  for (int i = 0; i < 5000; ++i) {
    const auto host = random_unicast(rng);
    packets.push_back(packet(Nanos{i},
                             rng() % 2 ? arp_frame(broadcast_mac, host, 1, 2)
                                       : tcp_frame(broadcast_mac, host)));
  }
  CountingLink link{packets};
  const auto piped = observe_pipelined(link, {}, 7);
  const auto direct = observe(packets);
  EXPECT_EQ(piped.stats, direct.stats);
  EXPECT_EQ(piped.observations, direct.observations);
}

TEST(Pipeline, SourceErrorsPropagate) {
  struct Failing {
    int n = 0;
    auto next() -> std::optional<RawPacket> {
      if (++n > 3)
        throw capture_error("boom", 99);
      return packet(Nanos{n}, tcp_frame(broadcast_mac, MacAddress{2}));
    }
  } src;
  EXPECT_THROW(observe_pipelined(src, {}, 1), capture_error);
}

TEST(NoTransmit, AnalysisNeverSendsOnTheLink) {
  std::ifstream in{data_path("bundle/capture.pcap"), std::ios::binary};
  CountingLink link{read_capture(in)};
  const auto rep = analyze_source(bundle_config(), link);
  EXPECT_EQ(rep.hosts_discovered(), 1u);
  EXPECT_EQ(link.at, link.frames.size());
  EXPECT_EQ(link.transmitted, 0u);
  static_assert(CanTransmit<CountingLink>);
  static_assert(!CanTransmit<LiveCapture>);
  static_assert(!CanTransmit<CaptureReader>);
}

TEST(BoundedQueue, PreservesOrderAcrossThreads) {
  BoundedQueue<int> q{3};
  std::thread producer{[&] {
    for (int i = 0; i < 10000; ++i)
      ASSERT_TRUE(q.push(i));
    q.close();
  }};
  int expect = 0;
  while (auto v = q.pop())
    ASSERT_EQ(*v, expect++);
  producer.join();
  EXPECT_EQ(expect, 10000);
  EXPECT_FALSE(q.push(1));
}

TEST(Config, FileThenOverrides) {
  TempDir tmp;
  const auto path = tmp.path / "run.json";
  std::ofstream{path} << R"({"threshold": "0xFFF", "format": "records",
                             "include_replies": true, "buckets": 16})";
  RunConfig cfg;
  apply_config_file(cfg, path.string());
  EXPECT_EQ(cfg.threshold, MacDistance{0xFFF});
  EXPECT_EQ(cfg.format, OutputFormat::Records);
  EXPECT_TRUE(cfg.policy.include_replies);
  EXPECT_EQ(cfg.buckets, 16u);
  EXPECT_THROW(apply_config(cfg, nlohmann::json{{"nope", 1}}), input_error);
  EXPECT_THROW(apply_config(cfg, nlohmann::json{{"buckets", "x"}}), input_error);
  EXPECT_THROW(apply_config_file(cfg, (tmp.path / "missing.json").string()),
               input_error);
  cfg.buckets = 0;
  EXPECT_THROW(check_settings(cfg), input_error);
  EXPECT_THROW(parse_output_format("xml"), input_error);
  EXPECT_EQ(parse_threshold("ffffff"), ma_l_span);
}

TEST(Fetch, ValidatesAndReplacesAtomically) {
  TempDir tmp;
  const auto dest = tmp.path / "mal.csv";
  std::ofstream{dest} << "old";
  std::vector<std::string> asked;
  const Fetcher good = [&](const std::string& url) {
    asked.push_back(url);
    return read_file(data_path("bundle/mal.csv"));
  };
  EXPECT_EQ(fetch_snapshot(good, "https://example.test/oui.csv", dest,
                           SnapshotKind::RegistryMaL),
            "2 entries");
  EXPECT_EQ(asked, std::vector<std::string>{"https://example.test/oui.csv"});
  EXPECT_EQ(read_file(dest.string()), read_file(data_path("bundle/mal.csv")));

  const Fetcher garbage = [](const std::string&) { return std::string{"x\n"}; };
  EXPECT_THROW(fetch_snapshot(garbage, "u", dest, SnapshotKind::RegistryMaL),
               std::exception);
  EXPECT_EQ(read_file(dest.string()), read_file(data_path("bundle/mal.csv")));
  const Fetcher failing = [](const std::string&) -> std::string {
    throw std::runtime_error("offline");
  };
  EXPECT_THROW(fetch_snapshot(failing, "u", dest), std::runtime_error);
  EXPECT_FALSE(fs::exists(tmp.path / "mal.csv.partial"));
}

TEST(DbCheck, HistogramRecords) {
  RunConfig cfg;
  cfg.device_db = data_path("bundle/devices.csv");
  cfg.buckets = 4;
  const auto rep = run_db_check(cfg, std::nullopt);
  std::ostringstream out;
  write_db_check(out, rep, OutputFormat::Records);
  EXPECT_NE(out.str().find("ma_l_histogram"), std::string::npos);
}
