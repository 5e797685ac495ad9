#pragma once

#include "macid/arp.hpp"
#include "macid/capture.hpp"
#include "macid/mac.hpp"

#include <cstdint>
#include <unordered_set>
#include <vector>

namespace macid {

/// Which ARP packets produce an observation of their sender.
struct ObservationPolicy {
  /// Also take senders of non-broadcast replies.
  bool include_replies = false;

  auto accepts(const ArpPacket& arp) const noexcept -> bool {
    if (arp.frame_destination == broadcast_mac || arp.is_request())
      return true;
    return include_replies && arp.is_reply();
  }
};

enum class ObservationRole { ArpSender };

struct Observation {
  MacAddress mac;
  Ipv4Address ip;
  Nanos timestamp{0};
  ObservationRole role = ObservationRole::ArpSender;

  friend bool operator==(const Observation&, const Observation&) = default;
};

struct CaptureStats {
  std::uint64_t total_packets = 0;
  std::uint64_t arp_packets = 0;
  std::uint64_t observations = 0;
  std::uint64_t malformed_arp = 0;
  std::uint64_t group_senders = 0; // ARP senders with the I/G bit set
  std::uint64_t distinct_macs = 0;

  auto arp_fraction() const noexcept -> double {
    return total_packets == 0 ? 0.0
                              : static_cast<double>(arp_packets) /
                                    static_cast<double>(total_packets);
  }

  friend bool operator==(const CaptureStats&, const CaptureStats&) = default;
};

/// Incremental form of `observe`, for pipelines that feed packets one at a
/// time.
class Observer {
public:
  explicit Observer(ObservationPolicy policy = {}) : policy_{policy} {}

  void feed(const RawPacket& p) {
    ++stats_.total_packets;
    const auto d = dissect_frame(p.bytes);
    switch (d.kind) {
    case FrameKind::NotArp:
      return;
    case FrameKind::MalformedArp:
      ++stats_.arp_packets;
      ++stats_.malformed_arp;
      return;
    case FrameKind::Arp:
      ++stats_.arp_packets;
      break;
    }
    const auto& arp = *d.arp;
    if (!policy_.accepts(arp))
      return;
    if (!is_individual(arp.sender_mac)) {
      ++stats_.group_senders;
      return;
    }
    observations_.push_back(
        {arp.sender_mac, arp.sender_ip, p.timestamp, ObservationRole::ArpSender});
    ++stats_.observations;
    if (seen_.insert(arp.sender_mac).second)
      ++stats_.distinct_macs;
  }

  auto stats() const noexcept -> const CaptureStats& { return stats_; }
  auto observations() const noexcept -> const std::vector<Observation>& {
    return observations_;
  }
  auto take_observations() -> std::vector<Observation> {
    return std::move(observations_);
  }

private:
  ObservationPolicy policy_;
  CaptureStats stats_;
  std::vector<Observation> observations_;
  std::unordered_set<MacAddress> seen_;
};

struct ObservationResult {
  std::vector<Observation> observations;
  CaptureStats stats;
};

template <class Range>
auto observe(const Range& packets, ObservationPolicy policy = {})
    -> ObservationResult {
  Observer obs{policy};
  for (const RawPacket& p : packets)
    obs.feed(p);
  return {obs.take_observations(), obs.stats()};
}

/// Drains a packet source (capture file reader or live interface).
template <PacketSource Source>
auto observe_source(Source& source, ObservationPolicy policy = {})
    -> ObservationResult {
  Observer obs{policy};
  while (auto p = source.next())
    obs.feed(*p);
  return {obs.take_observations(), obs.stats()};
}

} // namespace macid
