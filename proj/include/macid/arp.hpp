#pragma once

#include "macid/capture.hpp"
#include "macid/mac.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>

namespace macid {

inline constexpr std::uint16_t ethertype_ipv4 = 0x0800;
inline constexpr std::uint16_t ethertype_arp = 0x0806;
inline constexpr std::uint16_t ethertype_vlan = 0x8100;
inline constexpr std::size_t ethernet_header_size = 14;
inline constexpr std::size_t arp_body_size = 28;

enum class ArpOpcode : std::uint16_t { Request = 1, Reply = 2 };

struct Ipv4Address {
  std::uint32_t value = 0;

  friend constexpr auto operator<=>(Ipv4Address, Ipv4Address) = default;
};

inline auto format_ipv4(Ipv4Address ip) -> std::string {
  return std::to_string(ip.value >> 24) + '.' +
         std::to_string((ip.value >> 16) & 0xFF) + '.' +
         std::to_string((ip.value >> 8) & 0xFF) + '.' +
         std::to_string(ip.value & 0xFF);
}

struct ArpPacket {
  std::uint16_t hardware_type = 0;
  std::uint16_t protocol_type = 0;
  std::uint16_t opcode = 0; // see ArpOpcode; other codes are kept verbatim
  MacAddress sender_mac;
  Ipv4Address sender_ip;
  MacAddress target_mac;
  Ipv4Address target_ip;
  MacAddress frame_destination;
  MacAddress frame_source;

  auto is_request() const noexcept -> bool {
    return opcode == static_cast<std::uint16_t>(ArpOpcode::Request);
  }
  auto is_reply() const noexcept -> bool {
    return opcode == static_cast<std::uint16_t>(ArpOpcode::Reply);
  }
  auto is_gratuitous() const noexcept -> bool {
    return sender_ip == target_ip;
  }

  friend bool operator==(const ArpPacket&, const ArpPacket&) = default;
};

enum class FrameKind {
  NotArp,      // short frame or another EtherType
  MalformedArp, // EtherType 0x0806 with an unusable body
  Arp,
};

struct FrameDissection {
  FrameKind kind = FrameKind::NotArp;
  std::optional<ArpPacket> arp;
};

namespace detail {
inline auto be16(const std::uint8_t* p) -> std::uint16_t {
  return static_cast<std::uint16_t>(p[0] << 8 | p[1]);
}
inline auto be32(const std::uint8_t* p) -> std::uint32_t {
  return std::uint32_t{p[0]} << 24 | std::uint32_t{p[1]} << 16 |
         std::uint32_t{p[2]} << 8 | p[3];
}
} // namespace detail

/// Classifies an Ethernet II frame, unwrapping at most one 802.1Q tag. Only
/// Ethernet/IPv4 ARP bodies (htype 1, ptype 0x0800, hlen 6, plen 4) are
/// accepted; any other body under EtherType 0x0806 counts as malformed.
inline auto dissect_frame(std::span<const std::uint8_t> frame)
    -> FrameDissection {
  if (frame.size() < ethernet_header_size)
    return {};
  const auto* b = frame.data();
  std::size_t at = 12;
  auto ethertype = detail::be16(b + at);
  if (ethertype == ethertype_vlan) {
    if (frame.size() < ethernet_header_size + 4)
      return {};
    at += 4;
    ethertype = detail::be16(b + at);
  }
  if (ethertype != ethertype_arp)
    return {};
  const std::size_t body = at + 2;
  if (frame.size() < body + arp_body_size)
    return {FrameKind::MalformedArp, std::nullopt};
  const auto* a = b + body;
  ArpPacket arp;
  arp.hardware_type = detail::be16(a);
  arp.protocol_type = detail::be16(a + 2);
  const auto hlen = a[4];
  const auto plen = a[5];
  if (arp.hardware_type != 1 || arp.protocol_type != ethertype_ipv4 ||
      hlen != 6 || plen != 4)
    return {FrameKind::MalformedArp, std::nullopt};
  arp.opcode = detail::be16(a + 6);
  arp.sender_mac = MacAddress::from_bytes(a + 8);
  arp.sender_ip = {detail::be32(a + 14)};
  arp.target_mac = MacAddress::from_bytes(a + 18);
  arp.target_ip = {detail::be32(a + 24)};
  arp.frame_destination = MacAddress::from_bytes(b);
  arp.frame_source = MacAddress::from_bytes(b + 6);
  return {FrameKind::Arp, arp};
}

inline auto parse_arp(const RawPacket& p) -> std::optional<ArpPacket> {
  return dissect_frame(p.bytes).arp;
}

} // namespace macid
