#pragma once

#include <array>
#include <chrono>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace macid {

using Nanos = std::chrono::nanoseconds;

/// Seconds as a double, for reporting only. All arithmetic is done on Nanos.
inline auto to_seconds(Nanos t) -> double {
  return std::chrono::duration<double>(t).count();
}

enum class LinkType : std::uint32_t { Ethernet = 1 };

struct RawPacket {
  Nanos timestamp{0}; // since the Unix epoch
  std::vector<std::uint8_t> bytes;
  LinkType link = LinkType::Ethernet;
  std::uint32_t original_length = 0;
};

/// Anything that yields packets until exhausted. Capture files and live
/// interfaces both model this; neither exposes a way to transmit.
template <class T>
concept PacketSource = requires(T& source) {
  { source.next() } -> std::same_as<std::optional<RawPacket>>;
};

/// Malformed or unsupported capture container. `offset()` is the byte offset
/// of the offending header or block.
class capture_error : public std::runtime_error {
public:
  capture_error(const std::string& message, std::uint64_t offset)
      : std::runtime_error(message + " (at offset " + std::to_string(offset) +
                           ")"),
        offset_{offset} {}

  auto offset() const noexcept -> std::uint64_t { return offset_; }

private:
  std::uint64_t offset_;
};

enum class CaptureFormat { Pcap, PcapNg };

namespace detail {

inline constexpr std::uint32_t pcap_magic_us = 0xA1B2C3D4;
inline constexpr std::uint32_t pcap_magic_ns = 0xA1B23C4D;
inline constexpr std::uint32_t pcapng_shb = 0x0A0D0D0A;
inline constexpr std::uint32_t pcapng_bom = 0x1A2B3C4D;
inline constexpr std::uint32_t max_record = 256 * 1024;
inline constexpr std::uint32_t max_block = 16 * 1024 * 1024;

inline auto load_u16(const std::uint8_t* p, bool big) -> std::uint16_t {
  return big ? static_cast<std::uint16_t>(p[0] << 8 | p[1])
             : static_cast<std::uint16_t>(p[1] << 8 | p[0]);
}

inline auto load_u32(const std::uint8_t* p, bool big) -> std::uint32_t {
  return big ? std::uint32_t{p[0]} << 24 | std::uint32_t{p[1]} << 16 |
                   std::uint32_t{p[2]} << 8 | p[3]
             : std::uint32_t{p[3]} << 24 | std::uint32_t{p[2]} << 16 |
                   std::uint32_t{p[1]} << 8 | p[0];
}

/// Converts `units` ticks at the pcap-ng if_tsresol `resol` to nanoseconds.
inline auto ticks_to_nanos(std::uint64_t units, std::uint8_t resol) -> Nanos {
  const unsigned exponent = resol & 0x7F;
  using wide = unsigned __int128;
  wide ns = 0;
  if (resol & 0x80) {
    if (exponent >= 64)
      throw std::domain_error("unsupported binary timestamp resolution");
    ns = (wide{units} * 1'000'000'000u) >> exponent;
  } else if (exponent <= 9) {
    wide scale = 1;
    for (unsigned i = exponent; i < 9; ++i)
      scale *= 10;
    ns = wide{units} * scale;
  } else {
    wide scale = 1;
    for (unsigned i = 9; i < exponent && i < 38; ++i)
      scale *= 10;
    ns = wide{units} / scale;
  }
  return Nanos{static_cast<std::int64_t>(ns)};
}

} // namespace detail

/// Sequential reader for classic pcap (both byte orders, micro- and
/// nanosecond variants) and pcap-ng. Only Ethernet links are accepted.
class CaptureReader {
public:
  explicit CaptureReader(std::istream& in) : in_{in} {
    std::array<std::uint8_t, 4> magic{};
    if (!read_exact(magic.data(), magic.size(), 0))
      throw capture_error("capture too short for a file header", 0);
    const auto be = detail::load_u32(magic.data(), true);
    if (be == detail::pcapng_shb) {
      format_ = CaptureFormat::PcapNg;
      read_section_header(0);
      return;
    }
    format_ = CaptureFormat::Pcap;
    const auto le = detail::load_u32(magic.data(), false);
    if (be == detail::pcap_magic_us || be == detail::pcap_magic_ns) {
      big_endian_ = true;
      nanosecond_ = be == detail::pcap_magic_ns;
    } else if (le == detail::pcap_magic_us || le == detail::pcap_magic_ns) {
      big_endian_ = false;
      nanosecond_ = le == detail::pcap_magic_ns;
    } else {
      throw capture_error("bad magic number 0x" + hex32(be), 0);
    }
    std::array<std::uint8_t, 20> rest{};
    if (!read_exact(rest.data(), rest.size(), 0))
      throw capture_error("truncated pcap file header", 0);
    const auto network = detail::load_u32(rest.data() + 16, big_endian_);
    check_link(network & 0xFFFF, 0);
  }

  auto format() const noexcept -> CaptureFormat { return format_; }

  /// Packets returned so far.
  auto packet_count() const noexcept -> std::uint64_t { return count_; }

  /// pcap-ng Simple Packet Blocks carry no timestamp and are skipped.
  auto skipped_packets() const noexcept -> std::uint64_t { return skipped_; }

  auto next() -> std::optional<RawPacket> {
    auto p = format_ == CaptureFormat::Pcap ? next_pcap() : next_pcapng();
    if (p)
      ++count_;
    return p;
  }

private:
  struct Interface {
    std::uint8_t tsresol = 6;
  };

  static auto hex32(std::uint32_t v) -> std::string {
    static constexpr char digits[] = "0123456789ABCDEF";
    std::string s(8, '0');
    for (int i = 7; i >= 0; --i, v >>= 4)
      s[static_cast<std::size_t>(i)] = digits[v & 0xF];
    return s;
  }

  static void check_link(std::uint32_t link, std::uint64_t offset) {
    if (link != static_cast<std::uint32_t>(LinkType::Ethernet))
      throw capture_error("unsupported link type " + std::to_string(link) +
                              ", only Ethernet (1) is accepted",
                          offset);
  }

  // False on clean EOF before the first byte; a partial read throws with
  // the offset of the record it belongs to.
  auto read_exact(std::uint8_t* dst, std::size_t n, std::uint64_t record_start)
      -> bool {
    in_.read(reinterpret_cast<char*>(dst), static_cast<std::streamsize>(n));
    const auto got = static_cast<std::size_t>(in_.gcount());
    offset_ += got;
    if (got == n)
      return true;
    if (got == 0)
      return false;
    throw capture_error("truncated record: wanted " + std::to_string(n) +
                            " bytes, got " + std::to_string(got),
                        record_start);
  }

  void require(std::uint8_t* dst, std::size_t n, std::uint64_t record_start,
               const char* what) {
    if (!read_exact(dst, n, record_start))
      throw capture_error(std::string("truncated ") + what, record_start);
  }

  auto next_pcap() -> std::optional<RawPacket> {
    const auto start = offset_;
    std::array<std::uint8_t, 16> hdr{};
    if (!read_exact(hdr.data(), hdr.size(), start))
      return std::nullopt;
    const auto sec = detail::load_u32(hdr.data(), big_endian_);
    const auto frac = detail::load_u32(hdr.data() + 4, big_endian_);
    const auto incl = detail::load_u32(hdr.data() + 8, big_endian_);
    const auto orig = detail::load_u32(hdr.data() + 12, big_endian_);
    if (incl > detail::max_record)
      throw capture_error("record length " + std::to_string(incl) +
                              " exceeds limit",
                          start);
    RawPacket p;
    p.timestamp = Nanos{std::int64_t{sec} * 1'000'000'000 +
                        std::int64_t{frac} * (nanosecond_ ? 1 : 1000)};
    p.original_length = orig;
    p.bytes.resize(incl);
    if (incl > 0)
      require(p.bytes.data(), incl, start, "packet record");
    return p;
  }

  void read_section_header(std::uint64_t start) {
    // Block type already consumed; length and byte-order magic follow.
    std::array<std::uint8_t, 8> head{};
    require(head.data(), head.size(), start, "section header block");
    const auto bom_be = detail::load_u32(head.data() + 4, true);
    const auto bom_le = detail::load_u32(head.data() + 4, false);
    if (bom_be == detail::pcapng_bom)
      big_endian_ = true;
    else if (bom_le == detail::pcapng_bom)
      big_endian_ = false;
    else
      throw capture_error("bad section header byte-order magic", start);
    const auto total = detail::load_u32(head.data(), big_endian_);
    if (total < 28 || total % 4 != 0 || total > detail::max_block)
      throw capture_error("bad section header length " + std::to_string(total),
                          start);
    std::vector<std::uint8_t> rest(total - 12);
    require(rest.data(), rest.size(), start, "section header block");
    interfaces_.clear();
  }

  auto next_pcapng() -> std::optional<RawPacket> {
    while (true) {
      const auto start = offset_;
      std::array<std::uint8_t, 4> type_raw{};
      if (!read_exact(type_raw.data(), type_raw.size(), start))
        return std::nullopt;
      if (detail::load_u32(type_raw.data(), true) == detail::pcapng_shb) {
        read_section_header(start);
        continue;
      }
      const auto type = detail::load_u32(type_raw.data(), big_endian_);
      std::array<std::uint8_t, 4> len_raw{};
      require(len_raw.data(), len_raw.size(), start, "block header");
      const auto total = detail::load_u32(len_raw.data(), big_endian_);
      if (total < 12 || total % 4 != 0 || total > detail::max_block)
        throw capture_error("bad block length " + std::to_string(total) +
                                " for block type " + std::to_string(type),
                            start);
      std::vector<std::uint8_t> body(total - 8);
      require(body.data(), body.size(), start, "block body");
      if (detail::load_u32(body.data() + body.size() - 4, big_endian_) !=
          total)
        throw capture_error("block trailer length mismatch", start);
      body.resize(body.size() - 4);

      switch (type) {
      case 1:
        read_interface(body, start);
        break;
      case 6:
        return enhanced_packet(body, start);
      case 2:
        return obsolete_packet(body, start);
      case 3:
        ++skipped_;
        break;
      default:
        break;
      }
    }
  }

  void read_interface(std::span<const std::uint8_t> body,
                      std::uint64_t start) {
    if (body.size() < 8)
      throw capture_error("truncated interface description block", start);
    check_link(detail::load_u16(body.data(), big_endian_), start);
    Interface iface;
    std::size_t pos = 8;
    while (pos + 4 <= body.size()) {
      const auto code = detail::load_u16(body.data() + pos, big_endian_);
      const auto len = detail::load_u16(body.data() + pos + 2, big_endian_);
      pos += 4;
      if (code == 0 || pos + len > body.size())
        break;
      if (code == 9 && len >= 1)
        iface.tsresol = body[pos];
      pos += (len + 3u) & ~3u;
    }
    interfaces_.push_back(iface);
  }

  auto interface_at(std::uint32_t id, std::uint64_t start) const
      -> const Interface& {
    if (id >= interfaces_.size())
      throw capture_error("packet references unknown interface " +
                              std::to_string(id),
                          start);
    return interfaces_[id];
  }

  auto packet_from(std::span<const std::uint8_t> body, std::size_t data_at,
                   std::uint32_t iface_id, std::uint32_t ts_hi,
                   std::uint32_t ts_lo, std::uint32_t caplen,
                   std::uint32_t origlen, std::uint64_t start) const
      -> RawPacket {
    const auto& iface = interface_at(iface_id, start);
    if (data_at + caplen > body.size())
      throw capture_error("captured length " + std::to_string(caplen) +
                              " overruns packet block",
                          start);
    RawPacket p;
    p.timestamp = detail::ticks_to_nanos(
        std::uint64_t{ts_hi} << 32 | ts_lo, iface.tsresol);
    p.original_length = origlen;
    p.bytes.assign(body.begin() + static_cast<std::ptrdiff_t>(data_at),
                   body.begin() + static_cast<std::ptrdiff_t>(data_at + caplen));
    return p;
  }

  auto enhanced_packet(std::span<const std::uint8_t> body, std::uint64_t start)
      -> RawPacket {
    if (body.size() < 20)
      throw capture_error("truncated enhanced packet block", start);
    const auto* b = body.data();
    return packet_from(body, 20, detail::load_u32(b, big_endian_),
                       detail::load_u32(b + 4, big_endian_),
                       detail::load_u32(b + 8, big_endian_),
                       detail::load_u32(b + 12, big_endian_),
                       detail::load_u32(b + 16, big_endian_), start);
  }

  auto obsolete_packet(std::span<const std::uint8_t> body, std::uint64_t start)
      -> RawPacket {
    if (body.size() < 20)
      throw capture_error("truncated packet block", start);
    const auto* b = body.data();
    return packet_from(body, 20, detail::load_u16(b, big_endian_),
                       detail::load_u32(b + 4, big_endian_),
                       detail::load_u32(b + 8, big_endian_),
                       detail::load_u32(b + 12, big_endian_),
                       detail::load_u32(b + 16, big_endian_), start);
  }

  std::istream& in_;
  CaptureFormat format_ = CaptureFormat::Pcap;
  bool big_endian_ = false;
  bool nanosecond_ = false;
  std::uint64_t offset_ = 0;
  std::uint64_t count_ = 0;
  std::uint64_t skipped_ = 0;
  std::vector<Interface> interfaces_;
};

/// Reads every packet of a capture into memory.
inline auto read_capture(std::istream& in) -> std::vector<RawPacket> {
  CaptureReader reader{in};
  std::vector<RawPacket> out;
  while (auto p = reader.next())
    out.push_back(std::move(*p));
  return out;
}

/// Writes a little-endian, nanosecond-resolution classic pcap.
class PcapWriter {
public:
  explicit PcapWriter(std::ostream& out) : out_{out} {
    put32(detail::pcap_magic_ns);
    put16(2);
    put16(4);
    put32(0);
    put32(0);
    put32(65535);
    put32(static_cast<std::uint32_t>(LinkType::Ethernet));
  }

  void write(const RawPacket& p) {
    const auto ns = p.timestamp.count();
    put32(static_cast<std::uint32_t>(ns / 1'000'000'000));
    put32(static_cast<std::uint32_t>(ns % 1'000'000'000));
    put32(static_cast<std::uint32_t>(p.bytes.size()));
    put32(p.original_length ? p.original_length
                            : static_cast<std::uint32_t>(p.bytes.size()));
    out_.write(reinterpret_cast<const char*>(p.bytes.data()),
               static_cast<std::streamsize>(p.bytes.size()));
  }

private:
  void put16(std::uint16_t v) {
    const char b[2] = {static_cast<char>(v), static_cast<char>(v >> 8)};
    out_.write(b, 2);
  }
  void put32(std::uint32_t v) {
    const char b[4] = {static_cast<char>(v), static_cast<char>(v >> 8),
                       static_cast<char>(v >> 16), static_cast<char>(v >> 24)};
    out_.write(b, 4);
  }

  std::ostream& out_;
};

} // namespace macid
