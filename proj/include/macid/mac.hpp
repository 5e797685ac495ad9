#pragma once

#include <algorithm>
#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace macid {

/// Thrown when text cannot be read as a MAC address. `position()` is the
/// zero-based character offset of the first offending character.
class mac_parse_error : public std::invalid_argument {
public:
  mac_parse_error(std::string message, std::size_t position)
      : std::invalid_argument(std::move(message)), position_{position} {}

  auto position() const noexcept -> std::size_t { return position_; }

private:
  std::size_t position_;
};

/// A 48-bit EUI-48 hardware address. Octet 0 (the first octet on the wire)
/// is the most significant byte of `value()`.
class MacAddress {
public:
  static constexpr std::uint64_t max_value = (std::uint64_t{1} << 48) - 1;

  constexpr MacAddress() = default;

  /// Bits above 47 are discarded.
  constexpr explicit MacAddress(std::uint64_t value) noexcept
      : value_{value & max_value} {}

  static constexpr auto from_octets(std::array<std::uint8_t, 6> octets) noexcept
      -> MacAddress {
    std::uint64_t v = 0;
    for (auto o : octets)
      v = (v << 8) | o;
    return MacAddress{v};
  }

  /// Reads six octets in transmission order; `bytes` must hold at least six.
  static constexpr auto from_bytes(const std::uint8_t* bytes) noexcept
      -> MacAddress {
    return from_octets(
        {bytes[0], bytes[1], bytes[2], bytes[3], bytes[4], bytes[5]});
  }

  constexpr auto value() const noexcept -> std::uint64_t { return value_; }

  constexpr auto octet(std::size_t i) const noexcept -> std::uint8_t {
    return static_cast<std::uint8_t>(value_ >> (8 * (5 - i)));
  }

  constexpr auto octets() const noexcept -> std::array<std::uint8_t, 6> {
    return {octet(0), octet(1), octet(2), octet(3), octet(4), octet(5)};
  }

  friend constexpr auto operator<=>(MacAddress, MacAddress) = default;

private:
  std::uint64_t value_ = 0;
};

inline constexpr MacAddress broadcast_mac{MacAddress::max_value};

enum class IndividualGroup { Individual, Group };
enum class UniversalLocal { Universal, Local };

struct AddressClass {
  IndividualGroup ig = IndividualGroup::Individual;
  UniversalLocal ul = UniversalLocal::Universal;
  bool is_broadcast = false;

  friend constexpr bool operator==(const AddressClass&,
                                   const AddressClass&) = default;
};

/// I/G is bit 0 and U/L is bit 1 of octet 0.
constexpr auto classify(MacAddress m) noexcept -> AddressClass {
  const auto first = m.octet(0);
  return {
      (first & 0x01) ? IndividualGroup::Group : IndividualGroup::Individual,
      (first & 0x02) ? UniversalLocal::Local : UniversalLocal::Universal,
      m == broadcast_mac,
  };
}

constexpr auto is_individual(MacAddress m) noexcept -> bool {
  return (m.octet(0) & 0x01) == 0;
}

/// IEEE assignment block sizes. CID shares the MA-L width but identifies a
/// non-globally-unique space and is never used for device matching.
enum class PrefixKind { MA_L, MA_M, MA_S, CID };

constexpr auto prefix_width(PrefixKind kind) noexcept -> unsigned {
  switch (kind) {
  case PrefixKind::MA_M:
    return 28;
  case PrefixKind::MA_S:
    return 36;
  case PrefixKind::MA_L:
  case PrefixKind::CID:
    break;
  }
  return 24;
}

constexpr auto to_string(PrefixKind kind) noexcept -> std::string_view {
  switch (kind) {
  case PrefixKind::MA_L:
    return "MA-L";
  case PrefixKind::MA_M:
    return "MA-M";
  case PrefixKind::MA_S:
    return "MA-S";
  case PrefixKind::CID:
    return "CID";
  }
  return "?";
}

struct OuiPrefix {
  PrefixKind kind = PrefixKind::MA_L;
  std::uint64_t bits = 0;

  constexpr auto width() const noexcept -> unsigned {
    return prefix_width(kind);
  }

  constexpr auto valid() const noexcept -> bool {
    return bits < (std::uint64_t{1} << width());
  }

  constexpr auto matches(MacAddress m) const noexcept -> bool {
    return (m.value() >> (48 - width())) == bits;
  }

  /// Lowest address inside the block.
  constexpr auto base() const noexcept -> MacAddress {
    return MacAddress{bits << (48 - width())};
  }

  friend constexpr auto operator<=>(const OuiPrefix&,
                                    const OuiPrefix&) = default;
};

constexpr auto prefix(MacAddress m, PrefixKind kind) noexcept -> OuiPrefix {
  return {kind, m.value() >> (48 - prefix_width(kind))};
}

struct MacDistance {
  std::uint64_t magnitude = 0;

  friend constexpr auto operator<=>(MacDistance, MacDistance) = default;
};

/// One MA-L block span; the largest distance still inside a shared MA-L.
inline constexpr MacDistance ma_l_span{0xFFFFFF};

/// Absolute difference of the full 48-bit values.
constexpr auto mac_distance(MacAddress a, MacAddress b) noexcept
    -> MacDistance {
  return {a.value() > b.value() ? a.value() - b.value()
                                : b.value() - a.value()};
}

constexpr auto reverse_bits(std::uint8_t b) noexcept -> std::uint8_t {
  b = static_cast<std::uint8_t>((b & 0xF0) >> 4 | (b & 0x0F) << 4);
  b = static_cast<std::uint8_t>((b & 0xCC) >> 2 | (b & 0x33) << 2);
  b = static_cast<std::uint8_t>((b & 0xAA) >> 1 | (b & 0x55) << 1);
  return b;
}

/// Reverses the bit order inside each octet; octet positions are kept.
constexpr auto bit_reversed(MacAddress m) noexcept -> MacAddress {
  auto o = m.octets();
  for (auto& b : o)
    b = reverse_bits(b);
  return MacAddress::from_octets(o);
}

namespace detail {

constexpr auto hex_value(char c) noexcept -> int {
  if (c >= '0' && c <= '9')
    return c - '0';
  if (c >= 'a' && c <= 'f')
    return c - 'a' + 10;
  if (c >= 'A' && c <= 'F')
    return c - 'A' + 10;
  return -1;
}

inline constexpr char hex_upper[] = "0123456789ABCDEF";

} // namespace detail

/// Accepts six hex pairs separated by ':' or '-' (one separator style per
/// address), either case.
inline auto parse_mac(std::string_view text) -> MacAddress {
  using namespace std::string_literals;
  if (text.size() != 17)
    throw mac_parse_error("MAC address must be 17 characters, got "s +
                              std::to_string(text.size()),
                          std::min<std::size_t>(text.size(), 17));
  const char sep = text[2];
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < 6; ++i) {
    const auto at = i * 3;
    if (i == 1 && sep != ':' && sep != '-')
      throw mac_parse_error("expected ':' or '-' at position 2", 2);
    if (i > 0 && text[at - 1] != sep)
      throw mac_parse_error("expected separator '"s + sep + "' at position " +
                                std::to_string(at - 1),
                            at - 1);
    const int hi = detail::hex_value(text[at]);
    if (hi < 0)
      throw mac_parse_error(
          "non-hex character at position " + std::to_string(at), at);
    const int lo = detail::hex_value(text[at + 1]);
    if (lo < 0)
      throw mac_parse_error(
          "non-hex character at position " + std::to_string(at + 1), at + 1);
    v = (v << 8) | static_cast<std::uint64_t>(hi << 4 | lo);
  }
  return MacAddress{v};
}

/// Uppercase, colon separated.
inline auto format_mac(MacAddress m) -> std::string {
  std::string out(17, ':');
  for (std::size_t i = 0; i < 6; ++i) {
    const auto o = m.octet(i);
    out[i * 3] = detail::hex_upper[o >> 4];
    out[i * 3 + 1] = detail::hex_upper[o & 0x0F];
  }
  return out;
}

/// Fixed-width uppercase hex with a 0x prefix, e.g. 0x000493.
inline auto format_distance(MacDistance d, int min_digits = 6) -> std::string {
  std::string digits;
  auto v = d.magnitude;
  do {
    digits.insert(digits.begin(), detail::hex_upper[v & 0xF]);
    v >>= 4;
  } while (v != 0);
  if (static_cast<int>(digits.size()) < min_digits)
    digits.insert(0, static_cast<std::size_t>(min_digits) - digits.size(),
                  '0');
  return "0x" + digits;
}

/// Parses a hex number with optional 0x prefix; used for thresholds.
inline auto parse_hex(std::string_view text) -> std::uint64_t {
  if (text.starts_with("0x") || text.starts_with("0X"))
    text.remove_prefix(2);
  if (text.empty() || text.size() > 16)
    throw std::invalid_argument("invalid hex number");
  std::uint64_t v = 0;
  for (char c : text) {
    const int d = detail::hex_value(c);
    if (d < 0)
      throw std::invalid_argument("invalid hex digit '" + std::string(1, c) +
                                  "'");
    v = (v << 4) | static_cast<std::uint64_t>(d);
  }
  return v;
}

} // namespace macid

template <>
struct std::hash<macid::MacAddress> {
  auto operator()(macid::MacAddress m) const noexcept -> std::size_t {
    return std::hash<std::uint64_t>{}(m.value());
  }
};
