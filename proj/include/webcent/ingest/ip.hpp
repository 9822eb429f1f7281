#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace webcent::ingest {

enum class Family : std::uint8_t { V4, V6 };

// IPv4 or IPv6 address. Orders IPv4 before IPv6, then numerically.
class IpAddress {
 public:
  IpAddress() = default;

  static std::optional<IpAddress> parse(std::string_view text);
  static IpAddress v4(std::uint32_t value);
  static IpAddress v6(const std::array<std::uint8_t, 16>& bytes);

  Family family() const { return family_; }
  int bit_width() const { return family_ == Family::V4 ? 32 : 128; }
  // Bit `index` counted from the most significant bit.
  bool bit(int index) const { return (bytes_[index / 8] >> (7 - index % 8)) & 1; }
  const std::array<std::uint8_t, 16>& bytes() const { return bytes_; }

  // Address with every bit from `length` onwards cleared.
  IpAddress masked(int length) const;

  std::string to_string() const;

  auto operator<=>(const IpAddress&) const = default;

 private:
  Family family_ = Family::V4;
  std::array<std::uint8_t, 16> bytes_{};  // IPv4 uses the first four bytes
};

struct Prefix {
  IpAddress network;
  int length = 0;

  // Rejects prefixes with host bits set.
  static std::optional<Prefix> make(const IpAddress& network, int length);
  // "a.b.c.d/n" or "x::/n".
  static std::optional<Prefix> parse(std::string_view cidr);

  bool contains(const IpAddress& ip) const;
  std::string to_string() const;

  auto operator<=>(const Prefix&) const = default;
};

}  // namespace webcent::ingest
