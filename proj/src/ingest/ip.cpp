#include "webcent/ingest/ip.hpp"

#include <arpa/inet.h>

#include <charconv>
#include <cstring>

namespace webcent::ingest {

std::optional<IpAddress> IpAddress::parse(std::string_view text) {
  const std::string buf(text);
  IpAddress ip;
  if (buf.find(':') == std::string::npos) {
    in_addr addr{};
    if (inet_pton(AF_INET, buf.c_str(), &addr) != 1) return std::nullopt;
    ip.family_ = Family::V4;
    std::memcpy(ip.bytes_.data(), &addr, 4);
    return ip;
  }
  in6_addr addr{};
  if (inet_pton(AF_INET6, buf.c_str(), &addr) != 1) return std::nullopt;
  ip.family_ = Family::V6;
  std::memcpy(ip.bytes_.data(), &addr, 16);
  return ip;
}

IpAddress IpAddress::v4(std::uint32_t value) {
  IpAddress ip;
  ip.family_ = Family::V4;
  ip.bytes_[0] = static_cast<std::uint8_t>(value >> 24);
  ip.bytes_[1] = static_cast<std::uint8_t>(value >> 16);
  ip.bytes_[2] = static_cast<std::uint8_t>(value >> 8);
  ip.bytes_[3] = static_cast<std::uint8_t>(value);
  return ip;
}

IpAddress IpAddress::v6(const std::array<std::uint8_t, 16>& bytes) {
  IpAddress ip;
  ip.family_ = Family::V6;
  ip.bytes_ = bytes;
  return ip;
}

IpAddress IpAddress::masked(int length) const {
  IpAddress out = *this;
  for (int i = 0; i < 16; ++i) {
    const int keep = length - i * 8;
    if (keep >= 8) continue;
    out.bytes_[i] = keep <= 0 ? 0 : static_cast<std::uint8_t>(out.bytes_[i] & (0xFF << (8 - keep)));
  }
  return out;
}

std::string IpAddress::to_string() const {
  char buf[INET6_ADDRSTRLEN] = {};
  inet_ntop(family_ == Family::V4 ? AF_INET : AF_INET6, bytes_.data(), buf, sizeof(buf));
  return buf;
}

std::optional<Prefix> Prefix::make(const IpAddress& network, int length) {
  if (length < 0 || length > network.bit_width()) return std::nullopt;
  if (network.masked(length) != network) return std::nullopt;
  return Prefix{network, length};
}

std::optional<Prefix> Prefix::parse(std::string_view cidr) {
  const auto slash = cidr.find('/');
  if (slash == std::string_view::npos) return std::nullopt;
  const auto ip = IpAddress::parse(cidr.substr(0, slash));
  if (!ip) return std::nullopt;
  const auto len_text = cidr.substr(slash + 1);
  int length = -1;
  const auto [ptr, ec] = std::from_chars(len_text.data(), len_text.data() + len_text.size(), length);
  if (ec != std::errc() || ptr != len_text.data() + len_text.size()) return std::nullopt;
  return make(*ip, length);
}

bool Prefix::contains(const IpAddress& ip) const {
  return ip.family() == network.family() && ip.masked(length) == network;
}

std::string Prefix::to_string() const { return network.to_string() + "/" + std::to_string(length); }

}  // namespace webcent::ingest
