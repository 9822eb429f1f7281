#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace webcent::collector {

// host:port with an IPv4 or bracketed IPv6 literal host.
struct Endpoint {
  std::string host = "127.0.0.1";
  std::uint16_t port = 53;

  // Throws InvalidArgument on a malformed endpoint.
  static Endpoint parse(std::string_view text, std::uint16_t default_port);
  std::string to_string() const;
};

enum class RecordType : std::uint16_t { A = 1, NS = 2, CNAME = 5, AAAA = 28 };

enum class DnsStatus { Ok, NxDomain, ServFail, Refused, Timeout, Error };

// "ok", "nxdomain", "servfail", "refused", "timeout", "error".
std::string_view to_string(DnsStatus status);

struct DnsAnswer {
  DnsStatus status = DnsStatus::Ok;
  std::vector<std::string> values;  // addresses or lowercase names without the root dot
  std::string detail;               // set for DnsStatus::Error

  bool ok() const { return status == DnsStatus::Ok; }
};

// Implementations must be safe to call from several threads at once.
class Resolver {
 public:
  virtual ~Resolver() = default;
  virtual DnsAnswer query(const std::string& name, RecordType type) = 0;
};

std::vector<std::uint8_t> encode_query(std::uint16_t id, std::string_view name, RecordType type);

struct DecodedResponse {
  std::uint16_t id = 0;
  bool truncated = false;
  DnsAnswer answer;
};

// Parses a response, keeping answer records of `type`. Returns nullopt when the
// message is malformed or is not a response.
std::optional<DecodedResponse> decode_response(std::span<const std::uint8_t> message, RecordType type);

struct DnsConfig {
  Endpoint server;
  std::chrono::milliseconds timeout{3000};  // per attempt
  int retries = 2;                          // extra attempts after a timeout
};

// Stub resolver speaking to one recursive server over UDP, retrying over TCP
// when the answer is truncated.
class UdpStubResolver : public Resolver {
 public:
  explicit UdpStubResolver(DnsConfig config);
  DnsAnswer query(const std::string& name, RecordType type) override;

 private:
  DnsConfig config_;
};

}  // namespace webcent::collector
