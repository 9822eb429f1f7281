#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "webcent/collector/dns.hpp"
#include "webcent/collector/tls_probe.hpp"
#include "webcent/ingest/measurement.hpp"

namespace webcent::collector {

struct ProbeConfig {
  Endpoint resolver;
  std::uint16_t tls_port = 443;
  std::chrono::milliseconds timeout{3000};  // per query or handshake attempt
  unsigned max_inflight = 16;
  int retries = 2;
  bool ipv6 = false;        // also resolve AAAA and probe IPv6 addresses
  bool tls = true;          // fetch leaf issuers
  double rate_limit = 0.0;  // probe starts per second across workers; 0 is unlimited

  // Throws InvalidArgument on a non-positive timeout or zero max_inflight.
  void validate() const;
};

// UTC timestamp source; replaceable for reproducible output.
using TimestampFn = std::function<std::string()>;

std::string utc_now();

// A and NS records of the domain plus A records of every nameserver. The NS
// set is taken from the closest enclosing zone that has one. Failures become
// per-field notes ("a", "ns", "ns_a").
ingest::MeasurementRecord resolve_domain(const std::string& domain, Resolver& resolver,
                                         const ProbeConfig& config);

// resolve_domain plus the issuer of the first address that presents a leaf
// certificate; failures note "tls".
ingest::MeasurementRecord probe_domain(const std::string& domain, Resolver& resolver, TlsProber* prober,
                                       const ProbeConfig& config, const TimestampFn& now);

struct CollectStats {
  std::uint64_t resolved = 0;  // A lookup answered without error
  std::uint64_t tls_ok = 0;    // issuer obtained
  std::uint64_t failed = 0;    // A lookup failed

  bool operator==(const CollectStats&) const = default;
};

using Sink = std::function<void(const ingest::MeasurementRecord&)>;

// Probes every domain with at most config.max_inflight concurrent probes and
// hands records to `sink` in input order. A throwing sink stops new probes;
// the error is rethrown as Error once in-flight probes drain. Throws
// InvalidArgument up front for an empty list or an invalid hostname.
CollectStats collect(std::span<const std::string> domains, Resolver& resolver, TlsProber* prober,
                     const ProbeConfig& config, const Sink& sink, const TimestampFn& now = utc_now);

}  // namespace webcent::collector
