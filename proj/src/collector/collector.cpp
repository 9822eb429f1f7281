#include "webcent/collector/collector.hpp"

#include <algorithm>
#include <atomic>
#include <condition_variable>
#include <ctime>
#include <mutex>
#include <optional>
#include <thread>

#include "webcent/error.hpp"
#include "webcent/ingest/toplist.hpp"

namespace webcent::collector {

namespace {

using ingest::MeasurementRecord;

std::string failure_text(const DnsAnswer& answer) {
  if (answer.status == DnsStatus::Error && !answer.detail.empty()) return answer.detail;
  return std::string(to_string(answer.status));
}

void sort_unique(std::vector<std::string>& v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
}

// A (and optionally AAAA) records of `name`. Returns the failure text of the
// first failing query, or "".
std::string addresses_of(const std::string& name, Resolver& resolver, bool ipv6,
                         std::vector<std::string>& out) {
  std::string failure;
  const DnsAnswer a = resolver.query(name, RecordType::A);
  if (a.ok()) {
    out.insert(out.end(), a.values.begin(), a.values.end());
  } else {
    failure = failure_text(a);
  }
  if (ipv6 && a.status != DnsStatus::NxDomain) {
    const DnsAnswer aaaa = resolver.query(name, RecordType::AAAA);
    if (aaaa.ok()) {
      out.insert(out.end(), aaaa.values.begin(), aaaa.values.end());
    } else if (failure.empty()) {
      failure = failure_text(aaaa);
    }
  }
  sort_unique(out);
  return failure;
}

// Rate limiter shared by all workers: hands out start slots 1/rate apart.
class StartGate {
 public:
  explicit StartGate(double rate) : rate_(rate) {}

  void wait() {
    if (rate_ <= 0.0) return;
    const auto spacing = std::chrono::duration_cast<std::chrono::steady_clock::duration>(
        std::chrono::duration<double>(1.0 / rate_));
    std::chrono::steady_clock::time_point slot;
    {
      std::lock_guard lock(mutex_);
      const auto now = std::chrono::steady_clock::now();
      next_ = std::max(next_, now);
      slot = next_;
      next_ += spacing;
    }
    std::this_thread::sleep_until(slot);
  }

 private:
  double rate_;
  std::mutex mutex_;
  std::chrono::steady_clock::time_point next_{};
};

}  // namespace

void ProbeConfig::validate() const {
  if (timeout.count() <= 0) throw InvalidArgument("timeout must be positive");
  if (max_inflight < 1) throw InvalidArgument("max-inflight must be at least 1");
  if (retries < 0) throw InvalidArgument("retries must be non-negative");
  if (rate_limit < 0.0) throw InvalidArgument("rate limit must be non-negative");
}

std::string utc_now() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

MeasurementRecord resolve_domain(const std::string& domain, Resolver& resolver, const ProbeConfig& config) {
  MeasurementRecord record;
  record.domain = ingest::canonical_hostname(domain);

  const std::string a_failure = addresses_of(record.domain, resolver, config.ipv6, record.a);
  if (!a_failure.empty()) record.notes["a"] = a_failure;
  if (a_failure == "nxdomain") return record;

  // Walk up to the closest enclosing zone with an NS set, stopping above the
  // registrable part.
  std::string zone = record.domain;
  for (;;) {
    const DnsAnswer ns = resolver.query(zone, RecordType::NS);
    if (ns.ok() && !ns.values.empty()) {
      record.ns = ns.values;
      sort_unique(record.ns);
      break;
    }
    if (!ns.ok()) {
      record.notes["ns"] = failure_text(ns);
      break;
    }
    const auto dot = zone.find('.');
    if (dot == std::string::npos || zone.find('.', dot + 1) == std::string::npos) {
      record.notes["ns"] = "no ns records";
      break;
    }
    zone = zone.substr(dot + 1);
  }

  std::string ns_failures;
  for (const auto& name : record.ns) {
    std::vector<std::string> addresses;
    const std::string failure = addresses_of(name, resolver, config.ipv6, addresses);
    if (!failure.empty()) ns_failures += (ns_failures.empty() ? "" : "; ") + name + ": " + failure;
    record.ns_a[name] = std::move(addresses);
  }
  if (!ns_failures.empty()) record.notes["ns_a"] = ns_failures;
  return record;
}

MeasurementRecord probe_domain(const std::string& domain, Resolver& resolver, TlsProber* prober,
                               const ProbeConfig& config, const TimestampFn& now) {
  const std::string ts = now ? now() : utc_now();
  MeasurementRecord record = resolve_domain(domain, resolver, config);
  record.ts = ts;
  if (!config.tls || !prober) return record;
  if (record.notes.contains("a") && record.a.empty()) return record;

  std::string last_error = "no address";
  for (const auto& ip : record.a) {
    if (!config.ipv6 && ip.find(':') != std::string::npos) continue;
    const TlsResult tls = prober->fetch_leaf_issuer(ip, record.domain);
    if (tls.issuer) {
      record.issuer = tls.issuer;
      return record;
    }
    last_error = tls.error;
  }
  record.notes["tls"] = last_error;
  return record;
}

CollectStats collect(std::span<const std::string> domains, Resolver& resolver, TlsProber* prober,
                     const ProbeConfig& config, const Sink& sink, const TimestampFn& now) {
  config.validate();
  if (domains.empty()) throw InvalidArgument("empty domain list");
  for (const auto& d : domains) {
    if (!ingest::is_valid_hostname(d)) throw InvalidArgument("invalid hostname '" + d + "'");
  }

  const std::size_t n = domains.size();
  std::vector<std::optional<MeasurementRecord>> results(n);
  std::mutex mutex;
  std::condition_variable ready;
  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};
  StartGate gate(config.rate_limit);

  const auto worker = [&] {
    for (;;) {
      if (stop.load()) return;
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      gate.wait();
      MeasurementRecord record;
      try {
        record = probe_domain(domains[i], resolver, prober, config, now);
      } catch (const std::exception& e) {
        record = MeasurementRecord{};
        record.domain = ingest::canonical_hostname(domains[i]);
        record.notes["a"] = std::string("probe error: ") + e.what();
      }
      {
        std::lock_guard lock(mutex);
        results[i] = std::move(record);
      }
      ready.notify_all();
    }
  };

  std::vector<std::thread> workers;
  const std::size_t count = std::min<std::size_t>(config.max_inflight, n);
  for (std::size_t w = 0; w < count; ++w) workers.emplace_back(worker);

  CollectStats stats;
  std::string sink_error;
  for (std::size_t i = 0; i < n; ++i) {
    MeasurementRecord record;
    {
      std::unique_lock lock(mutex);
      ready.wait(lock, [&] { return results[i].has_value(); });
      record = std::move(*results[i]);
      results[i].reset();
    }
    if (record.notes.contains("a")) {
      ++stats.failed;
    } else {
      ++stats.resolved;
    }
    if (record.issuer) ++stats.tls_ok;
    try {
      sink(record);
    } catch (const std::exception& e) {
      sink_error = e.what();
      stop.store(true);
      break;
    }
  }
  for (auto& t : workers) t.join();
  if (!sink_error.empty()) throw Error("output write failed: " + sink_error);
  return stats;
}

}  // namespace webcent::collector
