#include "webcent/ingest/annotate.hpp"

#include <algorithm>
#include <thread>
#include <unordered_map>

#include "webcent/error.hpp"

namespace webcent::ingest {

namespace {

struct Resolved {
  std::optional<NetworkProvider> provider;
  std::string continent;
  bool unowned = false;
};

std::vector<IpAddress> parse_sorted(const std::vector<std::string>& texts) {
  std::vector<IpAddress> out;
  for (const auto& t : texts) {
    if (auto ip = IpAddress::parse(t)) out.push_back(*ip);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::optional<NetworkProvider> provider_for(const IpAddress& ip, const AnnotationTables& t,
                                            bool& unowned) {
  const auto asn = t.prefixes.lookup(ip);
  if (!asn) return std::nullopt;
  NetworkProvider p;
  p.asn = *asn;
  if (const AsOrg* org = t.orgs.find(*asn)) {
    p.org_id = org->org_id;
    p.org_name = org->org_name;
    p.hq = org->country;
  } else {
    // Origin AS known but not its organization: key on the AS itself.
    p.org_id = "AS" + std::to_string(*asn);
    p.org_name = p.org_id;
    unowned = true;
  }
  return p;
}

std::string continent_for(const IpAddress& ip, const AnnotationTables& t) {
  if (t.anycast.contains(ip)) return std::string(kAnycast);
  if (auto geo = t.geo.lookup(ip)) return geo->continent;
  return {};
}

Resolved resolve(const std::vector<IpAddress>& addresses, const AnnotationTables& t,
                 AddressPolicy policy) {
  Resolved out;
  if (addresses.empty()) return out;
  if (policy == AddressPolicy::Lowest) {
    const IpAddress& ip = addresses.front();
    out.provider = provider_for(ip, t, out.unowned);
    out.continent = continent_for(ip, t);
    return out;
  }

  // Majority: most frequent org id; ties go to the smaller id. The lowest
  // address of the winning org supplies the continent.
  std::map<std::string, std::pair<std::size_t, std::size_t>> votes;  // org -> (count, first index)
  std::vector<std::optional<NetworkProvider>> providers;
  std::vector<bool> unowned(addresses.size(), false);
  for (std::size_t i = 0; i < addresses.size(); ++i) {
    bool u = false;
    providers.push_back(provider_for(addresses[i], t, u));
    unowned[i] = u;
    if (providers.back()) {
      auto [it, inserted] = votes.try_emplace(providers.back()->org_id, 0, i);
      ++it->second.first;
    }
  }
  if (votes.empty()) {
    out.continent = continent_for(addresses.front(), t);
    return out;
  }
  auto best = votes.begin();
  for (auto it = votes.begin(); it != votes.end(); ++it) {
    if (it->second.first > best->second.first) best = it;
  }
  const std::size_t index = best->second.second;
  out.provider = providers[index];
  out.unowned = unowned[index];
  out.continent = continent_for(addresses[index], t);
  return out;
}

bool selected(const AnnotateOptions& options, Layer layer) {
  return std::find(options.layers.begin(), options.layers.end(), layer) != options.layers.end();
}

void count(AnnotationStats& stats, Layer layer, bool selected_layer, bool resolved) {
  auto& s = stats.layers[std::string(to_string(layer))];
  if (!selected_layer) {
    ++s.skipped;
  } else if (resolved) {
    ++s.resolved;
  } else {
    ++s.unknown;
  }
}

struct Job {
  const ToplistEntry* entry;
  const MeasurementRecord* measurement;
};

WebsiteRecord annotate_one(const Job& job, const AnnotationTables& t, const AnnotateOptions& options,
                           AnnotationStats& stats) {
  const MeasurementRecord& m = *job.measurement;
  WebsiteRecord record;
  record.domain = job.entry->domain;
  record.country = job.entry->country;

  const bool want_hosting = selected(options, Layer::Hosting);
  if (want_hosting) {
    const Resolved r = resolve(parse_sorted(m.a), t, options.policy);
    record.hosting = r.provider;
    record.hosting_continent = r.continent;
    if (r.unowned) ++stats.unowned_asns;
  }
  count(stats, Layer::Hosting, want_hosting, record.hosting.has_value());

  const bool want_dns = selected(options, Layer::Dns);
  if (want_dns) {
    std::vector<std::string> ns_addresses;
    for (const auto& [name, addresses] : m.ns_a) {
      ns_addresses.insert(ns_addresses.end(), addresses.begin(), addresses.end());
    }
    const Resolved r = resolve(parse_sorted(ns_addresses), t, options.policy);
    record.dns = r.provider;
    record.dns_continent = r.continent;
    if (r.unowned) ++stats.unowned_asns;
  }
  count(stats, Layer::Dns, want_dns, record.dns.has_value());

  const bool want_tld = selected(options, Layer::Tld);
  if (want_tld) {
    try {
      record.tld = extract_tld(record.domain);
    } catch (const InvalidArgument&) {
      record.tld.clear();
    }
  }
  count(stats, Layer::Tld, want_tld, !record.tld.empty());

  const bool want_ca = selected(options, Layer::Ca);
  if (want_ca && m.issuer) {
    if (const CaOwner* owner = t.ca_owners.find(*m.issuer)) {
      record.ca = CaProvider{owner->owner, owner->country};
    }
  }
  count(stats, Layer::Ca, want_ca, record.ca.has_value());
  return record;
}

}  // namespace

void AnnotationStats::merge(const AnnotationStats& other) {
  entries += other.entries;
  annotated += other.annotated;
  missing_measurement += other.missing_measurement;
  beyond_rank += other.beyond_rank;
  duplicate_domains += other.duplicate_domains;
  duplicate_measurements += other.duplicate_measurements;
  unowned_asns += other.unowned_asns;
  multi_origin_rows += other.multi_origin_rows;
  for (const auto& [name, s] : other.layers) {
    auto& mine = layers[name];
    mine.resolved += s.resolved;
    mine.unknown += s.unknown;
    mine.skipped += s.skipped;
  }
  for (const auto& [country, n] : other.per_country) per_country[country] += n;
}

void to_json(nlohmann::json& j, const AnnotationStats& s) {
  j = nlohmann::json{{"entries", s.entries},
                     {"annotated", s.annotated},
                     {"missing_measurement", s.missing_measurement},
                     {"beyond_rank", s.beyond_rank},
                     {"duplicate_domains", s.duplicate_domains},
                     {"duplicate_measurements", s.duplicate_measurements},
                     {"unowned_asns", s.unowned_asns},
                     {"multi_origin_rows", s.multi_origin_rows},
                     {"per_country", s.per_country}};
  nlohmann::json layers = nlohmann::json::object();
  for (const auto& [name, l] : s.layers) {
    layers[name] = {{"resolved", l.resolved}, {"unknown", l.unknown}, {"skipped", l.skipped}};
  }
  j["layers"] = layers;
}

void from_json(const nlohmann::json& j, AnnotationStats& s) {
  j.at("entries").get_to(s.entries);
  j.at("annotated").get_to(s.annotated);
  j.at("missing_measurement").get_to(s.missing_measurement);
  j.at("beyond_rank").get_to(s.beyond_rank);
  j.at("duplicate_domains").get_to(s.duplicate_domains);
  j.at("duplicate_measurements").get_to(s.duplicate_measurements);
  j.at("unowned_asns").get_to(s.unowned_asns);
  j.at("multi_origin_rows").get_to(s.multi_origin_rows);
  j.at("per_country").get_to(s.per_country);
  s.layers.clear();
  for (const auto& [name, l] : j.at("layers").items()) {
    s.layers[name] = {l.at("resolved").get<std::uint64_t>(), l.at("unknown").get<std::uint64_t>(),
                      l.at("skipped").get<std::uint64_t>()};
  }
}

AnnotationResult annotate(std::span<const ToplistEntry> entries,
                          std::span<const MeasurementRecord> measurements,
                          const AnnotationTables& tables, const AnnotateOptions& options) {
  AnnotationResult result;
  AnnotationStats& stats = result.stats;
  stats.multi_origin_rows = tables.prefixes.multi_origin_rows();

  // Duplicate measurements for one domain: keep the one with the smallest
  // serialization so the choice does not depend on input order.
  std::unordered_map<std::string, const MeasurementRecord*> by_domain;
  std::unordered_map<const MeasurementRecord*, std::string> dumps;
  const auto dump_of = [&dumps](const MeasurementRecord* m) -> const std::string& {
    auto it = dumps.find(m);
    if (it == dumps.end()) it = dumps.emplace(m, nlohmann::json(*m).dump()).first;
    return it->second;
  };
  for (const auto& m : measurements) {
    auto [it, inserted] = by_domain.try_emplace(m.domain, &m);
    if (!inserted) {
      ++stats.duplicate_measurements;
      if (dump_of(&m) < dump_of(it->second)) it->second = &m;
    }
  }

  // One job per (country, domain); entries of one host under several origins
  // collapse onto the smallest bucket.
  std::map<std::pair<std::string, std::string>, const ToplistEntry*> unique;
  for (const auto& e : entries) {
    ++stats.entries;
    if (options.max_rank_bucket && e.rank_bucket > *options.max_rank_bucket) {
      ++stats.beyond_rank;
      continue;
    }
    auto [it, inserted] = unique.try_emplace({e.country, e.domain}, &e);
    if (!inserted) {
      ++stats.duplicate_domains;
      const ToplistEntry* prev = it->second;
      if (std::tie(e.rank_bucket, e.origin) < std::tie(prev->rank_bucket, prev->origin)) it->second = &e;
    }
  }

  std::vector<Job> jobs;
  for (const auto& [key, entry] : unique) {
    const auto m = by_domain.find(entry->domain);
    if (m == by_domain.end()) {
      ++stats.missing_measurement;
      continue;
    }
    jobs.push_back({entry, m->second});
  }

  const std::size_t shard_count = std::clamp<std::size_t>(options.jobs, 1, std::max<std::size_t>(1, jobs.size()));
  std::vector<std::vector<WebsiteRecord>> shard_records(shard_count);
  std::vector<AnnotationStats> shard_stats(shard_count);
  const auto run_shard = [&](std::size_t shard) {
    const std::size_t begin = jobs.size() * shard / shard_count;
    const std::size_t end = jobs.size() * (shard + 1) / shard_count;
    for (std::size_t i = begin; i < end; ++i) {
      shard_records[shard].push_back(annotate_one(jobs[i], tables, options, shard_stats[shard]));
      ++shard_stats[shard].per_country[jobs[i].entry->country];
      ++shard_stats[shard].annotated;
    }
  };
  if (shard_count == 1) {
    run_shard(0);
  } else {
    std::vector<std::thread> workers;
    for (std::size_t s = 0; s < shard_count; ++s) workers.emplace_back(run_shard, s);
    for (auto& w : workers) w.join();
  }

  for (std::size_t s = 0; s < shard_count; ++s) {
    for (auto& r : shard_records[s]) result.records.push_back(std::move(r));
    stats.merge(shard_stats[s]);
  }
  // Jobs were generated in (country, domain) order, so records already are.
  return result;
}

void write_records(std::ostream& out, std::span<const WebsiteRecord> records) {
  for (const auto& r : records) out << nlohmann::json(r).dump() << '\n';
}

std::vector<WebsiteRecord> read_records(std::istream& in, ParseReport& report) {
  std::vector<WebsiteRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    ++report.rows;
    try {
      out.push_back(nlohmann::json::parse(line).get<WebsiteRecord>());
    } catch (const nlohmann::json::exception& e) {
      report.reject(line_no, e.what());
    }
  }
  return out;
}

}  // namespace webcent::ingest
