#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <sstream>

#include "support/oracles.hpp"
#include "webcent/ingest/annotate.hpp"

namespace webcent::ingest {
namespace {

IpAddress ip(std::string_view s) { return *IpAddress::parse(s); }
Prefix pfx(std::string_view s) { return *Prefix::parse(s); }

class AnnotateTest : public ::testing::Test {
 protected:
  void SetUp() override {
    prefixes.insert(pfx("104.16.0.0/13"), 13335);
    prefixes.insert(pfx("88.198.0.0/16"), 24940);
    prefixes.insert(pfx("52.0.0.0/10"), 16509);
    prefixes.insert(pfx("52.1.0.0/16"), 14618);
    prefixes.insert(pfx("192.0.2.0/24"), 64999);
    prefixes.insert(pfx("2001:db8::/32"), 6939);
    orgs.insert(13335, {"ORG-CF", "Cloudflare, Inc.", "US"});
    orgs.insert(24940, {"ORG-HETZ", "Hetzner Online GmbH", "DE"});
    orgs.insert(16509, {"ORG-AMZN", "Amazon.com, Inc.", "US"});
    orgs.insert(14618, {"ORG-AMZN", "Amazon.com, Inc.", "US"});
    orgs.insert(6939, {"ORG-HE", "Hurricane Electric", ""});
    geo = GeoTable({{ip("52.0.0.0"), ip("52.63.255.255"), {"US", "NA"}},
                    {ip("88.198.0.0"), ip("88.198.255.255"), {"DE", "EU"}},
                    {ip("104.16.0.0"), ip("104.23.255.255"), {"US", "NA"}}});
    anycast.insert(pfx("104.16.0.0/13"));
    ca.insert("Let's Encrypt", {"ISRG", "US"});
    ca.insert("D-Trust GmbH", {"D-Trust", "DE"});
  }

  AnnotationTables tables() const { return {prefixes, orgs, geo, anycast, ca}; }

  static MeasurementRecord m(std::string domain, std::vector<std::string> a, std::vector<std::string> ns_a,
                             std::optional<std::string> issuer) {
    MeasurementRecord r;
    r.domain = std::move(domain);
    r.a = std::move(a);
    if (!ns_a.empty()) {
      r.ns = {"ns1." + r.domain};
      r.ns_a = {{"ns1." + r.domain, std::move(ns_a)}};
    }
    r.issuer = std::move(issuer);
    return r;
  }

  static ToplistEntry e(std::string country, std::uint64_t bucket, std::string domain) {
    return {std::move(country), bucket, "https://" + domain, domain};
  }

  PrefixTable prefixes;
  AsOrgTable orgs;
  GeoTable geo;
  AnycastSet anycast;
  CaOwnerTable ca;
};

TEST_F(AnnotateTest, ResolvesEveryLayer) {
  std::vector<ToplistEntry> entries{e("DE", 1000, "shop.de")};
  std::vector<MeasurementRecord> ms{m("shop.de", {"88.198.1.1"}, {"104.16.5.5"}, "  let's ENCRYPT")};
  auto r = annotate(entries, ms, tables());
  ASSERT_EQ(r.records.size(), 1u);
  const auto& rec = r.records[0];
  EXPECT_EQ(rec.domain, "shop.de");
  EXPECT_EQ(rec.tld, "de");
  EXPECT_EQ(rec.hosting, (NetworkProvider{24940, "ORG-HETZ", "Hetzner Online GmbH", "DE"}));
  EXPECT_EQ(rec.hosting_continent, "EU");
  EXPECT_EQ(rec.dns->org_id, "ORG-CF");
  EXPECT_EQ(rec.dns_continent, "anycast");  // anycast wins over the geo range
  EXPECT_EQ(rec.ca, (CaProvider{"ISRG", "US"}));
  EXPECT_EQ(r.stats.annotated, 1u);
  EXPECT_EQ(r.stats.layers.at("hosting").resolved, 1u);
}

TEST_F(AnnotateTest, LowestAddressPolicyPrefersV4AndNumericOrder) {
  std::vector<ToplistEntry> entries{e("US", 1000, "a.com")};
  std::vector<MeasurementRecord> ms{m("a.com", {"2001:db8::1", "88.198.0.1", "52.1.0.9"}, {}, std::nullopt)};
  auto r = annotate(entries, ms, tables());
  EXPECT_EQ(r.records[0].hosting->asn, 14618u);  // 52.1/16 is nested inside 52.0/10
  EXPECT_EQ(r.records[0].hosting->org_id, "ORG-AMZN");
  EXPECT_EQ(r.records[0].hosting_continent, "NA");
}

TEST_F(AnnotateTest, MajorityPolicy) {
  std::vector<ToplistEntry> entries{e("US", 1000, "a.com"), e("US", 1000, "tie.com")};
  std::vector<MeasurementRecord> ms{
      m("a.com", {"52.0.0.1", "88.198.0.1", "88.198.0.2"}, {}, std::nullopt),
      m("tie.com", {"88.198.0.1", "104.16.0.1"}, {}, std::nullopt)};
  AnnotateOptions opt;
  opt.policy = AddressPolicy::Majority;
  auto r = annotate(entries, ms, tables(), opt);
  EXPECT_EQ(r.records[0].hosting->org_id, "ORG-HETZ");
  EXPECT_EQ(r.records[1].hosting->org_id, "ORG-CF");  // tie: smaller org id
  EXPECT_EQ(r.records[1].hosting_continent, "anycast");
}

TEST_F(AnnotateTest, UnknownPiecesAreCountedNotFatal) {
  std::vector<ToplistEntry> entries{e("US", 1000, "orphan.com"), e("US", 1000, "nowhere.com"),
                                    e("US", 1000, "absent.com")};
  std::vector<MeasurementRecord> ms{m("orphan.com", {"192.0.2.5"}, {}, "Mystery CA"),
                                    m("nowhere.com", {"203.0.113.1"}, {"2001:db8::53"}, std::nullopt)};
  auto r = annotate(entries, ms, tables());
  ASSERT_EQ(r.records.size(), 2u);
  EXPECT_EQ(r.stats.missing_measurement, 1u);
  const auto& nowhere = r.records[0];
  const auto& orphan = r.records[1];
  EXPECT_EQ(orphan.hosting->org_id, "AS64999");
  EXPECT_EQ(orphan.hosting->hq, "");
  EXPECT_EQ(r.stats.unowned_asns, 1u);
  EXPECT_FALSE(orphan.ca.has_value());
  EXPECT_FALSE(orphan.dns.has_value());
  EXPECT_FALSE(nowhere.hosting.has_value());
  EXPECT_EQ(nowhere.hosting_continent, "");
  EXPECT_EQ(nowhere.dns->org_id, "ORG-HE");
  EXPECT_EQ(r.stats.layers.at("hosting").unknown, 1u);
  EXPECT_EQ(r.stats.layers.at("dns").unknown, 1u);
  EXPECT_EQ(r.stats.layers.at("ca").unknown, 2u);
}

TEST_F(AnnotateTest, DuplicatesAndRankLimit) {
  std::vector<ToplistEntry> entries{
      {"US", 5000, "http://dup.com", "dup.com"}, {"US", 1000, "https://dup.com", "dup.com"},
      e("US", 50000, "deep.com"), e("DE", 1000, "dup.com")};
  auto first = m("dup.com", {"52.0.0.1"}, {}, std::nullopt);
  auto second = m("dup.com", {"88.198.0.1", "52.0.0.1"}, {}, std::nullopt);
  std::vector<MeasurementRecord> ms{second, first, m("deep.com", {"52.0.0.1"}, {}, std::nullopt)};
  AnnotateOptions opt;
  opt.max_rank_bucket = 10000;
  auto r = annotate(entries, ms, tables(), opt);
  EXPECT_EQ(r.stats.entries, 4u);
  EXPECT_EQ(r.stats.beyond_rank, 1u);
  EXPECT_EQ(r.stats.duplicate_domains, 1u);
  EXPECT_EQ(r.stats.duplicate_measurements, 1u);
  ASSERT_EQ(r.records.size(), 2u);
  EXPECT_EQ(r.records[0].country, "DE");
  EXPECT_EQ(r.records[1].country, "US");
  // The shorter serialization wins regardless of order.
  EXPECT_EQ(r.records[1].hosting->org_id, "ORG-AMZN");
  EXPECT_EQ(r.stats.per_country.at("US"), 1u);
}

TEST_F(AnnotateTest, LayerSelection) {
  std::vector<ToplistEntry> entries{e("DE", 1000, "shop.de")};
  std::vector<MeasurementRecord> ms{m("shop.de", {"88.198.1.1"}, {"104.16.5.5"}, "Let's Encrypt")};
  AnnotateOptions opt;
  opt.layers = {Layer::Hosting, Layer::Tld};
  auto r = annotate(entries, ms, tables(), opt);
  const auto& rec = r.records[0];
  EXPECT_TRUE(rec.hosting.has_value());
  EXPECT_EQ(rec.tld, "de");
  EXPECT_FALSE(rec.dns.has_value());
  EXPECT_FALSE(rec.ca.has_value());
  EXPECT_EQ(r.stats.layers.at("dns").skipped, 1u);
  EXPECT_EQ(r.stats.layers.at("ca").skipped, 1u);
}

TEST_F(AnnotateTest, IndependentOfInputOrderAndJobs) {
  std::vector<ToplistEntry> entries;
  std::vector<MeasurementRecord> ms;
  const char* addrs[] = {"52.0.0.1", "52.1.0.1", "88.198.0.1", "104.16.0.1", "192.0.2.1", "2001:db8::1"};
  for (int i = 0; i < 60; ++i) {
    std::string d = "site" + std::to_string(i) + (i % 2 ? ".com" : ".de");
    entries.push_back(e(i % 3 ? "US" : "DE", i % 4 ? 1000 : 5000, d));
    ms.push_back(m(d, {addrs[i % 6], addrs[(i + 2) % 6]}, {addrs[(i + 3) % 6]}, i % 5 ? "Let's Encrypt" : "D-Trust GmbH"));
  }
  auto base = annotate(entries, ms, tables());
  testing::Rng rng(testing::kSeed);
  for (unsigned jobs : {1u, 2u, 7u, 64u}) {
    std::shuffle(entries.begin(), entries.end(), rng);
    std::shuffle(ms.begin(), ms.end(), rng);
    AnnotateOptions opt;
    opt.jobs = jobs;
    auto other = annotate(entries, ms, tables(), opt);
    EXPECT_EQ(other.records, base.records) << jobs;
    EXPECT_EQ(other.stats, base.stats) << jobs;
  }
  EXPECT_TRUE(std::is_sorted(base.records.begin(), base.records.end(), [](const auto& a, const auto& b) {
    return std::tie(a.country, a.domain) < std::tie(b.country, b.domain);
  }));
}

TEST_F(AnnotateTest, RecordsRoundTripThroughJsonLines) {
  std::vector<ToplistEntry> entries{e("DE", 1000, "shop.de"), e("US", 1000, "orphan.com")};
  std::vector<MeasurementRecord> ms{m("shop.de", {"88.198.1.1"}, {"104.16.5.5"}, "Let's Encrypt"),
                                    m("orphan.com", {}, {}, std::nullopt)};
  auto r = annotate(entries, ms, tables());
  std::stringstream buf;
  write_records(buf, r.records);
  buf << "garbage\n";
  ParseReport report;
  auto back = read_records(buf, report);
  EXPECT_EQ(back, r.records);
  EXPECT_EQ(report.errors.size(), 1u);

  nlohmann::json j = r.stats;
  EXPECT_EQ(j.get<AnnotationStats>(), r.stats);
}

}  // namespace
}  // namespace webcent::ingest
