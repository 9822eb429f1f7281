#include <gtest/gtest.h>

#include <sstream>

#include "support/oracles.hpp"
#include "webcent/ingest/prefix_table.hpp"

namespace webcent::ingest {
namespace {

using testing::kSeed;
using testing::LpmEntry;
using testing::Rng;

IpAddress ip(std::string_view s) { return *IpAddress::parse(s); }
Prefix pfx(std::string_view s) { return *Prefix::parse(s); }

TEST(PrefixTable, LongerPrefixWins) {
  PrefixTable t;
  t.insert(pfx("10.0.0.0/8"), 100);
  t.insert(pfx("10.1.0.0/16"), 200);
  EXPECT_EQ(t.lookup(ip("10.1.2.3")), 200u);
  EXPECT_EQ(t.lookup(ip("10.2.2.3")), 100u);
  EXPECT_FALSE(t.lookup(ip("192.0.2.1")).has_value());
  EXPECT_EQ(t.size(), 2u);
}

TEST(PrefixTable, ReinsertReplacesAndFamiliesAreSeparate) {
  PrefixTable t;
  t.insert(pfx("0.0.0.0/0"), 1);
  t.insert(pfx("0.0.0.0/0"), 2);
  EXPECT_EQ(t.size(), 1u);
  EXPECT_EQ(t.lookup(ip("8.8.8.8")), 2u);
  EXPECT_FALSE(t.lookup(ip("2001:db8::1")).has_value());
  t.insert(pfx("2001:db8::/32"), 3);
  EXPECT_EQ(t.lookup(ip("2001:db8::1")), 3u);
}

TEST(PrefixTable, LoadCountsMultiOriginAndRejects) {
  std::istringstream in(
      "# comment\n"
      "10.0.0.0\t8\t100\n"
      "198.51.100.0 24 64500_64501\n"
      "203.0.113.0 24 64502,64503\n"
      "10.0.0.1 8 5\n"
      "bogus line\n"
      "2001:db8:: 32 6939\n");
  ParseReport report;
  auto t = PrefixTable::load(in, report);
  EXPECT_EQ(report.rows, 6u);
  ASSERT_EQ(report.errors.size(), 2u);
  EXPECT_EQ(report.errors[0].line, 5u);
  EXPECT_EQ(report.errors[1].line, 6u);
  EXPECT_EQ(t.multi_origin_rows(), 2u);
  EXPECT_EQ(t.lookup(ip("198.51.100.7")), 64500u);
  EXPECT_EQ(t.lookup(ip("203.0.113.7")), 64502u);
  EXPECT_EQ(t.lookup(ip("2001:db8::5")), 6939u);
}

TEST(AnycastSet, Membership) {
  std::istringstream in("104.16.0.0/13\n# x\n2606:4700::/32\nnot-a-cidr\n");
  ParseReport report;
  auto s = AnycastSet::load(in, report);
  EXPECT_EQ(s.size(), 2u);
  EXPECT_EQ(report.errors.size(), 1u);
  EXPECT_TRUE(s.contains(ip("104.20.1.1")));
  EXPECT_TRUE(s.contains(ip("2606:4700::1111")));
  EXPECT_FALSE(s.contains(ip("1.1.1.1")));
}

IpAddress random_v4(Rng& rng) { return IpAddress::v4(static_cast<std::uint32_t>(rng())); }

IpAddress random_v6(Rng& rng) {
  std::array<std::uint8_t, 16> b{};
  // Narrow the space so prefixes overlap often.
  b[0] = 0x20;
  b[1] = 0x01;
  for (std::size_t i = 2; i < 16; ++i) b[i] = static_cast<std::uint8_t>(rng() % 4);
  return IpAddress::v6(b);
}

TEST(PrefixTable, MatchesBruteForce) {
  Rng rng(kSeed);
  for (int table = 0; table < 20; ++table) {
    std::vector<LpmEntry> entries;
    PrefixTable t;
    std::size_t count = 1 + rng() % 200;
    for (std::size_t k = 0; k < count; ++k) {
      bool v6 = rng() % 4 == 0;
      IpAddress base = v6 ? random_v6(rng) : random_v4(rng);
      int len = static_cast<int>(rng() % (v6 ? 65 : 33));
      if (!v6) len = std::min(len, 4 + static_cast<int>(rng() % 20));
      Prefix p{base.masked(len), len};
      auto asn = static_cast<std::uint32_t>(rng() % 70000);
      entries.push_back({p, asn});
      t.insert(p, asn);
    }
    for (int q = 0; q < 500; ++q) {
      IpAddress probe;
      if (rng() % 2 == 0) {
        probe = rng() % 4 == 0 ? random_v6(rng) : random_v4(rng);
      } else {
        // Perturb a random table entry so matches are common.
        const auto& e = entries[rng() % entries.size()];
        auto bytes = e.prefix.network.bytes();
        std::size_t width = e.prefix.network.bit_width() / 8;
        bytes[width - 1 - rng() % std::min<std::size_t>(width, 3)] ^= static_cast<std::uint8_t>(rng());
        probe = e.prefix.network.family() == Family::V4
                    ? IpAddress::v4(static_cast<std::uint32_t>(bytes[0]) << 24 | bytes[1] << 16 | bytes[2] << 8 | bytes[3])
                    : IpAddress::v6(bytes);
      }
      EXPECT_EQ(t.lookup(probe), testing::brute_force_lpm(entries, probe)) << probe.to_string();
    }
  }
}

}  // namespace
}  // namespace webcent::ingest
