#include <gtest/gtest.h>

#include <sstream>

#include "webcent/error.hpp"
#include "webcent/ingest/measurement.hpp"

namespace webcent::ingest {
namespace {

MeasurementRecord sample() {
  MeasurementRecord m;
  m.domain = "example.de";
  m.a = {"88.198.1.1", "2001:db8::1"};
  m.ns = {"ns1.example.de"};
  m.ns_a = {{"ns1.example.de", {"88.198.2.2"}}};
  m.issuer = "Let's Encrypt";
  m.ts = "2024-03-01T00:00:00Z";
  return m;
}

TEST(Measurement, JsonRoundTrip) {
  auto m = sample();
  nlohmann::json j = m;
  EXPECT_EQ(j.at("issuer"), "Let's Encrypt");
  EXPECT_FALSE(j.contains("notes"));
  EXPECT_EQ(j.get<MeasurementRecord>(), m);

  m.issuer.reset();
  m.notes = {{"tls", "connection refused"}};
  j = m;
  EXPECT_TRUE(j.at("issuer").is_null());
  EXPECT_EQ(j.get<MeasurementRecord>(), m);
}

TEST(Measurement, RejectsBadFields) {
  EXPECT_THROW(nlohmann::json::parse(R"({"domain":"bad..name"})").get<MeasurementRecord>(), DataError);
  EXPECT_THROW(nlohmann::json::parse(R"({"domain":"a.com","a":["999.1.1.1"]})").get<MeasurementRecord>(),
               DataError);
  EXPECT_THROW(nlohmann::json::parse(R"({"domain":"a.com","ns":["-x.com"]})").get<MeasurementRecord>(),
               DataError);
  EXPECT_THROW(nlohmann::json::parse("[1]").get<MeasurementRecord>(), DataError);
  auto minimal = nlohmann::json::parse(R"({"domain":"a.com"})").get<MeasurementRecord>();
  EXPECT_TRUE(minimal.a.empty());
  EXPECT_FALSE(minimal.issuer.has_value());
}

TEST(Measurement, ReadLinesWithErrors) {
  std::ostringstream out;
  write_measurement(out, sample());
  out << "{not json\n\n";
  out << R"({"domain":"b.com","a":["1.2.3.4"]})" << "\n";
  std::istringstream in(out.str());
  ParseReport report;
  auto records = read_measurements(in, report);
  EXPECT_EQ(records.size(), 2u);
  EXPECT_EQ(report.rows, 3u);
  ASSERT_EQ(report.errors.size(), 1u);
  EXPECT_EQ(report.errors[0].line, 2u);
  EXPECT_EQ(records[0], sample());
}

}  // namespace
}  // namespace webcent::ingest
