#include <gtest/gtest.h>

#include <chrono>
#include <fstream>
#include <sstream>

#include "support/fixture.hpp"
#include "support/oracles.hpp"
#include "webcent/emd.hpp"
#include "webcent/ingest/annotate.hpp"
#include "webcent/ingest/csv.hpp"
#include "webcent/pipeline.hpp"
#include "webcent/report.hpp"

namespace webcent {
namespace {

namespace fs = std::filesystem;
using testing::fixture_path;
using testing::read_file;

// Relative path -> content of every regular file under `root`.
std::map<std::string, std::string> bundle(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) out[fs::relative(e.path(), root).generic_string()] = read_file(e.path());
  }
  return out;
}

// Runs annotate, score and report (CSV and JSON) into `dir`.
void run_pipeline(const fs::path& dir) {
  ASSERT_EQ(testing::annotate_e2e(dir).code, 0);
  const std::string records = (dir / "records.jsonl").string();
  ASSERT_EQ(testing::run_cli({"score", "--records", records, "--out-dir", (dir / "score").string(), "--min-sites",
                              "10", "--band", "--oracle-check"})
                .code,
            0);
  ASSERT_EQ(testing::run_cli({"report", "--records", records, "--stats", (dir / "stats.json").string(),
                              "--out-dir", (dir / "report").string(), "--min-sites", "10"})
                .code,
            0);
  ASSERT_EQ(testing::run_cli({"report", "--records", records, "--stats", (dir / "stats.json").string(),
                              "--out-dir", (dir / "report_json").string(), "--min-sites", "10", "--format", "json"})
                .code,
            0);
}

std::vector<WebsiteRecord> load(const fs::path& path) {
  std::ifstream in(path);
  ingest::ParseReport report;
  auto records = ingest::read_records(in, report);
  EXPECT_TRUE(report.errors.empty());
  return records;
}

// country -> layer -> provider -> count, from the hand-written fixture expectations.
using Counts = std::map<std::string, std::map<std::string, std::map<std::string, std::uint64_t>>>;

Counts expected_counts() {
  return nlohmann::json::parse(read_file(fixture_path("e2e/expected_counts.json"))).get<Counts>();
}

std::vector<std::uint64_t> values(const std::map<std::string, std::uint64_t>& m) {
  std::vector<std::uint64_t> v;
  for (const auto& [k, n] : m) v.push_back(n);
  return v;
}

// Parsed scores_<layer>.csv: country -> score text.
std::map<std::string, std::string> score_column(const std::string& csv) {
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  std::map<std::string, std::string> out;
  while (std::getline(in, line)) {
    const auto f = *ingest::split_csv(line);
    out[f.at(1)] = f.at(3);
  }
  return out;
}

class EndToEnd : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new testing::TempDir;
    const auto start = std::chrono::steady_clock::now();
    run_pipeline(dir_->path());
    elapsed_ = std::chrono::steady_clock::now() - start;
  }
  static void TearDownTestSuite() { delete dir_; }

  static fs::path out(const std::string& rel) { return dir_->path() / rel; }

  static testing::TempDir* dir_;
  static std::chrono::steady_clock::duration elapsed_;
};

testing::TempDir* EndToEnd::dir_ = nullptr;
std::chrono::steady_clock::duration EndToEnd::elapsed_{};

TEST_F(EndToEnd, AnnotationMatchesHandCounts) {
  const auto records = load(out("records.jsonl"));
  const auto stats = nlohmann::json::parse(read_file(out("stats.json"))).get<ingest::AnnotationStats>();
  EXPECT_EQ(stats.entries, 66u);
  EXPECT_EQ(stats.annotated, 64u);
  EXPECT_EQ(stats.duplicate_domains, 1u);
  EXPECT_EQ(stats.missing_measurement, 1u);
  EXPECT_EQ(stats.unowned_asns, 1u);
  EXPECT_EQ(records.size(), stats.annotated);

  for (const auto& [country, layers] : expected_counts()) {
    for (const auto& [layer_name, counts] : layers) {
      const Layer layer = *parse_layer(layer_name);
      EXPECT_EQ(pipeline::build_distribution(records, country, layer).distribution.counts(), counts)
          << country << "/" << layer_name;
    }
  }
}

TEST_F(EndToEnd, ScoresMatchGoldenAndOracles) {
  const auto golden = fixture_path("e2e/golden/score");
  EXPECT_EQ(bundle(out("score")), bundle(golden));

  const Counts counts = expected_counts();
  for (Layer layer : kAllLayers) {
    const std::string name(to_string(layer));
    const auto column = score_column(read_file(golden / ("scores_" + name + ".csv")));
    EXPECT_EQ(column.size(), 3u);
    EXPECT_FALSE(column.count("LU"));
    for (const auto& [country, text] : column) {
      const auto& c = counts.at(country).at(name);
      const double derived = static_cast<double>(testing::derivation_score(values(c)));
      const double solved = emd::emd_centralization(ProviderDistribution::from_counts(country, layer, c));
      EXPECT_NEAR(derived, solved, 1e-9) << country << "/" << name;
      EXPECT_EQ(text, pipeline::format_fixed4(solved)) << country << "/" << name;
    }
  }
  EXPECT_EQ(read_file(golden / "exclusions.csv"), "country,layer,sites,reason\nLU,all,4,fewer than 10 sites\n");
}

TEST_F(EndToEnd, ReportMatchesGolden) {
  EXPECT_EQ(bundle(out("report")), bundle(fixture_path("e2e/golden/report")));
  EXPECT_EQ(bundle(out("report_json")), bundle(fixture_path("e2e/golden/report_json")));
  EXPECT_EQ(read_file(out("records.jsonl")), read_file(fixture_path("e2e/golden/records.jsonl")));
}

TEST_F(EndToEnd, JsonReportScoresAgreeWithOracle) {
  const auto j = nlohmann::json::parse(read_file(out("report_json/report.json")));
  const Counts counts = expected_counts();
  std::size_t checked = 0;
  for (const auto& layer : j.at("layers")) {
    const std::string name = layer.at("layer");
    for (const auto& row : layer.at("ranking")) {
      const auto& c = counts.at(row.at("country").get<std::string>()).at(name);
      EXPECT_NEAR(row.at("score").get<double>(), static_cast<double>(testing::derivation_score(values(c))), 1e-9);
      ++checked;
    }
  }
  EXPECT_EQ(checked, 12u);
}

TEST_F(EndToEnd, TldInsularityCountsDotComAsUnitedStates) {
  const Counts counts = expected_counts();
  const auto fraction = [&](const std::string& country, std::initializer_list<const char*> tlds) {
    const auto& c = counts.at(country).at("tld");
    std::uint64_t total = 0, home = 0;
    for (const auto& [tld, n] : c) total += n;
    for (const char* t : tlds) home += c.count(t) ? c.at(t) : 0;
    return pipeline::format_fixed4(static_cast<double>(home) / static_cast<double>(total));
  };
  const std::string csv = read_file(out("report/insularity.csv"));
  EXPECT_NE(csv.find("tld,1,US,NA," + fraction("US", {"us", "com"}) + ","), std::string::npos);
  EXPECT_NE(csv.find("tld,2,DE,EU," + fraction("DE", {"de"}) + ","), std::string::npos);
  EXPECT_NE(csv.find("tld,3,TH,AS," + fraction("TH", {"th"}) + ","), std::string::npos);
  EXPECT_EQ(fraction("US", {"us", "com"}), "0.7500");
  EXPECT_EQ(fraction("US", {"us"}), "0.0500");

  auto records = load(out("records.jsonl"));
  std::erase_if(records, [](const WebsiteRecord& r) { return r.country != "US"; });
  const auto cc = ingest::CountryTable::builtin().tld_countries();
  EXPECT_DOUBLE_EQ(tld_insularity(records, "US", cc), 0.75);
}

TEST_F(EndToEnd, ClassShareCorrelationMatchesDefinition) {
  const Counts counts = expected_counts();
  std::istringstream classes(read_file(out("report/classes.csv")));
  std::map<std::string, std::string> hosting_class;
  std::string line;
  std::getline(classes, line);
  while (std::getline(classes, line)) {
    const auto f = *ingest::split_csv(line);
    if (f.at(0) == "hosting") hosting_class[f.at(1)] = f.at(2);
  }
  std::vector<double> score, share;
  for (const char* country : {"DE", "TH", "US"}) {
    const auto& c = counts.at(country).at("hosting");
    std::uint64_t total = 0, xl = 0;
    for (const auto& [org, n] : c) {
      total += n;
      if (hosting_class.at(org) == "XL-GP") xl += n;
    }
    score.push_back(static_cast<double>(testing::derivation_score(values(c))));
    share.push_back(static_cast<double>(xl) / static_cast<double>(total));
  }
  const std::string rho = pipeline::format_fixed4(testing::definitional_pearson(score, share));
  EXPECT_NE(read_file(out("report/correlations.csv")).find("hosting,score~share:XL-GP," + rho + ","),
            std::string::npos);
}

TEST_F(EndToEnd, RunsWellUnderFiveSeconds) { EXPECT_LT(elapsed_, std::chrono::seconds(5)); }

TEST_F(EndToEnd, SecondRunIsByteIdentical) {
  testing::TempDir again;
  run_pipeline(again.path());
  EXPECT_EQ(bundle(again.path()), bundle(dir_->path()));
}

}  // namespace
}  // namespace webcent
