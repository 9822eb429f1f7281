#include <gtest/gtest.h>

#include <cstdlib>

#include "support/fixture.hpp"
#include "support/mock_dns.hpp"
#include "support/tls_server.hpp"
#include "webcent/ingest/annotate.hpp"
#include "webcent/ingest/measurement.hpp"

namespace webcent::testing {
namespace {

namespace fs = std::filesystem;

bool contains(const std::string& haystack, const std::string& needle) {
  return haystack.find(needle) != std::string::npos;
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start < text.size()) {
    const auto end = text.find('\n', start);
    out.push_back(text.substr(start, end - start));
    if (end == std::string::npos) break;
    start = end + 1;
  }
  return out;
}

std::vector<std::string> annotate_args(const fs::path& dir, const std::string& pfx2as) {
  auto f = [](const std::string& name) { return fixture_path("e2e/" + name).string(); };
  return {"annotate",  "--toplist", f("toplist.csv"), "--measurements", f("measurements.jsonl"),
          "--pfx2as",  pfx2as,      "--as2org",       f("as2org.tsv"),  "--geo",
          f("geo.csv"), "--ca-owners", f("ca_owners.csv"), "--out",     (dir / "records.jsonl").string()};
}

class CliFixture : public ::testing::Test {
 protected:
  void SetUp() override { ASSERT_EQ(annotate_e2e(dir.path()).code, 0); }
  std::string records() const { return (dir / "records.jsonl").string(); }

  TempDir dir;
};

TEST(Cli, UsageErrorsExitTwo) {
  auto none = run_cli({});
  EXPECT_EQ(none.code, 2);

  auto missing = run_cli({"score", "--records", "/no/such/records.jsonl", "--out-dir", "/tmp/x"});
  EXPECT_EQ(missing.code, 2);
  EXPECT_TRUE(contains(missing.err, "/no/such/records.jsonl")) << missing.err;
  EXPECT_TRUE(contains(missing.err, "score")) << missing.err;

  TempDir dir;
  write_file(dir / "d.txt", "a.com\n");
  auto inflight = run_cli({"collect", "--domains", (dir / "d.txt").string(), "--resolver", "127.0.0.1:53",
                           "--out", (dir / "m.jsonl").string(), "--max-inflight", "0"});
  EXPECT_EQ(inflight.code, 2);
  EXPECT_TRUE(contains(inflight.err, "max-inflight")) << inflight.err;
  EXPECT_FALSE(fs::exists(dir / "m.jsonl"));

  auto resolver = run_cli({"collect", "--domains", (dir / "d.txt").string(), "--resolver", "dns.example",
                           "--out", (dir / "m.jsonl").string()});
  EXPECT_EQ(resolver.code, 2);

  auto help = run_cli({"--help"});
  EXPECT_EQ(help.code, 0);
  EXPECT_TRUE(contains(help.out, "oracle-check"));
}

TEST(Cli, GlobalOptionsPrecedeSubcommand) {
  TempDir dir;
  auto before = annotate_e2e(dir.path());
  ASSERT_EQ(before.code, 0);
  const std::string records = (dir / "records.jsonl").string();
  EXPECT_EQ(run_cli({"--jobs", "2", "oracle-check", "--records", records}).code, 0);
  EXPECT_EQ(run_cli({"oracle-check", "--records", records, "--jobs", "2"}).code, 2);
  EXPECT_EQ(run_cli({"--jobs", "0", "oracle-check", "--records", records}).code, 2);
}

TEST(Cli, CollectAgainstLocalMocks) {
  MockZone zone;
  for (int i = 0; i < 30; ++i) zone.a["s" + std::to_string(i) + ".test"] = {"127.0.0.1"};
  zone.nxdomain.insert("gone.test");
  MockDnsServer dns(zone, std::chrono::milliseconds(10));
  TempDir dir;
  std::string list = "# probe list\n";
  std::vector<std::string> expected;
  for (int i = 0; i < 30; ++i) {
    const std::string d = i == 7 ? "gone.test" : "s" + std::to_string(i) + ".test";
    list += (i == 3 ? "S3.TEST" : d) + "\n";
    expected.push_back(d);
  }
  write_file(dir / "d.txt", list);

  auto r = run_cli({"collect", "--domains", (dir / "d.txt").string(), "--resolver",
                    "127.0.0.1:" + std::to_string(dns.port()), "--out", (dir / "m.jsonl").string(),
                    "--max-inflight", "4", "--tls-port", std::to_string(closed_port()), "--timeout-ms", "500",
                    "--fixed-time", "2024-03-01T00:00:00Z"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, "{\"failed\":1,\"resolved\":29,\"tls_ok\":0}\n");
  EXPECT_LE(dns.max_concurrency(), 4u);
  EXPECT_GE(dns.max_concurrency(), 2u);
  EXPECT_FALSE(fs::exists(dir / "m.jsonl.partial"));

  const auto out = lines_of(read_file(dir / "m.jsonl"));
  ASSERT_EQ(out.size(), expected.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const auto m = nlohmann::json::parse(out[i]).get<ingest::MeasurementRecord>();
    EXPECT_EQ(m.domain, expected[i]);
    EXPECT_EQ(m.ts, "2024-03-01T00:00:00Z");
    if (i == 7) {
      EXPECT_EQ(m.notes.at("a"), "nxdomain");
      EXPECT_TRUE(m.a.empty());
    } else {
      EXPECT_EQ(m.a, (std::vector<std::string>{"127.0.0.1"}));
      EXPECT_EQ(m.notes.at("tls"), "connection refused");
      EXPECT_FALSE(m.issuer.has_value());
    }
  }
}

TEST(Cli, CollectRejectsInvalidDomainFile) {
  TempDir dir;
  write_file(dir / "d.txt", "ok.test\nbad..name\n");
  auto r = run_cli({"collect", "--domains", (dir / "d.txt").string(), "--resolver", "127.0.0.1:9", "--out",
                    (dir / "m.jsonl").string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_TRUE(contains(r.err, "line 2")) << r.err;
}

TEST(Cli, CorruptPfx2asFollowsErrorThreshold) {
  TempDir dir;
  std::string table = read_file(fixture_path("e2e/pfx2as.txt"));
  table += "10.0.0.0 99 64512\n";
  write_file(dir / "pfx2as.txt", table);
  const auto base = annotate_args(dir.path(), (dir / "pfx2as.txt").string());

  auto strict = run_cli(base);
  EXPECT_EQ(strict.code, 1);
  EXPECT_TRUE(contains(strict.err, (dir / "pfx2as.txt").string())) << strict.err;
  EXPECT_TRUE(contains(strict.err, "line 19")) << strict.err;

  std::vector<std::string> lenient{"--max-error-rate", "0.2"};
  lenient.insert(lenient.end(), base.begin(), base.end());
  auto ok = run_cli(lenient);
  EXPECT_EQ(ok.code, 0) << ok.err;
  EXPECT_TRUE(contains(ok.err, "warning:"));
  EXPECT_TRUE(contains(ok.err, "line 19"));
}

TEST(Cli, AnnotateLayerSelection) {
  TempDir dir;
  ASSERT_EQ(annotate_e2e(dir.path(), {"--layers", "hosting,tld"}).code, 0);
  const auto stats = nlohmann::json::parse(read_file(dir / "stats.json")).get<ingest::AnnotationStats>();
  EXPECT_EQ(stats.layers.at("dns").skipped, stats.annotated);
  EXPECT_EQ(stats.layers.at("ca").skipped, stats.annotated);
  EXPECT_EQ(stats.layers.at("hosting").skipped, 0u);
  for (const auto& line : lines_of(read_file(dir / "records.jsonl"))) {
    const auto j = nlohmann::json::parse(line);
    EXPECT_TRUE(j.at("dns").is_null());
    EXPECT_TRUE(j.at("ca").is_null());
  }

  auto bad = annotate_e2e(dir.path(), {"--layers", "hosting,bogus"});
  EXPECT_EQ(bad.code, 2);
  EXPECT_TRUE(contains(bad.err, "unknown layer 'bogus'"));
}

TEST_F(CliFixture, ScoreBandAndExclusions) {
  auto r = run_cli({"score", "--records", records(), "--out-dir", (dir / "s").string(), "--min-sites", "10",
                    "--band", "--layers", "tld"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(read_file(dir / "s" / "scores_tld.csv"),
            "rank,country,continent,score,band\n"
            "1,US,NA,0.4650,highly concentrated\n"
            "2,TH,AS,0.3700,highly concentrated\n"
            "3,DE,EU,0.3200,highly concentrated\n");
  EXPECT_FALSE(fs::exists(dir / "s" / "scores_hosting.csv"));
  EXPECT_TRUE(fs::exists(dir / "s" / "exclusions.csv"));

  auto all = run_cli({"score", "--records", records(), "--out-dir", (dir / "all").string(), "--min-sites", "1"});
  ASSERT_EQ(all.code, 0);
  EXPECT_FALSE(fs::exists(dir / "all" / "exclusions.csv"));
  EXPECT_TRUE(contains(read_file(dir / "all" / "scores_hosting.csv"), ",LU,"));
}

TEST_F(CliFixture, MinSitesFromEnvironmentAndManifest) {
  ::setenv("WEBCENT_MIN_SITES", "1", 1);
  auto env = run_cli({"score", "--records", records(), "--out-dir", (dir / "env").string()});
  ::unsetenv("WEBCENT_MIN_SITES");
  ASSERT_EQ(env.code, 0);
  EXPECT_TRUE(contains(read_file(dir / "env" / "scores_hosting.csv"), ",LU,"));

  write_file(dir / "run.toml", "[score]\nmin-sites = 10\nlayers = [\"ca\"]\nband = true\n");
  auto manifest = run_cli({"--manifest", (dir / "run.toml").string(), "score", "--records", records(),
                           "--out-dir", (dir / "m").string()});
  ASSERT_EQ(manifest.code, 0) << manifest.err;
  EXPECT_TRUE(fs::exists(dir / "m" / "scores_ca.csv"));
  EXPECT_FALSE(fs::exists(dir / "m" / "scores_hosting.csv"));
  EXPECT_TRUE(fs::exists(dir / "m" / "exclusions.csv"));

  auto flag_wins = run_cli({"--manifest", (dir / "run.toml").string(), "score", "--records", records(),
                            "--out-dir", (dir / "f").string(), "--min-sites", "1"});
  ASSERT_EQ(flag_wins.code, 0);
  EXPECT_FALSE(fs::exists(dir / "f" / "exclusions.csv"));
}

TEST_F(CliFixture, ClassifyDumpFeaturesAndBadRules) {
  auto r = run_cli({"classify", "--records", records(), "--out", (dir / "classes.csv").string(), "--min-sites",
                    "10", "--layers", "hosting,tld", "--dump-features"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto features = lines_of(r.out);
  ASSERT_FALSE(features.empty());
  EXPECT_EQ(features[0], "layer,provider,usage,endemicity_ratio,peak");
  EXPECT_TRUE(contains(r.out, "hosting,ORG-CF,"));
  const std::string classes = read_file(dir / "classes.csv");
  EXPECT_EQ(lines_of(classes)[0], "layer,provider,class,exemplar");
  EXPECT_TRUE(contains(classes, "hosting,ORG-CF,XL-GP,"));
  EXPECT_FALSE(contains(classes, "\ntld,"));

  write_file(dir / "rules.txt", "# tiers\nm_quantile = 0.97\n");
  auto bad = run_cli({"classify", "--records", records(), "--out", (dir / "c2.csv").string(), "--rules",
                      (dir / "rules.txt").string()});
  EXPECT_EQ(bad.code, 2);
  EXPECT_TRUE(contains(bad.err, "overlapping")) << bad.err;
  EXPECT_TRUE(contains(bad.err, "m_quantile")) << bad.err;
  EXPECT_FALSE(fs::exists(dir / "c2.csv"));
}

TEST_F(CliFixture, ReportFormats) {
  auto json = run_cli({"report", "--records", records(), "--out-dir", (dir / "j").string(), "--min-sites", "10",
                       "--format", "json"});
  ASSERT_EQ(json.code, 0) << json.err;
  std::vector<std::string> files;
  for (const auto& e : fs::directory_iterator(dir / "j")) files.push_back(e.path().filename().string());
  EXPECT_EQ(files, (std::vector<std::string>{"report.json"}));
  const auto doc = nlohmann::json::parse(read_file(dir / "j" / "report.json"));
  for (const char* key : {"layers", "regional", "insularity", "correlations", "classes", "exclusions", "stats"}) {
    EXPECT_TRUE(doc.contains(key)) << key;
  }
  EXPECT_EQ(doc.at("exclusions").at(0).at("country"), "LU");

  auto xml = run_cli({"report", "--records", records(), "--out-dir", (dir / "x").string(), "--format", "xml"});
  EXPECT_EQ(xml.code, 2);
}

TEST_F(CliFixture, OracleCheckSubcommand) {
  auto r = run_cli({"oracle-check", "--records", records(), "--sample", "2"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(contains(r.out, "hosting: checked 2, skipped 0"));
  EXPECT_EQ(lines_of(r.out).size(), 4u);

  auto score = run_cli({"score", "--records", records(), "--out-dir", (dir / "o").string(), "--min-sites", "10",
                        "--oracle-check"});
  EXPECT_EQ(score.code, 0);
  EXPECT_TRUE(contains(score.err, "ca: checked 3"));
}

TEST(Cli, RuntimeErrorsExitOne) {
  TempDir dir;
  write_file(dir / "records.jsonl", "{\"broken\n");
  auto r = run_cli({"score", "--records", (dir / "records.jsonl").string(), "--out-dir", (dir / "o").string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_TRUE(contains(r.err, "error: score:"));
  EXPECT_TRUE(contains(r.err, "line 1"));
}

}  // namespace
}  // namespace webcent::testing
