#include "support/fixture.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "webcent/cli.hpp"

namespace webcent::testing {

std::filesystem::path fixture_path(const std::string& relative) {
  return std::filesystem::path(WEBCENT_FIXTURE_DIR) / relative;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

TempDir::TempDir() {
  std::string pattern = (std::filesystem::temp_directory_path() / "webcent-test-XXXXXX").string();
  if (!mkdtemp(pattern.data())) throw std::runtime_error("mkdtemp failed");
  path_ = pattern;
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

CliResult run_cli(const std::vector<std::string>& args) {
  std::ostringstream out;
  std::ostringstream err;
  CliResult r;
  r.code = cli::run(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

CliResult annotate_e2e(const std::filesystem::path& dir, const std::vector<std::string>& extra) {
  auto f = [](const std::string& name) { return fixture_path("e2e/" + name).string(); };
  std::vector<std::string> args = {"annotate",
                                   "--toplist", f("toplist.csv"),
                                   "--measurements", f("measurements.jsonl"),
                                   "--pfx2as", f("pfx2as.txt"),
                                   "--as2org", f("as2org.tsv"),
                                   "--geo", f("geo.csv"),
                                   "--anycast", f("anycast.txt"),
                                   "--ca-owners", f("ca_owners.csv"),
                                   "--out", (dir / "records.jsonl").string(),
                                   "--stats", (dir / "stats.json").string()};
  args.insert(args.end(), extra.begin(), extra.end());
  return run_cli(args);
}

}  // namespace webcent::testing
