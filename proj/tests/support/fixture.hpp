#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace webcent::testing {

std::filesystem::path fixture_path(const std::string& relative);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& content);

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

struct CliResult {
  int code = 0;
  std::string out;
  std::string err;
};

CliResult run_cli(const std::vector<std::string>& args);

// Runs annotate over the end-to-end fixture into `dir`, leaving
// records.jsonl and stats.json there.
CliResult annotate_e2e(const std::filesystem::path& dir, const std::vector<std::string>& extra = {});

}  // namespace webcent::testing
