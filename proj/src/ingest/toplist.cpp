#include "webcent/ingest/toplist.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <map>
#include <tuple>
#include <utility>

#include "webcent/error.hpp"
#include "webcent/ingest/tables.hpp"

namespace webcent::ingest {

bool is_valid_hostname(std::string_view name) {
  if (!name.empty() && name.back() == '.') name.remove_suffix(1);
  if (name.empty() || name.size() > 253) return false;
  std::size_t start = 0;
  while (start <= name.size()) {
    const auto dot = name.find('.', start);
    const auto label = name.substr(start, dot == std::string_view::npos ? name.npos : dot - start);
    if (label.empty() || label.size() > 63) return false;
    if (label.front() == '-' || label.back() == '-') return false;
    for (char c : label) {
      if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-') return false;
    }
    if (dot == std::string_view::npos) break;
    start = dot + 1;
  }
  return true;
}

std::string canonical_hostname(std::string_view name) {
  if (!name.empty() && name.back() == '.') name.remove_suffix(1);
  std::string out(name);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string extract_tld(std::string_view domain) {
  if (!is_valid_hostname(domain)) throw InvalidArgument("invalid hostname '" + std::string(domain) + "'");
  const std::string host = canonical_hostname(domain);
  const auto dot = host.rfind('.');
  if (dot == std::string::npos) throw InvalidArgument("no TLD");
  return host.substr(dot + 1);
}

std::optional<std::string> origin_host(std::string_view origin) {
  const auto scheme_end = origin.find("://");
  if (scheme_end == std::string_view::npos || scheme_end == 0) return std::nullopt;
  auto rest = origin.substr(scheme_end + 3);
  rest = rest.substr(0, rest.find_first_of("/?#"));
  if (const auto colon = rest.rfind(':'); colon != std::string_view::npos) {
    const auto port = rest.substr(colon + 1);
    if (port.empty() || !std::all_of(port.begin(), port.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
      return std::nullopt;
    }
    rest = rest.substr(0, colon);
  }
  if (!is_valid_hostname(rest)) return std::nullopt;
  return canonical_hostname(rest);
}

bool is_rank_bucket(std::uint64_t value) {
  if (value < 1000) return false;
  while (value % 10 == 0) value /= 10;
  return value == 1 || value == 5;
}

std::vector<ToplistEntry> parse_toplist(std::istream& in, const CountryTable& countries,
                                        ParseReport& report) {
  if (!read_header(in, "country,rank_bucket,origin", report)) return {};
  std::map<std::pair<std::string, std::string>, ToplistEntry> unique;
  std::string line;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    ++report.rows;
    const auto fields = split_csv(line);
    if (!fields || fields->size() != 3) {
      report.reject(line_no, "expected 3 fields");
      continue;
    }
    const std::string& country = (*fields)[0];
    if (!countries.contains(country)) {
      report.reject(line_no, "unknown country '" + country + "'");
      continue;
    }
    const std::string& bucket_text = (*fields)[1];
    std::uint64_t bucket = 0;
    const auto [ptr, ec] =
        std::from_chars(bucket_text.data(), bucket_text.data() + bucket_text.size(), bucket);
    if (ec != std::errc() || ptr != bucket_text.data() + bucket_text.size() || !is_rank_bucket(bucket)) {
      report.reject(line_no, "bad rank bucket '" + bucket_text + "'");
      continue;
    }
    const auto host = origin_host((*fields)[2]);
    if (!host) {
      report.reject(line_no, "bad origin '" + (*fields)[2] + "'");
      continue;
    }
    ToplistEntry entry{country, bucket, (*fields)[2], *host};
    auto [it, inserted] = unique.try_emplace({country, entry.origin}, entry);
    if (!inserted && bucket < it->second.rank_bucket) it->second = std::move(entry);
  }

  std::vector<ToplistEntry> entries;
  entries.reserve(unique.size());
  for (auto& [key, entry] : unique) entries.push_back(std::move(entry));
  std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
    return std::tie(a.country, a.rank_bucket, a.origin) < std::tie(b.country, b.rank_bucket, b.origin);
  });
  return entries;
}

}  // namespace webcent::ingest
