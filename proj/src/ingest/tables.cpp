#include "webcent/ingest/tables.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>

#include "webcent/error.hpp"
#include "webcent/ingest/countries.hpp"

namespace webcent::ingest {

namespace {

bool blank_or_comment(std::string_view line) {
  const auto first = line.find_first_not_of(" \t\r");
  return first == std::string_view::npos || line[first] == '#';
}

std::string trimmed(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

}  // namespace

bool read_header(std::istream& in, std::string_view columns, ParseReport& report) {
  std::string line;
  if (!std::getline(in, line)) {
    report.reject(1, "missing header '" + std::string(columns) + "'");
    return false;
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  if (line != columns) {
    report.reject(1, "expected header '" + std::string(columns) + "', got '" + line + "'");
    return false;
  }
  return true;
}

const AsOrg* AsOrgTable::find(std::uint32_t asn) const {
  const auto it = orgs_.find(asn);
  return it == orgs_.end() ? nullptr : &it->second;
}

AsOrgTable AsOrgTable::load(std::istream& in, ParseReport& report) {
  AsOrgTable table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank_or_comment(line)) continue;
    ++report.rows;
    const auto fields = split_csv(line, '\t');
    if (!fields || fields->size() != 4) {
      report.reject(line_no, "expected 4 tab-separated fields");
      continue;
    }
    const std::string asn_text = trimmed((*fields)[0]);
    std::uint32_t asn = 0;
    const auto [ptr, ec] = std::from_chars(asn_text.data(), asn_text.data() + asn_text.size(), asn);
    if (asn_text.empty() || ec != std::errc() || ptr != asn_text.data() + asn_text.size()) {
      report.reject(line_no, "bad ASN '" + asn_text + "'");
      continue;
    }
    AsOrg org{trimmed((*fields)[1]), trimmed((*fields)[2]), trimmed((*fields)[3])};
    if (org.org_id.empty()) {
      report.reject(line_no, "empty org_id");
      continue;
    }
    table.insert(asn, std::move(org));
  }
  return table;
}

GeoTable::GeoTable(std::vector<Range> ranges) : ranges_(std::move(ranges)) {
  for (const auto& r : ranges_) {
    if (r.start.family() != r.end.family() || r.end < r.start) {
      throw DataError("invalid geo range " + r.start.to_string() + " - " + r.end.to_string());
    }
  }
  std::sort(ranges_.begin(), ranges_.end(),
            [](const Range& a, const Range& b) { return a.start < b.start; });
  for (std::size_t i = 1; i < ranges_.size(); ++i) {
    const Range& prev = ranges_[i - 1];
    const Range& cur = ranges_[i];
    if (cur.start.family() == prev.end.family() && cur.start <= prev.end) {
      throw DataError("overlapping geo ranges " + prev.start.to_string() + " - " +
                      prev.end.to_string() + " and " + cur.start.to_string() + " - " +
                      cur.end.to_string());
    }
  }
}

std::optional<GeoLocation> GeoTable::lookup(const IpAddress& ip) const {
  auto it = std::upper_bound(ranges_.begin(), ranges_.end(), ip,
                             [](const IpAddress& v, const Range& r) { return v < r.start; });
  if (it == ranges_.begin()) return std::nullopt;
  --it;
  if (it->start.family() != ip.family() || it->end < ip) return std::nullopt;
  return it->location;
}

GeoTable GeoTable::load(std::istream& in, ParseReport& report) {
  std::vector<Range> ranges;
  if (!read_header(in, "start_ip,end_ip,country,continent", report)) return GeoTable{};
  std::string line;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank_or_comment(line)) continue;
    ++report.rows;
    const auto fields = split_csv(line);
    if (!fields || fields->size() != 4) {
      report.reject(line_no, "expected 4 fields");
      continue;
    }
    const auto start = IpAddress::parse(trimmed((*fields)[0]));
    const auto end = IpAddress::parse(trimmed((*fields)[1]));
    const std::string continent = trimmed((*fields)[3]);
    if (!start || !end) {
      report.reject(line_no, "bad address range");
      continue;
    }
    if (!is_continent_code(continent)) {
      report.reject(line_no, "unknown continent '" + continent + "'");
      continue;
    }
    ranges.push_back({*start, *end, {trimmed((*fields)[2]), continent}});
  }
  return GeoTable(std::move(ranges));
}

std::string normalize_issuer(std::string_view issuer) {
  std::string out;
  bool pending_space = false;
  for (char c : issuer) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return out;
}

void CaOwnerTable::insert(std::string_view issuer_org, CaOwner owner) {
  owners_[normalize_issuer(issuer_org)] = std::move(owner);
}

const CaOwner* CaOwnerTable::find(std::string_view issuer_org) const {
  const auto it = owners_.find(normalize_issuer(issuer_org));
  return it == owners_.end() ? nullptr : &it->second;
}

CaOwnerTable CaOwnerTable::load(std::istream& in, ParseReport& report) {
  CaOwnerTable table;
  if (!read_header(in, "issuer_org,ca_owner,country", report)) return table;
  std::string line;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank_or_comment(line)) continue;
    ++report.rows;
    const auto fields = split_csv(line);
    if (!fields || fields->size() != 3) {
      report.reject(line_no, "expected 3 fields");
      continue;
    }
    const std::string issuer = trimmed((*fields)[0]);
    const std::string owner = trimmed((*fields)[1]);
    if (issuer.empty() || owner.empty()) {
      report.reject(line_no, "empty issuer or owner");
      continue;
    }
    table.insert(issuer, {owner, trimmed((*fields)[2])});
  }
  return table;
}

}  // namespace webcent::ingest
