#include "webcent/ingest/prefix_table.hpp"

#include <charconv>
#include <sstream>
#include <string>

namespace webcent::ingest {

namespace {

bool parse_u32(std::string_view text, std::uint32_t& out) {
  if (text.empty()) return false;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc() && ptr == text.data() + text.size();
}

std::string_view strip_comment(std::string_view line) {
  if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
  while (!line.empty() && (line.back() == ' ' || line.back() == '\t' || line.back() == '\r')) {
    line.remove_suffix(1);
  }
  while (!line.empty() && (line.front() == ' ' || line.front() == '\t')) line.remove_prefix(1);
  return line;
}

}  // namespace

void PrefixTable::insert(const Prefix& prefix, std::uint32_t asn) { trie_.insert(prefix, asn); }

std::optional<std::uint32_t> PrefixTable::lookup(const IpAddress& ip) const {
  if (auto match = trie_.longest_match(ip)) return match->first;
  return std::nullopt;
}

PrefixTable PrefixTable::load(std::istream& in, ParseReport& report) {
  PrefixTable table;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto line = strip_comment(raw);
    if (line.empty()) continue;
    ++report.rows;

    std::istringstream fields{std::string(line)};
    std::string address, length_text, origin, extra;
    if (!(fields >> address >> length_text >> origin) || (fields >> extra)) {
      report.reject(line_no, "expected 'prefix length asn'");
      continue;
    }
    const auto ip = IpAddress::parse(address);
    std::uint32_t length = 0;
    if (!ip || !parse_u32(length_text, length)) {
      report.reject(line_no, "bad prefix '" + address + "/" + length_text + "'");
      continue;
    }
    const auto prefix = Prefix::make(*ip, static_cast<int>(length));
    if (!prefix) {
      report.reject(line_no, "non-canonical prefix '" + address + "/" + length_text + "'");
      continue;
    }
    const auto split = origin.find_first_of("_,");
    std::uint32_t asn = 0;
    if (!parse_u32(std::string_view(origin).substr(0, split), asn)) {
      report.reject(line_no, "bad origin ASN '" + origin + "'");
      continue;
    }
    if (split != std::string::npos) ++table.multi_origin_rows_;
    table.insert(*prefix, asn);
  }
  return table;
}

AnycastSet AnycastSet::load(std::istream& in, ParseReport& report) {
  AnycastSet set;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto line = strip_comment(raw);
    if (line.empty()) continue;
    ++report.rows;
    const auto prefix = Prefix::parse(line);
    if (!prefix) {
      report.reject(line_no, "bad CIDR '" + std::string(line) + "'");
      continue;
    }
    set.insert(*prefix);
  }
  return set;
}

}  // namespace webcent::ingest
