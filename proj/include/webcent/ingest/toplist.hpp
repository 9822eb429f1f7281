#pragma once

#include <cstdint>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "webcent/ingest/countries.hpp"
#include "webcent/ingest/csv.hpp"

namespace webcent::ingest {

struct ToplistEntry {
  std::string country;
  std::uint64_t rank_bucket = 0;  // 1000, 5000, 10000, 50000, ...
  std::string origin;             // scheme://host[:port]
  std::string domain;             // lowercase host of the origin

  bool operator==(const ToplistEntry&) const = default;
};

// Host names per RFC 1123: dot-separated labels of letters, digits and
// hyphens, 1-63 characters each, no leading or trailing hyphen. A single
// trailing dot is accepted.
bool is_valid_hostname(std::string_view name);

// Lowercase and drop a trailing dot.
std::string canonical_hostname(std::string_view name);

// Final DNS label, lowercased. Throws InvalidArgument("no TLD") for a
// single-label name and for invalid names.
std::string extract_tld(std::string_view domain);

// Host of "scheme://host[:port][/...]", canonicalized; nullopt if invalid.
std::optional<std::string> origin_host(std::string_view origin);

bool is_rank_bucket(std::uint64_t value);

// CSV `country,rank_bucket,origin` with header. Unknown countries and
// malformed rows land in `report`. Duplicate (country, origin) pairs keep the
// smallest bucket. Output is sorted by (country, rank_bucket, origin).
std::vector<ToplistEntry> parse_toplist(std::istream& in, const CountryTable& countries,
                                        ParseReport& report);

}  // namespace webcent::ingest
