#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "webcent/ingest/csv.hpp"
#include "webcent/ingest/ip.hpp"

namespace webcent::ingest {

struct AsOrg {
  std::string org_id;
  std::string org_name;
  std::string country;  // headquarters, empty when unknown
};

class AsOrgTable {
 public:
  void insert(std::uint32_t asn, AsOrg org) { orgs_[asn] = std::move(org); }
  const AsOrg* find(std::uint32_t asn) const;
  std::size_t size() const { return orgs_.size(); }

  // TSV `asn<TAB>org_id<TAB>org_name<TAB>country`; '#' comment lines allowed.
  static AsOrgTable load(std::istream& in, ParseReport& report);

 private:
  std::map<std::uint32_t, AsOrg> orgs_;
};

struct GeoLocation {
  std::string country;
  std::string continent;

  bool operator==(const GeoLocation&) const = default;
};

// Disjoint inclusive address ranges, binary-searched.
class GeoTable {
 public:
  struct Range {
    IpAddress start;
    IpAddress end;
    GeoLocation location;
  };

  // Sorts the ranges and throws DataError if any two overlap or a range is
  // inverted or mixes families.
  explicit GeoTable(std::vector<Range> ranges = {});

  std::optional<GeoLocation> lookup(const IpAddress& ip) const;
  std::size_t size() const { return ranges_.size(); }

  // CSV `start_ip,end_ip,country,continent` with header.
  static GeoTable load(std::istream& in, ParseReport& report);

 private:
  std::vector<Range> ranges_;
};

struct CaOwner {
  std::string owner;
  std::string country;
};

// Trim, collapse internal whitespace, casefold.
std::string normalize_issuer(std::string_view issuer);

class CaOwnerTable {
 public:
  void insert(std::string_view issuer_org, CaOwner owner);
  // Matches on the normalized issuer organization.
  const CaOwner* find(std::string_view issuer_org) const;
  std::size_t size() const { return owners_.size(); }

  // CSV `issuer_org,ca_owner,country` with header.
  static CaOwnerTable load(std::istream& in, ParseReport& report);

 private:
  std::map<std::string, CaOwner, std::less<>> owners_;
};

// Reads a header line and checks it names exactly `columns`.
bool read_header(std::istream& in, std::string_view columns, ParseReport& report);

}  // namespace webcent::ingest
