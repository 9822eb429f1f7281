#pragma once

#include <functional>
#include <istream>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "webcent/ingest/csv.hpp"

namespace webcent::ingest {

struct CountryInfo {
  std::string code;  // ISO 3166 alpha-2
  std::string name;
  std::string subregion;
  std::string continent;  // AF, AS, EU, NA, OC, SA
};

bool is_continent_code(std::string_view code);

class CountryTable {
 public:
  CountryTable() = default;
  explicit CountryTable(std::vector<CountryInfo> countries);

  // The 150 countries of the reference dataset.
  static const CountryTable& builtin();

  // CSV `code,name,subregion,continent` with header.
  static CountryTable load(std::istream& in, ParseReport& report);

  const CountryInfo* find(std::string_view code) const;
  bool contains(std::string_view code) const { return find(code) != nullptr; }
  const std::vector<CountryInfo>& all() const { return countries_; }
  std::size_t size() const { return countries_.size(); }

  // ccTLD -> country for every listed country ("uk" for GB), plus "com" -> US.
  std::map<std::string, std::string, std::less<>> tld_countries() const;

 private:
  std::vector<CountryInfo> countries_;
  std::map<std::string, std::size_t, std::less<>> index_;
};

}  // namespace webcent::ingest
