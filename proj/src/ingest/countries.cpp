#include "webcent/ingest/countries.hpp"

#include <algorithm>
#include <array>
#include <cctype>

#include "webcent/error.hpp"
#include "webcent/ingest/tables.hpp"

namespace webcent::ingest {

namespace {

std::vector<CountryInfo> builtin_rows() {
  return {
    {"AE", "United Arab Emirates", "Western Asia", "AS"},
    {"AF", "Afghanistan", "Southern Asia", "AS"},
    {"AL", "Albania", "Southern Europe", "EU"},
    {"AM", "Armenia", "Western Asia", "AS"},
    {"AO", "Angola", "Middle Africa", "AF"},
    {"AR", "Argentina", "South America", "SA"},
    {"AT", "Austria", "Western Europe", "EU"},
    {"AU", "Australia", "Oceania", "OC"},
    {"AZ", "Azerbaijan", "Western Asia", "AS"},
    {"BA", "Bosnia and Herzegovina", "Southern Europe", "EU"},
    {"BD", "Bangladesh", "Southern Asia", "AS"},
    {"BE", "Belgium", "Western Europe", "EU"},
    {"BF", "Burkina Faso", "Western Africa", "AF"},
    {"BG", "Bulgaria", "Eastern Europe", "EU"},
    {"BH", "Bahrain", "Western Asia", "AS"},
    {"BJ", "Benin", "Western Africa", "AF"},
    {"BN", "Brunei Darussalam", "South-eastern Asia", "AS"},
    {"BO", "Bolivia", "South America", "SA"},
    {"BR", "Brazil", "South America", "SA"},
    {"BW", "Botswana", "Southern Africa", "AF"},
    {"BY", "Belarus", "Eastern Europe", "EU"},
    {"CA", "Canada", "Northern America", "NA"},
    {"CD", "Congo", "Middle Africa", "AF"},
    {"CH", "Switzerland", "Western Europe", "EU"},
    {"CI", "Côte d'Ivoire", "Western Africa", "AF"},
    {"CL", "Chile", "South America", "SA"},
    {"CM", "Cameroon", "Middle Africa", "AF"},
    {"CO", "Colombia", "South America", "SA"},
    {"CR", "Costa Rica", "Central America", "NA"},
    {"CU", "Cuba", "Caribbean", "NA"},
    {"CY", "Cyprus", "Western Asia", "AS"},
    {"CZ", "Czechia", "Eastern Europe", "EU"},
    {"DE", "Germany", "Western Europe", "EU"},
    {"DK", "Denmark", "Northern Europe", "EU"},
    {"DO", "Dominican Republic", "Caribbean", "NA"},
    {"DZ", "Algeria", "Northern Africa", "AF"},
    {"EC", "Ecuador", "South America", "SA"},
    {"EE", "Estonia", "Northern Europe", "EU"},
    {"EG", "Egypt", "Northern Africa", "AF"},
    {"ES", "Spain", "Southern Europe", "EU"},
    {"ET", "Ethiopia", "Eastern Africa", "AF"},
    {"FI", "Finland", "Northern Europe", "EU"},
    {"FR", "France", "Western Europe", "EU"},
    {"GA", "Gabon", "Middle Africa", "AF"},
    {"GB", "United Kingdom", "Northern Europe", "EU"},
    {"GE", "Georgia", "Western Asia", "AS"},
    {"GH", "Ghana", "Western Africa", "AF"},
    {"GP", "Guadeloupe", "Caribbean", "NA"},
    {"GR", "Greece", "Southern Europe", "EU"},
    {"GT", "Guatemala", "Central America", "NA"},
    {"HK", "Hong Kong", "Eastern Asia", "AS"},
    {"HN", "Honduras", "Central America", "NA"},
    {"HR", "Croatia", "Southern Europe", "EU"},
    {"HT", "Haiti", "Caribbean", "NA"},
    {"HU", "Hungary", "Eastern Europe", "EU"},
    {"ID", "Indonesia", "South-eastern Asia", "AS"},
    {"IE", "Ireland", "Northern Europe", "EU"},
    {"IL", "Israel", "Western Asia", "AS"},
    {"IN", "India", "Southern Asia", "AS"},
    {"IQ", "Iraq", "Western Asia", "AS"},
    {"IR", "Iran", "Southern Asia", "AS"},
    {"IS", "Iceland", "Northern Europe", "EU"},
    {"IT", "Italy", "Southern Europe", "EU"},
    {"JM", "Jamaica", "Caribbean", "NA"},
    {"JO", "Jordan", "Western Asia", "AS"},
    {"JP", "Japan", "Eastern Asia", "AS"},
    {"KE", "Kenya", "Eastern Africa", "AF"},
    {"KG", "Kyrgyzstan", "Central Asia", "AS"},
    {"KH", "Cambodia", "South-eastern Asia", "AS"},
    {"KR", "Korea", "Eastern Asia", "AS"},
    {"KW", "Kuwait", "Western Asia", "AS"},
    {"KZ", "Kazakhstan", "Central Asia", "AS"},
    {"LA", "Laos", "South-eastern Asia", "AS"},
    {"LB", "Lebanon", "Western Asia", "AS"},
    {"LK", "Sri Lanka", "Southern Asia", "AS"},
    {"LT", "Lithuania", "Northern Europe", "EU"},
    {"LU", "Luxembourg", "Western Europe", "EU"},
    {"LV", "Latvia", "Northern Europe", "EU"},
    {"LY", "Libya", "Northern Africa", "AF"},
    {"MA", "Morocco", "Northern Africa", "AF"},
    {"MD", "Moldova", "Eastern Europe", "EU"},
    {"ME", "Montenegro", "Southern Europe", "EU"},
    {"MG", "Madagascar", "Eastern Africa", "AF"},
    {"MK", "North Macedonia", "Southern Europe", "EU"},
    {"ML", "Mali", "Western Africa", "AF"},
    {"MM", "Myanmar", "South-eastern Asia", "AS"},
    {"MN", "Mongolia", "Eastern Asia", "AS"},
    {"MO", "Macao", "Eastern Asia", "AS"},
    {"MQ", "Martinique", "Caribbean", "NA"},
    {"MT", "Malta", "Southern Europe", "EU"},
    {"MU", "Mauritius", "Eastern Africa", "AF"},
    {"MV", "Maldives", "Southern Asia", "AS"},
    {"MW", "Malawi", "Eastern Africa", "AF"},
    {"MX", "Mexico", "Central America", "NA"},
    {"MY", "Malaysia", "South-eastern Asia", "AS"},
    {"MZ", "Mozambique", "Eastern Africa", "AF"},
    {"NA", "Namibia", "Southern Africa", "AF"},
    {"NG", "Nigeria", "Western Africa", "AF"},
    {"NI", "Nicaragua", "Central America", "NA"},
    {"NL", "Netherlands", "Western Europe", "EU"},
    {"NO", "Norway", "Northern Europe", "EU"},
    {"NP", "Nepal", "Southern Asia", "AS"},
    {"NZ", "New Zealand", "Oceania", "OC"},
    {"OM", "Oman", "Western Asia", "AS"},
    {"PA", "Panama", "Central America", "NA"},
    {"PE", "Peru", "South America", "SA"},
    {"PG", "Papua New Guinea", "Oceania", "OC"},
    {"PH", "Philippines", "South-eastern Asia", "AS"},
    {"PK", "Pakistan", "Southern Asia", "AS"},
    {"PL", "Poland", "Eastern Europe", "EU"},
    {"PR", "Puerto Rico", "Caribbean", "NA"},
    {"PS", "Palestine", "Western Asia", "AS"},
    {"PT", "Portugal", "Southern Europe", "EU"},
    {"PY", "Paraguay", "South America", "SA"},
    {"QA", "Qatar", "Western Asia", "AS"},
    {"RE", "Réunion", "Eastern Africa", "AF"},
    {"RO", "Romania", "Eastern Europe", "EU"},
    {"RS", "Serbia", "Southern Europe", "EU"},
    {"RU", "Russia", "Eastern Europe", "EU"},
    {"RW", "Rwanda", "Eastern Africa", "AF"},
    {"SA", "Saudi Arabia", "Western Asia", "AS"},
    {"SD", "Sudan", "Northern Africa", "AF"},
    {"SE", "Sweden", "Northern Europe", "EU"},
    {"SG", "Singapore", "South-eastern Asia", "AS"},
    {"SI", "Slovenia", "Southern Europe", "EU"},
    {"SK", "Slovakia", "Eastern Europe", "EU"},
    {"SN", "Senegal", "Western Africa", "AF"},
    {"SO", "Somalia", "Eastern Africa", "AF"},
    {"SV", "El Salvador", "Central America", "NA"},
    {"SY", "Syria", "Western Asia", "AS"},
    {"TG", "Togo", "Western Africa", "AF"},
    {"TH", "Thailand", "South-eastern Asia", "AS"},
    {"TJ", "Tajikistan", "Central Asia", "AS"},
    {"TM", "Turkmenistan", "Central Asia", "AS"},
    {"TN", "Tunisia", "Northern Africa", "AF"},
    {"TR", "Turkey", "Western Asia", "AS"},
    {"TT", "Trinidad and Tobago", "Caribbean", "NA"},
    {"TW", "Taiwan", "Eastern Asia", "AS"},
    {"TZ", "Tanzania", "Eastern Africa", "AF"},
    {"UA", "Ukraine", "Eastern Europe", "EU"},
    {"UG", "Uganda", "Eastern Africa", "AF"},
    {"US", "United States", "Northern America", "NA"},
    {"UY", "Uruguay", "South America", "SA"},
    {"UZ", "Uzbekistan", "Central Asia", "AS"},
    {"VE", "Venezuela", "South America", "SA"},
    {"VN", "Viet Nam", "South-eastern Asia", "AS"},
    {"YE", "Yemen", "Western Asia", "AS"},
    {"ZA", "South Africa", "Southern Africa", "AF"},
    {"ZM", "Zambia", "Eastern Africa", "AF"},
    {"ZW", "Zimbabwe", "Eastern Africa", "AF"},
  };
}

std::string lowercase(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

}  // namespace

bool is_continent_code(std::string_view code) {
  static constexpr std::array<std::string_view, 6> kContinents = {"AF", "AS", "EU", "NA", "OC", "SA"};
  return std::find(kContinents.begin(), kContinents.end(), code) != kContinents.end();
}

CountryTable::CountryTable(std::vector<CountryInfo> countries) : countries_(std::move(countries)) {
  std::sort(countries_.begin(), countries_.end(),
            [](const auto& a, const auto& b) { return a.code < b.code; });
  for (std::size_t i = 0; i < countries_.size(); ++i) {
    const auto& c = countries_[i];
    if (!is_continent_code(c.continent)) {
      throw DataError("country " + c.code + ": unknown continent '" + c.continent + "'");
    }
    if (!index_.emplace(c.code, i).second) throw DataError("duplicate country code " + c.code);
  }
}

const CountryTable& CountryTable::builtin() {
  static const CountryTable table(builtin_rows());
  return table;
}

CountryTable CountryTable::load(std::istream& in, ParseReport& report) {
  std::vector<CountryInfo> rows;
  if (!read_header(in, "code,name,subregion,continent", report)) return CountryTable{};
  std::string line;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    ++report.rows;
    const auto fields = split_csv(line);
    if (!fields || fields->size() != 4) {
      report.reject(line_no, "expected 4 fields");
      continue;
    }
    CountryInfo info{(*fields)[0], (*fields)[1], (*fields)[2], (*fields)[3]};
    if (info.code.size() != 2 || !is_continent_code(info.continent)) {
      report.reject(line_no, "bad country code or continent");
      continue;
    }
    rows.push_back(std::move(info));
  }
  return CountryTable(std::move(rows));
}

const CountryInfo* CountryTable::find(std::string_view code) const {
  const auto it = index_.find(code);
  return it == index_.end() ? nullptr : &countries_[it->second];
}

std::map<std::string, std::string, std::less<>> CountryTable::tld_countries() const {
  std::map<std::string, std::string, std::less<>> map;
  for (const auto& c : countries_) map[lowercase(c.code)] = c.code;
  if (contains("GB")) map["uk"] = "GB";
  map["com"] = "US";
  return map;
}

}  // namespace webcent::ingest
