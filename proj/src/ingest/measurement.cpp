#include "webcent/ingest/measurement.hpp"

#include "webcent/error.hpp"
#include "webcent/ingest/ip.hpp"
#include "webcent/ingest/toplist.hpp"

namespace webcent::ingest {

namespace {

void check_addresses(const std::vector<std::string>& addresses, const std::string& field) {
  for (const auto& a : addresses) {
    if (!IpAddress::parse(a)) throw DataError("bad address '" + a + "' in '" + field + "'");
  }
}

}  // namespace

void to_json(nlohmann::json& j, const MeasurementRecord& m) {
  j = nlohmann::json{{"domain", m.domain}, {"a", m.a},   {"ns", m.ns},
                     {"ns_a", m.ns_a},     {"ts", m.ts}};
  j["issuer"] = m.issuer ? nlohmann::json(*m.issuer) : nlohmann::json(nullptr);
  if (!m.notes.empty()) j["notes"] = m.notes;
}

void from_json(const nlohmann::json& j, MeasurementRecord& m) {
  if (!j.is_object()) throw DataError("measurement is not a JSON object");
  j.at("domain").get_to(m.domain);
  if (!is_valid_hostname(m.domain)) throw DataError("invalid domain '" + m.domain + "'");
  m.domain = canonical_hostname(m.domain);
  m.a = j.value("a", std::vector<std::string>{});
  check_addresses(m.a, "a");
  m.ns.clear();
  for (const auto& name : j.value("ns", std::vector<std::string>{})) {
    if (!is_valid_hostname(name)) throw DataError("invalid nameserver '" + name + "'");
    m.ns.push_back(canonical_hostname(name));
  }
  m.ns_a.clear();
  if (j.contains("ns_a") && !j.at("ns_a").is_null()) {
    for (const auto& [name, addresses] : j.at("ns_a").items()) {
      auto list = addresses.get<std::vector<std::string>>();
      check_addresses(list, "ns_a");
      m.ns_a[canonical_hostname(name)] = std::move(list);
    }
  }
  const auto issuer = j.find("issuer");
  if (issuer != j.end() && !issuer->is_null()) {
    m.issuer = issuer->get<std::string>();
  } else {
    m.issuer.reset();
  }
  m.ts = j.value("ts", std::string{});
  m.notes = j.value("notes", std::map<std::string, std::string>{});
}

std::vector<MeasurementRecord> read_measurements(std::istream& in, ParseReport& report) {
  std::vector<MeasurementRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    ++report.rows;
    try {
      out.push_back(nlohmann::json::parse(line).get<MeasurementRecord>());
    } catch (const nlohmann::json::exception& e) {
      report.reject(line_no, e.what());
    } catch (const DataError& e) {
      report.reject(line_no, e.what());
    }
  }
  return out;
}

void write_measurement(std::ostream& out, const MeasurementRecord& m) {
  out << nlohmann::json(m).dump() << '\n';
}

}  // namespace webcent::ingest
