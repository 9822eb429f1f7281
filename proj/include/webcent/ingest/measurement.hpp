#pragma once

#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "webcent/ingest/csv.hpp"

namespace webcent::ingest {

// Raw active-measurement result for one domain. `notes` carries per-field
// failure descriptions ("a" -> "nxdomain", "tls" -> "connection refused").
struct MeasurementRecord {
  std::string domain;
  std::vector<std::string> a;
  std::vector<std::string> ns;
  std::map<std::string, std::vector<std::string>> ns_a;
  std::optional<std::string> issuer;
  std::string ts;
  std::map<std::string, std::string> notes;

  bool operator==(const MeasurementRecord&) const = default;
};

void to_json(nlohmann::json& j, const MeasurementRecord& m);
// Validates the domain and every address; throws DataError on bad input.
void from_json(const nlohmann::json& j, MeasurementRecord& m);

// One JSON object per line. Bad lines are reported and skipped.
std::vector<MeasurementRecord> read_measurements(std::istream& in, ParseReport& report);
void write_measurement(std::ostream& out, const MeasurementRecord& m);

}  // namespace webcent::ingest
