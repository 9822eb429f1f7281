#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "webcent/ingest/measurement.hpp"
#include "webcent/ingest/prefix_table.hpp"
#include "webcent/ingest/tables.hpp"
#include "webcent/ingest/toplist.hpp"
#include "webcent/layer.hpp"
#include "webcent/website_record.hpp"

namespace webcent::ingest {

// Which resolved address keys the hosting and DNS layers.
enum class AddressPolicy {
  Lowest,    // numerically lowest address, IPv4 before IPv6
  Majority,  // most frequent organization across all addresses
};

struct AnnotationTables {
  const PrefixTable& prefixes;
  const AsOrgTable& orgs;
  const GeoTable& geo;
  const AnycastSet& anycast;
  const CaOwnerTable& ca_owners;
};

struct AnnotateOptions {
  std::vector<Layer> layers{kAllLayers.begin(), kAllLayers.end()};
  AddressPolicy policy = AddressPolicy::Lowest;
  std::optional<std::uint64_t> max_rank_bucket;
  unsigned jobs = 1;
};

struct LayerStats {
  std::uint64_t resolved = 0;
  std::uint64_t unknown = 0;
  std::uint64_t skipped = 0;  // layer not selected

  bool operator==(const LayerStats&) const = default;
};

struct AnnotationStats {
  std::uint64_t entries = 0;              // toplist entries considered
  std::uint64_t annotated = 0;            // records emitted
  std::uint64_t missing_measurement = 0;  // entries without a measurement
  std::uint64_t beyond_rank = 0;          // entries above max_rank_bucket
  std::uint64_t duplicate_domains = 0;    // extra origins of one host in one country
  std::uint64_t duplicate_measurements = 0;
  std::uint64_t unowned_asns = 0;         // ASN resolved but absent from as2org
  std::uint64_t multi_origin_rows = 0;    // pfx2as rows with several origins
  std::map<std::string, LayerStats> layers;
  std::map<std::string, std::uint64_t> per_country;

  void merge(const AnnotationStats& other);
  bool operator==(const AnnotationStats&) const = default;
};

void to_json(nlohmann::json& j, const AnnotationStats& s);
void from_json(const nlohmann::json& j, AnnotationStats& s);

struct AnnotationResult {
  std::vector<WebsiteRecord> records;  // sorted by (country, domain)
  AnnotationStats stats;
};

// Joins toplist entries with measurements by domain and resolves every
// selected layer. Deterministic and independent of input order.
AnnotationResult annotate(std::span<const ToplistEntry> entries,
                          std::span<const MeasurementRecord> measurements,
                          const AnnotationTables& tables, const AnnotateOptions& options = {});

// Annotated records as JSON lines.
void write_records(std::ostream& out, std::span<const WebsiteRecord> records);
std::vector<WebsiteRecord> read_records(std::istream& in, ParseReport& report);

}  // namespace webcent::ingest
