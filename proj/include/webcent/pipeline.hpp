#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "webcent/classify.hpp"
#include "webcent/emd.hpp"
#include "webcent/ingest/annotate.hpp"
#include "webcent/ingest/countries.hpp"
#include "webcent/layer.hpp"
#include "webcent/metrics.hpp"
#include "webcent/website_record.hpp"

namespace webcent::pipeline {

struct BuiltDistribution {
  ProviderDistribution distribution;
  std::uint64_t unknown = 0;  // records of the country without a provider at the layer
};

// Counts the country's records per provider key at `layer`. Throws DataError
// when none of them has a usable key.
BuiltDistribution build_distribution(std::span<const WebsiteRecord> records,
                                     std::string_view country, Layer layer);

struct Exclusion {
  std::string country;
  std::string layer;  // layer name, or "all" for site-count exclusions
  std::uint64_t sites = 0;
  std::string reason;

  bool operator==(const Exclusion&) const = default;
};

struct LayerScores {
  Layer layer = Layer::Hosting;
  std::map<std::string, CentralizationScore> scores;
  std::map<std::string, std::uint64_t> unknown;
  std::vector<std::string> ranking;  // descending score, ties by country code
  std::vector<Exclusion> excluded;   // countries without usable records

  bool operator==(const LayerScores&) const = default;
};

struct ScoreOptions {
  unsigned jobs = 1;
};

// Scores every listed country at `layer`. Countries with no usable record are
// reported in `excluded`, never dropped silently.
LayerScores score_all(std::span<const WebsiteRecord> records,
                      std::span<const std::string> countries, Layer layer,
                      const ScoreOptions& options = {});

// Countries present in the records, ascending. Countries with fewer than
// `min_sites` records go to `excluded` instead.
std::vector<std::string> eligible_countries(std::span<const WebsiteRecord> records,
                                            std::uint64_t min_sites,
                                            std::vector<Exclusion>* excluded = nullptr);

enum class Grouping { Continent, Subregion };

std::string_view to_string(Grouping grouping);

struct GroupStats {
  std::size_t count = 0;
  double mean = 0.0;
  double variance = 0.0;  // population variance

  bool operator==(const GroupStats&) const = default;
};

struct RegionalSummary {
  Layer layer = Layer::Hosting;
  Grouping grouping = Grouping::Continent;
  std::map<std::string, GroupStats> groups;

  bool operator==(const RegionalSummary&) const = default;
};

// Throws InvalidArgument when a scored country is missing from `countries`.
RegionalSummary regional_summary(const LayerScores& scores, const ingest::CountryTable& countries,
                                 Grouping grouping);

struct InsularityCell {
  std::string country;
  std::optional<double> value;
  std::string error;  // set when value is empty

  bool operator==(const InsularityCell&) const = default;
};

struct InsularityTable {
  Layer layer = Layer::Hosting;
  std::vector<InsularityCell> cells;  // descending value, ties by code; failures last

  bool operator==(const InsularityTable&) const = default;
};

std::vector<InsularityTable> insularity_report(
    std::span<const WebsiteRecord> records, std::span<const std::string> countries,
    std::span<const Layer> layers,
    const std::map<std::string, std::string, std::less<>>& tld_countries);

// Per-provider features over `countries`: usage percentages are the share of
// each country's records with a known provider at the layer.
std::vector<classify::ProviderFeatures> provider_features(std::span<const WebsiteRecord> records,
                                                          std::span<const std::string> countries,
                                                          Layer layer);

struct LayerClasses {
  Layer layer = Layer::Hosting;
  std::vector<classify::ProviderFeatures> features;  // sorted by provider
  std::map<std::string, classify::ProviderClass> classes;
  std::map<std::string, std::string> exemplars;  // clustered providers only
  int iterations_run = 0;
  bool converged = true;
};

LayerClasses classify_layer(std::span<const WebsiteRecord> records,
                            std::span<const std::string> countries, Layer layer,
                            const classify::ClassRules& rules);

// Layers whose providers are clustered; the TLD layer is not.
bool is_classified_layer(Layer layer);

struct CorrelationRow {
  Layer layer = Layer::Hosting;
  std::string pair;           // "score~share:<class>" or "score~insularity"
  std::optional<double> rho;  // empty for a degenerate series

  bool operator==(const CorrelationRow&) const = default;
};

// Band name of a row, or "degenerate".
std::string correlation_label(const CorrelationRow& row);

// Pearson rho between per-country score and, per class, the share of the
// country's known-provider records in that class; plus score vs insularity.
std::vector<CorrelationRow> correlation_report(
    const LayerScores& scores, std::span<const WebsiteRecord> records,
    const std::map<std::string, classify::ProviderClass>* classes,
    const InsularityTable* insularity);

struct OracleCheck {
  std::size_t checked = 0;
  std::size_t skipped = 0;  // too large for the exact solver
  double max_error = 0.0;
  std::vector<std::string> mismatches;  // "layer/country: closed vs oracle"
};

// Recomputes scores with the transportation solver. `sample` bounds the number
// of countries checked per layer (evenly spaced); 0 checks all.
OracleCheck oracle_check(std::span<const WebsiteRecord> records, const LayerScores& scores,
                         double tolerance = 1e-9, std::size_t sample = 0,
                         const emd::TransportOptions& options = {});

struct ReportOptions {
  std::vector<Layer> layers{kAllLayers.begin(), kAllLayers.end()};
  std::uint64_t min_sites = 10'000;
  unsigned jobs = 1;
  bool classify = true;
  classify::ClassRules rules;
};

struct Report {
  std::vector<LayerScores> layers;
  std::vector<RegionalSummary> regional;
  std::vector<InsularityTable> insularity;
  std::vector<CorrelationRow> correlations;
  std::map<std::string, std::map<std::string, classify::ProviderClass>> classes;  // layer -> map
  std::vector<Exclusion> exclusions;  // site-count and per-layer exclusions
  std::map<std::string, std::string> continents;  // country -> continent
  std::optional<ingest::AnnotationStats> stats;

  bool operator==(const Report&) const = default;
};

Report build_report(std::span<const WebsiteRecord> records, const ingest::CountryTable& countries,
                    const ReportOptions& options = {});

}  // namespace webcent::pipeline
