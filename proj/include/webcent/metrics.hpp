#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "webcent/layer.hpp"
#include "webcent/website_record.hpp"

namespace webcent {

// Per-country, per-layer website counts keyed by provider. Every stored count
// is at least one and total() is their exact sum.
class ProviderDistribution {
 public:
  ProviderDistribution() = default;
  ProviderDistribution(std::string country, Layer layer);

  // Throws InvalidArgument if any count is zero.
  static ProviderDistribution from_counts(std::string country, Layer layer,
                                          const std::map<std::string, std::uint64_t>& counts);

  void add(std::string_view provider, std::uint64_t sites = 1);

  const std::string& country() const { return country_; }
  Layer layer() const { return layer_; }
  const std::map<std::string, std::uint64_t>& counts() const { return counts_; }
  std::uint64_t total() const { return total_; }
  std::size_t providers() const { return counts_.size(); }
  bool empty() const { return total_ == 0; }

 private:
  std::string country_;
  Layer layer_ = Layer::Hosting;
  std::map<std::string, std::uint64_t> counts_;
  std::uint64_t total_ = 0;
};

struct CentralizationScore {
  double value = 0.0;      // in [0, 1 - 1/total]
  std::uint64_t total = 0;  // number of websites the score was computed over

  bool operator==(const CentralizationScore&) const = default;
};

// Sum of squared provider shares minus 1/C. Throws InvalidArgument on an
// empty distribution.
CentralizationScore centralization_score(const ProviderDistribution& dist);

// Herfindahl-Hirschman index: sum of squared provider shares.
double hhi(const ProviderDistribution& dist);

enum class ConcentrationBand { Competitive, ModeratelyConcentrated, HighlyConcentrated };

std::string_view to_string(ConcentrationBand band);

// Antitrust interpretation bands on the score: below 0.10 competitive, above
// 0.18 highly concentrated, both endpoints moderately concentrated.
ConcentrationBand concentration_band(const CentralizationScore& score);
ConcentrationBand concentration_band(double score);

// A provider's per-country usage percentages, sorted non-increasing.
class UsageCurve {
 public:
  UsageCurve() = default;

  // Sorts the given per-country percentages. Throws InvalidArgument when a
  // value is outside [0, 100] or not finite.
  static UsageCurve from_percentages(std::string provider, std::vector<double> percentages);

  const std::string& provider() const { return provider_; }
  std::span<const double> values() const { return values_; }
  std::size_t countries() const { return values_.size(); }
  double peak() const { return values_.empty() ? 0.0 : values_.front(); }

 private:
  std::string provider_;
  std::vector<double> values_;
};

// Area under the usage curve.
double usage(const UsageCurve& curve);
// Area between the curve and the flat line at its peak.
double endemicity(const UsageCurve& curve);
// endemicity / (usage + endemicity); 0 for an all-zero curve.
double endemicity_ratio(const UsageCurve& curve);

struct ProviderMetrics {
  double usage = 0.0;
  double endemicity = 0.0;
  double endemicity_ratio = 0.0;
};

ProviderMetrics provider_metrics(const UsageCurve& curve);

// Fraction of `country`'s records whose provider at `layer` is headquartered
// in `country`. Records with unknown headquarters stay in the denominator.
// Throws InvalidArgument for the TLD layer, for an empty record set, or when a
// record belongs to another country.
double insularity(std::span<const WebsiteRecord> records, std::string_view country, Layer layer);

// Fraction of records whose TLD maps to `country` under `tld_countries`
// (ccTLD -> country, plus "com" -> "US").
double tld_insularity(std::span<const WebsiteRecord> records, std::string_view country,
                      const std::map<std::string, std::string, std::less<>>& tld_countries);

// Sample Pearson correlation coefficient. Throws InvalidArgument on length
// mismatch, fewer than two samples, or a zero-variance series.
double pearson(std::span<const double> x, std::span<const double> y);

enum class CorrelationBand { Poor, Fair, Moderate, Strong };

std::string_view to_string(CorrelationBand band);

// |rho| < 0.30 poor, [0.30, 0.60] fair, (0.60, 0.80] moderate, > 0.80 strong.
CorrelationBand correlation_band(double rho);

}  // namespace webcent
