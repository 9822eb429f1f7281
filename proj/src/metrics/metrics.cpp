#include "webcent/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "webcent/error.hpp"

namespace webcent {

namespace {

__extension__ typedef unsigned __int128 uint128;

// Exact sum of squared counts; share arithmetic happens once, at the end.
uint128 sum_of_squares(const ProviderDistribution& dist) {
  uint128 acc = 0;
  for (const auto& [provider, count] : dist.counts()) {
    acc += static_cast<uint128>(count) * count;
  }
  return acc;
}

void require_nonempty(const ProviderDistribution& dist) {
  if (dist.empty()) throw InvalidArgument("empty distribution");
}

// Neumaier-compensated sum; usage curves are short but values vary widely.
double compensated_sum(std::span<const double> values) {
  double sum = 0.0;
  double carry = 0.0;
  for (double v : values) {
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v)) {
      carry += (sum - t) + v;
    } else {
      carry += (v - t) + sum;
    }
    sum = t;
  }
  return sum + carry;
}

}  // namespace

ProviderDistribution::ProviderDistribution(std::string country, Layer layer)
    : country_(std::move(country)), layer_(layer) {}

ProviderDistribution ProviderDistribution::from_counts(
    std::string country, Layer layer, const std::map<std::string, std::uint64_t>& counts) {
  ProviderDistribution dist(std::move(country), layer);
  for (const auto& [provider, count] : counts) {
    if (count == 0) throw InvalidArgument("provider '" + provider + "' has a zero count");
    dist.add(provider, count);
  }
  return dist;
}

void ProviderDistribution::add(std::string_view provider, std::uint64_t sites) {
  if (sites == 0) return;
  auto it = counts_.find(std::string(provider));
  if (it == counts_.end()) {
    counts_.emplace(std::string(provider), sites);
  } else {
    it->second += sites;
  }
  total_ += sites;
}

CentralizationScore centralization_score(const ProviderDistribution& dist) {
  require_nonempty(dist);
  const auto total = dist.total();
  // sum (a_i / C)^2 - 1/C == (sum a_i^2 - C) / C^2, and sum a_i^2 >= C.
  const uint128 excess = sum_of_squares(dist) - total;
  const double c = static_cast<double>(total);
  return {static_cast<double>(excess) / c / c, total};
}

double hhi(const ProviderDistribution& dist) {
  require_nonempty(dist);
  const double c = static_cast<double>(dist.total());
  return static_cast<double>(sum_of_squares(dist)) / c / c;
}

std::string_view to_string(ConcentrationBand band) {
  switch (band) {
    case ConcentrationBand::Competitive: return "competitive";
    case ConcentrationBand::ModeratelyConcentrated: return "moderately concentrated";
    case ConcentrationBand::HighlyConcentrated: return "highly concentrated";
  }
  return "unknown";
}

ConcentrationBand concentration_band(double score) {
  if (score < 0.10) return ConcentrationBand::Competitive;
  if (score <= 0.18) return ConcentrationBand::ModeratelyConcentrated;
  return ConcentrationBand::HighlyConcentrated;
}

ConcentrationBand concentration_band(const CentralizationScore& score) {
  return concentration_band(score.value);
}

UsageCurve UsageCurve::from_percentages(std::string provider, std::vector<double> percentages) {
  for (double v : percentages) {
    if (!std::isfinite(v) || v < 0.0 || v > 100.0) {
      throw InvalidArgument("usage percentage out of [0, 100] for provider '" + provider + "'");
    }
  }
  std::sort(percentages.begin(), percentages.end(), std::greater<>());
  UsageCurve curve;
  curve.provider_ = std::move(provider);
  curve.values_ = std::move(percentages);
  return curve;
}

double usage(const UsageCurve& curve) { return compensated_sum(curve.values()); }

double endemicity(const UsageCurve& curve) {
  const auto values = curve.values();
  if (values.empty()) return 0.0;
  std::vector<double> gaps;
  gaps.reserve(values.size());
  for (double v : values) gaps.push_back(values.front() - v);
  return compensated_sum(gaps);
}

double endemicity_ratio(const UsageCurve& curve) {
  return provider_metrics(curve).endemicity_ratio;
}

ProviderMetrics provider_metrics(const UsageCurve& curve) {
  ProviderMetrics m;
  m.usage = usage(curve);
  m.endemicity = endemicity(curve);
  const double denom = m.usage + m.endemicity;
  m.endemicity_ratio = denom > 0.0 ? m.endemicity / denom : 0.0;
  return m;
}

double insularity(std::span<const WebsiteRecord> records, std::string_view country, Layer layer) {
  if (layer == Layer::Tld) {
    throw InvalidArgument("insularity: use tld_insularity for the TLD layer");
  }
  if (records.empty()) throw InvalidArgument("no records");
  std::size_t local = 0;
  for (const auto& record : records) {
    if (record.country != country) {
      throw InvalidArgument("insularity: record for " + record.domain + " belongs to " +
                            record.country + ", not " + std::string(country));
    }
    const auto hq = provider_hq(record, layer);
    if (hq && *hq == country) ++local;
  }
  return static_cast<double>(local) / static_cast<double>(records.size());
}

double tld_insularity(std::span<const WebsiteRecord> records, std::string_view country,
                      const std::map<std::string, std::string, std::less<>>& tld_countries) {
  if (records.empty()) throw InvalidArgument("no records");
  std::size_t local = 0;
  for (const auto& record : records) {
    const auto it = tld_countries.find(record.tld);
    if (it != tld_countries.end() && it->second == country) ++local;
  }
  return static_cast<double>(local) / static_cast<double>(records.size());
}

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw InvalidArgument("pearson: series lengths differ");
  if (x.size() < 2) throw InvalidArgument("pearson: need at least two samples");
  const double n = static_cast<double>(x.size());
  const double mean_x = compensated_sum(x) / n;
  const double mean_y = compensated_sum(y) / n;
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mean_x;
    const double dy = y[i] - mean_y;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw InvalidArgument("degenerate series");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::string_view to_string(CorrelationBand band) {
  switch (band) {
    case CorrelationBand::Poor: return "poor";
    case CorrelationBand::Fair: return "fair";
    case CorrelationBand::Moderate: return "moderate";
    case CorrelationBand::Strong: return "strong";
  }
  return "unknown";
}

CorrelationBand correlation_band(double rho) {
  const double r = std::abs(rho);
  if (r < 0.30) return CorrelationBand::Poor;
  if (r <= 0.60) return CorrelationBand::Fair;
  if (r <= 0.80) return CorrelationBand::Moderate;
  return CorrelationBand::Strong;
}

}  // namespace webcent
