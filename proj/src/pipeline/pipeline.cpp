#include "webcent/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <thread>

#include "webcent/error.hpp"

namespace webcent::pipeline {

namespace {

bool by_country(const WebsiteRecord& a, const WebsiteRecord& b) { return a.country < b.country; }

// Records grouped by country, borrowing the input when it is already grouped.
class CountryIndex {
 public:
  explicit CountryIndex(std::span<const WebsiteRecord> records) {
    if (std::is_sorted(records.begin(), records.end(), by_country)) {
      view_ = records;
    } else {
      owned_.assign(records.begin(), records.end());
      std::stable_sort(owned_.begin(), owned_.end(), by_country);
      view_ = owned_;
    }
  }

  std::span<const WebsiteRecord> of(std::string_view country) const {
    const auto lo = std::lower_bound(view_.begin(), view_.end(), country,
                                     [](const WebsiteRecord& r, std::string_view c) { return r.country < c; });
    auto hi = lo;
    while (hi != view_.end() && hi->country == country) ++hi;
    return {lo, hi};
  }

 private:
  std::vector<WebsiteRecord> owned_;
  std::span<const WebsiteRecord> view_;
};

template <class Fn>
void parallel_for(std::size_t count, unsigned jobs, Fn fn) {
  const std::size_t workers = std::clamp<std::size_t>(jobs, 1, std::max<std::size_t>(count, 1));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::thread> threads;
  for (std::size_t w = 0; w < workers; ++w) {
    threads.emplace_back([&, w] {
      for (std::size_t i = count * w / workers; i < count * (w + 1) / workers; ++i) fn(i);
    });
  }
  for (auto& t : threads) t.join();
}

std::optional<double> safe_pearson(const std::vector<double>& x, const std::vector<double>& y) {
  try {
    return pearson(x, y);
  } catch (const InvalidArgument&) {
    return std::nullopt;
  }
}

std::string describe_mismatch(Layer layer, const std::string& country, double closed, double oracle) {
  std::ostringstream out;
  out.precision(17);
  out << to_string(layer) << "/" << country << ": closed form " << closed << " vs oracle " << oracle;
  return out.str();
}

}  // namespace

BuiltDistribution build_distribution(std::span<const WebsiteRecord> records,
                                     std::string_view country, Layer layer) {
  BuiltDistribution out{ProviderDistribution(std::string(country), layer), 0};
  for (const auto& r : records) {
    if (r.country != country) continue;
    if (const auto key = provider_key(r, layer)) {
      out.distribution.add(*key);
    } else {
      ++out.unknown;
    }
  }
  if (out.distribution.empty()) {
    throw DataError("no usable " + std::string(to_string(layer)) + " records for " + std::string(country));
  }
  return out;
}

std::vector<std::string> eligible_countries(std::span<const WebsiteRecord> records,
                                            std::uint64_t min_sites, std::vector<Exclusion>* excluded) {
  std::map<std::string, std::uint64_t> sites;
  for (const auto& r : records) ++sites[r.country];
  std::vector<std::string> out;
  for (const auto& [country, n] : sites) {
    if (n >= min_sites) {
      out.push_back(country);
    } else if (excluded) {
      excluded->push_back({country, "all", n, "fewer than " + std::to_string(min_sites) + " sites"});
    }
  }
  return out;
}

LayerScores score_all(std::span<const WebsiteRecord> records, std::span<const std::string> countries,
                      Layer layer, const ScoreOptions& options) {
  const CountryIndex index(records);
  struct Cell {
    std::optional<CentralizationScore> score;
    std::uint64_t unknown = 0;
    std::uint64_t sites = 0;
  };
  std::vector<Cell> cells(countries.size());
  parallel_for(countries.size(), options.jobs, [&](std::size_t i) {
    const auto subset = index.of(countries[i]);
    cells[i].sites = subset.size();
    try {
      const BuiltDistribution built = build_distribution(subset, countries[i], layer);
      cells[i].score = centralization_score(built.distribution);
      cells[i].unknown = built.unknown;
    } catch (const DataError&) {
      cells[i].unknown = subset.size();
    }
  });

  LayerScores out;
  out.layer = layer;
  for (std::size_t i = 0; i < countries.size(); ++i) {
    if (cells[i].score) {
      out.scores[countries[i]] = *cells[i].score;
      out.unknown[countries[i]] = cells[i].unknown;
      out.ranking.push_back(countries[i]);
    } else {
      out.excluded.push_back({countries[i], std::string(to_string(layer)), cells[i].sites,
                              "no usable records"});
    }
  }
  std::sort(out.ranking.begin(), out.ranking.end(), [&out](const std::string& a, const std::string& b) {
    const double sa = out.scores.at(a).value;
    const double sb = out.scores.at(b).value;
    return sa != sb ? sa > sb : a < b;
  });
  std::sort(out.excluded.begin(), out.excluded.end(),
            [](const Exclusion& a, const Exclusion& b) { return a.country < b.country; });
  return out;
}

std::string_view to_string(Grouping grouping) {
  return grouping == Grouping::Continent ? "continent" : "subregion";
}

RegionalSummary regional_summary(const LayerScores& scores, const ingest::CountryTable& countries,
                                 Grouping grouping) {
  std::map<std::string, std::vector<double>> values;
  for (const auto& [country, score] : scores.scores) {
    const ingest::CountryInfo* info = countries.find(country);
    if (!info) throw InvalidArgument("unknown country code '" + country + "'");
    values[grouping == Grouping::Continent ? info->continent : info->subregion].push_back(score.value);
  }
  RegionalSummary out;
  out.layer = scores.layer;
  out.grouping = grouping;
  for (const auto& [group, v] : values) {
    const double n = static_cast<double>(v.size());
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= n;
    double var = 0.0;
    for (double x : v) var += (x - mean) * (x - mean);
    out.groups[group] = {v.size(), mean, var / n};
  }
  return out;
}

std::vector<InsularityTable> insularity_report(
    std::span<const WebsiteRecord> records, std::span<const std::string> countries,
    std::span<const Layer> layers, const std::map<std::string, std::string, std::less<>>& tld_countries) {
  const CountryIndex index(records);
  std::vector<InsularityTable> out;
  for (Layer layer : layers) {
    InsularityTable table;
    table.layer = layer;
    for (const auto& country : countries) {
      InsularityCell cell{country, std::nullopt, {}};
      try {
        const auto subset = index.of(country);
        if (subset.empty()) throw InvalidArgument("no records");
        cell.value = layer == Layer::Tld ? tld_insularity(subset, country, tld_countries)
                                         : insularity(subset, country, layer);
      } catch (const Error& e) {
        cell.error = e.what();
      }
      table.cells.push_back(std::move(cell));
    }
    std::stable_sort(table.cells.begin(), table.cells.end(),
                     [](const InsularityCell& a, const InsularityCell& b) {
                       if (a.value.has_value() != b.value.has_value()) return a.value.has_value();
                       if (a.value && *a.value != *b.value) return *a.value > *b.value;
                       return a.country < b.country;
                     });
    out.push_back(std::move(table));
  }
  return out;
}

std::vector<classify::ProviderFeatures> provider_features(std::span<const WebsiteRecord> records,
                                                          std::span<const std::string> countries,
                                                          Layer layer) {
  const CountryIndex index(records);
  std::map<std::string, std::vector<double>> percentages;
  for (std::size_t c = 0; c < countries.size(); ++c) {
    std::map<std::string, std::uint64_t> counts;
    std::uint64_t known = 0;
    for (const auto& r : index.of(countries[c])) {
      if (const auto key = provider_key(r, layer)) {
        ++counts[*key];
        ++known;
      }
    }
    for (const auto& [provider, n] : counts) {
      auto& row = percentages[provider];
      row.resize(countries.size(), 0.0);
      row[c] = 100.0 * static_cast<double>(n) / static_cast<double>(known);
    }
  }
  std::vector<classify::ProviderFeatures> out;
  for (auto& [provider, row] : percentages) {
    const UsageCurve curve = UsageCurve::from_percentages(provider, std::move(row));
    const ProviderMetrics m = provider_metrics(curve);
    out.push_back({provider, m.usage, m.endemicity_ratio, curve.peak()});
  }
  return out;
}

bool is_classified_layer(Layer layer) { return layer != Layer::Tld; }

LayerClasses classify_layer(std::span<const WebsiteRecord> records,
                            std::span<const std::string> countries, Layer layer,
                            const classify::ClassRules& rules) {
  LayerClasses out;
  out.layer = layer;
  out.features = provider_features(records, countries, layer);
  const classify::ProviderClustering clusters = classify::cluster_providers(out.features, rules);
  out.classes = classify::assign_classes(clusters, out.features, rules);
  out.exemplars = clusters.exemplar;
  out.iterations_run = clusters.iterations_run;
  out.converged = clusters.converged;
  return out;
}

std::string correlation_label(const CorrelationRow& row) {
  return row.rho ? std::string(to_string(correlation_band(*row.rho))) : "degenerate";
}

std::vector<CorrelationRow> correlation_report(
    const LayerScores& scores, std::span<const WebsiteRecord> records,
    const std::map<std::string, classify::ProviderClass>* classes, const InsularityTable* insularity) {
  const CountryIndex index(records);
  std::vector<std::string> countries;
  std::vector<double> score_values;
  for (const auto& [country, score] : scores.scores) {
    countries.push_back(country);
    score_values.push_back(score.value);
  }

  std::vector<CorrelationRow> out;
  if (classes) {
    std::map<classify::ProviderClass, std::vector<double>> shares;
    for (auto cls : classify::kAllClasses) shares[cls].assign(countries.size(), 0.0);
    for (std::size_t c = 0; c < countries.size(); ++c) {
      std::uint64_t known = 0;
      std::map<classify::ProviderClass, std::uint64_t> per_class;
      for (const auto& r : index.of(countries[c])) {
        const auto key = provider_key(r, scores.layer);
        if (!key) continue;
        ++known;
        if (const auto it = classes->find(*key); it != classes->end()) ++per_class[it->second];
      }
      for (const auto& [cls, n] : per_class) {
        shares[cls][c] = static_cast<double>(n) / static_cast<double>(known);
      }
    }
    for (auto cls : classify::kAllClasses) {
      out.push_back({scores.layer, "score~share:" + std::string(classify::to_string(cls)),
                     safe_pearson(score_values, shares[cls])});
    }
  }
  if (insularity) {
    std::map<std::string, double> ins;
    for (const auto& cell : insularity->cells) {
      if (cell.value) ins[cell.country] = *cell.value;
    }
    std::vector<double> x, y;
    for (std::size_t c = 0; c < countries.size(); ++c) {
      if (const auto it = ins.find(countries[c]); it != ins.end()) {
        x.push_back(score_values[c]);
        y.push_back(it->second);
      }
    }
    out.push_back({scores.layer, "score~insularity", safe_pearson(x, y)});
  }
  return out;
}

OracleCheck oracle_check(std::span<const WebsiteRecord> records, const LayerScores& scores,
                         double tolerance, std::size_t sample, const emd::TransportOptions& options) {
  const CountryIndex index(records);
  std::vector<std::string> countries;
  for (const auto& [country, score] : scores.scores) countries.push_back(country);
  if (sample > 0 && sample < countries.size()) {
    std::vector<std::string> picked;
    for (std::size_t i = 0; i < sample; ++i) picked.push_back(countries[i * countries.size() / sample]);
    countries = std::move(picked);
  }

  OracleCheck out;
  for (const auto& country : countries) {
    const BuiltDistribution built = build_distribution(index.of(country), country, scores.layer);
    const double closed = scores.scores.at(country).value;
    double oracle = 0.0;
    try {
      oracle = emd::emd_centralization(built.distribution, options);
    } catch (const InvalidArgument&) {
      ++out.skipped;
      continue;
    }
    ++out.checked;
    const double err = std::abs(closed - oracle);
    out.max_error = std::max(out.max_error, err);
    if (!(err <= tolerance)) out.mismatches.push_back(describe_mismatch(scores.layer, country, closed, oracle));
  }
  return out;
}

Report build_report(std::span<const WebsiteRecord> records, const ingest::CountryTable& countries,
                    const ReportOptions& options) {
  Report report;
  std::vector<Layer> layers = options.layers;
  std::sort(layers.begin(), layers.end());
  layers.erase(std::unique(layers.begin(), layers.end()), layers.end());

  const std::vector<std::string> eligible = eligible_countries(records, options.min_sites, &report.exclusions);
  for (const auto& code : eligible) {
    const ingest::CountryInfo* info = countries.find(code);
    if (!info) throw DataError("records reference unknown country '" + code + "'");
    report.continents[code] = info->continent;
  }

  for (Layer layer : layers) {
    report.layers.push_back(score_all(records, eligible, layer, {options.jobs}));
    const LayerScores& scores = report.layers.back();
    report.exclusions.insert(report.exclusions.end(), scores.excluded.begin(), scores.excluded.end());
    report.regional.push_back(regional_summary(scores, countries, Grouping::Continent));
    report.regional.push_back(regional_summary(scores, countries, Grouping::Subregion));
  }

  report.insularity = insularity_report(records, eligible, layers, countries.tld_countries());

  for (std::size_t i = 0; i < layers.size(); ++i) {
    const LayerScores& scores = report.layers[i];
    const std::map<std::string, classify::ProviderClass>* classes = nullptr;
    if (options.classify && is_classified_layer(layers[i])) {
      auto& slot = report.classes[std::string(to_string(layers[i]))];
      slot = classify_layer(records, scores.ranking, layers[i], options.rules).classes;
      classes = &slot;
    }
    const auto rows = correlation_report(scores, records, classes, &report.insularity[i]);
    report.correlations.insert(report.correlations.end(), rows.begin(), rows.end());
  }
  return report;
}

}  // namespace webcent::pipeline
