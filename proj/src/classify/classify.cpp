#include "webcent/classify.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "webcent/error.hpp"

namespace webcent::classify {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

double parse_number(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(value, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != value.size() || !std::isfinite(v)) {
    throw InvalidArgument("rules: '" + key + "' expects a decimal, got '" + value + "'");
  }
  return v;
}

std::string describe(std::string_view key, double value) {
  std::ostringstream out;
  out << key << " (" << value << ")";
  return out.str();
}

void require_below(std::string_view low_key, double low, std::string_view high_key, double high) {
  if (!(low < high)) {
    throw InvalidArgument("overlapping rules: " + describe(low_key, low) + " must be below " +
                          describe(high_key, high));
  }
}

void require_open_unit(std::string_view key, double value) {
  if (!(value > 0.0 && value < 1.0)) {
    throw InvalidArgument("uncovered rules: " + describe(key, value) + " must lie in (0, 1)");
  }
}

struct UsageTiers {
  double xl, l, m, s;
};

ProviderClass label(const ProviderFeatures& exemplar, const UsageTiers& tiers, const ClassRules& rules) {
  const double u = exemplar.usage;
  const double er = exemplar.endemicity_ratio;
  if (er > rules.regional_split) {
    if (u >= tiers.m) return ProviderClass::L_RP;
    if (u >= tiers.s) return ProviderClass::S_RP;
    return ProviderClass::XS_RP;
  }
  if (u >= tiers.xl) return ProviderClass::XL_GP;
  if (u >= tiers.l) return er > rules.global_regional_floor ? ProviderClass::L_GP_R : ProviderClass::L_GP;
  if (u >= tiers.m) return ProviderClass::M_GP;
  return ProviderClass::S_GP;
}

}  // namespace

std::string_view to_string(ProviderClass cls) {
  switch (cls) {
    case ProviderClass::XL_GP: return "XL-GP";
    case ProviderClass::L_GP: return "L-GP";
    case ProviderClass::L_GP_R: return "L-GP(R)";
    case ProviderClass::M_GP: return "M-GP";
    case ProviderClass::S_GP: return "S-GP";
    case ProviderClass::L_RP: return "L-RP";
    case ProviderClass::S_RP: return "S-RP";
    case ProviderClass::XS_RP: return "XS-RP";
  }
  return "unknown";
}

std::optional<ProviderClass> parse_class(std::string_view name) {
  for (ProviderClass cls : kAllClasses) {
    if (to_string(cls) == name) return cls;
  }
  return std::nullopt;
}

std::string_view to_string(FeatureOrder order) {
  switch (order) {
    case FeatureOrder::PcaThenScale: return "pca_then_scale";
    case FeatureOrder::ScaleThenPca: return "scale_then_pca";
    case FeatureOrder::ScaleOnly: return "scale_only";
  }
  return "unknown";
}

bool is_long_tail(const ProviderFeatures& f, const LongTailThresholds& t) {
  return f.max_country_usage < t.min_peak_percent || f.usage < t.min_usage;
}

LongTailSplit filter_long_tail(std::span<const ProviderFeatures> features,
                               const LongTailThresholds& thresholds) {
  LongTailSplit split;
  for (const auto& f : features) {
    (is_long_tail(f, thresholds) ? split.long_tail : split.kept).push_back(f);
  }
  return split;
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw InvalidArgument("quantile of an empty set");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lower = static_cast<std::size_t>(std::floor(pos));
  const std::size_t upper = std::min(lower + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lower);
  return values[lower] + (values[upper] - values[lower]) * frac;
}

void ClassRules::validate() const {
  if (long_tail.min_peak_percent < 0.0 || long_tail.min_usage < 0.0) {
    throw InvalidArgument("uncovered rules: long-tail thresholds must be non-negative");
  }
  require_open_unit("regional_split", regional_split);
  if (global_regional_floor < 0.0) {
    throw InvalidArgument("uncovered rules: " + describe("global_regional_floor", global_regional_floor) +
                          " must be non-negative");
  }
  require_below("global_regional_floor", global_regional_floor, "regional_split", regional_split);
  require_open_unit("s_quantile", s_quantile);
  if (!(xl_quantile > 0.0 && xl_quantile <= 1.0)) {
    throw InvalidArgument("uncovered rules: " + describe("xl_quantile", xl_quantile) +
                          " must lie in (0, 1]");
  }
  require_below("s_quantile", s_quantile, "m_quantile", m_quantile);
  require_below("m_quantile", m_quantile, "l_quantile", l_quantile);
  require_below("l_quantile", l_quantile, "xl_quantile", xl_quantile);
  if (!(affinity.damping >= 0.5 && affinity.damping < 1.0)) {
    throw InvalidArgument("rules: damping must lie in [0.5, 1)");
  }
  if (affinity.max_iter < 1 || affinity.convergence_iter < 1) {
    throw InvalidArgument("rules: max_iter and convergence_iter must be positive");
  }
}

ClassRules ClassRules::parse(std::istream& in) {
  ClassRules rules;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string content = trim(line);
    if (content.empty()) continue;
    const auto eq = content.find('=');
    if (eq == std::string::npos) {
      throw InvalidArgument("rules line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key = trim(std::string_view(content).substr(0, eq));
    const std::string value = trim(std::string_view(content).substr(eq + 1));

    if (key == "long_tail_min_peak_percent") {
      rules.long_tail.min_peak_percent = parse_number(key, value);
    } else if (key == "long_tail_min_usage") {
      rules.long_tail.min_usage = parse_number(key, value);
    } else if (key == "regional_split") {
      rules.regional_split = parse_number(key, value);
    } else if (key == "global_regional_floor") {
      rules.global_regional_floor = parse_number(key, value);
    } else if (key == "xl_quantile") {
      rules.xl_quantile = parse_number(key, value);
    } else if (key == "l_quantile") {
      rules.l_quantile = parse_number(key, value);
    } else if (key == "m_quantile") {
      rules.m_quantile = parse_number(key, value);
    } else if (key == "s_quantile") {
      rules.s_quantile = parse_number(key, value);
    } else if (key == "order") {
      if (value == "pca_then_scale") {
        rules.order = FeatureOrder::PcaThenScale;
      } else if (value == "scale_then_pca") {
        rules.order = FeatureOrder::ScaleThenPca;
      } else if (value == "scale_only") {
        rules.order = FeatureOrder::ScaleOnly;
      } else {
        throw InvalidArgument("rules: unknown order '" + value + "'");
      }
    } else if (key == "preference") {
      if (value == "median") {
        rules.affinity.preference.reset();
      } else {
        rules.affinity.preference = parse_number(key, value);
      }
    } else if (key == "damping") {
      rules.affinity.damping = parse_number(key, value);
    } else if (key == "max_iter") {
      rules.affinity.max_iter = static_cast<int>(parse_number(key, value));
    } else if (key == "convergence_iter") {
      rules.affinity.convergence_iter = static_cast<int>(parse_number(key, value));
    } else {
      throw InvalidArgument("rules line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
  }
  rules.validate();
  return rules;
}

ClassRules ClassRules::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open rules file " + path);
  return parse(in);
}

ProviderClustering cluster_providers(std::span<const ProviderFeatures> features,
                                     const ClassRules& rules) {
  auto kept = filter_long_tail(features, rules.long_tail).kept;
  std::sort(kept.begin(), kept.end(),
            [](const auto& a, const auto& b) { return a.provider < b.provider; });

  ProviderClustering out;
  for (const auto& f : kept) out.providers.push_back(f.provider);
  if (kept.empty()) return out;
  if (kept.size() == 1) {
    out.exemplar[kept[0].provider] = kept[0].provider;
    return out;
  }

  std::vector<Point2> points;
  points.reserve(kept.size());
  for (const auto& f : kept) points.push_back({f.usage, f.endemicity_ratio});

  std::vector<Point2> transformed;
  try {
    switch (rules.order) {
      case FeatureOrder::PcaThenScale:
        transformed = minmax_scale(pca2(points).points);
        break;
      case FeatureOrder::ScaleThenPca:
        transformed = pca2(minmax_scale(points)).points;
        break;
      case FeatureOrder::ScaleOnly:
        transformed = minmax_scale(points);
        break;
    }
  } catch (const InvalidArgument&) {
    // Every kept provider has identical features: one cluster.
    for (const auto& f : kept) out.exemplar[f.provider] = kept[0].provider;
    return out;
  }

  const ClusterResult clusters = affinity_propagation(transformed, rules.affinity);
  for (std::size_t i = 0; i < kept.size(); ++i) {
    out.exemplar[kept[i].provider] = kept[clusters.labels[i]].provider;
  }
  out.iterations_run = clusters.iterations_run;
  out.converged = clusters.converged;
  return out;
}

std::map<std::string, ProviderClass> assign_classes(const ProviderClustering& clusters,
                                                    std::span<const ProviderFeatures> features,
                                                    const ClassRules& rules) {
  std::map<std::string, const ProviderFeatures*> by_key;
  for (const auto& f : features) by_key[f.provider] = &f;

  std::map<std::string, ProviderClass> classes;
  if (!clusters.providers.empty()) {
    std::vector<double> usages;
    for (const auto& p : clusters.providers) {
      const auto it = by_key.find(p);
      if (it == by_key.end()) throw InvalidArgument("clustered provider '" + p + "' has no features");
      usages.push_back(it->second->usage);
    }
    const UsageTiers tiers{quantile(usages, rules.xl_quantile), quantile(usages, rules.l_quantile),
                           quantile(usages, rules.m_quantile), quantile(usages, rules.s_quantile)};
    for (const auto& p : clusters.providers) {
      const auto ex = clusters.exemplar.find(p);
      if (ex == clusters.exemplar.end()) throw InvalidArgument("provider '" + p + "' has no cluster");
      const auto ex_features = by_key.find(ex->second);
      if (ex_features == by_key.end()) {
        throw InvalidArgument("exemplar '" + ex->second + "' has no features");
      }
      classes[p] = label(*ex_features->second, tiers, rules);
    }
  }

  for (const auto& f : features) {
    if (classes.contains(f.provider)) continue;
    if (!is_long_tail(f, rules.long_tail)) {
      throw InvalidArgument("provider '" + f.provider + "' is neither clustered nor long-tail");
    }
    classes[f.provider] = ProviderClass::XS_RP;
  }
  return classes;
}

}  // namespace webcent::classify
