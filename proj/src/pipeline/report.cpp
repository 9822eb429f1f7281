#include "webcent/report.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "webcent/error.hpp"
#include "webcent/ingest/csv.hpp"

namespace webcent::pipeline {

namespace {

using nlohmann::json;
using ingest::write_csv_row;

std::string continent_of(const Report& report, const std::string& country) {
  const auto it = report.continents.find(country);
  return it == report.continents.end() ? std::string() : it->second;
}

Layer layer_from(const json& j) {
  const auto name = j.get<std::string>();
  const auto layer = parse_layer(name);
  if (!layer) throw DataError("unknown layer '" + name + "'");
  return *layer;
}

Grouping grouping_from(const std::string& name) {
  if (name == "continent") return Grouping::Continent;
  if (name == "subregion") return Grouping::Subregion;
  throw DataError("unknown grouping '" + name + "'");
}

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> number_from(const json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

void write_file(const std::filesystem::path& path, const std::string& content,
                std::vector<std::filesystem::path>& written) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << content;
  out.close();
  if (!out) throw Error("cannot write " + path.string());
  written.push_back(path);
}

}  // namespace

std::string format_fixed4(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f", value);
  std::string s(buf);
  if (s == "-0.0000") s = "0.0000";
  return s;
}

void write_scores_csv(std::ostream& out, const LayerScores& scores, const Report& report, bool band) {
  std::vector<std::string> header{"rank", "country", "continent", "score"};
  if (band) header.push_back("band");
  write_csv_row(out, header);
  std::size_t rank = 0;
  for (const auto& country : scores.ranking) {
    const CentralizationScore& s = scores.scores.at(country);
    std::vector<std::string> row{std::to_string(++rank), country, continent_of(report, country),
                                 format_fixed4(s.value)};
    if (band) row.emplace_back(to_string(concentration_band(s)));
    write_csv_row(out, row);
  }
}

void write_regional_csv(std::ostream& out, const Report& report) {
  write_csv_row(out, {"layer", "grouping", "group", "count", "mean", "variance"});
  for (const auto& summary : report.regional) {
    for (const auto& [group, stats] : summary.groups) {
      write_csv_row(out, {std::string(to_string(summary.layer)), std::string(to_string(summary.grouping)),
                          group, std::to_string(stats.count), format_fixed4(stats.mean),
                          format_fixed4(stats.variance)});
    }
  }
}

void write_insularity_csv(std::ostream& out, const Report& report) {
  write_csv_row(out, {"layer", "rank", "country", "continent", "insularity", "error"});
  for (const auto& table : report.insularity) {
    std::size_t rank = 0;
    for (const auto& cell : table.cells) {
      write_csv_row(out, {std::string(to_string(table.layer)), cell.value ? std::to_string(++rank) : "",
                          cell.country, continent_of(report, cell.country),
                          cell.value ? format_fixed4(*cell.value) : "", cell.error});
    }
  }
}

void write_correlations_csv(std::ostream& out, const Report& report) {
  write_csv_row(out, {"layer", "pair", "rho", "band"});
  for (const auto& row : report.correlations) {
    write_csv_row(out, {std::string(to_string(row.layer)), row.pair, row.rho ? format_fixed4(*row.rho) : "",
                        correlation_label(row)});
  }
}

void write_classes_csv(std::ostream& out, const Report& report) {
  write_csv_row(out, {"layer", "provider", "class"});
  for (Layer layer : kAllLayers) {
    const auto it = report.classes.find(std::string(to_string(layer)));
    if (it == report.classes.end()) continue;
    for (const auto& [provider, cls] : it->second) {
      write_csv_row(out, {it->first, provider, std::string(classify::to_string(cls))});
    }
  }
}

void write_exclusions_csv(std::ostream& out, const Report& report) {
  write_csv_row(out, {"country", "layer", "sites", "reason"});
  for (const auto& e : report.exclusions) {
    write_csv_row(out, {e.country, e.layer, std::to_string(e.sites), e.reason});
  }
}

void to_json(json& j, const Report& report) {
  j = json::object();
  json layers = json::array();
  for (const auto& l : report.layers) {
    json scores = json::array();
    for (const auto& country : l.ranking) {
      const auto& s = l.scores.at(country);
      scores.push_back({{"country", country},
                        {"continent", continent_of(report, country)},
                        {"score", s.value},
                        {"sites", s.total},
                        {"unknown", l.unknown.at(country)}});
    }
    json excluded = json::array();
    for (const auto& e : l.excluded) {
      excluded.push_back({{"country", e.country}, {"layer", e.layer}, {"sites", e.sites}, {"reason", e.reason}});
    }
    layers.push_back({{"layer", to_string(l.layer)}, {"ranking", scores}, {"excluded", excluded}});
  }
  j["layers"] = layers;

  json regional = json::array();
  for (const auto& r : report.regional) {
    json groups = json::object();
    for (const auto& [name, g] : r.groups) {
      groups[name] = {{"count", g.count}, {"mean", g.mean}, {"variance", g.variance}};
    }
    regional.push_back({{"layer", to_string(r.layer)}, {"grouping", to_string(r.grouping)}, {"groups", groups}});
  }
  j["regional"] = regional;

  json insularity = json::array();
  for (const auto& t : report.insularity) {
    json cells = json::array();
    for (const auto& c : t.cells) {
      cells.push_back({{"country", c.country}, {"value", optional_number(c.value)}, {"error", c.error}});
    }
    insularity.push_back({{"layer", to_string(t.layer)}, {"cells", cells}});
  }
  j["insularity"] = insularity;

  json correlations = json::array();
  for (const auto& c : report.correlations) {
    correlations.push_back({{"layer", to_string(c.layer)},
                            {"pair", c.pair},
                            {"rho", optional_number(c.rho)},
                            {"band", correlation_label(c)}});
  }
  j["correlations"] = correlations;

  json classes = json::object();
  for (const auto& [layer, map] : report.classes) {
    json m = json::object();
    for (const auto& [provider, cls] : map) m[provider] = classify::to_string(cls);
    classes[layer] = m;
  }
  j["classes"] = classes;

  json exclusions = json::array();
  for (const auto& e : report.exclusions) {
    exclusions.push_back({{"country", e.country}, {"layer", e.layer}, {"sites", e.sites}, {"reason", e.reason}});
  }
  j["exclusions"] = exclusions;
  j["continents"] = report.continents;
  j["stats"] = report.stats ? json(*report.stats) : json(nullptr);
}

void from_json(const json& j, Report& report) {
  report = Report{};
  const auto exclusion_from = [](const json& e) {
    return Exclusion{e.at("country").get<std::string>(), e.at("layer").get<std::string>(),
                     e.at("sites").get<std::uint64_t>(), e.at("reason").get<std::string>()};
  };
  for (const auto& l : j.at("layers")) {
    LayerScores scores;
    scores.layer = layer_from(l.at("layer"));
    for (const auto& row : l.at("ranking")) {
      const auto country = row.at("country").get<std::string>();
      scores.ranking.push_back(country);
      scores.scores[country] = {row.at("score").get<double>(), row.at("sites").get<std::uint64_t>()};
      scores.unknown[country] = row.at("unknown").get<std::uint64_t>();
    }
    for (const auto& e : l.at("excluded")) scores.excluded.push_back(exclusion_from(e));
    report.layers.push_back(std::move(scores));
  }
  for (const auto& r : j.at("regional")) {
    RegionalSummary summary;
    summary.layer = layer_from(r.at("layer"));
    summary.grouping = grouping_from(r.at("grouping").get<std::string>());
    for (const auto& [name, g] : r.at("groups").items()) {
      summary.groups[name] = {g.at("count").get<std::size_t>(), g.at("mean").get<double>(),
                              g.at("variance").get<double>()};
    }
    report.regional.push_back(std::move(summary));
  }
  for (const auto& t : j.at("insularity")) {
    InsularityTable table;
    table.layer = layer_from(t.at("layer"));
    for (const auto& c : t.at("cells")) {
      table.cells.push_back({c.at("country").get<std::string>(), number_from(c.at("value")),
                             c.at("error").get<std::string>()});
    }
    report.insularity.push_back(std::move(table));
  }
  for (const auto& c : j.at("correlations")) {
    report.correlations.push_back({layer_from(c.at("layer")), c.at("pair").get<std::string>(),
                                   number_from(c.at("rho"))});
  }
  for (const auto& [layer, map] : j.at("classes").items()) {
    auto& out = report.classes[layer];
    for (const auto& [provider, name] : map.items()) {
      const auto cls = classify::parse_class(name.get<std::string>());
      if (!cls) throw DataError("unknown provider class '" + name.get<std::string>() + "'");
      out[provider] = *cls;
    }
  }
  for (const auto& e : j.at("exclusions")) report.exclusions.push_back(exclusion_from(e));
  j.at("continents").get_to(report.continents);
  if (!j.at("stats").is_null()) report.stats = j.at("stats").get<ingest::AnnotationStats>();
}

std::vector<std::filesystem::path> emit_report(const Report& report, const std::filesystem::path& directory,
                                               const EmitOptions& options) {
  std::error_code ec;
  std::filesystem::create_directories(directory, ec);
  if (ec) throw Error("cannot create " + directory.string() + ": " + ec.message());

  std::vector<std::filesystem::path> written;
  if (options.format == ReportFormat::Json) {
    write_file(directory / "report.json", json(report).dump(2) + "\n", written);
    return written;
  }

  for (const auto& scores : report.layers) {
    std::ostringstream out;
    write_scores_csv(out, scores, report, options.band);
    write_file(directory / ("scores_" + std::string(to_string(scores.layer)) + ".csv"), out.str(), written);
  }
  const auto emit = [&](const char* name, void (*fn)(std::ostream&, const Report&)) {
    std::ostringstream out;
    fn(out, report);
    write_file(directory / name, out.str(), written);
  };
  emit("regional.csv", write_regional_csv);
  emit("insularity.csv", write_insularity_csv);
  emit("correlations.csv", write_correlations_csv);
  if (!report.classes.empty()) emit("classes.csv", write_classes_csv);
  if (!report.exclusions.empty()) emit("exclusions.csv", write_exclusions_csv);
  if (report.stats) write_file(directory / "stats.json", json(*report.stats).dump(2) + "\n", written);
  return written;
}

}  // namespace webcent::pipeline
