#include "webcent/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include "CLI11.hpp"
#include "webcent/collector/collector.hpp"
#include "webcent/error.hpp"
#include "webcent/ingest/annotate.hpp"
#include "webcent/ingest/countries.hpp"
#include "webcent/ingest/toplist.hpp"
#include "webcent/pipeline.hpp"
#include "webcent/report.hpp"

namespace webcent::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Global {
  unsigned jobs = std::max(1u, std::thread::hardware_concurrency());
  double max_error_rate = 0.01;
  std::uint64_t seed = 0;  // reserved for randomized test utilities
  std::string countries;
};

struct CollectArgs {
  std::string domains, resolver, out, fixed_time;
  std::uint16_t tls_port = 443;
  int timeout_ms = 3000;
  unsigned max_inflight = 16;
  int retries = 2;
  bool ipv6 = false;
  bool no_tls = false;
  double rate_limit = 0.0;
};

struct AnnotateArgs {
  std::string toplist, measurements, pfx2as, as2org, geo, anycast, ca_owners, out, stats;
  std::vector<std::string> layers;
  std::string policy = "lowest";
  std::uint64_t max_rank = 0;
};

struct ScoreArgs {
  std::string records, out_dir;
  std::vector<std::string> layers;
  std::uint64_t min_sites = 10'000;
  bool band = false;
  bool oracle = false;
  std::size_t oracle_sample = 0;
};

struct ClassifyArgs {
  std::string records, rules, out;
  std::vector<std::string> layers;
  std::uint64_t min_sites = 10'000;
  bool dump_features = false;
};

struct ReportArgs {
  std::string records, stats, rules, out_dir, format = "csv";
  std::vector<std::string> layers;
  std::uint64_t min_sites = 10'000;
  bool band = false;
};

struct OracleArgs {
  std::string records;
  std::vector<std::string> layers;
  std::uint64_t min_sites = 0;
  std::size_t sample = 0;
  double tolerance = 1e-9;
};

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  return in;
}

// Rejected lines go to `err`; above the rate the load fails.
void check(const ingest::ParseReport& report, double max_rate, std::ostream& err) {
  if (!report.errors.empty()) err << "warning: " << report.summary() << "\n";
  report.enforce(max_rate);
}

template <class T, class Loader>
T load_file(const std::string& path, double max_rate, std::ostream& err, Loader loader) {
  std::ifstream in = open_input(path);
  ingest::ParseReport report;
  report.source = path;
  T value = loader(in, report);
  check(report, max_rate, err);
  return value;
}

std::vector<Layer> parse_layers(const std::vector<std::string>& names) {
  if (names.empty()) return {kAllLayers.begin(), kAllLayers.end()};
  std::vector<Layer> out;
  for (const auto& name : names) {
    const auto layer = parse_layer(name);
    if (!layer) throw InvalidArgument("unknown layer '" + name + "' (expected hosting, dns, tld or ca)");
    out.push_back(*layer);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

ingest::CountryTable countries_for(const Global& g, std::ostream& err) {
  if (g.countries.empty()) return ingest::CountryTable::builtin();
  return load_file<ingest::CountryTable>(g.countries, g.max_error_rate, err, ingest::CountryTable::load);
}

std::vector<WebsiteRecord> load_records(const std::string& path, const Global& g, std::ostream& err) {
  return load_file<std::vector<WebsiteRecord>>(path, g.max_error_rate, err, ingest::read_records);
}

// Writes through `<path>.partial` so an interrupted run never leaves a
// complete-looking file behind.
template <class Fn>
void write_atomically(const std::string& path, Fn fn) {
  const std::string partial = path + ".partial";
  {
    std::ofstream out(partial, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + partial);
    fn(out);
    out.flush();
    if (!out) throw Error("cannot write " + partial);
  }
  std::error_code ec;
  fs::rename(partial, path, ec);
  if (ec) throw Error("cannot rename " + partial + " to " + path + ": " + ec.message());
}

void run_collect(const CollectArgs& a, const Global&, std::ostream& out, std::ostream& err) {
  std::vector<std::string> domains;
  {
    std::ifstream in = open_input(a.domains);
    ingest::ParseReport report;
    report.source = a.domains;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      line.erase(0, std::min(line.find_first_not_of(" \t\r"), line.size()));
      line.erase(line.find_last_not_of(" \t\r") + 1);
      if (line.empty() || line.front() == '#') continue;
      ++report.rows;
      if (!ingest::is_valid_hostname(line)) {
        report.reject(line_no, "invalid hostname '" + line + "'");
        continue;
      }
      domains.push_back(ingest::canonical_hostname(line));
    }
    check(report, 0.0, err);
  }

  collector::ProbeConfig config;
  config.resolver = collector::Endpoint::parse(a.resolver, 53);
  config.tls_port = a.tls_port;
  config.timeout = std::chrono::milliseconds(a.timeout_ms);
  config.max_inflight = a.max_inflight;
  config.retries = a.retries;
  config.ipv6 = a.ipv6;
  config.tls = !a.no_tls;
  config.rate_limit = a.rate_limit;
  config.validate();

  collector::UdpStubResolver resolver({config.resolver, config.timeout, config.retries});
  std::unique_ptr<collector::OpenSslProber> prober;
  if (config.tls) prober = std::make_unique<collector::OpenSslProber>(config.tls_port, config.timeout);
  collector::TimestampFn clock = collector::utc_now;
  if (!a.fixed_time.empty()) clock = [t = a.fixed_time] { return t; };

  collector::CollectStats stats;
  write_atomically(a.out, [&](std::ofstream& file) {
    stats = collector::collect(domains, resolver, prober.get(), config,
                               [&file](const ingest::MeasurementRecord& m) {
                                 ingest::write_measurement(file, m);
                                 if (!file) throw Error("write failed");
                               },
                               clock);
  });
  out << json{{"resolved", stats.resolved}, {"tls_ok", stats.tls_ok}, {"failed", stats.failed}}.dump() << "\n";
}

void run_annotate(const AnnotateArgs& a, const Global& g, std::ostream& err) {
  const double rate = g.max_error_rate;
  const ingest::CountryTable countries = countries_for(g, err);
  const auto entries = load_file<std::vector<ingest::ToplistEntry>>(
      a.toplist, rate, err,
      [&countries](std::istream& in, ingest::ParseReport& r) { return ingest::parse_toplist(in, countries, r); });
  const auto measurements =
      load_file<std::vector<ingest::MeasurementRecord>>(a.measurements, rate, err, ingest::read_measurements);
  const auto prefixes = load_file<ingest::PrefixTable>(a.pfx2as, rate, err, ingest::PrefixTable::load);
  const auto orgs = load_file<ingest::AsOrgTable>(a.as2org, rate, err, ingest::AsOrgTable::load);
  const auto geo = load_file<ingest::GeoTable>(a.geo, rate, err, ingest::GeoTable::load);
  const auto anycast = a.anycast.empty()
                           ? ingest::AnycastSet{}
                           : load_file<ingest::AnycastSet>(a.anycast, rate, err, ingest::AnycastSet::load);
  const auto owners = load_file<ingest::CaOwnerTable>(a.ca_owners, rate, err, ingest::CaOwnerTable::load);

  ingest::AnnotateOptions options;
  options.layers = parse_layers(a.layers);
  if (a.policy == "lowest") {
    options.policy = ingest::AddressPolicy::Lowest;
  } else if (a.policy == "majority") {
    options.policy = ingest::AddressPolicy::Majority;
  } else {
    throw InvalidArgument("unknown address policy '" + a.policy + "'");
  }
  if (a.max_rank > 0) options.max_rank_bucket = a.max_rank;
  options.jobs = g.jobs;

  const ingest::AnnotationResult result =
      ingest::annotate(entries, measurements, {prefixes, orgs, geo, anycast, owners}, options);
  write_atomically(a.out, [&](std::ofstream& file) { ingest::write_records(file, result.records); });
  if (!a.stats.empty()) {
    write_atomically(a.stats, [&](std::ofstream& file) { file << json(result.stats).dump(2) << "\n"; });
  }
}

// Fails when any recomputed score disagrees with the closed form.
void verify_with_oracle(std::span<const WebsiteRecord> records, const std::vector<pipeline::LayerScores>& layers,
                        std::size_t sample, double tolerance, std::ostream& report_to) {
  std::vector<std::string> mismatches;
  for (const auto& scores : layers) {
    const pipeline::OracleCheck check = pipeline::oracle_check(records, scores, tolerance, sample);
    report_to << to_string(scores.layer) << ": checked " << check.checked << ", skipped " << check.skipped
              << ", max error " << check.max_error << "\n";
    mismatches.insert(mismatches.end(), check.mismatches.begin(), check.mismatches.end());
  }
  if (!mismatches.empty()) {
    std::string message = "oracle mismatch beyond tolerance:";
    for (const auto& m : mismatches) message += "\n  " + m;
    throw Error(message);
  }
}

void run_score(const ScoreArgs& a, const Global& g, std::ostream& err) {
  const auto records = load_records(a.records, g, err);
  const ingest::CountryTable countries = countries_for(g, err);

  pipeline::Report report;
  const auto eligible = pipeline::eligible_countries(records, a.min_sites, &report.exclusions);
  for (const auto& code : eligible) {
    const ingest::CountryInfo* info = countries.find(code);
    if (!info) throw DataError("records reference unknown country '" + code + "'");
    report.continents[code] = info->continent;
  }
  for (Layer layer : parse_layers(a.layers)) {
    report.layers.push_back(pipeline::score_all(records, eligible, layer, {g.jobs}));
    const auto& excluded = report.layers.back().excluded;
    report.exclusions.insert(report.exclusions.end(), excluded.begin(), excluded.end());
  }
  if (a.oracle) verify_with_oracle(records, report.layers, a.oracle_sample, 1e-9, err);

  fs::create_directories(a.out_dir);
  for (const auto& scores : report.layers) {
    write_atomically((fs::path(a.out_dir) / ("scores_" + std::string(to_string(scores.layer)) + ".csv")).string(),
                     [&](std::ofstream& f) { pipeline::write_scores_csv(f, scores, report, a.band); });
  }
  if (!report.exclusions.empty()) {
    write_atomically((fs::path(a.out_dir) / "exclusions.csv").string(),
                     [&](std::ofstream& f) { pipeline::write_exclusions_csv(f, report); });
  }
}

void run_classify(const ClassifyArgs& a, const Global& g, std::ostream& out, std::ostream& err) {
  const classify::ClassRules rules = a.rules.empty() ? classify::ClassRules{} : classify::ClassRules::load(a.rules);
  const auto records = load_records(a.records, g, err);
  const auto eligible = pipeline::eligible_countries(records, a.min_sites);

  std::vector<pipeline::LayerClasses> layers;
  for (Layer layer : parse_layers(a.layers)) {
    if (!pipeline::is_classified_layer(layer)) continue;
    const auto scores = pipeline::score_all(records, eligible, layer, {g.jobs});
    layers.push_back(pipeline::classify_layer(records, scores.ranking, layer, rules));
  }

  if (a.dump_features) {
    ingest::write_csv_row(out, {"layer", "provider", "usage", "endemicity_ratio", "peak"});
    for (const auto& l : layers) {
      for (const auto& f : l.features) {
        ingest::write_csv_row(out, {std::string(to_string(l.layer)), f.provider, pipeline::format_fixed4(f.usage),
                                    pipeline::format_fixed4(f.endemicity_ratio),
                                    pipeline::format_fixed4(f.max_country_usage)});
      }
    }
  }
  write_atomically(a.out, [&](std::ofstream& file) {
    ingest::write_csv_row(file, {"layer", "provider", "class", "exemplar"});
    for (const auto& l : layers) {
      for (const auto& [provider, cls] : l.classes) {
        const auto ex = l.exemplars.find(provider);
        ingest::write_csv_row(file, {std::string(to_string(l.layer)), provider, std::string(classify::to_string(cls)),
                                     ex == l.exemplars.end() ? "" : ex->second});
      }
    }
  });
}

void run_report(const ReportArgs& a, const Global& g, std::ostream& err) {
  pipeline::ReportOptions options;
  options.layers = parse_layers(a.layers);
  options.min_sites = a.min_sites;
  options.jobs = g.jobs;
  if (!a.rules.empty()) options.rules = classify::ClassRules::load(a.rules);
  pipeline::EmitOptions emit;
  emit.band = a.band;
  if (a.format == "json") {
    emit.format = pipeline::ReportFormat::Json;
  } else if (a.format != "csv") {
    throw InvalidArgument("unknown format '" + a.format + "'");
  }

  const auto records = load_records(a.records, g, err);
  const ingest::CountryTable countries = countries_for(g, err);
  pipeline::Report report = pipeline::build_report(records, countries, options);
  if (!a.stats.empty()) {
    std::ifstream in = open_input(a.stats);
    try {
      report.stats = json::parse(in).get<ingest::AnnotationStats>();
    } catch (const json::exception& e) {
      throw DataError(a.stats + ": " + e.what());
    }
  }
  pipeline::emit_report(report, a.out_dir, emit);
}

void run_oracle(const OracleArgs& a, const Global& g, std::ostream& out, std::ostream& err) {
  const auto records = load_records(a.records, g, err);
  const auto eligible = pipeline::eligible_countries(records, a.min_sites);
  std::vector<pipeline::LayerScores> layers;
  for (Layer layer : parse_layers(a.layers)) layers.push_back(pipeline::score_all(records, eligible, layer, {g.jobs}));
  verify_with_oracle(records, layers, a.sample, a.tolerance, out);
}

void add_layers(CLI::App* cmd, std::vector<std::string>& layers) {
  cmd->add_option("--layers", layers, "Comma-separated layers: hosting,dns,tld,ca (default all)")->delimiter(',');
}

void add_min_sites(CLI::App* cmd, std::uint64_t& min_sites) {
  cmd->add_option("--min-sites", min_sites, "Exclude countries with fewer annotated sites")
      ->capture_default_str()
      ->envname("WEBCENT_MIN_SITES");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Web infrastructure centralization metrics", "webcent"};
  app.require_subcommand(1);
  app.set_config("--manifest", "", "Key-value run manifest; command-line flags take precedence");

  Global g;
  app.add_option("--jobs", g.jobs, "Worker threads")->envname("WEBCENT_JOBS")->check(CLI::Range(1u, 4096u));
  app.add_option("--max-error-rate", g.max_error_rate, "Largest tolerated fraction of rejected input lines")
      ->capture_default_str()
      ->envname("WEBCENT_MAX_ERROR_RATE")
      ->check(CLI::Range(0.0, 1.0));
  app.add_option("--seed", g.seed, "Seed for randomized test utilities")->envname("WEBCENT_SEED");
  app.add_option("--countries", g.countries, "Country reference CSV (default: built-in table)")
      ->envname("WEBCENT_COUNTRIES")
      ->check(CLI::ExistingFile);

  CollectArgs collect;
  auto* c = app.add_subcommand("collect", "Resolve domains and fetch TLS leaf issuers");
  c->add_option("--domains", collect.domains, "Newline-delimited domain list")->required()->check(CLI::ExistingFile);
  c->add_option("--resolver", collect.resolver, "Recursive resolver host:port")
      ->required()
      ->envname("WEBCENT_RESOLVER");
  c->add_option("--out", collect.out, "Measurements JSONL output")->required();
  c->add_option("--tls-port", collect.tls_port, "TLS port")->capture_default_str()->envname("WEBCENT_TLS_PORT");
  c->add_option("--timeout-ms", collect.timeout_ms, "Per-attempt timeout")
      ->capture_default_str()
      ->envname("WEBCENT_TIMEOUT_MS")
      ->check(CLI::PositiveNumber);
  c->add_option("--max-inflight", collect.max_inflight, "Concurrent probes")
      ->capture_default_str()
      ->envname("WEBCENT_MAX_INFLIGHT")
      ->check(CLI::Range(1u, 65535u));
  c->add_option("--retries", collect.retries, "DNS retries after a timeout")
      ->capture_default_str()
      ->envname("WEBCENT_RETRIES")
      ->check(CLI::NonNegativeNumber);
  c->add_option("--rate-limit", collect.rate_limit, "Probe starts per second, 0 for unlimited")
      ->envname("WEBCENT_RATE_LIMIT")
      ->check(CLI::NonNegativeNumber);
  c->add_flag("--ipv6", collect.ipv6, "Also resolve and probe IPv6 addresses");
  c->add_flag("--no-tls", collect.no_tls, "Skip TLS issuer retrieval");
  c->add_option("--fixed-time", collect.fixed_time, "Timestamp written into every record");

  AnnotateArgs annotate;
  auto* an = app.add_subcommand("annotate", "Join toplists, measurements and lookup tables");
  an->add_option("--toplist", annotate.toplist, "CSV country,rank_bucket,origin")->required()->check(CLI::ExistingFile);
  an->add_option("--measurements", annotate.measurements, "Measurements JSONL")->required()->check(CLI::ExistingFile);
  an->add_option("--pfx2as", annotate.pfx2as, "Prefix-to-AS table")->required()->check(CLI::ExistingFile);
  an->add_option("--as2org", annotate.as2org, "AS-to-organization table")->required()->check(CLI::ExistingFile);
  an->add_option("--geo", annotate.geo, "IP range geolocation CSV")->required()->check(CLI::ExistingFile);
  an->add_option("--anycast", annotate.anycast, "Anycast prefixes, one per line")->check(CLI::ExistingFile);
  an->add_option("--ca-owners", annotate.ca_owners, "CSV issuer_org,ca_owner,country")
      ->required()
      ->check(CLI::ExistingFile);
  an->add_option("--out", annotate.out, "Annotated records JSONL output")->required();
  an->add_option("--stats", annotate.stats, "Annotation statistics JSON output");
  an->add_option("--policy", annotate.policy, "Address selection: lowest or majority")->capture_default_str();
  an->add_option("--max-rank", annotate.max_rank, "Ignore entries in larger rank buckets");
  add_layers(an, annotate.layers);

  ScoreArgs score;
  auto* s = app.add_subcommand("score", "Per-country centralization scores");
  s->add_option("--records", score.records, "Annotated records JSONL")->required()->check(CLI::ExistingFile);
  s->add_option("--out-dir", score.out_dir, "Output directory")->required();
  s->add_flag("--band", score.band, "Add the concentration band column");
  s->add_flag("--oracle-check", score.oracle, "Recompute scores with the transportation solver");
  s->add_option("--oracle-sample", score.oracle_sample, "Countries checked per layer, 0 for all");
  add_layers(s, score.layers);
  add_min_sites(s, score.min_sites);

  ClassifyArgs cls;
  auto* cl = app.add_subcommand("classify", "Cluster providers and assign classes");
  cl->add_option("--records", cls.records, "Annotated records JSONL")->required()->check(CLI::ExistingFile);
  cl->add_option("--rules", cls.rules, "Classification rules file")->check(CLI::ExistingFile);
  cl->add_option("--out", cls.out, "Class map CSV output")->required();
  cl->add_flag("--dump-features", cls.dump_features, "Print provider features to standard output");
  add_layers(cl, cls.layers);
  add_min_sites(cl, cls.min_sites);

  ReportArgs report;
  auto* r = app.add_subcommand("report", "Full report bundle");
  r->add_option("--records", report.records, "Annotated records JSONL")->required()->check(CLI::ExistingFile);
  r->add_option("--stats", report.stats, "Annotation statistics JSON")->check(CLI::ExistingFile);
  r->add_option("--rules", report.rules, "Classification rules file")->check(CLI::ExistingFile);
  r->add_option("--out-dir", report.out_dir, "Output directory")->required();
  r->add_option("--format", report.format, "csv or json")->capture_default_str()->check(CLI::IsMember({"csv", "json"}));
  r->add_flag("--band", report.band, "Add the concentration band column");
  add_layers(r, report.layers);
  add_min_sites(r, report.min_sites);

  OracleArgs oracle;
  auto* o = app.add_subcommand("oracle-check", "Compare closed-form scores with the transportation solver");
  o->add_option("--records", oracle.records, "Annotated records JSONL")->required()->check(CLI::ExistingFile);
  o->add_option("--sample", oracle.sample, "Countries checked per layer, 0 for all");
  o->add_option("--tolerance", oracle.tolerance, "Largest accepted absolute difference")->capture_default_str();
  add_layers(o, oracle.layers);
  add_min_sites(o, oracle.min_sites);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(std::move(reversed));
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    const auto subs = app.get_subcommands();
    err << "error: " << (subs.empty() ? "" : subs.front()->get_name() + ": ") << e.what() << "\n";
    return 2;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    if (command == "collect") {
      run_collect(collect, g, out, err);
    } else if (command == "annotate") {
      run_annotate(annotate, g, err);
    } else if (command == "score") {
      run_score(score, g, err);
    } else if (command == "classify") {
      run_classify(cls, g, out, err);
    } else if (command == "report") {
      run_report(report, g, err);
    } else {
      run_oracle(oracle, g, out, err);
    }
  } catch (const InvalidArgument& e) {
    err << "error: " << command << ": " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << command << ": " << e.what() << "\n";
    return 1;
  }
  return 0;
}

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace webcent::cli
