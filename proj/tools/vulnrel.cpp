// vulnrel: vulnerability release-series pipeline.
//
//   vulnrel ingest   --db safety.json --snapshot histories.json [--offline]
//   vulnrel build    --db safety.json --snapshot histories.json --out corpus.csv
//   vulnrel markov   --corpus corpus.csv --out markov.csv
//   vulnrel forecast --corpus corpus.csv --out forecast.csv --t 5,10
//   vulnrel simulate --seed 7 --out synthetic.csv
//
// Exit codes: 0 success, 1 usage error, 2 data error, 3 environment error.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "vulnrel/registry_http.hpp"
#include "vulnrel/vulnrel.hpp"

namespace fs = std::filesystem;
using namespace vulnrel;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitEnvironment = 3;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::string db_path;
  std::string snapshot_path;
  std::string corpus_path;
  std::string out_path;
  std::string summary_path;
  std::string attrition_path;
  std::string cache_dir;
  std::string index_url = kDefaultIndexUrl;
  bool offline = false;
  std::vector<std::string> packages;
  std::vector<std::size_t> horizons{5, 10};
  std::size_t min_releases = 25;
  double min_std = 0.25;
  double max_order_fraction = 0.1;
  bool ridge = false;
  std::string format = "csv";
  std::uint64_t seed = 1;
  bool no_timestamp = false;
  bool strict_match = false;
  std::string fit_mode = "training";
  std::string aic_sample = "common";
  std::string naive_tie = "vulnerable";
  double smoothing = 0.0;
  double release_bin_width = 10.0;
  std::size_t concurrency = 4;
  // simulate
  std::size_t sim_packages = 10;
  std::size_t sim_length = 60;
  std::vector<double> sim_beta{-1.0, 2.0};
};

std::string read_file(const std::string& path) {
  if (!fs::exists(path)) throw NotFoundError("file not found: " + path);
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_output(const fs::path& path, const std::string& content) {
  write_file_atomic(path, content);
  std::cerr << "wrote " << path.string() << "\n";
}

OutputOptions output_options(const RunConfig& cfg) {
  OutputOptions o;
  o.format = cfg.format == "json" ? OutputFormat::json : OutputFormat::csv;
  if (!cfg.no_timestamp) o.timestamp = utc_timestamp();
  return o;
}

std::string ext(const RunConfig& cfg) { return cfg.format == "json" ? ".json" : ".csv"; }

fs::path output_path(const RunConfig& cfg, const std::string& fallback) {
  return cfg.out_path.empty() ? fs::path(fallback + ext(cfg)) : fs::path(cfg.out_path);
}

std::set<std::string> package_filter(const RunConfig& cfg) {
  std::set<std::string> out;
  for (const auto& p : cfg.packages) out.insert(normalize_package_name(p));
  return out;
}

Database filtered_database(const RunConfig& cfg) {
  if (cfg.db_path.empty()) throw UsageError("--db is required");
  Database db = load_database_file(cfg.db_path);
  auto filter = package_filter(cfg);
  if (filter.empty()) return db;
  for (auto it = db.packages.begin(); it != db.packages.end();) {
    it = filter.count(normalize_package_name(it->first)) ? std::next(it) : db.packages.erase(it);
  }
  std::erase_if(db.diagnostics, [&](const Diagnostic& d) { return !filter.count(normalize_package_name(d.package)); });
  return db;
}

void print_attrition(const AttritionReport& a) {
  std::cerr << "advisories: " << a.advisories_total << " parsed, " << a.advisories_used << " used, "
            << a.dropped_advisories.size() << " dropped (" << a.load_skipped.size() << " skipped while loading)\n"
            << "packages:   " << a.packages_total << " in database, " << a.packages_used << " with series, "
            << a.dropped_packages.size() << " dropped\n";
}

Corpus build_from_inputs(const RunConfig& cfg) {
  if (cfg.snapshot_path.empty()) throw UsageError("--snapshot is required");
  Database db = filtered_database(cfg);
  HistoryMap histories = load_snapshot(cfg.snapshot_path);
  return build_corpus(db, histories, cfg.strict_match ? BoundaryMatch::strict : BoundaryMatch::canonical);
}

std::vector<BinarySeries> load_series(const RunConfig& cfg) {
  std::vector<BinarySeries> series;
  if (!cfg.corpus_path.empty()) {
    series = parse_corpus(read_file(cfg.corpus_path));
  } else {
    if (cfg.db_path.empty()) throw UsageError("either --corpus or --db with --snapshot is required");
    for (auto& p : build_from_inputs(cfg).packages) series.push_back(std::move(p.series));
  }
  auto filter = package_filter(cfg);
  if (!filter.empty()) {
    std::erase_if(series, [&](const BinarySeries& s) { return !filter.count(normalize_package_name(s.package)); });
  }
  std::sort(series.begin(), series.end(), [](const auto& a, const auto& b) { return a.package < b.package; });
  return series;
}

int cmd_ingest(const RunConfig& cfg) {
  if (cfg.snapshot_path.empty()) throw UsageError("--snapshot is required");
  Database db = load_database_file(cfg.db_path.empty() ? throw UsageError("--db is required") : cfg.db_path);

  std::vector<std::string> wanted;
  std::vector<Diagnostic> missing;
  if (cfg.packages.empty()) {
    for (const auto& [name, _] : db.packages) wanted.push_back(name);
  } else {
    std::map<std::string, std::string> by_norm;
    for (const auto& [name, _] : db.packages) by_norm.emplace(normalize_package_name(name), name);
    for (const auto& p : cfg.packages) {
      if (auto it = by_norm.find(normalize_package_name(p)); it != by_norm.end()) {
        wanted.push_back(it->second);
      } else {
        missing.push_back({"not_in_database", p, "", "package is not in the database"});
      }
    }
  }

  RegistryOptions options;
  options.offline = cfg.offline;
  options.max_concurrency = cfg.concurrency;
  if (!cfg.cache_dir.empty()) {
    options.cache_dir = fs::path(cfg.cache_dir);
  } else {
    options.cache_dir = cache_dir_from_env();
  }
  RegistryClient client(options, cfg.offline ? Transport{} : make_http_transport(cfg.index_url));
  FetchAllResult fetched = client.fetch_all(wanted);
  missing.insert(missing.end(), fetched.missing.begin(), fetched.missing.end());

  save_snapshot(fetched.histories, cfg.snapshot_path);
  std::cerr << "wrote " << cfg.snapshot_path << "\n";
  for (const auto& d : client.diagnostics()) std::cerr << "note: " << d.package << ": " << d.reason << " " << d.detail << "\n";
  for (const auto& d : missing) std::cerr << "warning: missing " << d.package << " (" << d.reason << ": " << d.detail << ")\n";
  std::cerr << "packages: " << wanted.size() << " requested, "
            << fetched.histories.size() << " histories, " << missing.size() << " missing; "
            << client.network_calls() << " network request(s)\n";
  return kExitOk;
}

int cmd_build(const RunConfig& cfg) {
  Corpus corpus = build_from_inputs(cfg);
  auto o = output_options(cfg);
  fs::path out = output_path(cfg, "corpus");
  write_output(out, render_corpus(corpus, o));
  OutputOptions ao = o;
  ao.format = OutputFormat::json;
  fs::path attrition = cfg.attrition_path.empty() ? sibling_path(out, "attrition").replace_extension(".json")
                                                  : fs::path(cfg.attrition_path);
  write_output(attrition, render_attrition(corpus.attrition, ao));
  print_attrition(corpus.attrition);
  return kExitOk;
}

int cmd_markov(const RunConfig& cfg) {
  auto series = load_series(cfg);
  auto o = output_options(cfg);
  fs::path out = output_path(cfg, "markov");
  if (series.empty()) {
    std::cerr << "warning: empty corpus; no summary produced\n";
    write_output(out, o.format == OutputFormat::json ? detail::json_document({{"records", nlohmann::json::array()}}, o)
                                                     : render_markov_records({}, o));
    return kExitOk;
  }
  SummaryOptions so;
  so.smoothing = cfg.smoothing;
  so.release_bin_width = cfg.release_bin_width;
  CorpusSummary summary = corpus_summary(series, so);
  if (o.format == OutputFormat::json) {
    write_output(out, render_markov_json(summary, o));
  } else {
    write_output(out, render_markov_records(summary.records, o));
    write_output(cfg.summary_path.empty() ? sibling_path(out, "summary") : fs::path(cfg.summary_path),
                 render_markov_stats(summary, o));
    write_output(sibling_path(out, "hist"), render_markov_histograms(summary, o));
  }
  std::cerr << "packages: " << summary.records.size() << "; median unconditional probability "
            << fmt_real(summary.p_uncond.median) << "; median releases " << fmt_real(summary.releases.median) << "\n";
  return kExitOk;
}

int cmd_forecast(const RunConfig& cfg) {
  ExperimentConfig ec;
  ec.horizons = cfg.horizons;
  ec.eligibility.min_releases = cfg.min_releases;
  ec.eligibility.min_std = cfg.min_std;
  ec.selection.max_order_fraction = cfg.max_order_fraction;
  ec.selection.sample = cfg.aic_sample == "per-order" ? AicSample::per_order : AicSample::common;
  ec.selection.fit.ridge_fallback = cfg.ridge;
  ec.forecast.fit.ridge_fallback = cfg.ridge;
  ec.forecast.mode = cfg.fit_mode == "full" ? ForecastFit::full_series : ForecastFit::training_prefix;
  ec.forecast.tie = cfg.naive_tie == "clean" ? NaiveTie::predict_clean : NaiveTie::predict_vulnerable;

  auto series = load_series(cfg);
  ExperimentResult result = run_experiment(series, ec);

  auto o = output_options(cfg);
  fs::path out = output_path(cfg, "forecast");
  write_output(out, render_forecast_reports(result.reports, o));
  write_output(cfg.summary_path.empty() ? sibling_path(out, "summary") : fs::path(cfg.summary_path),
               render_forecast_summary(result.summary, o));
  write_output(sibling_path(out, "exclusions"), render_exclusions(result.exclusions, o));
  write_output(sibling_path(out, "orders"), render_order_selection(result.selections, o));

  if (result.summary.empty()) std::cerr << "no eligible packages\n";
  for (const auto& s : result.summary) {
    std::cerr << "t=" << s.t << ": " << s.packages << " package(s), mean " << fmt_real(s.mean_abs_error) << ", median "
              << fmt_real(s.median_abs_error) << ", max " << fmt_real(s.max_abs_error) << ", accuracy "
              << fmt_real(s.accuracy) << " (naive " << fmt_real(s.naive_accuracy) << ")\n";
  }
  return kExitOk;
}

int cmd_simulate(const RunConfig& cfg) {
  Corpus corpus;
  for (std::size_t k = 0; k < cfg.sim_packages; ++k) {
    char name[32];
    std::snprintf(name, sizeof name, "synthetic-%03zu", k);
    Bits w = simulate_autologistic(cfg.sim_beta, cfg.sim_length, cfg.seed + k);
    CountVector counts;
    for (auto b : w) counts.values.push_back(b);
    corpus.packages.push_back({BinarySeries{name, std::move(w)}, std::move(counts), {}});
  }
  write_output(output_path(cfg, "synthetic"), render_corpus(corpus, output_options(cfg)));
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Vulnerability release-series pipeline: ingest, build, markov, forecast"};
  app.require_subcommand(1);
  RunConfig cfg;

  auto add_output = [&](CLI::App* sub) {
    sub->add_option("--out", cfg.out_path, "Output file");
    sub->add_option("--format", cfg.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
    sub->add_flag("--no-timestamp", cfg.no_timestamp, "Omit the generation timestamp header");
    sub->add_option("--seed", cfg.seed, "Seed for synthetic data");
  };
  auto add_inputs = [&](CLI::App* sub) {
    sub->add_option("--db", cfg.db_path, "Safety DB JSON file");
    sub->add_option("--snapshot", cfg.snapshot_path, "Release-history snapshot");
    sub->add_option("--packages", cfg.packages, "Restrict to these packages")->delimiter(',');
    sub->add_flag("--strict-match", cfg.strict_match, "Match spec versions by exact text");
  };
  auto add_cache = [&](CLI::App* sub) {
    sub->add_option("--cache", cfg.cache_dir, std::string("Cache directory (env ") + kCacheDirEnv + ")");
    sub->add_flag("--offline", cfg.offline, "Never touch the network");
  };

  auto* ingest = app.add_subcommand("ingest", "Fetch release histories for database packages into a snapshot");
  add_inputs(ingest);
  add_cache(ingest);
  ingest->add_option("--index-url", cfg.index_url, "Package index base URL");
  ingest->add_option("--concurrency", cfg.concurrency, "Concurrent fetches")->check(CLI::PositiveNumber);
  ingest->add_option("--seed", cfg.seed, "Unused; accepted for uniformity");

  auto* build = app.add_subcommand("build", "Build per-package binary series from database and snapshot");
  add_inputs(build);
  add_cache(build);
  add_output(build);
  build->add_option("--attrition", cfg.attrition_path, "Attrition report (JSON)");

  auto* markov = app.add_subcommand("markov", "Unconditional and transition probabilities");
  add_inputs(markov);
  add_cache(markov);
  add_output(markov);
  markov->add_option("--corpus", cfg.corpus_path, "Corpus file written by 'build'");
  markov->add_option("--summary", cfg.summary_path, "Summary statistics file (csv format)");
  markov->add_option("--smoothing", cfg.smoothing, "Add-alpha pseudo-count for transitions")->check(CLI::NonNegativeNumber);
  markov->add_option("--bin-width", cfg.release_bin_width, "Release-count histogram bin width")->check(CLI::PositiveNumber);

  auto* fc = app.add_subcommand("forecast", "Autologistic order selection and forecast experiment");
  add_inputs(fc);
  add_cache(fc);
  add_output(fc);
  fc->add_option("--corpus", cfg.corpus_path, "Corpus file written by 'build'");
  fc->add_option("--summary", cfg.summary_path, "Summary output file");
  fc->add_option("--t", cfg.horizons, "Forecast horizons")->delimiter(',');
  fc->add_option("--min-releases", cfg.min_releases, "Minimum series length");
  fc->add_option("--min-std", cfg.min_std, "Minimum training standard deviation")->check(CLI::NonNegativeNumber);
  fc->add_option("--max-order-frac", cfg.max_order_fraction, "Maximum AR order as a fraction of r")
      ->check(CLI::Range(0.0, 1.0));
  fc->add_flag("--ridge", cfg.ridge, "Ridge fallback on separation (AIC becomes approximate)");
  fc->add_option("--fit-mode", cfg.fit_mode, "Coefficients from the training prefix or the full series")
      ->check(CLI::IsMember({"training", "full"}));
  fc->add_option("--aic-sample", cfg.aic_sample, "Estimation sample for AIC comparison")
      ->check(CLI::IsMember({"common", "per-order"}));
  fc->add_option("--naive-tie", cfg.naive_tie, "Naive baseline prediction on a tied training window")
      ->check(CLI::IsMember({"vulnerable", "clean"}));

  auto* sim = app.add_subcommand("simulate", "Write a seeded synthetic autologistic corpus");
  add_output(sim);
  sim->add_option("--count", cfg.sim_packages, "Number of series");
  sim->add_option("--length", cfg.sim_length, "Series length")->check(CLI::PositiveNumber);
  sim->add_option("--beta", cfg.sim_beta, "Coefficients b0,b1,...")->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    for (auto t : cfg.horizons) {
      if (t == 0) throw UsageError("--t: horizons must be positive");
    }
    if (cfg.max_order_fraction <= 0.0) throw UsageError("--max-order-frac must be in (0, 1]");
    if (*ingest) return cmd_ingest(cfg);
    if (*build) return cmd_build(cfg);
    if (*markov) return cmd_markov(cfg);
    if (*fc) return cmd_forecast(cfg);
    if (*sim) return cmd_simulate(cfg);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const EnvironmentError& e) {
    std::cerr << "environment error: " << e.what() << "\n";
    return kExitEnvironment;
  } catch (const NotFoundError& e) {
    std::cerr << "not found: " << e.what() << "\n";
    return kExitEnvironment;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}
