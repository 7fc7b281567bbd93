#pragma once

// CSV / JSON renderings of corpora, Markov summaries and forecast reports.
// Every renderer is deterministic; the only run-dependent content is the
// optional timestamp header.

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "vulnrel/experiment.hpp"
#include "vulnrel/markov.hpp"
#include "vulnrel/vectorize.hpp"

namespace vulnrel {

enum class OutputFormat { csv, json };

struct OutputOptions {
  OutputFormat format = OutputFormat::csv;
  std::optional<std::string> timestamp;  // rendered as a header line when set
};

inline std::string utc_timestamp() {
  std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

/// Fixed six-decimal rendering used for every real number in reports.
inline std::string fmt_real(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", x);
  return buf;
}

inline std::string fmt_opt(const std::optional<double>& x) { return x ? fmt_real(*x) : std::string(); }

namespace detail {

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline std::string csv_header(const OutputOptions& o) {
  return o.timestamp ? "# generated " + *o.timestamp + "\n" : std::string();
}

// JSON numbers are written from the fixed-precision text so CSV and JSON agree.
inline nlohmann::json json_real(double x) { return nlohmann::json::parse(fmt_real(x)); }

inline nlohmann::json json_opt(const std::optional<double>& x) { return x ? json_real(*x) : nlohmann::json(); }

inline std::string json_document(nlohmann::json doc, const OutputOptions& o) {
  if (o.timestamp) doc["generated"] = *o.timestamp;
  return doc.dump(2) + "\n";
}

inline std::string bits_string(const Bits& bits) {
  std::string s;
  for (auto b : bits) s += b ? '1' : '0';
  return s;
}

inline nlohmann::json diagnostics_json(const std::vector<Diagnostic>& diags) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& d : diags) {
    arr.push_back({{"reason", d.reason}, {"package", d.package}, {"subject", d.subject}, {"detail", d.detail}});
  }
  return arr;
}

}  // namespace detail

/// "out/markov.csv" + "summary" -> "out/markov.summary.csv".
inline std::filesystem::path sibling_path(const std::filesystem::path& path, const std::string& tag) {
  auto p = path;
  auto ext = p.extension().string();
  p.replace_extension();
  p += "." + tag + ext;
  return p;
}

// --- corpus ------------------------------------------------------------------

inline std::string render_corpus(const Corpus& corpus, const OutputOptions& o) {
  if (o.format == OutputFormat::json) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& p : corpus.packages) {
      rows.push_back({{"package", p.series.package},
                      {"r", p.series.size()},
                      {"m", p.m()},
                      {"w", detail::bits_string(p.series.values)},
                      {"counts", p.counts.values},
                      {"advisories", p.advisory_ids}});
    }
    return detail::json_document({{"corpus", rows}}, o);
  }
  std::string out = detail::csv_header(o) + "package,r,m,w,counts\n";
  for (const auto& p : corpus.packages) {
    std::string counts;
    for (std::size_t i = 0; i < p.counts.values.size(); ++i) {
      if (i) counts += ';';
      counts += std::to_string(p.counts.values[i]);
    }
    out += detail::csv_field(p.series.package) + "," + std::to_string(p.series.size()) + "," +
           std::to_string(p.m()) + "," + detail::bits_string(p.series.values) + "," + counts + "\n";
  }
  return out;
}

inline std::string render_attrition(const AttritionReport& a, const OutputOptions& o) {
  if (o.format == OutputFormat::json) {
    nlohmann::json doc = {{"advisories_total", a.advisories_total},
                          {"advisories_used", a.advisories_used},
                          {"packages_total", a.packages_total},
                          {"packages_used", a.packages_used},
                          {"load_skipped", detail::diagnostics_json(a.load_skipped)},
                          {"dropped_advisories", detail::diagnostics_json(a.dropped_advisories)},
                          {"dropped_packages", detail::diagnostics_json(a.dropped_packages)},
                          {"dropped_clauses", detail::diagnostics_json(a.dropped_clauses)},
                          {"notes", detail::diagnostics_json(a.notes)}};
    return detail::json_document(doc, o);
  }
  std::string out = detail::csv_header(o) + "kind,reason,package,subject,detail\n";
  auto emit = [&](const char* kind, const std::vector<Diagnostic>& diags) {
    for (const auto& d : diags) {
      out += std::string(kind) + "," + d.reason + "," + detail::csv_field(d.package) + "," +
             detail::csv_field(d.subject) + "," + detail::csv_field(d.detail) + "\n";
    }
  };
  emit("load_skipped", a.load_skipped);
  emit("advisory", a.dropped_advisories);
  emit("package", a.dropped_packages);
  emit("clause", a.dropped_clauses);
  emit("note", a.notes);
  return out;
}

namespace detail {

inline Bits parse_bits(const std::string& s) {
  Bits bits;
  for (char c : s) {
    if (c != '0' && c != '1') throw FormatError("series must be a 0/1 string, got '" + s + "'");
    bits.push_back(c == '1' ? 1 : 0);
  }
  if (bits.empty()) throw FormatError("empty series");
  return bits;
}

}  // namespace detail

/// Reads back a corpus written by render_corpus (either format).
inline std::vector<BinarySeries> parse_corpus(const std::string& text) {
  std::vector<BinarySeries> out;
  std::size_t first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
      throw FormatError(std::string("malformed corpus JSON: ") + e.what());
    }
    if (!doc.contains("corpus") || !doc["corpus"].is_array()) throw FormatError("corpus JSON lacks 'corpus' array");
    for (const auto& row : doc["corpus"]) {
      if (!row.contains("package") || !row.contains("w")) throw FormatError("corpus row lacks package or w");
      out.push_back({row["package"].get<std::string>(), detail::parse_bits(row["w"].get<std::string>())});
    }
    return out;
  }
  std::istringstream in(text);
  std::string line;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    if (!header_seen) {
      if (line.rfind("package,r,m,w", 0) != 0) throw FormatError("unexpected corpus CSV header: " + line);
      header_seen = true;
      continue;
    }
    std::vector<std::string> fields;
    std::string field;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      char c = line[i];
      if (quoted) {
        if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
          field += '"';
          ++i;
        } else if (c == '"') {
          quoted = false;
        } else {
          field += c;
        }
      } else if (c == '"') {
        quoted = true;
      } else if (c == ',') {
        fields.push_back(std::move(field));
        field.clear();
      } else {
        field += c;
      }
    }
    fields.push_back(std::move(field));
    if (fields.size() < 4) throw FormatError("corpus CSV row has too few fields: " + line);
    out.push_back({fields[0], detail::parse_bits(fields[3])});
  }
  if (!header_seen) throw FormatError("corpus CSV lacks a header");
  return out;
}

// --- markov ------------------------------------------------------------------

inline std::string render_markov_records(const std::vector<PackageMarkovRecord>& records, const OutputOptions& o) {
  std::string out = detail::csv_header(o) + "package,r,p_uncond,p_11,p_00,flags\n";
  for (const auto& rec : records) {
    std::string flags;
    if (!rec.p_11) flags += "p11_undefined";
    if (!rec.p_00) flags += std::string(flags.empty() ? "" : "|") + "p00_undefined";
    out += detail::csv_field(rec.package) + "," + std::to_string(rec.r) + "," + fmt_real(rec.p_uncond) + "," +
           fmt_opt(rec.p_11) + "," + fmt_opt(rec.p_00) + "," + flags + "\n";
  }
  return out;
}

inline std::string render_markov_stats(const CorpusSummary& s, const OutputOptions& o) {
  std::string out = detail::csv_header(o) + "variable,count,mean,median,p25,p75,min,max\n";
  auto row = [&](const char* name, const DistributionStats& d) {
    out += std::string(name) + "," + std::to_string(d.count) + "," + fmt_real(d.mean) + "," + fmt_real(d.median) +
           "," + fmt_real(d.p25) + "," + fmt_real(d.p75) + "," + fmt_real(d.min) + "," + fmt_real(d.max) + "\n";
  };
  row("releases", s.releases);
  row("p_uncond", s.p_uncond);
  row("p_11", s.p_11);
  row("p_00", s.p_00);
  return out;
}

inline std::string render_markov_histograms(const CorpusSummary& s, const OutputOptions& o) {
  std::string out = detail::csv_header(o) + "variable,bin_left,bin_right,count\n";
  auto rows = [&](const char* name, const std::vector<HistogramBin>& bins) {
    for (const auto& b : bins) {
      out += std::string(name) + "," + fmt_real(b.left) + "," + fmt_real(b.right) + "," + std::to_string(b.count) + "\n";
    }
  };
  rows("releases", s.hist_releases);
  rows("p_uncond", s.hist_p_uncond);
  rows("p_11", s.hist_p_11);
  rows("p_00", s.hist_p_00);
  return out;
}

inline std::string render_markov_json(const CorpusSummary& s, const OutputOptions& o) {
  nlohmann::json records = nlohmann::json::array();
  for (const auto& rec : s.records) {
    records.push_back({{"package", rec.package},
                       {"r", rec.r},
                       {"p_uncond", detail::json_real(rec.p_uncond)},
                       {"p_11", detail::json_opt(rec.p_11)},
                       {"p_00", detail::json_opt(rec.p_00)},
                       {"p11_undefined", !rec.p_11.has_value()},
                       {"p00_undefined", !rec.p_00.has_value()}});
  }
  auto stats = [](const DistributionStats& d) {
    return nlohmann::json{{"count", d.count},
                          {"mean", detail::json_real(d.mean)},
                          {"median", detail::json_real(d.median)},
                          {"p25", detail::json_real(d.p25)},
                          {"p75", detail::json_real(d.p75)},
                          {"min", detail::json_real(d.min)},
                          {"max", detail::json_real(d.max)}};
  };
  auto hist = [](const std::vector<HistogramBin>& bins) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& b : bins) {
      arr.push_back({{"bin_left", detail::json_real(b.left)}, {"bin_right", detail::json_real(b.right)}, {"count", b.count}});
    }
    return arr;
  };
  nlohmann::json doc = {
      {"records", records},
      {"summary",
       {{"releases", stats(s.releases)}, {"p_uncond", stats(s.p_uncond)}, {"p_11", stats(s.p_11)}, {"p_00", stats(s.p_00)}}},
      {"histograms",
       {{"releases", hist(s.hist_releases)},
        {"p_uncond", hist(s.hist_p_uncond)},
        {"p_11", hist(s.hist_p_11)},
        {"p_00", hist(s.hist_p_00)}}}};
  return detail::json_document(doc, o);
}

// --- forecast ----------------------------------------------------------------

inline constexpr const char* kScoringNote =
    "absolute errors over the last t releases, averaged over t; one-step-ahead with observed lags";

inline std::string forecast_flags(const ForecastReport& r) {
  std::string flags;
  if (r.fit.ridge_applied) flags += "ridge";
  if (r.fit.separation_detected) flags += std::string(flags.empty() ? "" : "|") + "separation";
  return flags;
}

inline std::string render_forecast_reports(const std::vector<ForecastReport>& reports, const OutputOptions& o) {
  if (o.format == OutputFormat::json) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : reports) {
      nlohmann::json beta = nlohmann::json::array();
      for (double b : r.fit.beta) beta.push_back(detail::json_real(b));
      rows.push_back({{"package", r.package},
                      {"t", r.t},
                      {"order", r.order},
                      {"r", r.r},
                      {"mean_abs_error", detail::json_real(r.mean_abs_error)},
                      {"median_abs_error", detail::json_real(r.median_abs_error)},
                      {"max_abs_error", detail::json_real(r.max_abs_error)},
                      {"accuracy", detail::json_real(r.accuracy)},
                      {"naive_accuracy", detail::json_real(r.naive_accuracy)},
                      {"beta", beta},
                      {"flags", forecast_flags(r)}});
    }
    return detail::json_document({{"scoring", kScoringNote}, {"reports", rows}}, o);
  }
  std::string out = detail::csv_header(o) +
                    "package,t,order,r,mean_abs_error,median_abs_error,max_abs_error,accuracy,naive_accuracy,flags\n";
  for (const auto& r : reports) {
    out += detail::csv_field(r.package) + "," + std::to_string(r.t) + "," + std::to_string(r.order) + "," +
           std::to_string(r.r) + "," + fmt_real(r.mean_abs_error) + "," + fmt_real(r.median_abs_error) + "," +
           fmt_real(r.max_abs_error) + "," + fmt_real(r.accuracy) + "," + fmt_real(r.naive_accuracy) + "," +
           forecast_flags(r) + "\n";
  }
  return out;
}

inline std::string render_forecast_summary(const std::vector<HorizonSummary>& summary, const OutputOptions& o) {
  static constexpr const char* kEmpty = "no eligible packages: nothing to summarize";
  if (o.format == OutputFormat::json) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& s : summary) {
      rows.push_back({{"t", s.t},
                      {"packages", s.packages},
                      {"mean_abs_error", detail::json_real(s.mean_abs_error)},
                      {"median_abs_error", detail::json_real(s.median_abs_error)},
                      {"max_abs_error", detail::json_real(s.max_abs_error)},
                      {"accuracy", detail::json_real(s.accuracy)},
                      {"naive_accuracy", detail::json_real(s.naive_accuracy)}});
    }
    nlohmann::json doc = {{"scoring", kScoringNote}, {"summary", rows}};
    if (summary.empty()) doc["note"] = kEmpty;
    return detail::json_document(doc, o);
  }
  std::string out = detail::csv_header(o);
  if (summary.empty()) out += std::string("# ") + kEmpty + "\n";
  out += "t,packages,mean_abs_error,median_abs_error,max_abs_error,accuracy,naive_accuracy\n";
  for (const auto& s : summary) {
    out += std::to_string(s.t) + "," + std::to_string(s.packages) + "," + fmt_real(s.mean_abs_error) + "," +
           fmt_real(s.median_abs_error) + "," + fmt_real(s.max_abs_error) + "," + fmt_real(s.accuracy) + "," +
           fmt_real(s.naive_accuracy) + "\n";
  }
  return out;
}

inline std::string render_exclusions(const std::vector<Exclusion>& exclusions, const OutputOptions& o) {
  if (o.format == OutputFormat::json) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& e : exclusions) {
      rows.push_back({{"package", e.package}, {"t", e.t}, {"reason", e.reason}, {"detail", e.detail}});
    }
    return detail::json_document({{"exclusions", rows}}, o);
  }
  std::string out = detail::csv_header(o) + "package,t,reason,detail\n";
  for (const auto& e : exclusions) {
    out += detail::csv_field(e.package) + "," + std::to_string(e.t) + "," + e.reason + "," + detail::csv_field(e.detail) + "\n";
  }
  return out;
}

inline std::string render_order_selection(const std::vector<SelectionRecord>& selections, const OutputOptions& o) {
  if (o.format == OutputFormat::json) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& s : selections) {
      nlohmann::json aics = nlohmann::json::array();
      for (const auto& c : s.selection.candidates) {
        aics.push_back({{"order", c.order},
                        {"aic", c.fit ? detail::json_real(c.fit->aic) : nlohmann::json()},
                        {"error", c.error}});
      }
      rows.push_back({{"package", s.package}, {"r", s.r}, {"order", s.selection.order}, {"candidates", aics}});
    }
    return detail::json_document({{"selections", rows}}, o);
  }
  std::string out = detail::csv_header(o) + "package,r,selected,order,aic,error\n";
  for (const auto& s : selections) {
    for (const auto& c : s.selection.candidates) {
      out += detail::csv_field(s.package) + "," + std::to_string(s.r) + "," + std::to_string(s.selection.order) + "," +
             std::to_string(c.order) + "," + (c.fit ? fmt_real(c.fit->aic) : std::string()) + "," +
             detail::csv_field(c.error) + "\n";
    }
  }
  return out;
}

}  // namespace vulnrel
