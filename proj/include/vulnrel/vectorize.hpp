#pragma once

// From advisories and release histories to per-package 0/1 series.
//
// A constraint is filled positionally against the index of its boundary
// version in the history. Constraints of one clause are AND-ed, the clauses of
// one advisory are OR-ed, and the advisories of one package are summed and then
// thresholded at > 0.

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vulnrel/diagnostics.hpp"
#include "vulnrel/errors.hpp"
#include "vulnrel/registry.hpp"
#include "vulnrel/safetydb.hpp"

namespace vulnrel {

using Bits = std::vector<std::uint8_t>;

struct ConstraintVector {
  Bits values;
};

/// h rows (one per valid clause of an advisory), each of length r.
struct SpecMatrix {
  std::vector<ConstraintVector> rows;
};

struct AffectedVector {
  std::string advisory_id;
  Bits values;
};

struct CountVector {
  std::vector<std::uint32_t> values;
};

struct BinarySeries {
  std::string package;
  Bits values;

  std::size_t size() const { return values.size(); }
  friend bool operator==(const BinarySeries&, const BinarySeries&) = default;
};

enum class BoundaryMatch {
  canonical,  // "1.0" matches "1.0.0"
  strict,     // exact text match, for audits
};

inline std::optional<std::size_t> find_boundary(const ReleaseHistory& hist, const Version& version,
                                                BoundaryMatch mode = BoundaryMatch::canonical) {
  for (std::size_t i = 0; i < hist.releases.size(); ++i) {
    const Version& candidate = hist.releases[i].version;
    bool hit = mode == BoundaryMatch::canonical
                   ? candidate == version
                   : detail::trim_copy(candidate.raw) == detail::trim_copy(version.raw);
    if (hit) return i;
  }
  return std::nullopt;
}

inline ConstraintVector fill_constraint(const Constraint& c, const ReleaseHistory& hist,
                                        BoundaryMatch mode = BoundaryMatch::canonical) {
  auto boundary = find_boundary(hist, c.version, mode);
  if (!boundary) {
    throw ClauseInvalidError("version " + c.version.raw + " is not in the release history of '" +
                             hist.package + "'");
  }
  const std::size_t r = hist.size();
  const std::size_t b = *boundary;
  ConstraintVector out{Bits(r, 0)};
  for (std::size_t i = 0; i < r; ++i) {
    bool on = false;
    switch (c.op) {
      case Op::lt: on = i < b; break;
      case Op::le: on = i <= b; break;
      case Op::gt: on = i > b; break;
      case Op::ge: on = i >= b; break;
      case Op::eq: on = i == b; break;
      case Op::ne: on = i != b; break;
    }
    out.values[i] = on ? 1 : 0;
  }
  return out;
}

/// Element-wise AND of the clause's constraint vectors. Every boundary must be
/// present in the history, otherwise ClauseInvalidError.
inline ConstraintVector fill_clause(const SpecClause& clause, const ReleaseHistory& hist,
                                    BoundaryMatch mode = BoundaryMatch::canonical) {
  if (clause.constraints.empty()) throw ClauseInvalidError("empty clause");
  ConstraintVector out{Bits(hist.size(), 1)};
  for (const auto& c : clause.constraints) {
    auto v = fill_constraint(c, hist, mode);
    for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] &= v.values[i];
  }
  return out;
}

/// Column-wise OR of the matrix rows.
inline AffectedVector collapse(std::string advisory_id, const SpecMatrix& matrix) {
  if (matrix.rows.empty()) throw ClauseInvalidError("advisory " + advisory_id + " has no valid clause");
  AffectedVector out{std::move(advisory_id), Bits(matrix.rows.front().values.size(), 0)};
  for (const auto& row : matrix.rows) {
    if (row.values.size() != out.values.size()) throw std::invalid_argument("spec matrix rows differ in length");
    for (std::size_t i = 0; i < row.values.size(); ++i) out.values[i] |= row.values[i];
  }
  return out;
}

struct Aggregate {
  CountVector counts;
  BinarySeries series;
};

/// Sums the affected vectors of one package and binarizes the counts.
inline Aggregate aggregate(std::string package, std::span<const AffectedVector> vectors) {
  if (vectors.empty()) throw InsufficientDataError("package '" + package + "' has no affected vectors");
  const std::size_t r = vectors.front().values.size();
  Aggregate out{CountVector{std::vector<std::uint32_t>(r, 0)}, BinarySeries{std::move(package), Bits(r, 0)}};
  for (const auto& v : vectors) {
    if (v.values.size() != r) throw std::invalid_argument("affected vectors differ in length");
    for (std::size_t i = 0; i < r; ++i) out.counts.values[i] += v.values[i];
  }
  for (std::size_t i = 0; i < r; ++i) out.series.values[i] = out.counts.values[i] > 0 ? 1 : 0;
  return out;
}

struct PackageSeries {
  BinarySeries series;
  CountVector counts;
  std::vector<std::string> advisory_ids;  // advisories that contributed (m of them)

  std::size_t m() const { return advisory_ids.size(); }
};

struct AttritionReport {
  std::size_t advisories_total = 0;  // parsed advisories offered to vectorization
  std::size_t advisories_used = 0;
  std::size_t packages_total = 0;
  std::size_t packages_used = 0;
  std::vector<Diagnostic> load_skipped;        // advisory objects rejected while parsing
  std::vector<Diagnostic> dropped_advisories;  // exactly one entry per dropped advisory
  std::vector<Diagnostic> dropped_packages;    // exactly one entry per dropped package
  std::vector<Diagnostic> dropped_clauses;
  std::vector<Diagnostic> notes;               // informational, e.g. "!=" seen
};

struct Corpus {
  std::vector<PackageSeries> packages;  // sorted by package name
  AttritionReport attrition;
};

inline Corpus build_corpus(const Database& db, const HistoryMap& histories,
                           BoundaryMatch mode = BoundaryMatch::canonical) {
  std::map<std::string, const ReleaseHistory*> by_name;
  for (const auto& [name, history] : histories) by_name.emplace(normalize_package_name(name), &history);

  Corpus corpus;
  auto& report = corpus.attrition;
  report.load_skipped = db.diagnostics;
  report.advisories_total = db.advisory_count();
  report.packages_total = db.packages.size();

  for (const auto& [package, advisories] : db.packages) {
    auto found = by_name.find(normalize_package_name(package));
    if (found == by_name.end()) {
      for (const auto& adv : advisories) {
        report.dropped_advisories.push_back({"package_without_history", package, adv.id, ""});
      }
      report.dropped_packages.push_back({"no_history", package, "", "no release history available"});
      continue;
    }
    const ReleaseHistory& hist = *found->second;

    std::vector<AffectedVector> vectors;
    std::vector<std::string> ids;
    for (const auto& adv : advisories) {
      SpecMatrix matrix;
      std::vector<std::string> problems;
      for (const auto& clause : adv.clauses) {
        for (const auto& c : clause.constraints) {
          if (c.op == Op::ne) report.notes.push_back({"not_equal_operator", package, adv.id, render_clause(clause)});
        }
        try {
          matrix.rows.push_back(fill_clause(clause, hist, mode));
        } catch (const ClauseInvalidError& e) {
          report.dropped_clauses.push_back({"clause_invalid", package, adv.id, render_clause(clause) + ": " + e.what()});
        }
      }
      if (matrix.rows.empty()) {
        report.dropped_advisories.push_back({"no_valid_clause", package, adv.id, "every clause references a missing version"});
        continue;
      }
      vectors.push_back(collapse(adv.id, matrix));
      ids.push_back(adv.id);
    }

    if (vectors.empty()) {
      report.dropped_packages.push_back({"no_surviving_advisory", package, "", "all advisories dropped"});
      continue;
    }
    auto agg = aggregate(package, vectors);
    report.advisories_used += vectors.size();
    corpus.packages.push_back({std::move(agg.series), std::move(agg.counts), std::move(ids)});
  }
  report.packages_used = corpus.packages.size();
  return corpus;
}

}  // namespace vulnrel
