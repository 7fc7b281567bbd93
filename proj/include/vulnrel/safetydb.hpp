#pragma once

// Safety DB JSON ingestion. The file is an object keyed by package name; each
// value is an array of advisories carrying "advisory", "cve", "id", "specs"
// and "v". Elements of "specs" are alternatives (OR); the comma-separated
// constraints inside one element are a conjunction (AND).

#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "vulnrel/diagnostics.hpp"
#include "vulnrel/errors.hpp"
#include "vulnrel/version.hpp"

namespace vulnrel {

enum class Op { lt, le, gt, ge, eq, ne };

inline std::string_view to_string(Op op) {
  switch (op) {
    case Op::lt: return "<";
    case Op::le: return "<=";
    case Op::gt: return ">";
    case Op::ge: return ">=";
    case Op::eq: return "==";
    case Op::ne: return "!=";
  }
  return "?";
}

struct Constraint {
  Op op = Op::eq;
  Version version;
};

inline bool operator==(const Constraint& a, const Constraint& b) {
  return a.op == b.op && canonical_string(a.version) == canonical_string(b.version);
}

/// Conjunction of constraints, e.g. ">=1.6,<1.6.10".
struct SpecClause {
  std::vector<Constraint> constraints;

  friend bool operator==(const SpecClause&, const SpecClause&) = default;
};

struct Advisory {
  std::string id;
  std::string package;
  std::optional<std::string> cve;
  std::string text;
  std::vector<SpecClause> clauses;  // alternatives
};

struct Database {
  std::map<std::string, std::vector<Advisory>> packages;
  // Advisory-level diagnostics; each one is an advisory object that was skipped.
  std::vector<Diagnostic> diagnostics;
  std::size_t advisory_objects = 0;

  std::size_t advisory_count() const {
    std::size_t n = 0;
    for (const auto& [_, list] : packages) n += list.size();
    return n;
  }
};

/// Parses one element of a "specs" array.
inline SpecClause parse_spec(std::string_view text) {
  SpecClause clause;
  if (detail::trim_copy(text).empty()) throw SpecSyntaxError(std::string(text), "empty specification");

  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t comma = text.find(',', start);
    if (comma == std::string_view::npos) comma = text.size();
    std::string token = detail::trim_copy(text.substr(start, comma - start));
    start = comma + 1;

    if (token.empty()) throw SpecSyntaxError(std::string(text), "empty constraint");

    static constexpr std::pair<std::string_view, Op> kOps[] = {
        {"<=", Op::le}, {">=", Op::ge}, {"==", Op::eq}, {"!=", Op::ne}, {"<", Op::lt}, {">", Op::gt},
    };
    Constraint c;
    std::string_view rest = token;
    bool matched = false;
    for (const auto& [prefix, op] : kOps) {
      if (rest.substr(0, prefix.size()) == prefix) {
        c.op = op;
        rest.remove_prefix(prefix.size());
        matched = true;
        break;
      }
    }
    if (!matched) {
      if (!rest.empty() && std::string_view("<>=!~^").find(rest.front()) != std::string_view::npos) {
        throw SpecSyntaxError(token, "unknown operator");
      }
      c.op = Op::eq;
    }
    std::string version_text = detail::trim_copy(rest);
    if (!version_text.empty() &&
        std::string_view("<>=!~^").find(version_text.front()) != std::string_view::npos) {
      throw SpecSyntaxError(token, "unknown operator");
    }
    if (version_text.find('*') != std::string::npos) {
      throw SpecSyntaxError(token, "wildcard versions are not supported");
    }
    c.version = parse_version(version_text);
    clause.constraints.push_back(std::move(c));
    if (comma == text.size()) break;
  }
  return clause;
}

inline std::string render_clause(const SpecClause& clause) {
  std::string out;
  for (std::size_t i = 0; i < clause.constraints.size(); ++i) {
    if (i) out += ',';
    out += to_string(clause.constraints[i].op);
    out += canonical_string(clause.constraints[i].version);
  }
  return out;
}

/// True for "CVE-YYYY-NNNN" with four or more trailing digits.
inline bool is_cve_id(std::string_view s) {
  if (s.size() < 13 || s.substr(0, 4) != "CVE-") return false;
  for (std::size_t i = 4; i < 8; ++i)
    if (!detail::is_digit(s[i])) return false;
  if (s[8] != '-') return false;
  for (std::size_t i = 9; i < s.size(); ++i)
    if (!detail::is_digit(s[i])) return false;
  return true;
}

namespace detail {

inline std::optional<Advisory> parse_advisory(const std::string& package, const nlohmann::json& entry,
                                              std::vector<Diagnostic>& diags) {
  auto reject = [&](std::string reason, std::string subject, std::string detail) {
    diags.push_back({std::move(reason), package, std::move(subject), std::move(detail)});
    return std::nullopt;
  };

  if (!entry.is_object()) return reject("malformed_entry", "", "advisory is not a JSON object");
  Advisory adv;
  adv.package = package;

  auto id = entry.find("id");
  if (id == entry.end() || !id->is_string()) return reject("malformed_entry", "", "missing string field 'id'");
  adv.id = id->get<std::string>();

  if (auto text = entry.find("advisory"); text != entry.end() && text->is_string()) {
    adv.text = text->get<std::string>();
  }

  if (auto cve = entry.find("cve"); cve != entry.end() && !cve->is_null()) {
    if (!cve->is_string() || !is_cve_id(cve->get<std::string>())) {
      return reject("invalid_cve", adv.id, cve->dump());
    }
    adv.cve = cve->get<std::string>();
  }

  auto specs = entry.find("specs");
  if (specs == entry.end() || specs->is_null()) return reject("missing_specs", adv.id, "no 'specs' field");
  if (!specs->is_array()) return reject("malformed_entry", adv.id, "'specs' is not an array");
  if (specs->empty()) return reject("missing_specs", adv.id, "'specs' is empty");

  for (const auto& spec : *specs) {
    if (!spec.is_string()) return reject("malformed_entry", adv.id, "non-string element in 'specs'");
    try {
      adv.clauses.push_back(parse_spec(spec.get<std::string>()));
    } catch (const SpecSyntaxError& e) {
      return reject("spec_syntax", adv.id, e.what());
    } catch (const ParseError& e) {
      return reject("spec_syntax", adv.id, e.what());
    }
  }
  return adv;
}

}  // namespace detail

/// Parses a Safety DB document. Keys starting with '$' are metadata and are
/// skipped. Throws LoadError for malformed JSON or a malformed top level.
inline Database load_database(std::string_view json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw LoadError(std::string("malformed database JSON: ") + e.what());
  }
  if (!doc.is_object()) throw LoadError("database root must be a JSON object");

  Database db;
  for (const auto& [package, value] : doc.items()) {
    if (!package.empty() && package.front() == '$') continue;
    if (!value.is_array()) throw LoadError("entry for package '" + package + "' is not an array");
    auto& list = db.packages[package];
    for (const auto& entry : value) {
      ++db.advisory_objects;
      if (auto adv = detail::parse_advisory(package, entry, db.diagnostics)) list.push_back(std::move(*adv));
    }
    if (list.empty()) db.packages.erase(package);
  }
  return db;
}

inline Database load_database(std::istream& in) {
  std::stringstream buffer;
  buffer << in.rdbuf();
  return load_database(buffer.str());
}

inline Database load_database_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open database file " + path.string());
  return load_database(in);
}

}  // namespace vulnrel
