#pragma once

#include <map>
#include <string>
#include <vector>

namespace vulnrel {

/// One recorded non-fatal problem. Nothing is dropped without one of these.
struct Diagnostic {
  std::string reason;   // stable machine-readable code, e.g. "missing_specs"
  std::string package;
  std::string subject;  // advisory id, version string, ... (may be empty)
  std::string detail;

  friend bool operator==(const Diagnostic&, const Diagnostic&) = default;
};

inline std::map<std::string, std::size_t> count_by_reason(const std::vector<Diagnostic>& diags) {
  std::map<std::string, std::size_t> counts;
  for (const auto& d : diags) ++counts[d.reason];
  return counts;
}

}  // namespace vulnrel
