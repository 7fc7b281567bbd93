#pragma once

// Release identifiers in the Python-package version scheme
// (epoch!X.Y.Z{a|b|rc}N.postN.devN+local) with a deterministic total order.

#include <algorithm>
#include <cctype>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vulnrel/errors.hpp"

namespace vulnrel {

enum class PreKind : std::uint8_t { alpha = 0, beta = 1, rc = 2 };

struct PreTag {
  PreKind kind = PreKind::alpha;
  std::uint64_t number = 0;

  friend auto operator<=>(const PreTag&, const PreTag&) = default;
};

/// A parsed release identifier.
///
/// Strings that do not follow the version scheme are kept as opaque
/// "legacy" versions. They sort before every well-formed version and
/// lexicographically among themselves.
struct Version {
  std::uint64_t epoch = 0;
  std::vector<std::uint64_t> release;
  std::optional<PreTag> pre;
  std::optional<std::uint64_t> post;
  std::optional<std::uint64_t> dev;
  std::optional<std::string> local;
  bool legacy = false;
  std::string raw;
};

inline std::string_view to_string(PreKind kind) {
  switch (kind) {
    case PreKind::alpha: return "alpha";
    case PreKind::beta: return "beta";
    case PreKind::rc: return "rc";
  }
  return "?";
}

namespace detail {

inline std::string trim_copy(std::string_view s) {
  auto is_space = [](unsigned char c) { return std::isspace(c) != 0; };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return std::string(s);
}

inline std::string lower_copy(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

inline bool is_digit(char c) { return c >= '0' && c <= '9'; }
inline bool is_alnum(char c) { return is_digit(c) || (c >= 'a' && c <= 'z'); }
inline bool is_sep(char c) { return c == '.' || c == '-' || c == '_'; }

// Hand-rolled scanner over a lower-cased, trimmed version string.
class VersionScanner {
 public:
  explicit VersionScanner(std::string_view text) : s_(text) {}

  // Returns false when the text does not follow the scheme.
  bool scan(Version& v) {
    if (peek() == 'v') ++pos_;

    auto first = number();
    if (!first) return false;
    if (peek() == '!') {
      ++pos_;
      v.epoch = *first;
      first = number();
      if (!first) return false;
    }
    v.release.push_back(*first);
    while ((peek() == '.' || peek() == '_') && is_digit(peek(1))) {
      ++pos_;
      auto seg = number();
      if (!seg) return false;
      v.release.push_back(*seg);
    }

    scan_pre(v);
    if (overflow_) return false;
    scan_post(v);
    if (overflow_) return false;
    scan_dev(v);
    if (overflow_) return false;

    if (peek() == '+') {
      ++pos_;
      std::string local;
      bool expect_alnum = true;
      while (pos_ < s_.size()) {
        char c = s_[pos_];
        if (is_alnum(c)) {
          local.push_back(c);
          expect_alnum = false;
        } else if (is_sep(c) && !expect_alnum) {
          local.push_back('.');
          expect_alnum = true;
        } else {
          return false;
        }
        ++pos_;
      }
      if (local.empty() || expect_alnum) return false;
      v.local = std::move(local);
    }
    return pos_ == s_.size();
  }

 private:
  char peek(std::size_t ahead = 0) const {
    return pos_ + ahead < s_.size() ? s_[pos_ + ahead] : '\0';
  }

  std::optional<std::uint64_t> number() {
    if (!is_digit(peek())) return std::nullopt;
    std::uint64_t value = 0;
    std::size_t digits = 0;
    while (is_digit(peek())) {
      if (++digits > 18) {
        overflow_ = true;
        return std::nullopt;
      }
      value = value * 10 + static_cast<std::uint64_t>(peek() - '0');
      ++pos_;
    }
    return value;
  }

  bool match_word(std::string_view word) {
    if (s_.substr(pos_, word.size()) == word) {
      pos_ += word.size();
      return true;
    }
    return false;
  }

  // Optional separator followed by an optional number; a dangling separator
  // is left for the next component.
  std::uint64_t trailing_number() {
    std::size_t save = pos_;
    if (is_sep(peek())) ++pos_;
    if (auto n = number()) return *n;
    pos_ = save;
    return 0;
  }

  void scan_pre(Version& v) {
    std::size_t save = pos_;
    if (is_sep(peek())) ++pos_;
    static constexpr std::pair<std::string_view, PreKind> kLabels[] = {
        {"preview", PreKind::rc}, {"alpha", PreKind::alpha}, {"beta", PreKind::beta},
        {"pre", PreKind::rc},     {"rc", PreKind::rc},       {"a", PreKind::alpha},
        {"b", PreKind::beta},     {"c", PreKind::rc},
    };
    for (const auto& [label, kind] : kLabels) {
      if (match_word(label)) {
        v.pre = PreTag{kind, trailing_number()};
        return;
      }
    }
    pos_ = save;
  }

  void scan_post(Version& v) {
    std::size_t save = pos_;
    if (peek() == '-' && is_digit(peek(1))) {
      ++pos_;
      v.post = number();
      return;
    }
    if (is_sep(peek())) ++pos_;
    for (std::string_view label : {"post", "rev", "r"}) {
      if (match_word(label)) {
        v.post = trailing_number();
        return;
      }
    }
    pos_ = save;
  }

  void scan_dev(Version& v) {
    std::size_t save = pos_;
    if (is_sep(peek())) ++pos_;
    if (match_word("dev")) {
      v.dev = trailing_number();
      return;
    }
    pos_ = save;
  }

  std::string_view s_;
  std::size_t pos_ = 0;
  bool overflow_ = false;
};

inline std::size_t significant_release_length(const std::vector<std::uint64_t>& release) {
  std::size_t n = release.size();
  while (n > 1 && release[n - 1] == 0) --n;
  return n;
}

inline std::string render(const Version& v, bool strip_trailing_zeros) {
  if (v.legacy) return detail::lower_copy(detail::trim_copy(v.raw));
  std::string out;
  if (v.epoch != 0) out += std::to_string(v.epoch) + "!";
  std::size_t n = strip_trailing_zeros ? significant_release_length(v.release) : v.release.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (i) out += '.';
    out += std::to_string(v.release[i]);
  }
  if (v.pre) {
    out += '-';
    out += to_string(v.pre->kind);
    out += '.' + std::to_string(v.pre->number);
  }
  if (v.post) out += ".post" + std::to_string(*v.post);
  if (v.dev) out += ".dev" + std::to_string(*v.dev);
  if (v.local) out += "+" + *v.local;
  return out;
}

}  // namespace detail

/// Parses a version string. Throws ParseError only for empty input; any other
/// text that does not follow the scheme becomes a legacy version.
inline Version parse_version(std::string_view text) {
  std::string trimmed = detail::trim_copy(text);
  if (trimmed.empty()) throw ParseError("empty version string");

  Version v;
  v.raw = std::string(text);
  std::string lowered = detail::lower_copy(trimmed);
  detail::VersionScanner scanner(lowered);
  if (!scanner.scan(v)) {
    Version legacy;
    legacy.legacy = true;
    legacy.raw = v.raw;
    return legacy;
  }
  return v;
}

/// Canonical rendering. Release segments are kept as written; pre-release
/// tags render as "-alpha.N", "-beta.N" or "-rc.N".
inline std::string canonical_string(const Version& v) { return detail::render(v, false); }

/// Canonical rendering with insignificant trailing zero release segments
/// removed. Two versions compare equal iff their keys are identical.
inline std::string equivalence_key(const Version& v) { return detail::render(v, true); }

inline std::strong_ordering compare(const Version& a, const Version& b) {
  if (a.legacy || b.legacy) {
    if (a.legacy != b.legacy) return a.legacy ? std::strong_ordering::less : std::strong_ordering::greater;
    return canonical_string(a) <=> canonical_string(b);
  }
  if (auto c = a.epoch <=> b.epoch; c != 0) return c;

  const std::size_t na = detail::significant_release_length(a.release);
  const std::size_t nb = detail::significant_release_length(b.release);
  if (auto c = std::lexicographical_compare_three_way(a.release.begin(), a.release.begin() + na,
                                                      b.release.begin(), b.release.begin() + nb);
      c != 0) {
    return c;
  }

  // A dev-only release sorts before any pre-release of the same release.
  auto pre_rank = [](const Version& v) -> int {
    if (!v.pre && !v.post && v.dev) return 0;
    return v.pre ? 1 : 2;
  };
  if (auto c = pre_rank(a) <=> pre_rank(b); c != 0) return c;
  if (a.pre && b.pre) {
    if (auto c = *a.pre <=> *b.pre; c != 0) return c;
  }

  if (auto c = a.post.has_value() <=> b.post.has_value(); c != 0) return c;
  if (a.post && b.post) {
    if (auto c = *a.post <=> *b.post; c != 0) return c;
  }

  if (auto c = b.dev.has_value() <=> a.dev.has_value(); c != 0) return c;
  if (a.dev && b.dev) {
    if (auto c = *a.dev <=> *b.dev; c != 0) return c;
  }

  if (auto c = a.local.has_value() <=> b.local.has_value(); c != 0) return c;
  if (a.local && b.local) return *a.local <=> *b.local;
  return std::strong_ordering::equal;
}

inline std::strong_ordering operator<=>(const Version& a, const Version& b) { return compare(a, b); }
inline bool operator==(const Version& a, const Version& b) { return compare(a, b) == 0; }

}  // namespace vulnrel
