#pragma once

// Per-package release histories: ordering, the package-index JSON client with
// its on-disk cache, and schema-versioned snapshot files.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"
#include "vulnrel/diagnostics.hpp"
#include "vulnrel/errors.hpp"
#include "vulnrel/version.hpp"

namespace vulnrel {

struct Release {
  Version version;
  std::optional<std::string> upload_time;  // ISO-8601 as reported by the index
};

/// Releases in version order; index 0 is the first release of the package.
struct ReleaseHistory {
  std::string package;
  std::vector<Release> releases;

  std::size_t size() const { return releases.size(); }
};

inline bool operator==(const ReleaseHistory& a, const ReleaseHistory& b) {
  if (a.package != b.package || a.releases.size() != b.releases.size()) return false;
  for (std::size_t i = 0; i < a.releases.size(); ++i) {
    const auto& x = a.releases[i];
    const auto& y = b.releases[i];
    if (x.version.raw != y.version.raw || x.upload_time != y.upload_time) return false;
  }
  return true;
}

using HistoryMap = std::map<std::string, ReleaseHistory>;

struct RawRelease {
  std::string version;
  std::optional<std::string> upload_time;
};

/// Index-style name normalization: lower case, runs of "-_." become "-".
inline std::string normalize_package_name(std::string_view name) {
  std::string out;
  bool in_sep = false;
  for (char c : detail::trim_copy(name)) {
    if (detail::is_sep(c)) {
      in_sep = true;
      continue;
    }
    if (in_sep && !out.empty()) out += '-';
    in_sep = false;
    out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return out;
}

/// Sorts by version precedence; equal versions are tie-broken by upload time
/// (missing times last) and then raw text, and only the first is kept.
inline ReleaseHistory order_history(std::string package, const std::vector<RawRelease>& raw,
                                    std::vector<Diagnostic>* diags = nullptr) {
  if (raw.empty()) throw NotFoundError("no releases for package '" + package + "'");

  std::vector<Release> releases;
  releases.reserve(raw.size());
  for (const auto& r : raw) releases.push_back({parse_version(r.version), r.upload_time});

  std::sort(releases.begin(), releases.end(), [](const Release& a, const Release& b) {
    if (auto c = compare(a.version, b.version); c != 0) return c < 0;
    if (a.upload_time != b.upload_time) {
      if (!a.upload_time) return false;
      if (!b.upload_time) return true;
      return *a.upload_time < *b.upload_time;
    }
    return a.version.raw < b.version.raw;
  });

  ReleaseHistory history;
  history.package = std::move(package);
  for (auto& r : releases) {
    if (!history.releases.empty() && history.releases.back().version == r.version) {
      if (diags) {
        diags->push_back({"duplicate_version", history.package, r.version.raw,
                          "equal to retained release " + history.releases.back().version.raw});
      }
      continue;
    }
    history.releases.push_back(std::move(r));
  }

  if (diags) {
    std::size_t inversions = 0;
    std::optional<std::string> latest;
    for (const auto& r : history.releases) {
      if (!r.upload_time) continue;
      if (latest && *r.upload_time < *latest) ++inversions;
      if (!latest || *r.upload_time > *latest) latest = r.upload_time;
    }
    if (inversions > 0) {
      diags->push_back({"upload_order_mismatch", history.package, "",
                        std::to_string(inversions) + " release(s) uploaded before an older version"});
    }
  }
  return history;
}

// --- snapshots --------------------------------------------------------------

inline constexpr int kSnapshotSchemaVersion = 1;

inline void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  thread_local std::mt19937_64 rng{std::random_device{}()};
  fs::path tmp = path;
  tmp += ".tmp" + std::to_string(rng());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out << content;
    if (!out.flush()) throw IoError("write failed for " + tmp.string());
  }
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp);
    throw IoError("cannot rename into " + path.string() + ": " + ec.message());
  }
}

inline nlohmann::json snapshot_to_json(const HistoryMap& histories) {
  nlohmann::json packages = nlohmann::json::object();
  for (const auto& [name, history] : histories) {
    nlohmann::json list = nlohmann::json::array();
    for (const auto& r : history.releases) {
      list.push_back({{"version", r.version.raw},
                      {"upload_time", r.upload_time ? nlohmann::json(*r.upload_time) : nlohmann::json()}});
    }
    packages[name] = std::move(list);
  }
  return {{"schema_version", kSnapshotSchemaVersion}, {"packages", std::move(packages)}};
}

inline HistoryMap snapshot_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw FormatError("snapshot root must be an object");
  auto schema = doc.find("schema_version");
  if (schema == doc.end() || !schema->is_number_integer()) throw FormatError("snapshot lacks schema_version");
  if (schema->get<int>() != kSnapshotSchemaVersion) {
    throw VersionMismatchError("unsupported snapshot schema_version " + schema->dump());
  }
  auto packages = doc.find("packages");
  if (packages == doc.end() || !packages->is_object()) throw FormatError("snapshot lacks 'packages' object");

  HistoryMap out;
  for (const auto& [name, list] : packages->items()) {
    if (!list.is_array() || list.empty()) throw FormatError("history for '" + name + "' must be a non-empty array");
    ReleaseHistory history;
    history.package = name;
    for (const auto& item : list) {
      if (!item.is_object() || !item.contains("version") || !item["version"].is_string()) {
        throw FormatError("malformed release entry in '" + name + "'");
      }
      Release r{parse_version(item["version"].get<std::string>()), std::nullopt};
      if (auto t = item.find("upload_time"); t != item.end() && t->is_string()) r.upload_time = t->get<std::string>();
      if (!history.releases.empty() && compare(history.releases.back().version, r.version) >= 0) {
        throw FormatError("history for '" + name + "' is not strictly ordered at " + r.version.raw);
      }
      history.releases.push_back(std::move(r));
    }
    out.emplace(name, std::move(history));
  }
  return out;
}

inline void save_snapshot(const HistoryMap& histories, const std::filesystem::path& path) {
  write_file_atomic(path, snapshot_to_json(histories).dump(2) + "\n");
}

inline HistoryMap load_snapshot(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw NotFoundError("snapshot not found: " + path.string());
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read snapshot " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError("malformed snapshot " + path.string() + ": " + e.what());
  }
  return snapshot_from_json(doc);
}

// --- package index client ---------------------------------------------------

struct HttpResponse {
  int status = 0;
  std::string body;
};

/// Performs GET on a path such as "/pypi/django/json". Throws on transport
/// failure; any exception is treated as retryable.
using Transport = std::function<HttpResponse(const std::string& path)>;

/// Extracts (version, earliest upload time) pairs from a package-index JSON
/// payload ("releases": {version: [{upload_time...}, ...]}).
inline std::vector<RawRelease> parse_index_payload(const std::string& package, std::string_view body) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(body);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError("malformed index payload for '" + package + "': " + e.what());
  }
  if (!doc.is_object()) throw FormatError("index payload for '" + package + "' is not an object");
  auto releases = doc.find("releases");
  if (releases == doc.end() || !releases->is_object()) {
    throw FormatError("index payload for '" + package + "' lacks a 'releases' object");
  }
  std::vector<RawRelease> out;
  for (const auto& [version, files] : releases->items()) {
    if (!files.is_array()) throw FormatError("release '" + version + "' of '" + package + "' is not an array");
    RawRelease r{version, std::nullopt};
    for (const auto& f : files) {
      if (!f.is_object()) continue;
      for (const char* key : {"upload_time_iso_8601", "upload_time"}) {
        if (auto t = f.find(key); t != f.end() && t->is_string()) {
          auto value = t->get<std::string>();
          if (!r.upload_time || value < *r.upload_time) r.upload_time = value;
          break;
        }
      }
    }
    out.push_back(std::move(r));
  }
  if (out.empty()) throw NotFoundError("package '" + package + "' has no releases");
  return out;
}

struct RegistryOptions {
  std::optional<std::filesystem::path> cache_dir;
  bool offline = false;
  int max_attempts = 4;
  std::chrono::milliseconds initial_backoff{250};
  std::size_t max_concurrency = 4;
  std::function<void(std::chrono::milliseconds)> sleep = [](std::chrono::milliseconds d) {
    std::this_thread::sleep_for(d);
  };
};

/// Environment variable that overrides the cache directory.
inline constexpr const char* kCacheDirEnv = "VULNREL_CACHE_DIR";

inline std::optional<std::filesystem::path> cache_dir_from_env() {
  if (const char* v = std::getenv(kCacheDirEnv); v && *v) return std::filesystem::path(v);
  return std::nullopt;
}

struct FetchAllResult {
  HistoryMap histories;
  std::vector<Diagnostic> missing;
};

class RegistryClient {
 public:
  explicit RegistryClient(RegistryOptions options, Transport transport = {})
      : options_(std::move(options)), transport_(std::move(transport)) {}

  RegistryClient(const RegistryClient&) = delete;
  RegistryClient& operator=(const RegistryClient&) = delete;

  ReleaseHistory fetch_history(const std::string& package) {
    if (detail::trim_copy(package).empty()) throw NotFoundError("empty package name");
    const std::string key = normalize_package_name(package);
    {
      std::lock_guard lock(mutex_);
      if (auto it = memory_.find(key); it != memory_.end()) return rename(it->second, package);
    }
    if (auto cached = read_cache(key)) {
      std::lock_guard lock(mutex_);
      memory_.emplace(key, *cached);
      return rename(*cached, package);
    }
    if (options_.offline) throw EnvironmentError("offline mode and no cached history for '" + package + "'");
    if (!transport_) throw EnvironmentError("no transport configured for '" + package + "'");

    HttpResponse response = get_with_retries("/pypi/" + package + "/json");
    std::vector<Diagnostic> diags;
    ReleaseHistory history = order_history(package, parse_index_payload(package, response.body), &diags);
    write_cache(key, history);
    std::lock_guard lock(mutex_);
    diagnostics_.insert(diagnostics_.end(), diags.begin(), diags.end());
    memory_.emplace(key, history);
    return history;
  }

  /// Fetches many packages with at most max_concurrency requests in flight.
  /// Unknown or malformed packages become diagnostics; environment failures
  /// are rethrown after all workers finish.
  FetchAllResult fetch_all(const std::vector<std::string>& packages) {
    std::vector<std::optional<ReleaseHistory>> results(packages.size());
    std::vector<std::optional<Diagnostic>> problems(packages.size());
    std::vector<std::exception_ptr> fatal(packages.size());
    std::atomic<std::size_t> next{0};

    auto worker = [&] {
      for (std::size_t i = next++; i < packages.size(); i = next++) {
        try {
          results[i] = fetch_history(packages[i]);
        } catch (const NotFoundError& e) {
          problems[i] = Diagnostic{"not_found", packages[i], "", e.what()};
        } catch (const DataError& e) {
          problems[i] = Diagnostic{"malformed_payload", packages[i], "", e.what()};
        } catch (...) {
          fatal[i] = std::current_exception();
        }
      }
    };
    const std::size_t n_threads = std::max<std::size_t>(1, std::min(options_.max_concurrency, packages.size()));
    std::vector<std::thread> threads;
    for (std::size_t t = 0; t < n_threads; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();

    for (const auto& e : fatal)
      if (e) std::rethrow_exception(e);

    FetchAllResult out;
    for (std::size_t i = 0; i < packages.size(); ++i) {
      if (results[i]) out.histories.emplace(packages[i], std::move(*results[i]));
      if (problems[i]) out.missing.push_back(std::move(*problems[i]));
    }
    return out;
  }

  std::size_t network_calls() const { return network_calls_.load(); }

  std::vector<Diagnostic> diagnostics() const {
    std::lock_guard lock(mutex_);
    return diagnostics_;
  }

 private:
  static ReleaseHistory rename(ReleaseHistory h, const std::string& package) {
    h.package = package;
    return h;
  }

  std::optional<std::filesystem::path> cache_file(const std::string& key) const {
    if (!options_.cache_dir) return std::nullopt;
    return *options_.cache_dir / (key + ".json");
  }

  std::optional<ReleaseHistory> read_cache(const std::string& key) const {
    auto file = cache_file(key);
    if (!file || !std::filesystem::exists(*file)) return std::nullopt;
    HistoryMap map = load_snapshot(*file);
    if (map.size() != 1) throw FormatError("cache file " + file->string() + " must hold exactly one package");
    return std::move(map.begin()->second);
  }

  void write_cache(const std::string& key, const ReleaseHistory& history) const {
    auto file = cache_file(key);
    if (!file) return;
    save_snapshot(HistoryMap{{key, history}}, *file);
  }

  HttpResponse get_with_retries(const std::string& path) {
    std::chrono::milliseconds backoff = options_.initial_backoff;
    std::string last_error;
    for (int attempt = 1; attempt <= std::max(1, options_.max_attempts); ++attempt) {
      if (attempt > 1) {
        options_.sleep(backoff);
        backoff *= 2;
      }
      ++network_calls_;
      HttpResponse response;
      try {
        response = transport_(path);
      } catch (const std::exception& e) {
        last_error = e.what();
        continue;
      }
      if (response.status == 200) return response;
      if (response.status == 404) throw NotFoundError("not found at registry: " + path);
      if (response.status == 429 || response.status >= 500 || response.status == 0) {
        last_error = "HTTP " + std::to_string(response.status);
        continue;
      }
      throw EnvironmentError("unexpected HTTP " + std::to_string(response.status) + " for " + path);
    }
    throw RetryableError("giving up on " + path + " after retries: " + last_error);
  }

  RegistryOptions options_;
  Transport transport_;
  mutable std::mutex mutex_;
  std::map<std::string, ReleaseHistory> memory_;
  std::vector<Diagnostic> diagnostics_;
  std::atomic<std::size_t> network_calls_{0};
};

}  // namespace vulnrel
