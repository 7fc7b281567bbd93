#pragma once

// Unconditional and first-order Markov summaries of binary release series.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vulnrel/errors.hpp"
#include "vulnrel/vectorize.hpp"

namespace vulnrel {

/// Share of affected releases.
inline double unconditional_probability(std::span<const std::uint8_t> w) {
  if (w.empty()) throw InsufficientDataError("unconditional probability of an empty series");
  std::size_t ones = 0;
  for (auto x : w) ones += x ? 1 : 0;
  return static_cast<double>(ones) / static_cast<double>(w.size());
}

/// counts[from][to] over consecutive release pairs.
struct TransitionTable {
  std::array<std::array<std::uint64_t, 2>, 2> counts{};

  std::uint64_t total() const { return counts[0][0] + counts[0][1] + counts[1][0] + counts[1][1]; }
  friend bool operator==(const TransitionTable&, const TransitionTable&) = default;
};

inline TransitionTable transition_table(std::span<const std::uint8_t> w) {
  if (w.size() < 2) throw InsufficientDataError("transition table needs at least two releases");
  TransitionTable t;
  for (std::size_t i = 1; i < w.size(); ++i) ++t.counts[w[i - 1] ? 1 : 0][w[i] ? 1 : 0];
  return t;
}

/// Row-stochastic matrix; a row is empty when its source state never occurs.
struct TransitionMatrix {
  std::array<std::optional<std::array<double, 2>>, 2> rows;

  std::optional<double> p(int from, int to) const {
    if (!rows[from]) return std::nullopt;
    return (*rows[from])[to];
  }
};

/// Normalizes each row by its sum. `smoothing` adds a pseudo-count to every
/// cell (0 by default, i.e. no smoothing).
inline TransitionMatrix transition_probabilities(const TransitionTable& t, double smoothing = 0.0) {
  if (smoothing < 0.0) throw std::invalid_argument("smoothing must be non-negative");
  TransitionMatrix m;
  for (int from = 0; from < 2; ++from) {
    double a = static_cast<double>(t.counts[from][0]) + smoothing;
    double b = static_cast<double>(t.counts[from][1]) + smoothing;
    double sum = a + b;
    if (sum > 0.0) m.rows[from] = std::array<double, 2>{a / sum, b / sum};
  }
  return m;
}

struct PackageMarkovRecord {
  std::string package;
  std::size_t r = 0;
  double p_uncond = 0.0;
  std::optional<double> p_11;  // Pr(affected | previous affected)
  std::optional<double> p_00;  // Pr(clean | previous clean)
};

struct DistributionStats {
  std::size_t count = 0;
  double mean = 0.0;
  double median = 0.0;
  double p25 = 0.0;
  double p75 = 0.0;
  double min = 0.0;
  double max = 0.0;
};

struct HistogramBin {
  double left = 0.0;
  double right = 0.0;
  std::size_t count = 0;
};

/// Percentile with linear interpolation between order statistics.
inline double percentile(std::vector<double> values, double q) {
  if (values.empty()) throw InsufficientDataError("percentile of an empty sample");
  std::sort(values.begin(), values.end());
  double pos = q * static_cast<double>(values.size() - 1);
  auto lo = static_cast<std::size_t>(std::floor(pos));
  auto hi = static_cast<std::size_t>(std::ceil(pos));
  double frac = pos - static_cast<double>(lo);
  return values[lo] + (values[hi] - values[lo]) * frac;
}

inline DistributionStats describe(const std::vector<double>& values) {
  DistributionStats s;
  s.count = values.size();
  if (values.empty()) return s;
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(values.size());
  s.median = percentile(values, 0.5);
  s.p25 = percentile(values, 0.25);
  s.p75 = percentile(values, 0.75);
  auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  s.min = *lo;
  s.max = *hi;
  return s;
}

/// Equal-width bins over [lo, hi]; the last bin is closed on the right.
inline std::vector<HistogramBin> histogram(const std::vector<double>& values, double lo, double hi, std::size_t bins) {
  if (bins == 0 || !(hi > lo)) throw std::invalid_argument("histogram needs bins > 0 and hi > lo");
  std::vector<HistogramBin> out(bins);
  const double width = (hi - lo) / static_cast<double>(bins);
  for (std::size_t i = 0; i < bins; ++i) {
    out[i].left = lo + width * static_cast<double>(i);
    out[i].right = i + 1 == bins ? hi : lo + width * static_cast<double>(i + 1);
  }
  for (double v : values) {
    if (v < lo || v > hi) continue;
    auto idx = static_cast<std::size_t>((v - lo) * static_cast<double>(bins) / (hi - lo));
    ++out[std::min(idx, bins - 1)].count;
  }
  return out;
}

struct CorpusSummary {
  std::vector<PackageMarkovRecord> records;
  DistributionStats releases;
  DistributionStats p_uncond;
  DistributionStats p_11;
  DistributionStats p_00;
  std::vector<HistogramBin> hist_releases;
  std::vector<HistogramBin> hist_p_uncond;
  std::vector<HistogramBin> hist_p_11;
  std::vector<HistogramBin> hist_p_00;
};

struct SummaryOptions {
  std::size_t probability_bins = 10;
  double release_bin_width = 10.0;
  double smoothing = 0.0;
};

inline PackageMarkovRecord markov_record(const BinarySeries& w, double smoothing = 0.0) {
  PackageMarkovRecord rec;
  rec.package = w.package;
  rec.r = w.size();
  rec.p_uncond = unconditional_probability(w.values);
  if (w.size() >= 2) {
    auto m = transition_probabilities(transition_table(w.values), smoothing);
    rec.p_11 = m.p(1, 1);
    rec.p_00 = m.p(0, 0);
  }
  return rec;
}

inline CorpusSummary corpus_summary(std::span<const BinarySeries> corpus, const SummaryOptions& options = {}) {
  if (corpus.empty()) throw InsufficientDataError("corpus summary of an empty corpus");
  CorpusSummary s;
  std::vector<double> r, pu, p11, p00;
  for (const auto& w : corpus) {
    auto rec = markov_record(w, options.smoothing);
    r.push_back(static_cast<double>(rec.r));
    pu.push_back(rec.p_uncond);
    if (rec.p_11) p11.push_back(*rec.p_11);
    if (rec.p_00) p00.push_back(*rec.p_00);
    s.records.push_back(std::move(rec));
  }
  s.releases = describe(r);
  s.p_uncond = describe(pu);
  s.p_11 = describe(p11);
  s.p_00 = describe(p00);

  double top = std::max(options.release_bin_width,
                        std::ceil(s.releases.max / options.release_bin_width) * options.release_bin_width);
  auto release_bins = static_cast<std::size_t>(std::llround(top / options.release_bin_width));
  s.hist_releases = histogram(r, 0.0, top, release_bins);
  s.hist_p_uncond = histogram(pu, 0.0, 1.0, options.probability_bins);
  s.hist_p_11 = histogram(p11, 0.0, 1.0, options.probability_bins);
  s.hist_p_00 = histogram(p00, 0.0, 1.0, options.probability_bins);
  return s;
}

}  // namespace vulnrel
