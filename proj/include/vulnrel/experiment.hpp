#pragma once

// The forecast experiment over a whole corpus: AIC order selection on the full
// series, eligibility per horizon, one-step-ahead forecasts and summaries.

#include <span>
#include <string>
#include <vector>

#include "vulnrel/autologistic.hpp"
#include "vulnrel/vectorize.hpp"

namespace vulnrel {

struct ExperimentConfig {
  std::vector<std::size_t> horizons{5, 10};
  EligibilityOptions eligibility;
  SelectionOptions selection;
  ForecastOptions forecast;
};

struct Exclusion {
  std::string package;
  std::size_t t = 0;  // 0 when the exclusion applies to every horizon
  std::string reason;
  std::string detail;
};

struct SelectionRecord {
  std::string package;
  std::size_t r = 0;
  OrderSelection selection;
};

struct ExperimentResult {
  std::vector<SelectionRecord> selections;
  std::vector<ForecastReport> reports;  // ordered by package, then horizon
  std::vector<Exclusion> exclusions;
  std::vector<HorizonSummary> summary;  // empty when nothing was eligible
};

inline ExperimentResult run_experiment(std::span<const BinarySeries> corpus, const ExperimentConfig& config) {
  for (auto t : config.horizons) {
    if (t == 0) throw std::invalid_argument("forecast horizons must be positive");
  }
  ExperimentResult out;
  for (const auto& w : corpus) {
    if (w.size() < config.eligibility.min_releases) {
      out.exclusions.push_back({w.package, 0, std::string(to_string(IneligibleReason::too_few_releases)),
                                "r=" + std::to_string(w.size())});
      continue;
    }
    OrderSelection sel;
    try {
      sel = select_order(w.values, config.selection);
    } catch (const DataError& e) {
      out.exclusions.push_back({w.package, 0, "order_selection_failed", e.what()});
      continue;
    }
    const std::size_t order = sel.order;
    out.selections.push_back({w.package, w.size(), std::move(sel)});

    for (auto t : config.horizons) {
      auto e = eligibility(w.values, t, order, config.eligibility);
      if (!e.eligible) {
        out.exclusions.push_back({w.package, t, std::string(to_string(e.reason)),
                                  "training std " + std::to_string(e.training_std)});
        continue;
      }
      try {
        out.reports.push_back(forecast(w, t, order, config.forecast));
      } catch (const ForecastError& err) {
        out.exclusions.push_back({w.package, t, "forecast_failed", err.what()});
      }
    }
  }
  if (!out.reports.empty()) out.summary = experiment_summary(out.reports);
  return out;
}

}  // namespace vulnrel
