#pragma once

// Autologistic models for binary release series: logistic regression of w_i on
// its own lags w_{i-1}, ..., w_{i-l}, fitted by maximum likelihood.
//
//   Pr(w_i = 1 | past) = logistic(b0 + b1 w_{i-1} + ... + bl w_{i-l})

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "vulnrel/errors.hpp"
#include "vulnrel/vectorize.hpp"

namespace vulnrel {

/// Responses w_start..w_{r-1} with their lag rows. Row k holds
/// (w_{i-1}, ..., w_{i-order}) for response w_i, i = start + k.
struct LagDesign {
  std::vector<std::uint8_t> responses;
  std::vector<std::uint8_t> regressors;  // row-major, rows() x order
  std::size_t order = 0;

  std::size_t rows() const { return responses.size(); }
  std::uint8_t lag(std::size_t row, std::size_t j) const { return regressors[row * order + (j - 1)]; }
};

/// Lag design over w. `first_response` defaults to `order`; a larger value
/// trims the leading responses so that designs of different orders share
/// one estimation sample.
inline LagDesign build_lag_design(std::span<const std::uint8_t> w, std::size_t order,
                                  std::optional<std::size_t> first_response = std::nullopt) {
  if (order == 0) throw std::invalid_argument("lag order must be at least 1");
  if (w.size() <= order) {
    throw InsufficientDataError("series of length " + std::to_string(w.size()) + " is too short for order " +
                                std::to_string(order));
  }
  const std::size_t start = first_response.value_or(order);
  if (start < order || start >= w.size()) throw InsufficientDataError("no responses left for the lag design");

  LagDesign d;
  d.order = order;
  for (std::size_t i = start; i < w.size(); ++i) {
    d.responses.push_back(w[i] ? 1 : 0);
    for (std::size_t j = 1; j <= order; ++j) d.regressors.push_back(w[i - j] ? 1 : 0);
  }
  return d;
}

struct FitOptions {
  double loglik_tolerance = 1e-8;
  double step_tolerance = 1e-6;  // max |coefficient change| at convergence
  double gradient_tolerance = 1e-8;
  int max_iterations = 100;
  double separation_threshold = 30.0;
  bool ridge_fallback = false;
  double ridge_lambda = 1e-4;
};

struct ModelFit {
  std::vector<double> beta;  // beta[0] is the constant, beta[j] multiplies w_{i-j}
  double loglik = 0.0;       // unpenalized
  double aic = 0.0;
  std::size_t order = 0;
  std::size_t observations = 0;
  int iterations = 0;
  bool converged = false;
  bool separation_detected = false;
  bool ridge_applied = false;  // AIC is approximate when set
};

inline double logistic(double eta) {
  if (eta >= 0.0) return 1.0 / (1.0 + std::exp(-eta));
  double e = std::exp(eta);
  return e / (1.0 + e);
}

namespace detail {

inline double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

inline Eigen::MatrixXd design_matrix(const LagDesign& d, bool intercept_only = false) {
  const auto cols = static_cast<Eigen::Index>(intercept_only ? 1 : d.order + 1);
  Eigen::MatrixXd x(static_cast<Eigen::Index>(d.rows()), cols);
  for (std::size_t i = 0; i < d.rows(); ++i) {
    x(static_cast<Eigen::Index>(i), 0) = 1.0;
    for (Eigen::Index j = 1; j < cols; ++j) {
      x(static_cast<Eigen::Index>(i), j) = d.lag(i, static_cast<std::size_t>(j));
    }
  }
  return x;
}

inline Eigen::VectorXd response_vector(const LagDesign& d) {
  Eigen::VectorXd y(static_cast<Eigen::Index>(d.rows()));
  for (std::size_t i = 0; i < d.rows(); ++i) y(static_cast<Eigen::Index>(i)) = d.responses[i];
  return y;
}

inline double log_likelihood(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& beta) {
  Eigen::VectorXd eta = x * beta;
  double ll = 0.0;
  for (Eigen::Index i = 0; i < eta.size(); ++i) ll += y(i) * eta(i) - softplus(eta(i));
  return ll;
}

inline Eigen::VectorXd score(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& beta) {
  Eigen::VectorXd eta = x * beta;
  Eigen::VectorXd resid(eta.size());
  for (Eigen::Index i = 0; i < eta.size(); ++i) resid(i) = y(i) - logistic(eta(i));
  return x.transpose() * resid;
}

struct IrlsResult {
  Eigen::VectorXd beta;
  double loglik = 0.0;
  int iterations = 0;
  bool converged = false;
  bool separated = false;
};

// Newton-Raphson / IRLS on the (optionally ridge-penalized) log-likelihood
// ll(b) - lambda |b|^2, with step halving so the objective never decreases.
inline IrlsResult irls(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double lambda, const FitOptions& opt) {
  const Eigen::Index p = x.cols();
  auto objective = [&](const Eigen::VectorXd& b) { return log_likelihood(x, y, b) - lambda * b.squaredNorm(); };

  IrlsResult res;
  res.beta = Eigen::VectorXd::Zero(p);
  double obj = objective(res.beta);
  bool settled = false;  // last step met the likelihood and step tolerances

  for (int it = 1; it <= opt.max_iterations; ++it) {
    res.iterations = it;
    Eigen::VectorXd eta = x * res.beta;
    Eigen::VectorXd weights(eta.size());
    Eigen::VectorXd resid(eta.size());
    for (Eigen::Index i = 0; i < eta.size(); ++i) {
      double mu = logistic(eta(i));
      weights(i) = mu * (1.0 - mu);
      resid(i) = y(i) - mu;
    }
    Eigen::VectorXd grad = x.transpose() * resid - 2.0 * lambda * res.beta;
    if (settled && grad.cwiseAbs().maxCoeff() < opt.gradient_tolerance) {
      res.converged = true;
      break;
    }
    Eigen::MatrixXd hessian = x.transpose() * weights.asDiagonal() * x;
    hessian.diagonal().array() += 2.0 * lambda;

    Eigen::LDLT<Eigen::MatrixXd> ldlt(hessian);
    Eigen::VectorXd step;
    bool solved = ldlt.info() == Eigen::Success && ldlt.isPositive() && ldlt.rcond() > 1e-300;
    if (solved) {
      step = ldlt.solve(grad);
      solved = step.allFinite();
    }
    if (!solved) {
      if (res.beta.cwiseAbs().maxCoeff() > 10.0) {
        res.separated = true;
        return res;
      }
      throw SingularityError("weighted least-squares system is singular");
    }

    // Differences below rounding of the objective count as no change.
    const double slack = 1e-13 * (1.0 + std::abs(obj));
    double scale = 1.0;
    Eigen::VectorXd candidate = res.beta + step;
    double cand_obj = objective(candidate);
    for (int halvings = 0; halvings < 50 && !(cand_obj >= obj - slack); ++halvings) {
      scale *= 0.5;
      candidate = res.beta + scale * step;
      cand_obj = objective(candidate);
    }
    if (!(cand_obj >= obj - slack)) {
      // No ascent direction left at working precision.
      res.converged = grad.cwiseAbs().maxCoeff() < 1e-6;
      break;
    }

    const double change = cand_obj - obj;
    const double moved = (scale * step).cwiseAbs().maxCoeff();
    res.beta = candidate;
    obj = cand_obj;

    if (lambda == 0.0 && res.beta.cwiseAbs().maxCoeff() > opt.separation_threshold) {
      res.separated = true;
      return res;
    }
    settled = std::abs(change) < opt.loglik_tolerance && moved < opt.step_tolerance;
  }
  res.loglik = log_likelihood(x, y, res.beta);
  return res;
}

inline bool constant_responses(const LagDesign& d) {
  return std::all_of(d.responses.begin(), d.responses.end(), [&](auto v) { return v == d.responses.front(); });
}

inline ModelFit finish_fit(const IrlsResult& r, std::size_t order, std::size_t n, bool separated, bool ridge) {
  ModelFit fit;
  fit.beta.assign(r.beta.data(), r.beta.data() + r.beta.size());
  fit.loglik = r.loglik;
  fit.order = order;
  fit.observations = n;
  fit.iterations = r.iterations;
  fit.converged = r.converged;
  fit.separation_detected = separated;
  fit.ridge_applied = ridge;
  fit.aic = 2.0 * static_cast<double>(r.beta.size()) - 2.0 * r.loglik;
  return fit;
}

inline ModelFit fit_matrix(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const LagDesign& d,
                           std::size_t order, const FitOptions& opt) {
  if (d.rows() < static_cast<std::size_t>(x.cols())) {
    throw InsufficientDataError("need at least " + std::to_string(x.cols()) + " responses, have " +
                                std::to_string(d.rows()));
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
  if (qr.rank() < x.cols()) throw SingularityError("lag design is rank deficient (constant or duplicated lag)");

  auto ridge = [&] { return finish_fit(irls(x, y, opt.ridge_lambda, opt), order, d.rows(), true, true); };

  if (constant_responses(d)) {
    if (opt.ridge_fallback) return ridge();
    throw SeparationError("responses are constant");
  }
  IrlsResult r = irls(x, y, 0.0, opt);
  if (r.separated) {
    if (opt.ridge_fallback) return ridge();
    throw SeparationError("coefficients diverge (perfect or quasi-complete separation)");
  }
  return finish_fit(r, order, d.rows(), false, false);
}

}  // namespace detail

/// Maximum-likelihood fit of the autologistic model for the design's order.
inline ModelFit fit(const LagDesign& d, const FitOptions& opt = {}) {
  return detail::fit_matrix(detail::design_matrix(d), detail::response_vector(d), d, d.order, opt);
}

/// Fit with every lag coefficient fixed at zero; beta has a single entry.
inline ModelFit fit_intercept_only(const LagDesign& d, const FitOptions& opt = {}) {
  return detail::fit_matrix(detail::design_matrix(d, true), detail::response_vector(d), d, 0, opt);
}

/// Gradient of the unpenalized log-likelihood at `beta`.
inline std::vector<double> loglik_gradient(const LagDesign& d, std::span<const double> beta) {
  Eigen::VectorXd b = Eigen::Map<const Eigen::VectorXd>(beta.data(), static_cast<Eigen::Index>(beta.size()));
  Eigen::VectorXd g = detail::score(detail::design_matrix(d, beta.size() == 1), detail::response_vector(d), b);
  return {g.data(), g.data() + g.size()};
}

inline double loglik_at(const LagDesign& d, std::span<const double> beta) {
  Eigen::VectorXd b = Eigen::Map<const Eigen::VectorXd>(beta.data(), static_cast<Eigen::Index>(beta.size()));
  return detail::log_likelihood(detail::design_matrix(d, beta.size() == 1), detail::response_vector(d), b);
}

/// Pr(w_i = 1 | past) with lags[0] = w_{i-1}, lags[1] = w_{i-2}, ...
inline double predict(std::span<const double> beta, std::span<const std::uint8_t> lags) {
  if (beta.empty() || lags.size() != beta.size() - 1) {
    throw std::invalid_argument("expected " + std::to_string(beta.empty() ? 0 : beta.size() - 1) + " lags, got " +
                                std::to_string(lags.size()));
  }
  double eta = beta[0];
  for (std::size_t j = 0; j < lags.size(); ++j) eta += beta[j + 1] * lags[j];
  return logistic(eta);
}

inline double predict(const ModelFit& fit, std::span<const std::uint8_t> lags) { return predict(fit.beta, lags); }

/// Pr(w_i = 0 | past).
inline double predict_clean(const ModelFit& fit, std::span<const std::uint8_t> lags) {
  return 1.0 - predict(fit, lags);
}

// --- order selection ---------------------------------------------------------

enum class AicSample {
  common,     // every order is scored on responses w_alpha..w_{r-1}
  per_order,  // order l uses responses w_l..w_{r-1}
};

struct SelectionOptions {
  double max_order_fraction = 0.1;
  AicSample sample = AicSample::common;
  FitOptions fit;
};

struct OrderCandidate {
  std::size_t order = 0;
  std::optional<ModelFit> fit;
  std::string error;  // set when the fit failed or did not converge
};

struct OrderSelection {
  std::size_t order = 0;
  ModelFit best;
  std::vector<OrderCandidate> candidates;
};

inline std::size_t max_order(std::size_t r, double fraction) {
  return static_cast<std::size_t>(std::floor(fraction * static_cast<double>(r) + 1e-9));
}

/// Fits orders 1..floor(fraction * r) and keeps the AIC minimizer; ties go to
/// the smaller order and failed fits are skipped.
inline OrderSelection select_order(std::span<const std::uint8_t> w, const SelectionOptions& opt = {}) {
  const std::size_t alpha = max_order(w.size(), opt.max_order_fraction);
  if (alpha < 1) {
    throw SelectionError("series of length " + std::to_string(w.size()) + " admits no candidate order");
  }
  OrderSelection sel;
  std::optional<std::size_t> best_index;
  for (std::size_t order = 1; order <= alpha; ++order) {
    OrderCandidate cand{order, std::nullopt, {}};
    try {
      LagDesign d = opt.sample == AicSample::common ? build_lag_design(w, order, alpha) : build_lag_design(w, order);
      ModelFit f = fit(d, opt.fit);
      if (f.converged) {
        cand.fit = std::move(f);
      } else {
        cand.error = "not converged";
      }
    } catch (const DataError& e) {
      cand.error = e.what();
    }
    sel.candidates.push_back(std::move(cand));
    const auto& c = sel.candidates.back();
    if (c.fit && (!best_index || c.fit->aic < sel.candidates[*best_index].fit->aic - 1e-10)) {
      best_index = sel.candidates.size() - 1;
    }
  }
  if (!best_index) throw SelectionError("no candidate order could be fitted");
  sel.order = sel.candidates[*best_index].order;
  sel.best = *sel.candidates[*best_index].fit;
  return sel;
}

// --- forecast experiment -----------------------------------------------------

enum class IneligibleReason { none, too_few_releases, no_training_data, low_training_std };

inline std::string_view to_string(IneligibleReason r) {
  switch (r) {
    case IneligibleReason::none: return "eligible";
    case IneligibleReason::too_few_releases: return "too_few_releases";
    case IneligibleReason::no_training_data: return "no_training_data";
    case IneligibleReason::low_training_std: return "low_training_std";
  }
  return "?";
}

struct EligibilityOptions {
  std::size_t min_releases = 25;
  double min_std = 0.25;
};

struct Eligibility {
  bool eligible = false;
  IneligibleReason reason = IneligibleReason::none;
  double training_std = 0.0;
};

/// Population standard deviation (divide by n).
inline double population_std(std::span<const std::uint8_t> values) {
  if (values.empty()) return 0.0;
  double mean = 0.0;
  for (auto v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double ss = 0.0;
  for (auto v : values) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / static_cast<double>(values.size()));
}

/// Eligible iff r >= min_releases and the first r - (t + order) values have a
/// population standard deviation of at least min_std.
inline Eligibility eligibility(std::span<const std::uint8_t> w, std::size_t t, std::size_t order,
                               const EligibilityOptions& opt = {}) {
  Eligibility e;
  if (w.size() < opt.min_releases) {
    e.reason = IneligibleReason::too_few_releases;
    return e;
  }
  if (w.size() <= t + order) {
    e.reason = IneligibleReason::no_training_data;
    return e;
  }
  e.training_std = population_std(w.first(w.size() - (t + order)));
  if (e.training_std < opt.min_std) {
    e.reason = IneligibleReason::low_training_std;
    return e;
  }
  e.eligible = true;
  return e;
}

/// Fraction of positions where (p >= threshold) agrees with the actual value.
inline double threshold_accuracy(std::span<const double> probs, std::span<const std::uint8_t> actuals,
                                 double threshold = 0.5) {
  if (probs.size() != actuals.size()) throw std::invalid_argument("probabilities and actuals differ in length");
  if (probs.empty()) throw std::invalid_argument("accuracy of zero predictions");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < probs.size(); ++i) hits += ((probs[i] >= threshold) == (actuals[i] != 0)) ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(probs.size());
}

enum class NaiveTie { predict_vulnerable, predict_clean };

/// Accuracy of predicting the training majority for every one of the last t
/// releases.
inline double naive_baseline(std::span<const std::uint8_t> w, std::size_t t, NaiveTie tie = NaiveTie::predict_vulnerable) {
  if (t == 0 || w.size() <= t) throw std::invalid_argument("naive baseline needs 0 < t < r");
  const std::size_t train = w.size() - t;
  std::size_t ones = 0;
  for (std::size_t i = 0; i < train; ++i) ones += w[i] ? 1 : 0;
  std::uint8_t guess;
  if (2 * ones > train) {
    guess = 1;
  } else if (2 * ones < train) {
    guess = 0;
  } else {
    guess = tie == NaiveTie::predict_vulnerable ? 1 : 0;
  }
  std::size_t hits = 0;
  for (std::size_t i = train; i < w.size(); ++i) hits += (w[i] ? 1 : 0) == guess ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(t);
}

enum class ForecastFit {
  training_prefix,  // coefficients estimated on w_0..w_{r-t-1} only
  full_series,      // coefficients estimated on the whole series
};

struct ForecastOptions {
  FitOptions fit;
  ForecastFit mode = ForecastFit::training_prefix;
  NaiveTie tie = NaiveTie::predict_vulnerable;
  double threshold = 0.5;
};

struct ForecastReport {
  std::string package;
  std::size_t t = 0;
  std::size_t order = 0;
  std::size_t r = 0;
  std::vector<double> probabilities;
  std::vector<std::uint8_t> actuals;
  std::vector<double> abs_errors;
  double mean_abs_error = 0.0;
  double median_abs_error = 0.0;
  double max_abs_error = 0.0;
  double accuracy = 0.0;
  double naive_accuracy = 0.0;
  ModelFit fit;
};

inline double median(std::vector<double> values) {
  if (values.empty()) throw InsufficientDataError("median of an empty sample");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

/// One-step-ahead predictions for the last t releases, each using the
/// observed lag values, scored by absolute error, threshold accuracy and the
/// naive majority baseline.
inline ForecastReport forecast(const BinarySeries& w, std::size_t t, std::size_t order,
                               const ForecastOptions& opt = {}) {
  const std::size_t r = w.size();
  if (t == 0) throw ForecastError("forecast horizon must be positive");
  if (order == 0) throw ForecastError("order must be positive");
  if (t >= r || r - t <= order) {
    throw ForecastError("'" + w.package + "': no training data for t=" + std::to_string(t) +
                        " and order " + std::to_string(order));
  }

  std::span<const std::uint8_t> all(w.values);
  std::span<const std::uint8_t> train = opt.mode == ForecastFit::training_prefix ? all.first(r - t) : all;

  ForecastReport rep;
  rep.package = w.package;
  rep.t = t;
  rep.order = order;
  rep.r = r;
  try {
    rep.fit = fit(build_lag_design(train, order), opt.fit);
  } catch (const DataError& e) {
    throw ForecastError("'" + w.package + "': training fit failed: " + e.what());
  }
  if (!rep.fit.converged) throw ForecastError("'" + w.package + "': training fit did not converge");

  std::vector<std::uint8_t> lags(order);
  for (std::size_t i = r - t; i < r; ++i) {
    for (std::size_t j = 1; j <= order; ++j) lags[j - 1] = w.values[i - j];
    double p = predict(rep.fit, lags);
    rep.probabilities.push_back(p);
    rep.actuals.push_back(w.values[i]);
    rep.abs_errors.push_back(std::abs(static_cast<double>(w.values[i]) - p));
  }
  double sum = 0.0;
  for (double e : rep.abs_errors) sum += e;
  rep.mean_abs_error = sum / static_cast<double>(t);
  rep.median_abs_error = median(rep.abs_errors);
  rep.max_abs_error = *std::max_element(rep.abs_errors.begin(), rep.abs_errors.end());
  rep.accuracy = threshold_accuracy(rep.probabilities, rep.actuals, opt.threshold);
  rep.naive_accuracy = naive_baseline(all, t, opt.tie);
  return rep;
}

/// Between-package averages for one horizon.
struct HorizonSummary {
  std::size_t t = 0;
  std::size_t packages = 0;
  double mean_abs_error = 0.0;
  double median_abs_error = 0.0;
  double max_abs_error = 0.0;
  double accuracy = 0.0;
  double naive_accuracy = 0.0;
};

inline std::vector<HorizonSummary> experiment_summary(std::span<const ForecastReport> reports) {
  if (reports.empty()) throw InsufficientDataError("no forecast reports to summarize");
  std::vector<std::size_t> horizons;
  for (const auto& r : reports) horizons.push_back(r.t);
  std::sort(horizons.begin(), horizons.end());
  horizons.erase(std::unique(horizons.begin(), horizons.end()), horizons.end());

  std::vector<HorizonSummary> out;
  for (std::size_t t : horizons) {
    HorizonSummary s;
    s.t = t;
    for (const auto& r : reports) {
      if (r.t != t) continue;
      ++s.packages;
      s.mean_abs_error += r.mean_abs_error;
      s.median_abs_error += r.median_abs_error;
      s.max_abs_error += r.max_abs_error;
      s.accuracy += r.accuracy;
      s.naive_accuracy += r.naive_accuracy;
    }
    const auto n = static_cast<double>(s.packages);
    s.mean_abs_error /= n;
    s.median_abs_error /= n;
    s.max_abs_error /= n;
    s.accuracy /= n;
    s.naive_accuracy /= n;
    out.push_back(s);
  }
  return out;
}

}  // namespace vulnrel
