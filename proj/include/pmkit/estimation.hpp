#pragma once

#include <string>
#include <vector>

#include "pmkit/survival.hpp"

namespace pmkit {

/**
 * One monthly covariate signal for one unit (e.g. a gearbox temperature
 * summary). Month indices count farm-operation months; the series holds one
 * value per consecutive month starting at start_month.
 */
struct CovariateSeries {
  std::string unit_id;
  int start_month = 1;          // operation month of values.front()
  std::vector<double> values;   // gap-free, one per month

  int first_month() const { return start_month; }
  int last_month() const { return start_month + static_cast<int>(values.size()) - 1; }
  bool covers(int lo, int hi) const {
    return !values.empty() && first_month() <= lo && hi <= last_month();
  }
  /// Value at an absolute operation month; throws insufficient_history outside
  /// the covered range.
  double value_at(int month) const;
};

/// A unit observed to failure: its failure age and the covariate history
/// recorded up to (at least) that age when used for Cox fitting.
struct FailureRecord {
  std::string unit_id;
  int failure_age = 0;          // v_k, months, >= 1
  CovariateSeries covariates;   // may be empty for Weibull-only fitting
};

/// Right-censored training data: failed units and still-operational ages.
struct LifetimeDataset {
  std::vector<FailureRecord> failures;  // set V
  std::vector<int> censored_ages;       // set U, ages >= 1
};

/// Fitted baseline law plus the Cox regression coefficient.
struct CoxModel {
  double beta;
  WeibullParams baseline;
};

/// Censored log-likelihood: sum over failures of log P(L lands in month v)
/// plus sum over censored ages of log P(L > u). Returns -infinity if a
/// failure's probability mass underflows to zero.
double weibull_loglik(const WeibullParams& p, const LifetimeDataset& ds);

struct WeibullFit {
  WeibullParams params;
  double loglik;
  bool converged;  // false when the optimizer stopped on the search box edge
};

/**
 * Maximum-likelihood fit of (theta, kappa) over the box
 * theta in [1e-10, 1], kappa in [0.1, 10], by nested golden-section search
 * (outer over kappa restarted from the best coarse-scan points, inner over
 * log theta), refined to 1e-10 log-likelihood tolerance.
 */
WeibullFit fit_weibull_censored(const LifetimeDataset& ds);

/// Search box and restart policy of fit_weibull_censored, exposed so tests
/// can sweep the same region.
inline constexpr double kWeibullThetaMin = 1e-10;
inline constexpr double kWeibullThetaMax = 1.0;
inline constexpr double kWeibullKappaMin = 0.1;
inline constexpr double kWeibullKappaMax = 10.0;

/// First-operating-year average (x(1)+...+x(12))/12.
double first_year_mean(const CovariateSeries& s);

/// Latest three-month moving average (x(t-2)+x(t-1)+x(t))/3.
double moving_average3(const CovariateSeries& s, int t);

/// Cox factor exp(beta * (moving_average3(s,t) - first_year_mean(s))).
/// Requires t >= 15: the comparison needs a full first year plus a current
/// three-month window.
double cox_factor(double beta, const CovariateSeries& s, int t);

struct ThetaUpdate {
  double theta;
  bool used_fallback;  // covariate history was insufficient, baseline returned
};

/// Condition-updated scale parameter: baseline theta for components aged
/// <= 2 months, theta0 * cox_factor otherwise. Falls back to the baseline
/// (and says so) when the covariate history cannot support the factor.
ThetaUpdate update_theta(const CoxModel& model, const CovariateSeries& s,
                         int t, AgeMonths age);

/// Log partial likelihood of beta: risk set of each failure consists of the
/// failed units with failure age >= v_j (ties share the full risk set), with
/// covariate summary moving_average3 evaluated at v_j.
double cox_partial_loglik(double beta, const LifetimeDataset& ds);

struct CoxFit {
  double beta;
  bool flat_likelihood;  // gradient vanished everywhere sampled; beta forced 0
};

/// Maximizer of the partial likelihood over [-10, 10] to 1e-8 in beta,
/// by Newton steps on the analytic derivatives with bisection fallback.
CoxFit fit_cox_beta(const LifetimeDataset& ds);

}  // namespace pmkit
