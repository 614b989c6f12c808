#pragma once

#include <span>
#include <utility>
#include <vector>

namespace pmkit {

/**
 * Scale/shape pair of the Weibull life-length law
 *
 *    P(L > t) = exp(-theta * t^kappa),  t >= 0,
 *
 * with theta in month^(-kappa) and kappa dimensionless. Both parameters must
 * be positive and finite; the constructor enforces this.
 */
struct WeibullParams {
  double theta;
  double kappa;

  WeibullParams(double theta_, double kappa_);
};

/// A component age on the monthly grid (>= 0 months).
using AgeMonths = int;

/// P(L > t) for real t >= 0. Equals 1 at t = 0.
double survival(const WeibullParams& p, double t);

/// Failure rate theta*kappa*t^(kappa-1) per month at age t. For kappa < 1 the
/// rate is singular at 0, so t must be positive; for kappa >= 1, t = 0 is
/// allowed (rate 0 when kappa > 1, theta when kappa == 1).
double hazard(const WeibullParams& p, double t);

/// P(L > a + t | L > a) = survival(p, a+t) / survival(p, a) on the monthly grid.
double conditional_survival(const WeibullParams& p, AgeMonths age, int t);

/// P(L lands in month t) = survival(p, t-1) - survival(p, t), t >= 1.
double discrete_pmf(const WeibullParams& p, int t);

/// One component of a farm snapshot: its life-length law and current age.
struct ComponentLife {
  WeibullParams params;
  AgeMonths age;
};

/// P(no component fails within t months) = product of conditional survivals.
/// For n identical new components this is exp(-n*theta*t^kappa).
double first_failure_survival(std::span<const ComponentLife> components, int t);

/// Mean of the Weibull law: theta^(-1/kappa) * Gamma(1 + 1/kappa), months.
double mean_life(const WeibullParams& p);

namespace detail {
/// Gamma function via the Lanczos approximation (g = 7, 9 coefficients),
/// accurate to well below 1e-10 absolute error on [1, 3].
double gamma_fn(double x);
}  // namespace detail

}  // namespace pmkit
