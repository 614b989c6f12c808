#include "pmkit/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "pmkit/error.hpp"

namespace pmkit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void validate_dataset(const LifetimeDataset& ds) {
  for (const auto& f : ds.failures)
    if (f.failure_age < 1)
      throw validation_error("invalid_params", "failure age must be >= 1 (unit " +
                                                   f.unit_id + ")");
  for (int u : ds.censored_ages)
    if (u < 1)
      throw validation_error("invalid_params", "censored age must be >= 1");
}

/// log(exp(-theta*a) - exp(-theta*b)) for 0 <= a < b, computed without
/// cancellation; -inf when the mass underflows.
double log_interval_mass(double theta, double pow_prev, double pow_cur) {
  const double width = theta * (pow_cur - pow_prev);
  if (width <= 0.0) return -kInf;
  const double tail = -std::expm1(-width);  // 1 - exp(-width), no cancellation
  if (tail <= 0.0) return -kInf;
  return -theta * pow_prev + std::log(tail);
}

/// Censored log-likelihood with the kappa-dependent powers precomputed,
/// so the inner theta search pays no pow() calls.
struct LoglikAtKappa {
  std::vector<double> fail_pow_prev, fail_pow_cur;  // (v-1)^kappa, v^kappa
  std::vector<double> cens_pow;                     // u^kappa

  LoglikAtKappa(const LifetimeDataset& ds, double kappa) {
    fail_pow_prev.reserve(ds.failures.size());
    fail_pow_cur.reserve(ds.failures.size());
    for (const auto& f : ds.failures) {
      fail_pow_prev.push_back(std::pow(f.failure_age - 1.0, kappa));
      fail_pow_cur.push_back(std::pow(static_cast<double>(f.failure_age), kappa));
    }
    cens_pow.reserve(ds.censored_ages.size());
    for (int u : ds.censored_ages)
      cens_pow.push_back(std::pow(static_cast<double>(u), kappa));
  }

  double operator()(double theta) const {
    double ll = 0.0;
    for (std::size_t i = 0; i < fail_pow_cur.size(); ++i) {
      ll += log_interval_mass(theta, fail_pow_prev[i], fail_pow_cur[i]);
      if (ll == -kInf) return -kInf;
    }
    for (double pw : cens_pow) ll -= theta * pw;
    return ll;
  }
};

/// Golden-section maximization on [lo, hi]; fixed iteration count keeps the
/// result bit-stable. Ties move the bracket toward lo.
template <typename F>
std::pair<double, double> golden_max(F f, double lo, double hi, int iters) {
  constexpr double kRatio = 0.6180339887498949;
  double x1 = hi - kRatio * (hi - lo);
  double x2 = lo + kRatio * (hi - lo);
  double f1 = f(x1), f2 = f(x2);
  for (int i = 0; i < iters; ++i) {
    if (f2 > f1) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + kRatio * (hi - lo);
      f2 = f(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - kRatio * (hi - lo);
      f1 = f(x1);
    }
  }
  return f1 >= f2 ? std::make_pair(x1, f1) : std::make_pair(x2, f2);
}

}  // namespace

double weibull_loglik(const WeibullParams& p, const LifetimeDataset& ds) {
  validate_dataset(ds);
  return LoglikAtKappa(ds, p.kappa)(p.theta);
}

WeibullFit fit_weibull_censored(const LifetimeDataset& ds) {
  validate_dataset(ds);
  if (ds.failures.empty())
    throw validation_error("insufficient_data",
                           "Weibull fitting needs at least one failure");
  if (ds.failures.size() + ds.censored_ages.size() < 2)
    throw validation_error("insufficient_data",
                           "Weibull fitting needs at least two observations");

  const double log_th_lo = std::log(kWeibullThetaMin);
  const double log_th_hi = std::log(kWeibullThetaMax);
  constexpr int kInnerIters = 70;  // bracket 23 nats -> ~4e-15 in log theta
  constexpr int kOuterIters = 42;  // kappa step ~0.3 -> ~5e-10 in kappa

  // Profile likelihood over kappa: inner golden section on log theta.
  auto profile = [&](double kappa) {
    LoglikAtKappa ll(ds, kappa);
    auto [x, fx] =
        golden_max([&](double lt) { return ll(std::exp(lt)); }, log_th_lo,
                   log_th_hi, kInnerIters);
    return std::make_pair(fx, std::exp(x));
  };

  // Coarse scan over log-spaced kappa, then refine around the best points.
  constexpr int kScan = 33;
  std::vector<double> scan_kappa(kScan), scan_val(kScan);
  const double lk_lo = std::log(kWeibullKappaMin), lk_hi = std::log(kWeibullKappaMax);
  for (int i = 0; i < kScan; ++i) {
    scan_kappa[i] = std::exp(lk_lo + (lk_hi - lk_lo) * i / (kScan - 1));
    scan_val[i] = profile(scan_kappa[i]).first;
  }
  std::vector<int> order(kScan);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return scan_val[a] > scan_val[b]; });

  double best_kappa = scan_kappa[order[0]];
  double best_ll = scan_val[order[0]];
  for (int r = 0; r < 3; ++r) {
    const int i = order[r];
    const double lo = scan_kappa[std::max(0, i - 1)];
    const double hi = scan_kappa[std::min(kScan - 1, i + 1)];
    auto [k, fk] = golden_max([&](double kp) { return profile(kp).first; }, lo,
                              hi, kOuterIters);
    if (fk > best_ll) {
      best_ll = fk;
      best_kappa = k;
    }
  }

  auto [final_ll, theta_hat] = profile(best_kappa);
  const bool theta_on_edge = theta_hat <= kWeibullThetaMin * 1.0001 ||
                             theta_hat >= kWeibullThetaMax * 0.9999;
  const bool kappa_on_edge = best_kappa <= kWeibullKappaMin * 1.001 ||
                             best_kappa >= kWeibullKappaMax * 0.999;
  return WeibullFit{WeibullParams(theta_hat, best_kappa), final_ll,
                    !(theta_on_edge || kappa_on_edge)};
}

double CovariateSeries::value_at(int month) const {
  if (!covers(month, month))
    throw validation_error(
        "insufficient_history",
        "unit " + unit_id + ": no covariate value for month " + std::to_string(month));
  return values[static_cast<std::size_t>(month - start_month)];
}

double first_year_mean(const CovariateSeries& s) {
  if (!s.covers(1, 12))
    throw validation_error("insufficient_history",
                           "unit " + s.unit_id +
                               ": first-year mean needs operation months 1..12");
  double sum = 0.0;
  for (int m = 1; m <= 12; ++m) sum += s.value_at(m);
  return sum / 12.0;
}

double moving_average3(const CovariateSeries& s, int t) {
  if (!s.covers(t - 2, t))
    throw validation_error("insufficient_history",
                           "unit " + s.unit_id + ": three-month window ending at " +
                               std::to_string(t) + " not covered");
  return (s.value_at(t - 2) + s.value_at(t - 1) + s.value_at(t)) / 3.0;
}

double cox_factor(double beta, const CovariateSeries& s, int t) {
  if (t < 15)
    throw validation_error("insufficient_history",
                           "Cox factor needs at least 15 months of operation");
  return std::exp(beta * (moving_average3(s, t) - first_year_mean(s)));
}

ThetaUpdate update_theta(const CoxModel& model, const CovariateSeries& s, int t,
                         AgeMonths age) {
  if (age < 0)
    throw validation_error("invalid_params", "update_theta: age must be >= 0");
  if (age <= 2) return {model.baseline.theta, false};
  try {
    return {model.baseline.theta * cox_factor(model.beta, s, t), false};
  } catch (const Error& e) {
    if (e.code() == "insufficient_history")
      return {model.baseline.theta, true};
    throw;
  }
}

namespace {

/// Moving averages x-bar^{(i)}(v_j) for every failure pair with v_i >= v_j,
/// plus derivative accumulators. Failures are processed in ascending order
/// of failure age; ties share the full risk set.
struct CoxData {
  std::vector<int> v;                       // sorted failure ages
  std::vector<std::vector<double>> ma;      // ma[j][r]: risk-set covariate values
  std::vector<double> ma_self;              // ma[j] of the failing unit itself

  explicit CoxData(const LifetimeDataset& ds) {
    std::vector<const FailureRecord*> recs;
    recs.reserve(ds.failures.size());
    for (const auto& f : ds.failures) recs.push_back(&f);
    std::stable_sort(recs.begin(), recs.end(),
                     [](const FailureRecord* a, const FailureRecord* b) {
                       return a->failure_age < b->failure_age;
                     });
    const std::size_t n = recs.size();
    v.resize(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = recs[i]->failure_age;
    ma.resize(n);
    ma_self.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t i = 0; i < n; ++i) {
        if (v[i] < v[j]) continue;
        const double m = moving_average3(recs[i]->covariates, v[j]);
        ma[j].push_back(m);
        if (i == j) ma_self[j] = m;
      }
    }
  }

  double loglik(double beta) const {
    double ll = 0.0;
    for (std::size_t j = 0; j < v.size(); ++j) {
      double mx = -kInf;
      for (double m : ma[j]) mx = std::max(mx, beta * m);
      double sum = 0.0;
      for (double m : ma[j]) sum += std::exp(beta * m - mx);
      ll += beta * ma_self[j] - (mx + std::log(sum));
    }
    return ll;
  }

  // d/dbeta and d2/dbeta2 of loglik.
  void derivatives(double beta, double& d1, double& d2) const {
    d1 = 0.0;
    d2 = 0.0;
    for (std::size_t j = 0; j < v.size(); ++j) {
      double mx = -kInf;
      for (double m : ma[j]) mx = std::max(mx, beta * m);
      double s0 = 0.0, s1 = 0.0, s2 = 0.0;
      for (double m : ma[j]) {
        const double w = std::exp(beta * m - mx);
        s0 += w;
        s1 += w * m;
        s2 += w * m * m;
      }
      const double mu = s1 / s0;
      d1 += ma_self[j] - mu;
      d2 -= s2 / s0 - mu * mu;
    }
  }
};

}  // namespace

double cox_partial_loglik(double beta, const LifetimeDataset& ds) {
  validate_dataset(ds);
  return CoxData(ds).loglik(beta);
}

CoxFit fit_cox_beta(const LifetimeDataset& ds) {
  validate_dataset(ds);
  if (ds.failures.size() < 2)
    throw validation_error("insufficient_data",
                           "Cox fitting needs at least two failures");
  CoxData data(ds);

  constexpr double kLo = -10.0, kHi = 10.0;
  double g_lo, g_hi, h;
  data.derivatives(kLo, g_lo, h);
  data.derivatives(kHi, g_hi, h);
  double flat_max = std::max(std::abs(g_lo), std::abs(g_hi));
  for (double b = kLo; b <= kHi; b += 1.0) {
    double g;
    data.derivatives(b, g, h);
    flat_max = std::max(flat_max, std::abs(g));
  }
  if (flat_max < 1e-12) return {0.0, true};

  // Concave likelihood: gradient decreasing. Interior maximum needs a sign
  // change over the box.
  if (g_lo < 0.0 || g_hi > 0.0)
    throw numeric_error("non_convergence",
                        "Cox partial likelihood maximized on the search boundary");

  double lo = kLo, hi = kHi;
  double beta = 0.0;
  for (int it = 0; it < 200; ++it) {
    double d1, d2;
    data.derivatives(beta, d1, d2);
    if (d1 > 0.0)
      lo = beta;
    else
      hi = beta;
    double next = d2 < -1e-300 ? beta - d1 / d2 : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);  // bisection fallback
    if (std::abs(next - beta) < 1e-8) return {next, false};
    beta = next;
  }
  throw numeric_error("non_convergence", "Cox Newton iteration did not converge");
}

}  // namespace pmkit
