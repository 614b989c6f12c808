#include "pmkit/costs.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pmkit/error.hpp"

namespace pmkit {

CostParams::CostParams(double g_, double h0_, double h_, double m_)
    : g(g_), h0(h0_), h(h_), m(m_) {
  if (!(g >= 0.0) || !(h0 >= 0.0) || !(h >= 0.0) || !(m >= 0.0))
    throw validation_error("invalid_params", "cost parameters must be >= 0");
  if (!(g > h))
    throw validation_error("invalid_params",
                           "corrective cost g must exceed the preventive share h");
}

SeasonalCostModel::SeasonalCostModel()
    : monthly_value_loss((gearbox_cost - initial_loss_fraction * gearbox_cost) /
                         depreciation_months) {
  for (double d : downtime)
    if (!(d > 0.0))
      throw validation_error("invalid_params", "downtime costs must be positive");
}

double SeasonalCostModel::g_at(int month_of_year) const {
  return gearbox_cost + maintenance_cost + downtime.at(month_of_year - 1);
}

double SeasonalCostModel::h_at(int month_of_year) const {
  return pm_base_cost + downtime.at(month_of_year - 1) / 6.0;
}

CostParams seasonal_params(const SeasonalCostModel& sm, int month_of_year) {
  if (month_of_year < 1 || month_of_year > 12)
    throw validation_error("invalid_params", "month of year must be in 1..12");
  return CostParams(sm.g_at(month_of_year), sm.occasion_cost, sm.h_at(month_of_year),
                    sm.monthly_value_loss);
}

CostParams annual_average_params(const SeasonalCostModel& sm) {
  double d = 0.0;
  for (double v : sm.downtime) d += v;
  d /= 12.0;
  return CostParams(sm.gearbox_cost + sm.maintenance_cost + d, sm.occasion_cost,
                    sm.pm_base_cost + d / 6.0, sm.monthly_value_loss);
}

double pm_cost(const CostParams& cp, AgeMonths age) {
  if (age < 0)
    throw validation_error("invalid_params", "pm_cost: age must be >= 0");
  return cp.h + age * cp.m;
}

double virtual_cost(const WeibullParams& p, const CostParams& cp, MonthlyRate rate,
                    AgeMonths age, int tau_max) {
  if (age < 0 || tau_max < 1)
    throw validation_error("invalid_params",
                           "virtual_cost: need age >= 0 and tau_max >= 1");
  const double pow_a = std::pow(static_cast<double>(age), p.kappa);
  const double pm_at_age = cp.h0 + cp.h + age * cp.m;
  double surv = 1.0;   // S_a(tau)
  double acc = 0.0;    // sum_{u=0}^{tau-1} S_a(u)
  double best = std::numeric_limits<double>::infinity();
  for (int tau = 1; tau <= tau_max; ++tau) {
    acc += surv;
    surv = std::exp(p.theta * (pow_a - std::pow(static_cast<double>(age + tau), p.kappa)));
    const double obj =
        cp.g + (pm_at_age + tau * cp.m - cp.g) * surv - rate.per_month * acc;
    best = std::min(best, obj);
  }
  return std::max(0.0, best);
}

namespace {

/// Integer powers x^kappa reused across a batch of survival tables. The cache
/// is keyed by the exact kappa value and only ever grows.
std::span<const double> power_table(double kappa, int max_x) {
  thread_local double cached_kappa = std::numeric_limits<double>::quiet_NaN();
  thread_local std::vector<double> cached;
  if (cached_kappa != kappa) {
    cached_kappa = kappa;
    cached.clear();
  }
  for (int x = static_cast<int>(cached.size()); x <= max_x; ++x)
    cached.push_back(std::pow(static_cast<double>(x), kappa));
  return {cached.data(), cached.size()};
}

// Below this survival level the shared-table transform risks dividing by a
// (de)normal-range value; fall back to the direct per-age evaluation. The
// transform's absolute error grows like eps/E[off], but every use of these
// costs is weighted by a probability of the same E[off] order, so precision
// is only a concern right at the underflow edge.
constexpr double kTableFloor = 1e-280;

}  // namespace

std::vector<double> virtual_cost_grid(const WeibullParams& p, const CostParams& cp,
                                      MonthlyRate rate, AgeMonths first_age,
                                      int count, int tau_max) {
  if (first_age < 0 || count < 1 || tau_max < 1)
    throw validation_error("invalid_params", "virtual_cost_grid: bad arguments");
  const int length = count - 1 + tau_max;
  const auto pow_x = power_table(p.kappa, first_age + length);

  // E[k] = P(survive first_age + k | alive at first_age), PE its prefix sum.
  std::vector<double> E(length + 1), PE(length + 2);
  const double pow_base = pow_x[first_age];
  PE[0] = 0.0;
  for (int k = 0; k <= length; ++k) {
    E[k] = std::exp(p.theta * (pow_base - pow_x[first_age + k]));
    PE[k + 1] = PE[k] + E[k];
  }

  // In absolute age x = a + tau the objective becomes
  //   obj(x; a) = g + (F(x) + rate*PE[a-first]) / E[a-first],
  //   F(x) = (h0 + h + x*m - g) * E[x-first] - rate * PE[x-first],
  // so the tau-minimum is a sliding-window minimum of the fixed array F.
  std::vector<double> F(length + 1);
  for (int k = 1; k <= length; ++k)
    F[k] = (cp.h0 + cp.h + (first_age + k) * cp.m - cp.g) * E[k] -
           rate.per_month * PE[k];

  std::vector<double> out(count);
  std::vector<int> deque(length + 1);
  int head = 0, tail = 0;  // deque[head..tail) holds indices with increasing F
  int next_k = 1;
  for (int off = 0; off < count; ++off) {
    for (; next_k <= off + tau_max; ++next_k) {
      while (tail > head && F[deque[tail - 1]] >= F[next_k]) --tail;
      deque[tail++] = next_k;
    }
    while (deque[head] <= off) ++head;  // window is (off, off + tau_max]
    if (E[off] < kTableFloor) {
      out[off] = virtual_cost(p, cp, rate, first_age + off, tau_max);
      continue;
    }
    const double f_min = F[deque[head]];
    const double best = cp.g + (f_min + rate.per_month * PE[off]) / E[off];
    out[off] = std::max(0.0, best);
  }
  return out;
}

double effective_cost_B(const WeibullParams& p, const CostParams& cp, MonthlyRate rate,
                        AgeMonths age, int tau_max) {
  return std::min(pm_cost(cp, age), virtual_cost(p, cp, rate, age, tau_max));
}

namespace {

/// One q_t sweep: B0 holds effective costs at ages 0..t_max.
struct QtEval {
  double min_q;
  int argmin_t;
};

QtEval qt_minimum(const WeibullParams& baseline, const CostParams& cp, int n,
                  int t_max, const std::vector<double>& B0) {
  const double theta_farm = n * baseline.theta;
  double surv_prev = 1.0;  // P(L0 > t-1)
  double fail_mass = 0.0;  // P(L0 <= t)
  double b_mass = 0.0;     // E[B0(L0); L0 <= t]
  double e_min = 0.0;      // E[min(L0, t)] = sum_{u<t} P(L0 > u)
  QtEval best{std::numeric_limits<double>::infinity(), 0};
  for (int t = 1; t <= t_max; ++t) {
    const double surv =
        std::exp(-theta_farm * std::pow(static_cast<double>(t), baseline.kappa));
    const double pmf = surv_prev - surv;
    fail_mass += pmf;
    b_mass += B0[t] * pmf;
    e_min += surv_prev;
    surv_prev = surv;
    const double numer =
        cp.g * fail_mass + (n - 1) * b_mass + (cp.h0 + n * B0[t]) * surv;
    const double q = numer / e_min;
    if (q < best.min_q) {
      best.min_q = q;
      best.argmin_t = t;
    }
  }
  return best;
}

}  // namespace

std::vector<double> qt_curve(const WeibullParams& baseline, const CostParams& cp,
                             int n, int t_max, int tau_max, MonthlyRate c) {
  std::vector<double> B0 =
      virtual_cost_grid(baseline, cp, MonthlyRate{c.per_month / n}, 0, t_max + 1,
                        tau_max);
  for (int u = 0; u <= t_max; ++u) B0[u] = std::min(pm_cost(cp, u), B0[u]);
  const double theta_farm = n * baseline.theta;
  std::vector<double> q(t_max + 1, 0.0);
  double surv_prev = 1.0, fail_mass = 0.0, b_mass = 0.0, e_min = 0.0;
  for (int t = 1; t <= t_max; ++t) {
    const double surv =
        std::exp(-theta_farm * std::pow(static_cast<double>(t), baseline.kappa));
    const double pmf = surv_prev - surv;
    fail_mass += pmf;
    b_mass += B0[t] * pmf;
    e_min += surv_prev;
    surv_prev = surv;
    q[t] = (cp.g * fail_mass + (n - 1) * b_mass + (cp.h0 + n * B0[t]) * surv) / e_min;
  }
  return q;
}

MonthlyCostResult monthly_cost_c(const WeibullParams& baseline, const CostParams& cp,
                                 int n, int t_max, int tau_max, double tol,
                                 int max_iterations) {
  if (n < 1 || t_max < 2)
    throw validation_error("invalid_params",
                           "monthly_cost_c: need n >= 1 and t_max >= 2");
  std::vector<double> pm(t_max + 1);
  for (int u = 0; u <= t_max; ++u) pm[u] = pm_cost(cp, u);

  auto q_min_at = [&](double c) {
    std::vector<double> B0 =
        virtual_cost_grid(baseline, cp, MonthlyRate{c / n}, 0, t_max + 1, tau_max);
    for (int u = 0; u <= t_max; ++u) B0[u] = std::min(pm[u], B0[u]);
    return qt_minimum(baseline, cp, n, t_max, B0);
  };

  // Solve c = f(c) where f(c) = min_t q_t[B0(c/n)]. f is decreasing, so plain
  // iteration can 2-cycle; walk plain iterates until the residual
  // g(c) = f(c) - c brackets zero, then close in with Illinois-damped secant.
  // Accept only on the root's low side so c <= q_t holds on the whole grid.
  int iterations = 1;
  double c = qt_minimum(baseline, cp, n, t_max, pm).min_q;  // B0 = pm seed
  double c_prev = std::numeric_limits<double>::infinity();
  double lo = 0.0, g_lo = 0.0, hi = 0.0, g_hi = 0.0;
  bool have_lo = false, have_hi = false;
  int last_side = 0;
  while (iterations < max_iterations) {
    const QtEval eval = q_min_at(c);
    ++iterations;
    const double g_c = eval.min_q - c;
    const bool dc_ok = std::abs(c - c_prev) < tol;
    if (std::abs(g_c) <= 0.5e-10 || (g_c >= 0.0 && g_c <= 0.5e-8 && dc_ok))
      return MonthlyCostResult{MonthlyRate{c}, iterations, eval.argmin_t,
                               eval.argmin_t == t_max};
    if (g_c > 0.0) {
      if (last_side == +1 && have_hi) g_hi *= 0.5;  // Illinois damping
      lo = c;
      g_lo = g_c;
      have_lo = true;
      last_side = +1;
    } else {
      if (last_side == -1 && have_lo) g_lo *= 0.5;
      hi = c;
      g_hi = g_c;
      have_hi = true;
      last_side = -1;
    }
    c_prev = c;
    c = (have_lo && have_hi) ? (lo * g_hi - hi * g_lo) / (g_hi - g_lo)
                             : eval.min_q;  // plain step until bracketed
  }
  throw numeric_error("non_convergence",
                      "monthly_cost_c: no convergence in " +
                          std::to_string(max_iterations) + " iterations");
}

}  // namespace pmkit
