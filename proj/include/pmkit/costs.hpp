#pragma once

#include <array>
#include <vector>

#include "pmkit/survival.hpp"

namespace pmkit {

/**
 * Maintenance cost parameters in virtual monetary units:
 *   g  - total cost of a corrective replacement (logistics, downtime, new unit)
 *   h0 - fixed cost of a preventive-maintenance occasion, shared by all
 *        components replaced at it
 *   h  - variable preventive replacement cost per component
 *   m  - monthly value loss of a component in use
 * Requires g > h so that corrective maintenance dominates a single preventive
 * share and the optimization stays non-degenerate.
 */
struct CostParams {
  double g;
  double h0;
  double h;
  double m;

  CostParams(double g_, double h0_, double h_, double m_);
};

/**
 * Month-of-year cost structure: fixed gearbox and crane/labor costs plus a
 * seasonal downtime cost d per calendar month. Corrective cost
 * g(month) = gearbox + maintenance + d[month]; preventive variable cost
 * h(month) = pm_base + d[month]/6 (a preventive replacement is six times
 * faster, so it loses a sixth of the downtime). The monthly value loss is
 * derived in the constructor as
 * (gearbox_cost - initial_loss) / depreciation_months.
 */
struct SeasonalCostModel {
  double gearbox_cost = 0.64;
  double maintenance_cost = 0.36;
  double occasion_cost = 0.13;     // h0
  double pm_base_cost = 0.294;     // h before the downtime share
  double initial_loss_fraction = 0.1;
  double depreciation_months = 71.0;
  std::array<double, 12> downtime = {0.075, 0.044, 0.067, 0.053, 0.059, 0.069,
                                     0.046, 0.070, 0.085, 0.066, 0.066, 0.057};
  double monthly_value_loss;       // m, derived

  SeasonalCostModel();

  double g_at(int month_of_year) const;  // month_of_year in 1..12
  double h_at(int month_of_year) const;
};

/// Cost parameters for one calendar month (January = 1).
CostParams seasonal_params(const SeasonalCostModel& sm, int month_of_year);

/// Cost parameters with the downtime averaged over the twelve months.
CostParams annual_average_params(const SeasonalCostModel& sm);

/// Steady-state maintenance cost rate, v.u. per month.
struct MonthlyRate {
  double per_month;
};

/// Preventive replacement cost of one age-a component: h + a*m. The shared
/// occasion cost h0 is charged once per occasion by callers.
double pm_cost(const CostParams& cp, AgeMonths age);

/**
 * Virtual replacement cost b(a): the expected excess cost of running an age-a
 * component through its residual renewal cycle instead of replacing it now,
 *
 *   b(a) = max(0, min over tau in {1..tau_max} of
 *            [ g*(1 - S_a(tau)) + (h0 + h + (a+tau)*m)*S_a(tau)
 *              - rate * sum_{u=0}^{tau-1} S_a(u) ]),
 *
 * where S_a is the age-conditional survival and rate is the steady-state cost
 * rate credited per month the component stays in service. Callers planning a
 * farm of n components pass the per-component share of the farm rate.
 */
double virtual_cost(const WeibullParams& p, const CostParams& cp, MonthlyRate rate,
                    AgeMonths age, int tau_max);

/// b(age) for count consecutive ages starting at first_age, sharing one
/// survival table; equal to per-age virtual_cost up to rounding.
std::vector<double> virtual_cost_grid(const WeibullParams& p, const CostParams& cp,
                                      MonthlyRate rate, AgeMonths first_age,
                                      int count, int tau_max);

/// Effective replacement cost B(a) = min(pm_cost(a), b(a)).
double effective_cost_B(const WeibullParams& p, const CostParams& cp,
                        MonthlyRate rate, AgeMonths age, int tau_max);

struct MonthlyCostResult {
  MonthlyRate c;
  int iterations;          // q_t-minimization evaluations spent
  int argmin_t;            // grid month attaining the minimum at convergence
  bool argmin_at_boundary; // argmin_t == t_max: the true argmin may lie beyond
};

/**
 * Farm-level steady-state replacement cost: the renewal-reward rate
 *
 *   q_t = [ g*P(L0<=t) + (n-1)*E(B0(L0); L0<=t) + (h0 + n*B0(t))*P(L0>t) ]
 *         / E[min(L0, t)]
 *
 * minimized over the planning month t, where L0 is the first failure among n
 * new baseline components (P(L0>t) = exp(-n*theta*t^kappa)) and B0 is the
 * effective replacement cost under the per-component rate c/n. The b <-> c
 * circularity is closed by a bracketed secant (Illinois) solve of
 * c = min_t q_t[B0(c/n)], seeded by the iterate with B0 = pm_cost; the
 * returned c never exceeds the q_t minimum at its own B0.
 */
MonthlyCostResult monthly_cost_c(const WeibullParams& baseline, const CostParams& cp,
                                 int n, int t_max = 600, int tau_max = 600,
                                 double tol = 1e-8, int max_iterations = 50);

/// The q_t curve at the effective costs implied by rate c (index t = 1..t_max;
/// index 0 unused). Matches the curve monthly_cost_c minimized at convergence.
std::vector<double> qt_curve(const WeibullParams& baseline, const CostParams& cp,
                             int n, int t_max, int tau_max, MonthlyRate c);

}  // namespace pmkit
