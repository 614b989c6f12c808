#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pmkit/costs.hpp"
#include "pmkit/estimation.hpp"
#include "pmkit/survival.hpp"

namespace pmkit {

/// One farm component at a review: identity, age, and its current
/// (condition-updated) scale parameter.
struct ComponentState {
  std::string id;
  AgeMonths age = 0;
  double theta = 0.0;
  std::optional<CovariateSeries> covariates;
};

/// Farm snapshot at review time s with planning horizon T (global months)
/// and the shared Weibull shape.
struct FarmState {
  std::vector<ComponentState> components;
  int s = 0;
  int T = 0;
  double kappa = 1.0;

  void validate() const;
};

/// Discrete law of the farm's first failure over {1..T-s}: total mass per
/// month and its attribution to the failing component, plus the probability
/// that nothing fails before the horizon. Masses and the terminal survival
/// add to one.
struct FirstFailureLaw {
  int horizon = 0;                                  // H = T - s
  std::vector<double> mass;                         // [u], u = 1..H at index u
  std::vector<std::vector<double>> attribution;     // [component][u]
  double terminal_survival = 1.0;

  double total_mass() const;
};

/// Decoded next-PM decision: either a PM at t_star replacing replace_ids, or
/// the no-PM outcome; expected_cost is the minimized objective value.
struct NextPMDecision {
  std::optional<int> t_star;
  std::vector<std::string> replace_ids;
  double expected_cost = 0.0;
  bool no_pm = true;
};

struct PlannerOptions {
  int tau_max = 600;  // horizon of the virtual-cost cycle search
};

/// Law of the first failure among the farm's components, with simultaneous
/// monthly failures reallocated in proportion to single-failure weights.
FirstFailureLaw first_failure_law(const FarmState& fs);

/// Expected cost of planning the next PM at month t (s < t <= T): the failure
/// branch accumulated to t plus the survival branch charged at t.
double expected_plan_cost(const FarmState& fs, const CostParams& cp, MonthlyRate c,
                          int t, const PlannerOptions& opts = {});

/// Expected cost of planning no PM before the horizon.
double expected_no_pm_cost(const FarmState& fs, const CostParams& cp, MonthlyRate c,
                           const PlannerOptions& opts = {});

/**
 * Exact minimizer over all feasible plans: every candidate month t in
 * {s+1..T} with its cost-minimal replacement set, against the no-PM branch.
 * Per-component choices separate through B = min(pm, b); replacement-set ties
 * go to replacement and equal-cost months to the earliest.
 */
NextPMDecision optimize_next_pm(const FarmState& fs, const CostParams& cp,
                                MonthlyRate c, const PlannerOptions& opts = {});

/// Test oracle: enumerates every feasible binary plan (no PM, or one month
/// with each non-empty replacement subset) and costs it directly. Guarded to
/// n <= 4 components and a horizon of at most 8 months.
NextPMDecision brute_force_plan(const FarmState& fs, const CostParams& cp,
                                MonthlyRate c, const PlannerOptions& opts = {});

/// Components to replace alongside a corrective replacement of failed_id:
/// the failed unit plus every other whose virtual cost has reached its PM cost.
std::vector<std::string> opportunistic_set(const FarmState& fs, const CostParams& cp,
                                           MonthlyRate c, const std::string& failed_id,
                                           const PlannerOptions& opts = {});

}  // namespace pmkit
