#include "pmkit/planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "pmkit/error.hpp"

namespace pmkit {

void FarmState::validate() const {
  if (components.empty())
    throw validation_error("invalid_params", "farm state needs at least one component");
  if (!(s < T))
    throw validation_error("invalid_params", "review time s must precede horizon T");
  if (!(kappa > 0.0) || !std::isfinite(kappa))
    throw validation_error("invalid_params", "shape parameter must be positive");
  for (const auto& comp : components) {
    if (!(comp.theta > 0.0) || !std::isfinite(comp.theta))
      throw validation_error("invalid_params",
                             "component " + comp.id + ": theta must be positive");
    if (comp.age < 0)
      throw validation_error("invalid_params",
                             "component " + comp.id + ": age must be >= 0");
  }
}

double FirstFailureLaw::total_mass() const {
  double sum = 0.0;
  for (int u = 1; u <= horizon; ++u) sum += mass[u];
  return sum;
}

namespace {

/// Conditional survivals S_j(u) = P(L_{a_j} > u) for u = 0..H.
std::vector<std::vector<double>> survival_table(const FarmState& fs, int H) {
  const int n = static_cast<int>(fs.components.size());
  std::vector<std::vector<double>> S(n, std::vector<double>(H + 1));
  for (int j = 0; j < n; ++j) {
    const auto& comp = fs.components[j];
    const double pow_a = std::pow(static_cast<double>(comp.age), fs.kappa);
    for (int u = 0; u <= H; ++u)
      S[j][u] = std::exp(comp.theta *
                         (pow_a - std::pow(static_cast<double>(comp.age + u), fs.kappa)));
  }
  return S;
}

/// First-failure masses and attributions from the survival table, with the
/// mass-closure invariant enforced.
FirstFailureLaw build_law(const std::vector<std::vector<double>>& S, int H) {
  const int n = static_cast<int>(S.size());
  FirstFailureLaw law;
  law.horizon = H;
  law.mass.assign(H + 1, 0.0);
  law.attribution.assign(n, std::vector<double>(H + 1, 0.0));

  std::vector<double> prefix(n + 1), suffix(n + 1), w(n);
  double prod_prev = 1.0;
  for (int u = 1; u <= H; ++u) {
    double prod = 1.0;
    for (int j = 0; j < n; ++j) prod *= S[j][u];
    const double m_u = prod_prev - prod;
    law.mass[u] = m_u;
    prod_prev = prod;
    if (m_u <= 0.0) continue;
    // single-failure weights via leave-one-out products (no division, so
    // components that are surely dead by u stay well-defined)
    prefix[0] = 1.0;
    for (int j = 0; j < n; ++j) prefix[j + 1] = prefix[j] * S[j][u];
    suffix[n] = 1.0;
    for (int j = n - 1; j >= 0; --j) suffix[j] = suffix[j + 1] * S[j][u];
    double w_sum = 0.0;
    for (int j = 0; j < n; ++j) {
      w[j] = (S[j][u - 1] - S[j][u]) * prefix[j] * suffix[j + 1];
      w_sum += w[j];
    }
    if (w_sum > 0.0) {
      for (int j = 0; j < n; ++j) law.attribution[j][u] = m_u * (w[j] / w_sum);
    } else {
      // every single-failure weight vanished (several components die with
      // certainty in the same month): split over the components losing mass
      int losers = 0;
      for (int j = 0; j < n; ++j)
        if (S[j][u - 1] > S[j][u]) ++losers;
      for (int j = 0; j < n; ++j)
        if (S[j][u - 1] > S[j][u]) law.attribution[j][u] = m_u / losers;
    }
  }
  law.terminal_survival = prod_prev;

  const double closure = std::abs(law.total_mass() + law.terminal_survival - 1.0);
  if (closure > 1e-10)
    throw numeric_error("numeric_error",
                        "first-failure law mass leaked by " + std::to_string(closure));
  return law;
}

/// Per-review tables shared by the planning operations.
struct PlanTables {
  int n = 0;
  int H = 0;
  std::vector<std::vector<double>> S;    // [j][u]
  std::vector<std::vector<double>> B;    // [j][u]: min(pm, b) at age a_j + u
  std::vector<std::vector<double>> pm;   // [j][u]
  std::vector<std::vector<double>> b;    // [j][u]
  FirstFailureLaw law;
  std::vector<double> phi;               // [tau]: failure branch through tau
  std::vector<double> prod_surv;         // [u]: prod_j S_j(u)

  PlanTables(const FarmState& fs, const CostParams& cp, MonthlyRate c,
             const PlannerOptions& opts) {
    fs.validate();
    n = static_cast<int>(fs.components.size());
    H = fs.T - fs.s;
    const MonthlyRate share{c.per_month / n};

    S = survival_table(fs, H);
    law = build_law(S, H);

    B.assign(n, {});
    pm.assign(n, {});
    b.assign(n, {});
    for (int j = 0; j < n; ++j) {
      const auto& comp = fs.components[j];
      b[j] = virtual_cost_grid(WeibullParams(comp.theta, fs.kappa), cp, share,
                               comp.age, H + 1, opts.tau_max);
      pm[j].resize(H + 1);
      B[j].resize(H + 1);
      for (int u = 0; u <= H; ++u) {
        pm[j][u] = pm_cost(cp, comp.age + u);
        B[j][u] = std::min(pm[j][u], b[j][u]);
      }
    }

    prod_surv.resize(H + 1);
    for (int u = 0; u <= H; ++u) {
      double prod = 1.0;
      for (int j = 0; j < n; ++j) prod *= S[j][u];
      prod_surv[u] = prod;
    }

    phi.assign(H + 1, 0.0);
    double acc = 0.0;
    for (int u = 1; u <= H; ++u) {
      double sum_b = 0.0, attributed_b = 0.0;
      for (int j = 0; j < n; ++j) {
        sum_b += B[j][u];
        attributed_b += law.attribution[j][u] * B[j][u];
      }
      acc += law.mass[u] * (cp.g + (H - u) * c.per_month + sum_b) - attributed_b;
      phi[u] = acc;
    }
  }

  double plan_cost(const FarmState& fs, const CostParams& cp, MonthlyRate c,
                   int t) const {
    const int tau = t - fs.s;
    double sum_b = 0.0;
    for (int j = 0; j < n; ++j) sum_b += B[j][tau];
    const double occasion = cp.h0 + (fs.T - t) * c.per_month + sum_b;
    return phi[tau] + prod_surv[tau] * occasion;
  }

  std::vector<int> replace_set(int tau) const {
    std::vector<int> out;
    for (int j = 0; j < n; ++j)
      if (pm[j][tau] <= b[j][tau]) out.push_back(j);
    return out;
  }
};

std::vector<std::string> ids_of(const FarmState& fs, const std::vector<int>& idx) {
  std::vector<std::string> out;
  out.reserve(idx.size());
  for (int j : idx) out.push_back(fs.components[j].id);
  return out;
}

}  // namespace

FirstFailureLaw first_failure_law(const FarmState& fs) {
  fs.validate();
  const int H = fs.T - fs.s;
  return build_law(survival_table(fs, H), H);
}

double expected_plan_cost(const FarmState& fs, const CostParams& cp, MonthlyRate c,
                          int t, const PlannerOptions& opts) {
  fs.validate();
  if (t <= fs.s || t > fs.T)
    throw validation_error("invalid_params", "plan month t must lie in (s, T]");
  return PlanTables(fs, cp, c, opts).plan_cost(fs, cp, c, t);
}

double expected_no_pm_cost(const FarmState& fs, const CostParams& cp, MonthlyRate c,
                           const PlannerOptions& opts) {
  PlanTables tables(fs, cp, c, opts);
  return tables.phi[tables.H];
}

NextPMDecision optimize_next_pm(const FarmState& fs, const CostParams& cp,
                                MonthlyRate c, const PlannerOptions& opts) {
  PlanTables tables(fs, cp, c, opts);
  const double no_pm_cost = tables.phi[tables.H];

  int best_t = 0;
  double best_cost = std::numeric_limits<double>::infinity();
  for (int t = fs.s + 1; t <= fs.T; ++t) {
    const double cost = tables.plan_cost(fs, cp, c, t);
    if (cost < best_cost) {  // ties keep the earliest month
      best_cost = cost;
      best_t = t;
    }
  }

  NextPMDecision decision;
  if (best_t != 0 && best_cost < no_pm_cost) {
    std::vector<int> replace = tables.replace_set(best_t - fs.s);
    if (!replace.empty()) {
      decision.t_star = best_t;
      decision.replace_ids = ids_of(fs, replace);
      decision.expected_cost = best_cost;
      decision.no_pm = false;
      return decision;
    }
    // The unconstrained minimizer replaces nobody, which no feasible plan
    // encodes; fall back to the best month with a non-empty replacement set
    // unless planning nothing is cheaper.
    int fallback_t = 0;
    double fallback_cost = std::numeric_limits<double>::infinity();
    for (int t = fs.s + 1; t <= fs.T; ++t) {
      if (tables.replace_set(t - fs.s).empty()) continue;
      const double cost = tables.plan_cost(fs, cp, c, t);
      if (cost < fallback_cost) {
        fallback_cost = cost;
        fallback_t = t;
      }
    }
    if (fallback_t != 0 && fallback_cost < no_pm_cost) {
      decision.t_star = fallback_t;
      decision.replace_ids = ids_of(fs, tables.replace_set(fallback_t - fs.s));
      decision.expected_cost = fallback_cost;
      decision.no_pm = false;
      return decision;
    }
  }
  decision.expected_cost = no_pm_cost;
  return decision;
}

NextPMDecision brute_force_plan(const FarmState& fs, const CostParams& cp,
                                MonthlyRate c, const PlannerOptions& opts) {
  fs.validate();
  const int n = static_cast<int>(fs.components.size());
  const int H = fs.T - fs.s;
  if (n > 4 || H > 8)
    throw validation_error("instance_too_large",
                           "brute_force_plan handles at most 4 components over 8 months");
  const MonthlyRate share{c.per_month / n};

  const FirstFailureLaw law = first_failure_law(fs);

  // Everything below goes through the public single-value operations; the
  // sweep machinery of optimize_next_pm is not reused.
  auto b_at = [&](int j, int u) {
    return virtual_cost(WeibullParams(fs.components[j].theta, fs.kappa), cp, share,
                        fs.components[j].age + u, opts.tau_max);
  };
  auto B_at = [&](int j, int u) {
    return std::min(pm_cost(cp, fs.components[j].age + u), b_at(j, u));
  };
  auto failure_branch = [&](int tau) {
    double total = 0.0;
    for (int u = 1; u <= tau; ++u) {
      for (int gamma = 0; gamma < n; ++gamma) {
        if (law.attribution[gamma][u] == 0.0) continue;
        double others = 0.0;
        for (int j = 0; j < n; ++j)
          if (j != gamma) others += B_at(j, u);
        total += law.attribution[gamma][u] * (cp.g + (H - u) * c.per_month + others);
      }
    }
    return total;
  };

  NextPMDecision best;
  best.expected_cost = failure_branch(H);  // the z = 1 plan

  for (int t = fs.s + 1; t <= fs.T; ++t) {
    const int tau = t - fs.s;
    std::vector<ComponentLife> lives;
    lives.reserve(n);
    for (const auto& comp : fs.components)
      lives.push_back({WeibullParams(comp.theta, fs.kappa), comp.age});
    const double surv = first_failure_survival(lives, tau);
    const double fail_part = failure_branch(tau);
    for (unsigned mask = 1; mask < (1u << n); ++mask) {
      double occasion = cp.h0 + (fs.T - t) * c.per_month;
      for (int j = 0; j < n; ++j) {
        if (mask & (1u << j))
          occasion += pm_cost(cp, fs.components[j].age + tau);
        else
          occasion += b_at(j, tau);
      }
      const double cost = fail_part + surv * occasion;
      if (cost < best.expected_cost - 1e-15) {
        best.expected_cost = cost;
        best.t_star = t;
        best.no_pm = false;
        best.replace_ids.clear();
        for (int j = 0; j < n; ++j)
          if (mask & (1u << j)) best.replace_ids.push_back(fs.components[j].id);
      }
    }
  }
  return best;
}

std::vector<std::string> opportunistic_set(const FarmState& fs, const CostParams& cp,
                                           MonthlyRate c, const std::string& failed_id,
                                           const PlannerOptions& opts) {
  fs.validate();
  const int n = static_cast<int>(fs.components.size());
  const MonthlyRate share{c.per_month / n};
  bool found = false;
  std::vector<std::string> out;
  for (const auto& comp : fs.components) {
    if (comp.id == failed_id) {
      found = true;
      out.push_back(comp.id);
      continue;
    }
    const WeibullParams pj(comp.theta, fs.kappa);
    if (virtual_cost(pj, cp, share, comp.age, opts.tau_max) >= pm_cost(cp, comp.age))
      out.push_back(comp.id);
  }
  if (!found)
    throw validation_error("unknown_unit",
                           "opportunistic_set: no component with id " + failed_id);
  return out;
}

}  // namespace pmkit
