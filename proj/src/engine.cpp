#include "pmkit/engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <string>
#include <thread>

#include "pmkit/error.hpp"

namespace pmkit {

namespace {
constexpr double kTwoPi = 6.283185307179586476925287;
constexpr int kNoFailure = std::numeric_limits<int>::max();
}  // namespace

double Rng::normal() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  const double u1 = uniform01();
  const double u2 = uniform01();
  const double r = std::sqrt(-2.0 * std::log(u1));
  spare_ = r * std::sin(kTwoPi * u2);
  have_spare_ = true;
  return r * std::cos(kTwoPi * u2);
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  // splitmix64 finalizer over the combined value
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

int sample_lifetime(std::span<const double> theta_by_month, double kappa, Rng& rng,
                    int max_months) {
  if (theta_by_month.empty())
    throw validation_error("invalid_params", "sample_lifetime: empty theta sequence");
  for (double th : theta_by_month)
    if (!(th > 0.0))
      throw validation_error("invalid_params",
                             "sample_lifetime: theta values must be positive");
  const std::size_t len = theta_by_month.size();
  double prev_pow = 0.0;
  for (int t = 1; t <= max_months; ++t) {
    const double cur_pow = std::pow(static_cast<double>(t), kappa);
    const double theta = theta_by_month[std::min<std::size_t>(t, len) - 1];
    const double p_survive = std::exp(theta * (prev_pow - cur_pow));
    if (rng.uniform01() > p_survive) return t;
    prev_pow = cur_pow;
  }
  return max_months + 1;
}

CovariateSeries synth_covariates(const CovariateProfile& profile, int months) {
  if (months < 15)
    throw validation_error("invalid_params",
                           "synth_covariates: need at least 15 months");
  if (profile.noise_sd < 0.0)
    throw validation_error("invalid_params", "noise standard deviation must be >= 0");
  Rng rng(profile.seed);
  CovariateSeries out;
  out.unit_id = "synthetic";
  out.start_month = 1;
  out.values.resize(months);
  for (int t = 1; t <= months; ++t) {
    double v = profile.mean +
               profile.seasonal_amplitude * std::sin(kTwoPi * (t - 1) / 12.0) +
               profile.drift_per_month * std::max(0, t - profile.drift_onset_age);
    if (profile.noise_sd > 0.0) v += profile.noise_sd * rng.normal();
    out.values[t - 1] = v;
  }
  return out;
}

int CostConfig::calendar_month_of(int global_month) const {
  const int base = start_calendar_month - 1 + global_month;
  return ((base % 12) + 12) % 12 + 1;
}

CostParams CostConfig::params_at(int global_month) const {
  if (flat) return *flat;
  if (seasonal) return seasonal_params(model, calendar_month_of(global_month));
  return annual_average_params(model);
}

const char* to_string(TrajectoryPoint::Action action) {
  switch (action) {
    case TrajectoryPoint::Action::advance: return "advance";
    case TrajectoryPoint::Action::pm_executed: return "pm_executed";
    case TrajectoryPoint::Action::cm_executed: return "cm_executed";
  }
  return "?";
}

namespace {

/// Variant-specific behavior of the rolling-horizon loop: where covariates
/// come from and what lifetime a freshly installed gearbox gets.
class UnitDriver {
 public:
  virtual ~UnitDriver() = default;
  /// Covariate series for unit j covering (at least) months up to `upto`,
  /// or nullptr when none is available.
  virtual const CovariateSeries* series(int j, int upto) = 0;
  /// Installs a new gearbox in slot j at the end of `month`; returns its
  /// failure age, or nullopt if it outlives every horizon.
  virtual std::optional<int> install_gearbox(int j, int month) = 0;
};

/// Replay: scripted failures, recorded covariates.
class ScriptDriver : public UnitDriver {
 public:
  ScriptDriver(const std::vector<FarmComponentSetup>& farm, const EventScript& events) {
    next_.assign(farm.size(), 0);
    queues_.resize(farm.size());
    series_.resize(farm.size(), nullptr);
    for (std::size_t j = 0; j < farm.size(); ++j) {
      auto it = events.find(farm[j].id);
      if (it == events.end()) continue;
      for (int age : it->second.failure_ages) {
        if (age < 1)
          throw validation_error("invalid_params",
                                 "scripted failure ages must be positive (unit " +
                                     farm[j].id + ")");
      }
      queues_[j].assign(it->second.failure_ages.begin(),
                        it->second.failure_ages.end());
      if (it->second.covariates) series_[j] = &*it->second.covariates;
    }
  }

  const CovariateSeries* series(int j, int) override { return series_[j]; }

  std::optional<int> install_gearbox(int j, int) override {
    if (next_[j] >= queues_[j].size()) return std::nullopt;
    return queues_[j][next_[j]++];
  }

  std::vector<std::size_t> next_;
  std::vector<std::vector<int>> queues_;
  std::vector<const CovariateSeries*> series_;
};

/// Simulation: covariates synthesized on the fly with the degradation drift
/// following the age of the gearbox currently in service; lifetimes sampled
/// from the proportional-hazards law those covariates imply.
class SamplingDriver : public UnitDriver {
 public:
  SamplingDriver(const SimConfig& cfg, std::uint64_t rep_seed)
      : cfg_(cfg), n_(static_cast<int>(cfg.farm.size())) {
    const int length = cfg.schedule.horizon_T + 2;
    noise_.resize(n_);
    realized_.resize(n_);
    install_.assign(n_, 0);
    life_rng_.reserve(n_);
    for (int j = 0; j < n_; ++j) {
      Rng noise_rng(derive_seed(rep_seed, 2 * j));
      noise_[j].resize(length + 1);
      for (int t = 1; t <= length; ++t) noise_[j][t] = noise_rng.normal();
      life_rng_.emplace_back(derive_seed(rep_seed, 2 * j + 1));
      realized_[j].unit_id = cfg.farm[j].id;
      realized_[j].start_month = 1;
    }
    for (int j = 0; j < n_; ++j) {
      materialize(j, 12);
      xbar_.push_back(first_year_mean(realized_[j]));
    }
  }

  double value_at(int j, int t, int install) const {
    const auto& p = cfg_.profile;
    const int age = t - install;
    return p.mean + p.seasonal_amplitude * std::sin(kTwoPi * (t - 1) / 12.0) +
           p.drift_per_month * std::max(0, age - p.drift_onset_age) +
           p.noise_sd * noise_[j][t];
  }

  void materialize(int j, int upto) {
    auto& vals = realized_[j].values;
    for (int t = static_cast<int>(vals.size()) + 1; t <= upto; ++t)
      vals.push_back(value_at(j, t, install_[j]));
  }

  const CovariateSeries* series(int j, int upto) override {
    materialize(j, std::min(upto, cfg_.schedule.horizon_T + 2));
    return &realized_[j];
  }

  std::optional<int> install_gearbox(int j, int month) override {
    materialize(j, month);  // freeze the outgoing gearbox's history
    install_[j] = month;
    const int remaining = cfg_.schedule.horizon_T + 2 - month;
    if (remaining < 1) return std::nullopt;
    std::vector<double> theta(remaining);
    for (int u = 1; u <= remaining; ++u) {
      const int gm = month + u;
      double th = cfg_.model.baseline.theta;
      if (gm >= 15) {
        const double m3 = (value_at(j, gm - 2, month) + value_at(j, gm - 1, month) +
                           value_at(j, gm, month)) /
                          3.0;
        th *= std::exp(cfg_.model.beta * (m3 - xbar_[j]));
      }
      theta[u - 1] = th;
    }
    const int life =
        sample_lifetime(theta, cfg_.model.baseline.kappa, life_rng_[j], remaining);
    if (life > remaining) return std::nullopt;
    return life;
  }

  const SimConfig& cfg_;
  int n_;
  std::vector<std::vector<double>> noise_;   // [j][t], fixed per replication
  std::vector<CovariateSeries> realized_;
  std::vector<int> install_;
  std::vector<double> xbar_;
  std::vector<Rng> life_rng_;
};

struct UnitState {
  int install = 0;              // global month the current gearbox went in
  int fail_month = kNoFailure;  // global month it fails if left in service
};

/// Per-calendar-month memo of the farm steady-state rate c.
class RateMemo {
 public:
  RateMemo(const CoxModel& model, const CostConfig& costs, int n,
           const ScheduleConfig& cfg)
      : model_(model), costs_(costs), n_(n), cfg_(cfg) {}

  MonthlyRate at(int global_month) {
    const int key = costs_.flat ? 0 : (costs_.seasonal
                                           ? costs_.calendar_month_of(global_month)
                                           : 0);
    auto it = memo_.find(key);
    if (it != memo_.end()) return it->second;
    const MonthlyCostResult res =
        monthly_cost_c(model_.baseline, costs_.params_at(global_month), n_,
                       cfg_.t_max, cfg_.tau_max);
    memo_.emplace(key, res.c);
    return res.c;
  }

 private:
  const CoxModel& model_;
  const CostConfig& costs_;
  int n_;
  const ScheduleConfig& cfg_;
  std::map<int, MonthlyRate> memo_;
};

struct RunTally {
  double cost = 0.0;
  int cm_replacements = 0;
  int pm_replacements = 0;
  int occasions = 0;
};

/// Algorithm-1 rolling-horizon loop shared by replay and simulation.
std::vector<TrajectoryPoint> rolling_schedule(const std::vector<FarmComponentSetup>& farm,
                                              const CoxModel& model,
                                              const CostConfig& costs,
                                              const ScheduleConfig& cfg,
                                              UnitDriver& driver, RateMemo& rates,
                                              RunTally* tally) {
  const int n = static_cast<int>(farm.size());
  if (n == 0)
    throw validation_error("invalid_params", "farm must have at least one component");
  if (cfg.start_s < 15)
    throw validation_error("invalid_params",
                           "planning start must allow 15 months of history (s >= 15)");
  if (cfg.review_period < 1)
    throw validation_error("invalid_params", "review period must be >= 1 month");
  if (cfg.horizon_T <= cfg.start_s)
    throw validation_error("invalid_params", "horizon must exceed the planning start");

  std::vector<UnitState> units(n);
  for (int j = 0; j < n; ++j) {
    if (farm[j].age < 0)
      throw validation_error("invalid_params", "initial ages must be >= 0");
    units[j].install = -farm[j].age;
    if (auto age = driver.install_gearbox(j, units[j].install)) {
      if (*age <= farm[j].age)
        throw validation_error("invalid_params",
                               "unit " + farm[j].id +
                                   ": scripted failure age does not exceed the "
                                   "initial age");
      units[j].fail_month = units[j].install + *age;
    }
  }

  std::vector<TrajectoryPoint> trajectory;
  const int T = cfg.horizon_T;
  int s = cfg.start_s;

  auto replace = [&](int j, int month) {
    units[j].install = month;
    units[j].fail_month = kNoFailure;
    if (auto age = driver.install_gearbox(j, month))
      units[j].fail_month = month + *age;
  };

  while (s < T) {
    // Step 1: condition-update each component's scale parameter.
    FarmState fs;
    fs.s = s;
    fs.T = T;
    fs.kappa = model.baseline.kappa;
    fs.components.resize(n);
    for (int j = 0; j < n; ++j) {
      auto& comp = fs.components[j];
      comp.id = farm[j].id;
      comp.age = s - units[j].install;
      if (comp.age <= 2) {
        comp.theta = model.baseline.theta;
        continue;
      }
      const CovariateSeries* series = driver.series(j, s);
      if (series == nullptr) {
        if (!cfg.allow_covariate_fallback)
          throw validation_error("insufficient_covariates",
                                 "unit " + farm[j].id +
                                     " has no covariate data and fallback is disabled");
        comp.theta = model.baseline.theta;
        continue;
      }
      const ThetaUpdate upd = update_theta(model, *series, s, comp.age);
      if (upd.used_fallback && !cfg.allow_covariate_fallback)
        throw validation_error("insufficient_covariates",
                               "unit " + farm[j].id +
                                   ": covariate history insufficient at month " +
                                   std::to_string(s));
      comp.theta = upd.theta;
    }

    // Step 2: the key optimization step.
    const CostParams plan_cp = costs.params_at(s);
    const MonthlyRate c = rates.at(s);
    const PlannerOptions opts{cfg.tau_max};
    const NextPMDecision plan = optimize_next_pm(fs, plan_cp, c, opts);

    TrajectoryPoint point;
    point.s = s;
    point.t_star = plan.t_star;
    point.planned_count = static_cast<int>(plan.replace_ids.size());

    // Step 3: does a failure preempt the plan within the review window?
    int t_fail = kNoFailure;
    for (const auto& unit : units) t_fail = std::min(t_fail, unit.fail_month);
    const int t_star = plan.t_star.value_or(kNoFailure);
    const int window = s + cfg.review_period;

    if (t_fail <= std::min(t_star, window) && t_fail <= T) {
      // Step 4: corrective replacement plus opportunistic additions.
      FarmState at_fail = fs;
      std::vector<std::string> failed;
      for (int j = 0; j < n; ++j) {
        at_fail.components[j].age = t_fail - units[j].install;
        if (units[j].fail_month == t_fail) failed.push_back(farm[j].id);
      }
      at_fail.s = t_fail;
      const CostParams exec_cp = costs.params_at(t_fail);
      std::vector<std::string> set = at_fail.s < at_fail.T
                                         ? opportunistic_set(at_fail, exec_cp,
                                                             rates.at(t_fail),
                                                             failed.front(), opts)
                                         : failed;
      for (const auto& id : failed)
        if (std::find(set.begin(), set.end(), id) == set.end()) set.push_back(id);

      double cost = 0.0;
      int pm_repl = 0;
      for (const auto& id : set) {
        const int j = static_cast<int>(
            std::find_if(farm.begin(), farm.end(),
                         [&](const FarmComponentSetup& f) { return f.id == id; }) -
            farm.begin());
        const bool is_failed =
            std::find(failed.begin(), failed.end(), id) != failed.end();
        if (is_failed) {
          cost += exec_cp.g;
        } else {
          cost += pm_cost(exec_cp, t_fail - units[j].install);
          ++pm_repl;
        }
        replace(j, t_fail);
      }
      point.action = TrajectoryPoint::Action::cm_executed;
      point.replaced_ids = set;
      point.cost = cost;
      if (tally) {
        tally->cost += cost;
        tally->cm_replacements += static_cast<int>(failed.size());
        tally->pm_replacements += pm_repl;
        tally->occasions += 1;
      }
      s = t_fail;  // re-plan immediately with the updated farm
    } else if (t_star <= window && t_star <= T) {
      // Step 6: execute the planned preventive maintenance.
      const CostParams exec_cp = costs.params_at(t_star);
      double cost = exec_cp.h0;
      for (const auto& id : plan.replace_ids) {
        const int j = static_cast<int>(
            std::find_if(farm.begin(), farm.end(),
                         [&](const FarmComponentSetup& f) { return f.id == id; }) -
            farm.begin());
        cost += pm_cost(exec_cp, t_star - units[j].install);
        replace(j, t_star);
      }
      point.action = TrajectoryPoint::Action::pm_executed;
      point.replaced_ids = plan.replace_ids;
      point.cost = cost;
      if (tally) {
        tally->cost += cost;
        tally->pm_replacements += static_cast<int>(plan.replace_ids.size());
        tally->occasions += 1;
      }
      s = t_star;
    } else {
      // Step 5: advance one review period.
      point.action = TrajectoryPoint::Action::advance;
      s += cfg.review_period;
    }
    trajectory.push_back(std::move(point));
  }
  return trajectory;
}

}  // namespace

std::vector<TrajectoryPoint> run_schedule(const std::vector<FarmComponentSetup>& farm,
                                          const CoxModel& model,
                                          const CostConfig& costs,
                                          const EventScript& events,
                                          const ScheduleConfig& cfg) {
  for (const auto& entry : events) {
    const bool known =
        std::any_of(farm.begin(), farm.end(), [&](const FarmComponentSetup& f) {
          return f.id == entry.first;
        });
    if (!known)
      throw validation_error("unknown_unit",
                             "event script references unknown unit " + entry.first);
  }
  ScriptDriver driver(farm, events);
  RateMemo rates(model, costs, static_cast<int>(farm.size()), cfg);
  return rolling_schedule(farm, model, costs, cfg, driver, rates, nullptr);
}

namespace {

RunTally run_cm_only(const SimConfig& cfg, SamplingDriver& driver) {
  const int n = static_cast<int>(cfg.farm.size());
  const int T = cfg.schedule.horizon_T;
  RunTally tally;
  std::vector<UnitState> units(n);
  for (int j = 0; j < n; ++j) {
    units[j].install = 0;
    if (auto age = driver.install_gearbox(j, 0)) units[j].fail_month = *age;
  }
  while (true) {
    int t = kNoFailure;
    for (const auto& u : units) t = std::min(t, u.fail_month);
    if (t > T) break;
    const CostParams cp = cfg.costs.params_at(t);
    for (int j = 0; j < n; ++j) {
      if (units[j].fail_month != t) continue;
      tally.cost += cp.g;
      tally.cm_replacements += 1;
      units[j].install = t;
      units[j].fail_month = kNoFailure;
      if (auto age = driver.install_gearbox(j, t)) units[j].fail_month = t + *age;
    }
    tally.occasions += 1;
  }
  return tally;
}

RunTally run_fixed_period(const SimConfig& cfg, SamplingDriver& driver) {
  const int n = static_cast<int>(cfg.farm.size());
  const int T = cfg.schedule.horizon_T;
  const int period = std::max(1, cfg.fixed_period_months);
  RunTally tally;
  std::vector<UnitState> units(n);
  for (int j = 0; j < n; ++j) {
    units[j].install = 0;
    if (auto age = driver.install_gearbox(j, 0)) units[j].fail_month = *age;
  }
  int next_pm = period;
  while (true) {
    int t = kNoFailure;
    for (const auto& u : units) t = std::min(t, u.fail_month);
    if (std::min(t, next_pm) > T) break;
    if (t <= next_pm) {
      const CostParams cp = cfg.costs.params_at(t);
      for (int j = 0; j < n; ++j) {
        if (units[j].fail_month != t) continue;
        tally.cost += cp.g;
        tally.cm_replacements += 1;
        units[j].install = t;
        units[j].fail_month = kNoFailure;
        if (auto age = driver.install_gearbox(j, t)) units[j].fail_month = t + *age;
      }
      tally.occasions += 1;
    } else {
      const CostParams cp = cfg.costs.params_at(next_pm);
      tally.cost += cp.h0;
      for (int j = 0; j < n; ++j) {
        tally.cost += pm_cost(cp, next_pm - units[j].install);
        tally.pm_replacements += 1;
        units[j].install = next_pm;
        units[j].fail_month = kNoFailure;
        if (auto age = driver.install_gearbox(j, next_pm))
          units[j].fail_month = next_pm + *age;
      }
      tally.occasions += 1;
      next_pm += period;
    }
  }
  return tally;
}

}  // namespace

SimulationReport simulate_farm(const SimConfig& cfg) {
  if (cfg.replications < 1)
    throw validation_error("invalid_params", "need at least one replication");
  if (cfg.farm.empty())
    throw validation_error("invalid_params", "farm must have at least one component");
  for (const auto& f : cfg.farm)
    if (f.age != 0)
      throw validation_error("invalid_params",
                             "simulation replications start with new components");

  // Shared across replications and threads: the steady-state rates only
  // depend on the cost snapshot, so compute them up front.
  RateMemo rates(cfg.model, cfg.costs, static_cast<int>(cfg.farm.size()), cfg.schedule);
  if (cfg.policy == Policy::algorithm1) {
    if (cfg.costs.seasonal && !cfg.costs.flat)
      for (int m = 0; m < 12; ++m) rates.at(m);
    else
      rates.at(0);
  }

  std::vector<RunTally> tallies(cfg.replications);
  auto worker = [&](int tid, int stride) {
    for (int r = tid; r < cfg.replications; r += stride) {
      const std::uint64_t rep_seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(r));
      SamplingDriver driver(cfg, rep_seed);
      switch (cfg.policy) {
        case Policy::cm_only:
          tallies[r] = run_cm_only(cfg, driver);
          break;
        case Policy::fixed_period:
          tallies[r] = run_fixed_period(cfg, driver);
          break;
        case Policy::algorithm1: {
          RunTally tally;
          RateMemo local = rates;  // copy: no cross-thread mutation
          rolling_schedule(cfg.farm, cfg.model, cfg.costs, cfg.schedule, driver,
                           local, &tally);
          tallies[r] = tally;
          break;
        }
      }
    }
  };

  int threads = cfg.threads > 0 ? cfg.threads
                                : static_cast<int>(std::thread::hardware_concurrency());
  threads = std::max(1, std::min(threads, cfg.replications));
  if (threads == 1) {
    worker(0, 1);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int tid = 0; tid < threads; ++tid) pool.emplace_back(worker, tid, threads);
    for (auto& th : pool) th.join();
  }

  // Deterministic reduction in replication order.
  SimulationReport report;
  report.replications = cfg.replications;
  report.horizon_months = cfg.schedule.horizon_T;
  double sum = 0.0;
  for (const auto& t : tallies) sum += t.cost;
  report.mean_total_cost = sum / cfg.replications;
  double sq = 0.0;
  long long cm = 0, pm = 0, occ = 0, repl = 0, zero_pm = 0;
  for (const auto& t : tallies) {
    const double d = t.cost - report.mean_total_cost;
    sq += d * d;
    cm += t.cm_replacements;
    pm += t.pm_replacements;
    occ += t.occasions;
    repl += t.cm_replacements + t.pm_replacements;
    zero_pm += t.pm_replacements == 0 ? 1 : 0;
  }
  const double stderr_mean =
      cfg.replications > 1 ? std::sqrt(sq / (cfg.replications - 1.0)) /
                                 std::sqrt(static_cast<double>(cfg.replications))
                           : 0.0;
  report.ci95_low = report.mean_total_cost - 1.96 * stderr_mean;
  report.ci95_high = report.mean_total_cost + 1.96 * stderr_mean;
  report.mean_cm_count = static_cast<double>(cm) / cfg.replications;
  report.mean_pm_count = static_cast<double>(pm) / cfg.replications;
  report.mean_replacements_per_occasion =
      occ > 0 ? static_cast<double>(repl) / static_cast<double>(occ) : 0.0;
  report.fraction_zero_pm = static_cast<double>(zero_pm) / cfg.replications;
  return report;
}

}  // namespace pmkit
