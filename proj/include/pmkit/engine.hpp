#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "pmkit/costs.hpp"
#include "pmkit/estimation.hpp"
#include "pmkit/planner.hpp"

namespace pmkit {

/// Deterministic RNG: mt19937_64 with explicit bit-level conversion to
/// doubles, so streams are identical across platforms and standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  /// Uniform on (0, 1).
  double uniform01() {
    return (static_cast<double>(gen_() >> 11) + 0.5) * (1.0 / 9007199254740992.0);
  }

  /// Standard normal via Box-Muller.
  double normal();

 private:
  std::mt19937_64 gen_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

/// Mixes a stream index into a base seed (splitmix64 finalizer).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

/**
 * Samples a discrete lifetime by sequential monthly survival: alive at t-1
 * survives month t with probability exp(theta(t) * ((t-1)^kappa - t^kappa)).
 * Months beyond the sequence reuse its last value, so a one-element sequence
 * gives the plain discrete Weibull law. Returns the failure month, or
 * max_months + 1 if still alive after max_months.
 */
int sample_lifetime(std::span<const double> theta_by_month, double kappa, Rng& rng,
                    int max_months = 200000);

/// Synthetic stand-in for a monthly SCADA covariate: mean level, 12-month
/// sinusoid, linear drift after an onset age, and Gaussian noise.
struct CovariateProfile {
  double mean = 60.0;
  double seasonal_amplitude = 0.0;
  double drift_per_month = 0.0;
  int drift_onset_age = 0;
  double noise_sd = 0.0;
  std::uint64_t seed = 0;
};

/// Deterministic series of the given length (months 1..months).
CovariateSeries synth_covariates(const CovariateProfile& profile, int months);

/// Cost block used by the engine: a seasonal model plus the choice between
/// one annual-average snapshot and calendar-month-dependent parameters; an
/// explicit flat CostParams overrides both.
struct CostConfig {
  SeasonalCostModel model;
  bool seasonal = false;
  int start_calendar_month = 1;  // calendar month (1..12) of global month 0
  std::optional<CostParams> flat;

  int calendar_month_of(int global_month) const;
  CostParams params_at(int global_month) const;
};

/// Scripted unit history for replay: failure ages consumed by successive
/// gearboxes in this slot, plus optionally recorded covariates.
struct UnitEvents {
  std::vector<int> failure_ages;
  std::optional<CovariateSeries> covariates;
};
using EventScript = std::map<std::string, UnitEvents>;

struct FarmComponentSetup {
  std::string id;
  AgeMonths age = 0;
};

struct ScheduleConfig {
  int start_s = 15;
  int horizon_T = 0;
  int review_period = 3;
  int tau_max = 600;
  int t_max = 600;
  bool allow_covariate_fallback = true;
};

struct TrajectoryPoint {
  enum class Action { advance, pm_executed, cm_executed };

  int s = 0;                        // review month of this planning round
  std::optional<int> t_star;        // planned next PM month, if any
  int planned_count = 0;            // size of the planned replacement set
  Action action = Action::advance;
  std::vector<std::string> replaced_ids;
  double cost = 0.0;                // realized cost of this step
};

const char* to_string(TrajectoryPoint::Action action);

/**
 * Rolling-horizon schedule: at each review, update every component's scale
 * parameter from its covariates (baseline for ages <= 2), optimize the next
 * PM, then either handle the first scripted failure (corrective plus
 * opportunistic replacements), execute the plan if it falls inside the review
 * window, or advance one review period.
 */
std::vector<TrajectoryPoint> run_schedule(const std::vector<FarmComponentSetup>& farm,
                                          const CoxModel& model,
                                          const CostConfig& costs,
                                          const EventScript& events,
                                          const ScheduleConfig& cfg);

enum class Policy { algorithm1, cm_only, fixed_period };

struct SimConfig {
  std::vector<FarmComponentSetup> farm;
  CoxModel model{0.0, WeibullParams(1.0, 1.0)};
  CostConfig costs;
  ScheduleConfig schedule;
  CovariateProfile profile;
  Policy policy = Policy::algorithm1;
  int fixed_period_months = 36;
  int replications = 1;
  std::uint64_t seed = 0;
  int threads = 0;  // 0: hardware concurrency
};

struct SimulationReport {
  int replications = 0;
  int horizon_months = 0;
  double mean_total_cost = 0.0;
  double ci95_low = 0.0;
  double ci95_high = 0.0;
  double mean_cm_count = 0.0;
  double mean_pm_count = 0.0;            // preventive replacements, incl. opportunistic
  double mean_replacements_per_occasion = 0.0;
  double fraction_zero_pm = 0.0;         // replications with no preventive action
};

/**
 * Monte Carlo policy evaluation: independent replications with derived
 * per-replication seeds. Lifetimes are sampled from the proportional-hazards
 * law driven by the synthetic covariates (the degradation drift follows the
 * age of the gearbox currently in service, so replacement resets it), and the
 * policy under test reacts to the same covariate stream it would see live.
 */
SimulationReport simulate_farm(const SimConfig& cfg);

}  // namespace pmkit
