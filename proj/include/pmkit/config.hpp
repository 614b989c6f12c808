#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pmkit/engine.hpp"

namespace pmkit {

/// Everything a command run needs, loaded from a JSON config file. Baseline
/// parameters default to the case-study values; every field can be overridden.
struct RunConfig {
  CoxModel model{0.203, WeibullParams(1.95e-6, 3.0)};
  CostConfig costs;
  ScheduleConfig schedule{15, 240, 3, 600, 600, true};
  std::vector<FarmComponentSetup> components;
  CovariateProfile profile;
  Policy policy = Policy::algorithm1;
  int fixed_period_months = 36;
  int replications = 1;
  int threads = 0;
  std::uint64_t seed = 0;

  SimConfig to_sim_config() const;
};

/// Parses and validates a config file; errors name the offending key.
RunConfig load_run_config(const std::string& path);

}  // namespace pmkit
