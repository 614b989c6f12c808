#include "pmkit/config.hpp"

#include <json.hpp>

#include "pmkit/error.hpp"
#include "pmkit/io.hpp"

namespace pmkit {

namespace {

using nlohmann::json;

[[noreturn]] void bad_key(const std::string& key, const std::string& what) {
  throw validation_error("invalid_config", "config: " + key + ": " + what);
}

double get_num(const json& obj, const std::string& key, const std::string& path,
               double fallback, bool* present = nullptr) {
  if (!obj.contains(key)) {
    if (present) *present = false;
    return fallback;
  }
  if (present) *present = true;
  const auto& v = obj.at(key);
  if (!v.is_number()) bad_key(path + key, "expected a number");
  return v.get<double>();
}

int get_int(const json& obj, const std::string& key, const std::string& path,
            int fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_number_integer()) bad_key(path + key, "expected an integer");
  return v.get<int>();
}

bool get_bool(const json& obj, const std::string& key, const std::string& path,
              bool fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_boolean()) bad_key(path + key, "expected true or false");
  return v.get<bool>();
}

}  // namespace

SimConfig RunConfig::to_sim_config() const {
  SimConfig sim;
  sim.farm = components;
  sim.model = model;
  sim.costs = costs;
  sim.schedule = schedule;
  sim.profile = profile;
  sim.policy = policy;
  sim.fixed_period_months = fixed_period_months;
  sim.replications = replications;
  sim.seed = seed;
  sim.threads = threads;
  return sim;
}

RunConfig load_run_config(const std::string& path) {
  json root;
  try {
    root = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw validation_error("invalid_config",
                           "config: " + path + ": " + std::string(e.what()));
  }
  if (!root.is_object()) bad_key("(root)", "expected a JSON object");

  RunConfig cfg;

  if (root.contains("baseline")) {
    const auto& b = root.at("baseline");
    if (!b.is_object()) bad_key("baseline", "expected an object");
    const double theta = get_num(b, "theta", "baseline.", cfg.model.baseline.theta);
    const double kappa = get_num(b, "kappa", "baseline.", cfg.model.baseline.kappa);
    try {
      cfg.model.baseline = WeibullParams(theta, kappa);
    } catch (const Error& e) {
      bad_key("baseline", e.what());
    }
  }
  cfg.model.beta = get_num(root, "beta", "", cfg.model.beta);

  if (root.contains("costs")) {
    const auto& c = root.at("costs");
    if (!c.is_object()) bad_key("costs", "expected an object");
    cfg.costs.seasonal = get_bool(c, "seasonal", "costs.", cfg.costs.seasonal);
    cfg.costs.start_calendar_month =
        get_int(c, "start_calendar_month", "costs.", cfg.costs.start_calendar_month);
    if (cfg.costs.start_calendar_month < 1 || cfg.costs.start_calendar_month > 12)
      bad_key("costs.start_calendar_month", "must be in 1..12");
    if (c.contains("model")) {
      const auto& m = c.at("model");
      if (!m.is_object()) bad_key("costs.model", "expected an object");
      SeasonalCostModel model;
      model.gearbox_cost = get_num(m, "gearbox_cost", "costs.model.", model.gearbox_cost);
      model.maintenance_cost =
          get_num(m, "maintenance_cost", "costs.model.", model.maintenance_cost);
      model.occasion_cost =
          get_num(m, "occasion_cost", "costs.model.", model.occasion_cost);
      model.pm_base_cost = get_num(m, "pm_base_cost", "costs.model.", model.pm_base_cost);
      model.depreciation_months =
          get_num(m, "depreciation_months", "costs.model.", model.depreciation_months);
      model.initial_loss_fraction = get_num(m, "initial_loss_fraction", "costs.model.",
                                            model.initial_loss_fraction);
      if (m.contains("downtime")) {
        const auto& d = m.at("downtime");
        if (!d.is_array() || d.size() != 12)
          bad_key("costs.model.downtime", "expected an array of 12 numbers");
        for (int i = 0; i < 12; ++i) {
          if (!d[i].is_number()) bad_key("costs.model.downtime", "expected numbers");
          model.downtime[static_cast<std::size_t>(i)] = d[i].get<double>();
        }
      }
      // re-derive m and re-validate
      try {
        SeasonalCostModel fresh;
        fresh.gearbox_cost = model.gearbox_cost;
        fresh.maintenance_cost = model.maintenance_cost;
        fresh.occasion_cost = model.occasion_cost;
        fresh.pm_base_cost = model.pm_base_cost;
        fresh.initial_loss_fraction = model.initial_loss_fraction;
        fresh.depreciation_months = model.depreciation_months;
        fresh.downtime = model.downtime;
        fresh.monthly_value_loss =
            (fresh.gearbox_cost - fresh.initial_loss_fraction * fresh.gearbox_cost) /
            fresh.depreciation_months;
        for (double v : fresh.downtime)
          if (!(v > 0.0)) bad_key("costs.model.downtime", "values must be positive");
        cfg.costs.model = fresh;
      } catch (const Error& e) {
        bad_key("costs.model", e.what());
      }
    }
    if (c.contains("flat")) {
      const auto& f = c.at("flat");
      if (!f.is_object()) bad_key("costs.flat", "expected an object");
      try {
        cfg.costs.flat = CostParams(get_num(f, "g", "costs.flat.", 0.0),
                                    get_num(f, "h0", "costs.flat.", 0.0),
                                    get_num(f, "h", "costs.flat.", 0.0),
                                    get_num(f, "m", "costs.flat.", 0.0));
      } catch (const Error& e) {
        bad_key("costs.flat", e.what());
      }
    }
  }

  cfg.schedule.start_s = get_int(root, "start", "", cfg.schedule.start_s);
  cfg.schedule.horizon_T = get_int(root, "horizon", "", cfg.schedule.horizon_T);
  cfg.schedule.review_period = get_int(root, "review_period", "", cfg.schedule.review_period);
  cfg.schedule.tau_max = get_int(root, "tau_max", "", cfg.schedule.tau_max);
  cfg.schedule.t_max = get_int(root, "t_max", "", cfg.schedule.t_max);
  cfg.schedule.allow_covariate_fallback = get_bool(
      root, "allow_covariate_fallback", "", cfg.schedule.allow_covariate_fallback);
  if (cfg.schedule.horizon_T <= cfg.schedule.start_s)
    bad_key("horizon", "must exceed start");
  if (cfg.schedule.review_period < 1) bad_key("review_period", "must be >= 1");
  if (cfg.schedule.tau_max < 1) bad_key("tau_max", "must be >= 1");
  if (cfg.schedule.t_max < 2) bad_key("t_max", "must be >= 2");

  if (root.contains("components")) {
    const auto& comps = root.at("components");
    if (!comps.is_array() || comps.empty())
      bad_key("components", "expected a non-empty array");
    for (std::size_t i = 0; i < comps.size(); ++i) {
      const auto& comp = comps[i];
      const std::string key = "components[" + std::to_string(i) + "]";
      if (!comp.is_object() || !comp.contains("id") || !comp.at("id").is_string())
        bad_key(key, "expected an object with a string 'id'");
      FarmComponentSetup setup;
      setup.id = comp.at("id").get<std::string>();
      setup.age = get_int(comp, "age", key + ".", 0);
      if (setup.age < 0) bad_key(key + ".age", "must be >= 0");
      for (const auto& other : cfg.components)
        if (other.id == setup.id) bad_key(key + ".id", "duplicate id " + setup.id);
      cfg.components.push_back(std::move(setup));
    }
  }

  if (root.contains("profile")) {
    const auto& p = root.at("profile");
    if (!p.is_object()) bad_key("profile", "expected an object");
    cfg.profile.mean = get_num(p, "mean", "profile.", cfg.profile.mean);
    cfg.profile.seasonal_amplitude =
        get_num(p, "seasonal_amplitude", "profile.", cfg.profile.seasonal_amplitude);
    cfg.profile.drift_per_month =
        get_num(p, "drift_per_month", "profile.", cfg.profile.drift_per_month);
    cfg.profile.drift_onset_age =
        get_int(p, "drift_onset_age", "profile.", cfg.profile.drift_onset_age);
    cfg.profile.noise_sd = get_num(p, "noise_sd", "profile.", cfg.profile.noise_sd);
    if (cfg.profile.noise_sd < 0.0) bad_key("profile.noise_sd", "must be >= 0");
  }

  if (root.contains("policy")) {
    const auto& p = root.at("policy");
    if (!p.is_string()) bad_key("policy", "expected a string");
    const std::string name = p.get<std::string>();
    if (name == "algorithm1")
      cfg.policy = Policy::algorithm1;
    else if (name == "cm_only")
      cfg.policy = Policy::cm_only;
    else if (name == "fixed_period")
      cfg.policy = Policy::fixed_period;
    else
      bad_key("policy", "expected algorithm1, cm_only, or fixed_period");
  }
  cfg.fixed_period_months =
      get_int(root, "fixed_period_months", "", cfg.fixed_period_months);
  cfg.replications = get_int(root, "replications", "", cfg.replications);
  if (cfg.replications < 1) bad_key("replications", "must be >= 1");
  cfg.threads = get_int(root, "threads", "", cfg.threads);

  if (root.contains("seed")) {
    const auto& s = root.at("seed");
    if (!s.is_number_unsigned() && !s.is_number_integer())
      bad_key("seed", "expected a non-negative integer");
    cfg.seed = s.get<std::uint64_t>();
  }
  return cfg;
}

}  // namespace pmkit
