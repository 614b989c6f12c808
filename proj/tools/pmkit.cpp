#include <CLI11.hpp>
#include <cstdlib>
#include <iostream>
#include <string>

#include "pmkit/config.hpp"
#include "pmkit/costs.hpp"
#include "pmkit/engine.hpp"
#include "pmkit/error.hpp"
#include "pmkit/estimation.hpp"
#include "pmkit/io.hpp"
#include "pmkit/planner.hpp"

namespace {

using namespace pmkit;

std::string json_escape(const std::string& text) {
  std::string out;
  out.reserve(text.size());
  for (char ch : text) {
    if (ch == '"' || ch == '\\') out += '\\';
    if (ch == '\n') {
      out += "\\n";
      continue;
    }
    out += ch;
  }
  return out;
}

void apply_env_seed(RunConfig& cfg) {
  if (const char* env = std::getenv("PMKIT_SEED")) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (end == env || *end != '\0')
      throw validation_error("invalid_config", "PMKIT_SEED must be an integer");
    cfg.seed = v;
  }
}

/// Attach parsed covariate series to the failure records that need them.
void attach_covariates(LifetimeDataset& ds,
                       const std::map<std::string, CovariateSeries>& series) {
  for (auto& f : ds.failures) {
    auto it = series.find(f.unit_id);
    if (it == series.end())
      throw validation_error("insufficient_covariates",
                             "no covariate series for failed unit " + f.unit_id);
    f.covariates = it->second;
  }
}

int cmd_estimate_weibull(const std::string& lifetimes_path) {
  LifetimeDataset ds = parse_lifetimes_csv(lifetimes_path);
  WeibullFit fit = fit_weibull_censored(ds);
  if (!fit.converged)
    throw numeric_error("non_convergence",
                        "Weibull fit stopped on the search-box boundary");
  std::cout << "{\"theta\":" << fmt_double(fit.params.theta)
            << ",\"kappa\":" << fmt_double(fit.params.kappa)
            << ",\"loglik\":" << fmt_double(fit.loglik)
            << ",\"mean_life_months\":" << fmt_double(mean_life(fit.params)) << "}\n";
  return 0;
}

int cmd_estimate_beta(const std::string& lifetimes_path,
                      const std::string& covariates_path) {
  if (covariates_path.empty())
    throw validation_error("insufficient_covariates",
                           "estimate beta needs --covariates");
  LifetimeDataset ds = parse_lifetimes_csv(lifetimes_path);
  attach_covariates(ds, parse_covariates_csv(covariates_path));
  CoxFit fit = fit_cox_beta(ds);
  std::cout << "{\"beta\":" << fmt_double(fit.beta) << ",\"flat_likelihood\":"
            << (fit.flat_likelihood ? "true" : "false") << "}\n";
  return 0;
}

FarmState farm_state_from(const RunConfig& cfg,
                          const std::map<std::string, CovariateSeries>& series) {
  if (cfg.components.empty())
    throw validation_error("invalid_config", "config: components: required for plan");
  FarmState fs;
  fs.s = cfg.schedule.start_s;
  fs.T = cfg.schedule.horizon_T;
  fs.kappa = cfg.model.baseline.kappa;
  for (const auto& comp : cfg.components) {
    ComponentState state;
    state.id = comp.id;
    state.age = comp.age;
    auto it = series.find(comp.id);
    if (it != series.end()) {
      state.theta = update_theta(cfg.model, it->second, fs.s, comp.age).theta;
      state.covariates = it->second;
    } else {
      state.theta = cfg.model.baseline.theta;
    }
    fs.components.push_back(std::move(state));
  }
  return fs;
}

int cmd_plan(const std::string& config_path, const std::string& covariates_path) {
  RunConfig cfg = load_run_config(config_path);
  apply_env_seed(cfg);
  std::map<std::string, CovariateSeries> series;
  if (!covariates_path.empty()) series = parse_covariates_csv(covariates_path);
  FarmState fs = farm_state_from(cfg, series);
  const CostParams cp = cfg.costs.params_at(fs.s);
  const MonthlyCostResult rate =
      monthly_cost_c(cfg.model.baseline, cp, static_cast<int>(fs.components.size()),
                     cfg.schedule.t_max, cfg.schedule.tau_max);
  const NextPMDecision decision =
      optimize_next_pm(fs, cp, rate.c, PlannerOptions{cfg.schedule.tau_max});
  std::cout << decision_json(decision, rate.c) << "\n";
  return 0;
}

int cmd_replay(const std::string& config_path, const std::string& events_path,
               const std::string& covariates_path, const std::string& out_path) {
  RunConfig cfg = load_run_config(config_path);
  apply_env_seed(cfg);
  if (cfg.components.empty())
    throw validation_error("invalid_config", "config: components: required for replay");
  EventScript script;
  for (auto& [unit, ages] : parse_events_csv(events_path))
    script[unit].failure_ages = ages;
  if (!covariates_path.empty()) {
    for (auto& [unit, series] : parse_covariates_csv(covariates_path)) {
      const bool known = std::any_of(
          cfg.components.begin(), cfg.components.end(),
          [&, id = unit](const FarmComponentSetup& f) { return f.id == id; });
      if (known) script[unit].covariates = series;
    }
  }
  const auto trajectory =
      run_schedule(cfg.components, cfg.model, cfg.costs, script, cfg.schedule);
  write_file(out_path, trajectory_csv(trajectory));
  return 0;
}

int cmd_simulate(const std::string& config_path, const std::string& out_path) {
  RunConfig cfg = load_run_config(config_path);
  apply_env_seed(cfg);
  if (cfg.components.empty())
    throw validation_error("invalid_config",
                           "config: components: required for simulate");
  const SimulationReport report = simulate_farm(cfg.to_sim_config());
  const std::string text = report_json(report) + "\n";
  if (out_path.empty())
    std::cout << text;
  else
    write_file(out_path, text);
  return 0;
}

int cmd_cost_table(const std::string& config_path, const std::string& out_path,
                   int age_max) {
  RunConfig cfg = load_run_config(config_path);
  apply_env_seed(cfg);
  const int n = cfg.components.empty() ? 16 : static_cast<int>(cfg.components.size());
  const CostParams cp = cfg.costs.params_at(cfg.schedule.start_s);
  const MonthlyCostResult res = monthly_cost_c(cfg.model.baseline, cp, n,
                                               cfg.schedule.t_max, cfg.schedule.tau_max);
  const MonthlyRate share{res.c.per_month / n};
  std::string out = "kind,x,value\n";
  const auto b = virtual_cost_grid(cfg.model.baseline, cp, share, 0, age_max + 1,
                                   cfg.schedule.tau_max);
  for (int a = 0; a <= age_max; ++a) {
    out += "pm," + std::to_string(a) + "," + fmt_double(pm_cost(cp, a)) + "\n";
    out += "virtual_b," + std::to_string(a) + "," + fmt_double(b[a]) + "\n";
    out += "effective_B," + std::to_string(a) + "," +
           fmt_double(std::min(pm_cost(cp, a), b[a])) + "\n";
  }
  const auto q = qt_curve(cfg.model.baseline, cp, n, cfg.schedule.t_max,
                          cfg.schedule.tau_max, res.c);
  for (int t = 1; t <= cfg.schedule.t_max; ++t)
    out += "q," + std::to_string(t) + "," + fmt_double(q[t]) + "\n";
  out += "c,," + fmt_double(res.c.per_month) + "\n";
  if (out_path.empty())
    std::cout << out;
  else
    write_file(out_path, out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Preventive-maintenance scheduling toolkit for wind-farm gearboxes"};
  app.require_subcommand(1);

  std::string lifetimes_path, covariates_path, config_path, events_path;
  std::string replay_out = "trajectory.csv";
  std::string simulate_out, table_out;
  int age_max = 240;

  auto* estimate = app.add_subcommand("estimate", "Fit model parameters from CSV data");
  estimate->require_subcommand(1);
  auto* est_weibull =
      estimate->add_subcommand("weibull", "Censored Weibull baseline fit");
  est_weibull->add_option("--lifetimes", lifetimes_path, "lifetime CSV")->required();
  auto* est_beta = estimate->add_subcommand("beta", "Cox regression coefficient fit");
  est_beta->add_option("--lifetimes", lifetimes_path, "lifetime CSV")->required();
  est_beta->add_option("--covariates", covariates_path, "covariate CSV");

  auto* plan = app.add_subcommand("plan", "Compute the next-PM decision");
  plan->add_option("--config", config_path, "run config JSON")->required();
  plan->add_option("--covariates", covariates_path, "covariate CSV");

  auto* replay = app.add_subcommand("replay", "Replay a scripted failure history");
  replay->add_option("--config", config_path, "run config JSON")->required();
  replay->add_option("--events", events_path, "event script CSV")->required();
  replay->add_option("--covariates", covariates_path, "covariate CSV");
  replay->add_option("--out", replay_out, "trajectory CSV path");

  auto* simulate = app.add_subcommand("simulate", "Monte Carlo policy evaluation");
  simulate->add_option("--config", config_path, "run config JSON")->required();
  simulate->add_option("--out", simulate_out, "report JSON path (default stdout)");

  auto* cost_table = app.add_subcommand("cost-table", "Dump b(a), B(a), q_t, c grids");
  cost_table->add_option("--config", config_path, "run config JSON")->required();
  cost_table->add_option("--out", table_out, "output CSV path (default stdout)");
  cost_table->add_option("--age-max", age_max, "largest age in the tables");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);  // --help exits 0
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;  // usage errors
  }

  try {
    if (est_weibull->parsed()) return cmd_estimate_weibull(lifetimes_path);
    if (est_beta->parsed()) return cmd_estimate_beta(lifetimes_path, covariates_path);
    if (plan->parsed()) return cmd_plan(config_path, covariates_path);
    if (replay->parsed())
      return cmd_replay(config_path, events_path, covariates_path, replay_out);
    if (simulate->parsed()) return cmd_simulate(config_path, simulate_out);
    if (cost_table->parsed()) return cmd_cost_table(config_path, table_out, age_max);
  } catch (const pmkit::Error& e) {
    std::cerr << "{\"error\":{\"code\":\"" << e.code() << "\",\"message\":\""
              << json_escape(e.what()) << "\"}}\n";
    return e.kind() == pmkit::ErrorKind::validation ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "{\"error\":{\"code\":\"internal\",\"message\":\""
              << json_escape(e.what()) << "\"}}\n";
    return 1;
  }
  return 2;
}
