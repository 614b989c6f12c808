#include <doctest.h>

#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include "pmkit/engine.hpp"
#include "pmkit/error.hpp"
#include "pmkit/io.hpp"

using namespace pmkit;

namespace {

struct TempFile {
  std::string path;
  explicit TempFile(const std::string& name, const std::string& content)
      : path((std::filesystem::temp_directory_path() / name).string()) {
    std::ofstream out(path, std::ios::binary);
    out << content;
  }
  ~TempFile() { std::remove(path.c_str()); }
};

std::string error_code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return "";
}

}  // namespace

TEST_SUITE("io") {

TEST_CASE("number formatting round-trips exactly") {
  Rng rng(4242);
  for (int i = 0; i < 2000; ++i) {
    double v;
    if (i % 3 == 0)
      v = (rng.uniform01() - 0.5) * 1e3;
    else if (i % 3 == 1)
      v = rng.uniform01() * 1e-6;
    else
      v = rng.uniform01() * 1e12;
    const std::string text = fmt_double(v);
    CHECK(std::strtod(text.c_str(), nullptr) == v);
  }
  CHECK(fmt_double(0.0) == "0");
  CHECK(fmt_double(1.0) == "1");
}

TEST_CASE("lifetime csv parsing") {
  TempFile ok("pmkit_lt_ok.csv",
              "farm_id,unit_id,event,age_months\n"
              "9,T01,failure,25\n"
              "9,T02,censored,137\n");
  const LifetimeDataset ds = parse_lifetimes_csv(ok.path);
  CHECK(ds.failures.size() == 1);
  CHECK(ds.censored_ages.size() == 1);
  CHECK(ds.failures[0].unit_id == "T01");
  CHECK(ds.failures[0].failure_age == 25);
  CHECK(ds.censored_ages[0] == 137);

  TempFile bad_case("pmkit_lt_case.csv",
                    "farm_id,unit_id,event,age_months\n9,T01,Failure,25\n");
  try {
    parse_lifetimes_csv(bad_case.path);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == "parse_error");
    CHECK(std::string(e.what()).find(":2:") != std::string::npos);
    CHECK(std::string(e.what()).find("event") != std::string::npos);
  }

  TempFile dup("pmkit_lt_dup.csv",
               "farm_id,unit_id,event,age_months\n"
               "9,T01,failure,25\n9,T01,failure,25\n");
  CHECK(error_code_of([&] { parse_lifetimes_csv(dup.path); }) == "parse_error");

  TempFile bad_age("pmkit_lt_age.csv",
                   "farm_id,unit_id,event,age_months\n9,T01,failure,0\n");
  CHECK(error_code_of([&] { parse_lifetimes_csv(bad_age.path); }) == "parse_error");

  TempFile bad_header("pmkit_lt_h.csv", "farm,unit,event,age\n");
  CHECK(error_code_of([&] { parse_lifetimes_csv(bad_header.path); }) == "parse_error");

  CHECK(error_code_of([&] { parse_lifetimes_csv("/nonexistent.csv"); }) ==
        "parse_error");

  // the committed survey-shaped fixture: 46 failures, 186 still in use
  const LifetimeDataset farm = parse_lifetimes_csv(
      std::string(PMKIT_FIXTURE_DIR) + "/lifetimes_farm.csv");
  CHECK(farm.failures.size() == 46);
  CHECK(farm.censored_ages.size() == 186);
}

TEST_CASE("covariate csv parsing") {
  TempFile ok("pmkit_cov_ok.csv", [] {
    std::string text = "unit_id,month,value\n";
    for (int t = 1; t <= 15; ++t)
      text += "T01," + std::to_string(t) + "," + std::to_string(60 + t) + "\n";
    return text;
  }());
  const auto series = parse_covariates_csv(ok.path);
  CHECK(series.size() == 1);
  CHECK(series.at("T01").values.size() == 15);
  CHECK(series.at("T01").start_month == 1);

  TempFile gap("pmkit_cov_gap.csv",
               "unit_id,month,value\nT01,1,5\nT01,2,6\nT01,4,8\n");
  try {
    parse_covariates_csv(gap.path);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("T01") != std::string::npos);
    CHECK(std::string(e.what()).find("month 3") != std::string::npos);
  }

  // rows interleaved across units parse order-independently
  TempFile interleaved("pmkit_cov_mix.csv",
                       "unit_id,month,value\nB,2,1\nA,1,5\nB,1,0\nA,2,6\nA,3,7\n");
  const auto two = parse_covariates_csv(interleaved.path);
  CHECK(two.size() == 2);
  CHECK(two.at("A").values == std::vector<double>{5, 6, 7});
  CHECK(two.at("B").values == std::vector<double>{0, 1});

  TempFile dup("pmkit_cov_dup.csv", "unit_id,month,value\nA,1,5\nA,1,6\n");
  CHECK(error_code_of([&] { parse_covariates_csv(dup.path); }) == "parse_error");
}

TEST_CASE("event csv parsing") {
  TempFile ok("pmkit_ev_ok.csv", "unit_id,failure_age\nT01,25\nT01,70\nT02,43\n");
  const auto events = parse_events_csv(ok.path);
  CHECK(events.at("T01") == std::vector<int>{25, 70});
  CHECK(events.at("T02") == std::vector<int>{43});

  TempFile bad("pmkit_ev_bad.csv", "unit_id,failure_age\nT01,-3\n");
  CHECK(error_code_of([&] { parse_events_csv(bad.path); }) == "parse_error");
}

TEST_CASE("trajectory serialization") {
  std::vector<TrajectoryPoint> traj;
  TrajectoryPoint a;
  a.s = 15;
  a.t_star = 54;
  a.planned_count = 2;
  a.action = TrajectoryPoint::Action::advance;
  traj.push_back(a);
  TrajectoryPoint b;
  b.s = 24;
  b.t_star = 41;
  b.planned_count = 3;
  b.action = TrajectoryPoint::Action::cm_executed;
  b.replaced_ids = {"T04", "T07"};
  b.cost = 1.0630833333333334;
  traj.push_back(b);
  TrajectoryPoint c;
  c.s = 25;
  c.action = TrajectoryPoint::Action::pm_executed;
  c.t_star = 26;
  c.planned_count = 1;
  c.replaced_ids = {"T02"};
  c.cost = 0.5;
  traj.push_back(c);
  const std::string expect =
      "s,t_star,planned_count,action,replaced_ids,cost\n"
      "15,54,2,advance,,0\n"
      "24,41,3,cm_executed,T04;T07,1.0630833333333334\n"
      "25,26,1,pm_executed,T02,0.5\n";
  CHECK(trajectory_csv(traj) == expect);
}

TEST_CASE("report and decision json round-trip through a strict parser") {
  SimulationReport rep;
  rep.replications = 1000;
  rep.horizon_months = 240;
  rep.mean_total_cost = 69.955234918273645;
  rep.ci95_low = 69.758;
  rep.ci95_high = 70.153;
  rep.mean_cm_count = 17.2;
  rep.mean_pm_count = 88.3;
  rep.mean_replacements_per_occasion = 1.23456789012345678;
  rep.fraction_zero_pm = 0.0;
  const auto parsed = nlohmann::json::parse(report_json(rep));
  CHECK(parsed.at("replications").get<int>() == 1000);
  CHECK(parsed.at("mean_total_cost").get<double>() == rep.mean_total_cost);
  CHECK(parsed.at("mean_replacements_per_occasion").get<double>() ==
        rep.mean_replacements_per_occasion);

  NextPMDecision d;
  d.t_star = 54;
  d.no_pm = false;
  d.replace_ids = {"T04", "T11"};
  d.expected_cost = 12.345678901234567;
  const auto pj = nlohmann::json::parse(decision_json(d, MonthlyRate{0.236}));
  CHECK(pj.at("t_star").get<int>() == 54);
  CHECK(pj.at("replace").size() == 2);
  CHECK(pj.at("expected_cost").get<double>() == d.expected_cost);
  CHECK(pj.at("no_pm").get<bool>() == false);

  NextPMDecision none;
  none.expected_cost = 3.25;
  const auto nj = nlohmann::json::parse(decision_json(none, MonthlyRate{0.1}));
  CHECK(nj.at("t_star").is_null());
  CHECK(nj.at("no_pm").get<bool>() == true);
}

}  // TEST_SUITE
