#pragma once

#include <map>
#include <string>
#include <vector>

#include "pmkit/engine.hpp"
#include "pmkit/estimation.hpp"

namespace pmkit {

/// Shortest exact decimal form a strict parser reads back bit-identically:
/// 17 significant digits.
std::string fmt_double(double v);

/**
 * Lifetime CSV: header exactly `farm_id,unit_id,event,age_months`, event
 * is `failure` or `censored`, ages are positive integers. Duplicate rows
 * (all four fields equal) are rejected. Errors carry the line number.
 */
LifetimeDataset parse_lifetimes_csv(const std::string& path);

/// Covariate CSV: header exactly `unit_id,month,value`; each unit's months
/// must form a gap-free run (rows may arrive in any order).
std::map<std::string, CovariateSeries> parse_covariates_csv(const std::string& path);

/// Event-script CSV: header exactly `unit_id,failure_age`; repeated unit ids
/// script successive gearboxes in that slot.
std::map<std::string, std::vector<int>> parse_events_csv(const std::string& path);

/// Trajectory CSV with header `s,t_star,planned_count,action,replaced_ids,cost`;
/// replaced ids are joined with ';', an absent t_star is an empty field.
std::string trajectory_csv(const std::vector<TrajectoryPoint>& trajectory);

/// SimulationReport as a stable JSON object (17-significant-digit numbers).
std::string report_json(const SimulationReport& report);

/// NextPMDecision as a stable JSON object, with the farm rate alongside.
std::string decision_json(const NextPMDecision& decision, MonthlyRate c);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

}  // namespace pmkit
