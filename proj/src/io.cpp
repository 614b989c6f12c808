#include "pmkit/io.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <tuple>

#include "pmkit/error.hpp"

namespace pmkit {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

[[noreturn]] void fail_at(const std::string& path, int line, const std::string& what) {
  throw validation_error("parse_error",
                         path + ":" + std::to_string(line) + ": " + what);
}

int parse_positive_int(const std::string& text, const std::string& path, int line,
                       const std::string& column) {
  if (text.empty() || text.find_first_not_of("0123456789") != std::string::npos)
    fail_at(path, line, "column " + column + ": expected a positive integer, got '" +
                            text + "'");
  const long v = std::strtol(text.c_str(), nullptr, 10);
  if (v < 1 || v > 1000000)
    fail_at(path, line, "column " + column + ": value out of range: '" + text + "'");
  return static_cast<int>(v);
}

double parse_real(const std::string& text, const std::string& path, int line,
                  const std::string& column) {
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (text.empty() || end != text.c_str() + text.size())
    fail_at(path, line, "column " + column + ": expected a number, got '" + text + "'");
  return v;
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw validation_error("parse_error", "cannot open " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

}  // namespace

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw validation_error("parse_error", "cannot open " + path);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw validation_error("parse_error", "cannot write " + path);
  out << content;
}

LifetimeDataset parse_lifetimes_csv(const std::string& path) {
  const auto lines = read_lines(path);
  if (lines.empty() || lines[0] != "farm_id,unit_id,event,age_months")
    fail_at(path, 1, "expected header 'farm_id,unit_id,event,age_months'");
  LifetimeDataset ds;
  std::set<std::tuple<std::string, std::string, std::string, int>> seen;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const int line_no = static_cast<int>(i) + 1;
    if (lines[i].empty()) continue;
    const auto cols = split_csv_line(lines[i]);
    if (cols.size() != 4) fail_at(path, line_no, "expected 4 columns");
    const int age = parse_positive_int(cols[3], path, line_no, "age_months");
    if (cols[2] != "failure" && cols[2] != "censored")
      fail_at(path, line_no,
              "column event: expected 'failure' or 'censored', got '" + cols[2] + "'");
    if (!seen.insert({cols[0], cols[1], cols[2], age}).second)
      fail_at(path, line_no, "duplicate record");
    if (cols[2] == "failure")
      ds.failures.push_back(FailureRecord{cols[1], age, {}});
    else
      ds.censored_ages.push_back(age);
  }
  return ds;
}

std::map<std::string, CovariateSeries> parse_covariates_csv(const std::string& path) {
  const auto lines = read_lines(path);
  if (lines.empty() || lines[0] != "unit_id,month,value")
    fail_at(path, 1, "expected header 'unit_id,month,value'");
  std::map<std::string, std::map<int, double>> rows;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const int line_no = static_cast<int>(i) + 1;
    if (lines[i].empty()) continue;
    const auto cols = split_csv_line(lines[i]);
    if (cols.size() != 3) fail_at(path, line_no, "expected 3 columns");
    const int month = parse_positive_int(cols[1], path, line_no, "month");
    const double value = parse_real(cols[2], path, line_no, "value");
    if (!rows[cols[0]].emplace(month, value).second)
      fail_at(path, line_no,
              "duplicate month " + std::to_string(month) + " for unit " + cols[0]);
  }
  std::map<std::string, CovariateSeries> out;
  for (const auto& [unit, months] : rows) {
    CovariateSeries s;
    s.unit_id = unit;
    s.start_month = months.begin()->first;
    int expect = s.start_month;
    for (const auto& [month, value] : months) {
      if (month != expect)
        throw validation_error("parse_error",
                               path + ": unit " + unit + ": missing month " +
                                   std::to_string(expect));
      s.values.push_back(value);
      ++expect;
    }
    out.emplace(unit, std::move(s));
  }
  return out;
}

std::map<std::string, std::vector<int>> parse_events_csv(const std::string& path) {
  const auto lines = read_lines(path);
  if (lines.empty() || lines[0] != "unit_id,failure_age")
    fail_at(path, 1, "expected header 'unit_id,failure_age'");
  std::map<std::string, std::vector<int>> out;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const int line_no = static_cast<int>(i) + 1;
    if (lines[i].empty()) continue;
    const auto cols = split_csv_line(lines[i]);
    if (cols.size() != 2) fail_at(path, line_no, "expected 2 columns");
    out[cols[0]].push_back(parse_positive_int(cols[1], path, line_no, "failure_age"));
  }
  return out;
}

std::string trajectory_csv(const std::vector<TrajectoryPoint>& trajectory) {
  std::string out = "s,t_star,planned_count,action,replaced_ids,cost\n";
  for (const auto& p : trajectory) {
    out += std::to_string(p.s);
    out += ',';
    if (p.t_star) out += std::to_string(*p.t_star);
    out += ',';
    out += std::to_string(p.planned_count);
    out += ',';
    out += to_string(p.action);
    out += ',';
    for (std::size_t i = 0; i < p.replaced_ids.size(); ++i) {
      if (i) out += ';';
      out += p.replaced_ids[i];
    }
    out += ',';
    out += fmt_double(p.cost);
    out += '\n';
  }
  return out;
}

std::string report_json(const SimulationReport& r) {
  std::string out = "{";
  out += "\"replications\":" + std::to_string(r.replications);
  out += ",\"horizon_months\":" + std::to_string(r.horizon_months);
  out += ",\"mean_total_cost\":" + fmt_double(r.mean_total_cost);
  out += ",\"ci95_low\":" + fmt_double(r.ci95_low);
  out += ",\"ci95_high\":" + fmt_double(r.ci95_high);
  out += ",\"mean_cm_count\":" + fmt_double(r.mean_cm_count);
  out += ",\"mean_pm_count\":" + fmt_double(r.mean_pm_count);
  out += ",\"mean_replacements_per_occasion\":" +
         fmt_double(r.mean_replacements_per_occasion);
  out += ",\"fraction_zero_pm\":" + fmt_double(r.fraction_zero_pm);
  out += "}";
  return out;
}

std::string decision_json(const NextPMDecision& d, MonthlyRate c) {
  std::string out = "{";
  out += "\"t_star\":";
  out += d.t_star ? std::to_string(*d.t_star) : "null";
  out += ",\"replace\":[";
  for (std::size_t i = 0; i < d.replace_ids.size(); ++i) {
    if (i) out += ',';
    out += '"' + d.replace_ids[i] + '"';
  }
  out += "],\"expected_cost\":" + fmt_double(d.expected_cost);
  out += ",\"no_pm\":";
  out += d.no_pm ? "true" : "false";
  out += ",\"c\":" + fmt_double(c.per_month);
  out += "}";
  return out;
}

}  // namespace pmkit
