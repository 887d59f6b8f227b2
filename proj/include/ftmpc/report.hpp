// Copyright 2026 The ftmpc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// CSV emission for run logs and metrics, scenario suites and the results table.

#ifndef FTMPC_REPORT_HPP_
#define FTMPC_REPORT_HPP_

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "ftmpc/scenario.hpp"
#include "ftmpc/sim.hpp"

namespace ftmpc {

inline constexpr int kLogSchemaVersion = 1;

inline std::vector<std::string> log_columns() {
  std::vector<std::string> c = {"t",     "X",     "Y",     "psi",     "vx",      "vy",
                                "yaw_rate", "s",  "d",     "s_ref",   "psi_ref", "v_ref",
                                "err_t", "err_n", "err_psi"};
  const char* groups[] = {"delta", "lambda", "alpha", "omega", "fz", "util",
                          "cmd_ddelta", "cmd_dlambda", "cmd_lambda", "torque"};
  for (const char* g : groups) {
    for (int w = 0; w < kNumWheels; ++w) c.push_back(std::string(g) + "_" + wheel_name(w));
  }
  for (const char* x : {"qp_status", "qp_iterations", "qp_objective", "reconfigured"}) {
    c.push_back(x);
  }
  return c;
}

inline void write_log_csv(std::ostream& os, const RunLog& log) {
  const auto cols = log_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
  os << '\n' << std::setprecision(10);
  for (const LogRow& r : log.rows) {
    os << r.t << ',' << r.X << ',' << r.Y << ',' << r.psi << ',' << r.vx << ',' << r.vy << ','
       << r.yaw_rate << ',' << r.s << ',' << r.d << ',' << r.s_ref << ',' << r.psi_ref << ','
       << r.v_ref << ',' << r.err_t << ',' << r.err_n << ',' << r.err_psi;
    for (const WheelArray* a : {&r.steer, &r.slip, &r.slip_angle, &r.omega, &r.fz,
                                &r.utilization, &r.cmd_steer_rate, &r.cmd_slip_rate, &r.cmd_slip,
                                &r.torque}) {
      for (double x : *a) os << ',' << x;
    }
    os << ',' << r.status << ',' << r.iterations << ',' << r.objective << ','
       << (r.reconfigured ? 1 : 0) << '\n';
  }
}

inline void write_actuation_csv(std::ostream& os, const RunLog& log) {
  os << "t";
  for (const char* g : {"torque", "ddelta"}) {
    for (int w = 0; w < kNumWheels; ++w) os << ',' << g << '_' << wheel_name(w);
  }
  os << '\n' << std::setprecision(10);
  for (const ActuationRow& a : log.actuation) {
    os << a.t;
    for (double x : a.torque) os << ',' << x;
    for (double x : a.steer_rate) os << ',' << x;
    os << '\n';
  }
}

// One result row of a suite.
struct ScenarioResult {
  std::string name;
  std::string description;
  MetricsReport metrics;
  bool aborted = false;
  std::string error;
};

inline const std::vector<std::string>& metrics_columns() {
  static const std::vector<std::string> cols = {
      "name",    "description", "t_max",   "t_avg",   "t_end",   "n_max",     "n_avg",
      "n_end",   "psi_max_deg", "psi_avg_deg", "psi_end_deg", "mu_avg", "mu_peak",
      "t_ok",    "n_ok",        "psi_ok",  "aborted", "error"};
  return cols;
}

namespace detail {

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        cur += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace detail

inline void write_metrics_header(std::ostream& os) {
  const auto& cols = metrics_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
  os << '\n';
}

inline void write_metrics_row(std::ostream& os, const ScenarioResult& r) {
  const MetricsReport& m = r.metrics;
  os << std::setprecision(10) << detail::csv_field(r.name) << ','
     << detail::csv_field(r.description) << ',' << m.t_max << ',' << m.t_avg << ',' << m.t_end
     << ',' << m.n_max << ',' << m.n_avg << ',' << m.n_end << ',' << rad2deg(m.psi_max) << ','
     << rad2deg(m.psi_avg) << ',' << rad2deg(m.psi_end) << ',' << m.mu_avg << ',' << m.mu_peak
     << ',' << m.tangential_ok << ',' << m.normal_ok << ',' << m.heading_ok << ',' << r.aborted
     << ',' << detail::csv_field(r.error) << '\n';
}

inline std::vector<ScenarioResult> read_metrics_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("metrics.csv: empty file");
  if (detail::split_csv_line(line) != metrics_columns()) {
    throw std::runtime_error("metrics.csv: unexpected header");
  }
  std::vector<ScenarioResult> out;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto f = detail::split_csv_line(line);
    if (f.size() != metrics_columns().size()) throw std::runtime_error("metrics.csv: bad row");
    ScenarioResult r;
    r.name = f[0];
    r.description = f[1];
    MetricsReport& m = r.metrics;
    m.t_max = std::stod(f[2]);
    m.t_avg = std::stod(f[3]);
    m.t_end = std::stod(f[4]);
    m.n_max = std::stod(f[5]);
    m.n_avg = std::stod(f[6]);
    m.n_end = std::stod(f[7]);
    m.psi_max = deg2rad(std::stod(f[8]));
    m.psi_avg = deg2rad(std::stod(f[9]));
    m.psi_end = deg2rad(std::stod(f[10]));
    m.mu_avg = std::stod(f[11]);
    m.mu_peak = std::stod(f[12]);
    m.tangential_ok = f[13] == "1";
    m.normal_ok = f[14] == "1";
    m.heading_ok = f[15] == "1";
    r.aborted = f[16] == "1";
    r.error = f[17];
    out.push_back(r);
  }
  return out;
}

// Runs one scenario and writes log.csv, actuation.csv, metrics.csv and
// config.echo into out_dir.
inline ScenarioResult run_and_write(const SimConfig& cfg, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  {
    std::ofstream echo(out_dir / "config.echo");
    write_config_echo(echo, cfg);
  }
  ScenarioResult res;
  res.name = cfg.name;
  res.description = cfg.description;
  try {
    const RunResult run = run_scenario(cfg);
    res.metrics = run.metrics;
    res.aborted = run.log.aborted;
    res.error = run.log.error;
    std::ofstream log(out_dir / "log.csv");
    write_log_csv(log, run.log);
    std::ofstream act(out_dir / "actuation.csv");
    write_actuation_csv(act, run.log);
  } catch (const std::exception& e) {
    res.aborted = true;
    res.error = e.what();
  }
  std::ofstream met(out_dir / "metrics.csv");
  write_metrics_header(met);
  write_metrics_row(met, res);
  return res;
}

// Runs every *.ini in dir (sorted by file name); a failing scenario yields an
// aborted row and does not stop the others.
inline std::vector<ScenarioResult> run_suite(const std::filesystem::path& dir,
                                             const std::filesystem::path& out_dir) {
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".ini") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  std::vector<ScenarioResult> results;
  for (const auto& f : files) {
    const std::string stem = f.stem().string();
    try {
      results.push_back(run_and_write(load_scenario(f), out_dir / stem));
    } catch (const std::exception& e) {
      ScenarioResult r;
      r.name = stem;
      r.aborted = true;
      r.error = e.what();
      results.push_back(r);
    }
  }
  std::filesystem::create_directories(out_dir);
  std::ofstream met(out_dir / "metrics.csv");
  write_metrics_header(met);
  for (const auto& r : results) write_metrics_row(met, r);
  return results;
}

// Aligned text table; values beyond a safety threshold carry a trailing '*'.
inline void render_table(std::ostream& os, const std::vector<ScenarioResult>& rows) {
  const std::vector<std::string> head = {"scenario", "t_max", "t_avg", "t_end", "n_max",
                                         "n_avg",    "n_end", "psi_max", "psi_avg", "psi_end",
                                         "mu_avg",   "status"};
  std::vector<std::vector<std::string>> cells;
  auto fmt = [](double v, int prec) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(prec) << v;
    return s.str();
  };
  for (const auto& r : rows) {
    const MetricsReport& m = r.metrics;
    std::vector<std::string> c;
    c.push_back(r.name);
    c.push_back(fmt(m.t_max, 3) + (m.tangential_ok ? "" : "*"));
    c.push_back(fmt(m.t_avg, 3));
    c.push_back(fmt(m.t_end, 3));
    c.push_back(fmt(m.n_max, 3) + (m.normal_ok ? "" : "*"));
    c.push_back(fmt(m.n_avg, 3));
    c.push_back(fmt(m.n_end, 3));
    c.push_back(fmt(rad2deg(m.psi_max), 2) + (m.heading_ok ? "" : "*"));
    c.push_back(fmt(rad2deg(m.psi_avg), 2));
    c.push_back(fmt(rad2deg(m.psi_end), 2));
    c.push_back(fmt(m.mu_avg, 3));
    c.push_back(r.aborted ? "aborted" : "ok");
    cells.push_back(c);
  }
  std::vector<std::size_t> width(head.size());
  for (std::size_t j = 0; j < head.size(); ++j) {
    width[j] = head[j].size();
    for (const auto& c : cells) width[j] = std::max(width[j], c[j].size());
  }
  auto line = [&](const std::vector<std::string>& c) {
    for (std::size_t j = 0; j < c.size(); ++j) {
      if (j == 0) {
        os << std::left << std::setw(static_cast<int>(width[j])) << c[j];
      } else {
        os << "  " << std::right << std::setw(static_cast<int>(width[j])) << c[j];
      }
    }
    os << '\n';
  };
  line(head);
  std::size_t total = 0;
  for (std::size_t w : width) total += w + 2;
  os << std::string(total - 2, '-') << '\n';
  for (const auto& c : cells) line(c);
  os << "units: m (t, n), deg (psi); * = safety threshold exceeded\n";
  for (const auto& r : rows) {
    if (r.aborted) os << r.name << ": " << r.error << '\n';
  }
}

}  // namespace ftmpc

#endif  // FTMPC_REPORT_HPP_
