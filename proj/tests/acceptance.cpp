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

// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ftmpc/ftmpc.hpp"

namespace {

using namespace ftmpc;
namespace fs = std::filesystem;

struct Outcome {
  bool pass = true;
  std::string detail;
};

int failures = 0;

void report(const char* id, const Outcome& o) {
  std::printf("%s %-3s %s\n", o.pass ? "PASS" : "FAIL", id, o.detail.c_str());
  if (!o.pass) ++failures;
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

struct Run {
  SimConfig cfg;
  RunResult result;
  double seconds = 0.0;
};

std::map<std::string, Run> run_all() {
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(FTMPC_SCENARIO_DIR)) {
    if (e.path().extension() == ".ini") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::map<std::string, Run> runs;
  for (const auto& f : files) {
    Run r;
    r.cfg = load_scenario(f);
    const auto t0 = std::chrono::steady_clock::now();
    r.result = run_scenario(r.cfg);
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    runs.emplace(f.stem().string(), std::move(r));
  }
  return runs;
}

const MetricsReport& metrics(const std::map<std::string, Run>& runs, const std::string& name) {
  return runs.at(name).result.metrics;
}

Outcome nominal_tracking(const Run& r) {
  const MetricsReport& m = r.result.metrics;
  Outcome o;
  o.pass = !r.result.log.aborted && m.n_max <= 0.3 && m.psi_max <= deg2rad(10.0) &&
           m.t_end <= 0.2 && r.seconds <= 60.0;
  o.detail = "nominal: " + fmt("n_max %.3f m, psi_max %.2f deg, t_end %.3f m, runtime %.2f s",
                               m.n_max, rad2deg(m.psi_max), m.t_end, r.seconds);
  return o;
}

Outcome robustness(const MetricsReport& a, const MetricsReport& b) {
  struct Item {
    const char* name;
    double x, y, abs_tol;
  };
  const double deg = deg2rad(0.2);
  const Item items[] = {
      {"t_max", a.t_max, b.t_max, 0.02},       {"t_avg", a.t_avg, b.t_avg, 0.02},
      {"t_end", a.t_end, b.t_end, 0.02},       {"n_max", a.n_max, b.n_max, 0.02},
      {"n_avg", a.n_avg, b.n_avg, 0.02},       {"n_end", a.n_end, b.n_end, 0.02},
      {"psi_max", a.psi_max, b.psi_max, deg},  {"psi_avg", a.psi_avg, b.psi_avg, deg},
      {"psi_end", a.psi_end, b.psi_end, deg},  {"mu_avg", a.mu_avg, b.mu_avg, 0.02},
  };
  Outcome o;
  o.detail = "variation within 25% or absolute tolerance of nominal";
  for (const Item& it : items) {
    const double diff = std::abs(it.x - it.y);
    if (diff > 0.25 * std::abs(it.x) && diff > it.abs_tol) {
      o.pass = false;
      o.detail = std::string("variation: ") + it.name + fmt(" %.4g vs nominal %.4g", it.y, it.x);
    }
  }
  return o;
}

Outcome compensability(const std::map<std::string, Run>& runs) {
  Outcome o;
  const Run& d1 = runs.at("03_d1_fl");
  const Run& d4 = runs.at("04_d4_fr");
  o.pass = d1.result.metrics.all_ok() && d4.result.metrics.all_ok() &&
           !d1.result.log.aborted && !d4.result.log.aborted;

  // The D1 torque pushes its wheel's slip in the torque's direction; the
  // same-side partner wheel should be commanded the opposite way.
  const DegradationEvent& ev = d1.cfg.events.at(0);
  const int partner = side_partner(ev.wheel);
  const double reveal = ev.t_trigger + d1.cfg.t_ddi;
  auto mean_cmd = [&](double t0, double t1) {
    double sum = 0.0;
    int n = 0;
    for (const LogRow& row : d1.result.log.rows) {
      if (row.t + 1e-9 < t0 || row.t > t1 || row.status == "none") continue;
      sum += row.cmd_slip[partner];
      ++n;
    }
    return n ? sum / n : NAN;
  };
  const double mean = mean_cmd(reveal, INFINITY);
  const double lead = mean_cmd(reveal, d1.cfg.maneuver.lead_in);
  o.pass = o.pass && mean * ev.torque < 0.0;
  o.detail = fmt("D1 ok %.0f, D4 ok %.0f, fault torque %.0f N m, ", d1.result.metrics.all_ok(),
                 d4.result.metrics.all_ok(), ev.torque) +
             fmt("partner wheel mean cmd slip %.4f after reveal (%.4f before the sine starts)",
                 mean, lead);
  return o;
}

Outcome longitudinal_ordering(const std::map<std::string, Run>& runs) {
  const double d6 = metrics(runs, "06_d6_fr").n_max;
  const double d5 = metrics(runs, "05_d5_fr").n_max;
  const double d4 = metrics(runs, "04_d4_fr").n_max;
  return {d6 > d5 && d5 > d4, fmt("n_max D6 %.3f > D5 %.3f > D4 %.3f m", d6, d5, d4)};
}

Outcome steering_ordering(const std::map<std::string, Run>& runs) {
  const std::vector<std::string> suite = {"07_d7_fr", "08_d8_fr", "09_d9_fr_0", "10a_d9_fr_p5",
                                          "10b_d9_fr_m5", "11_d9_fr_m30"};
  const double worst = metrics(runs, "11_d9_fr_m30").psi_max;
  bool is_max = true;
  for (const auto& s : suite) is_max = is_max && metrics(runs, s).psi_max <= worst;
  const bool bounded = metrics(runs, "07_d7_fr").all_ok() && metrics(runs, "08_d8_fr").all_ok();
  Outcome o;
  o.pass = is_max && worst > deg2rad(10.0) && bounded;
  o.detail = fmt("psi_max D9@-30 %.2f deg (max of suite %.0f), D7/D8 within thresholds %.0f",
                 rad2deg(worst), is_max, bounded);
  return o;
}

Outcome saturation(const Run& r) {
  const double peak = r.result.metrics.mu_peak;
  return {peak >= 0.75 && peak <= 1.0, fmt("nominal peak tire utilisation %.3f", peak)};
}

// Five-point stencil oracle for the continuous Jacobian.
Outcome jacobian_oracle() {
  const VehicleParams params;
  const TireParams tires;
  std::mt19937 rng(42);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double worst = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    VehicleState x;
    x.s = 20.0 + 10.0 * u(rng);
    x.d = 0.5 * u(rng);
    x.psi = 0.2 * u(rng);
    x.vx = 13.0 + 2.0 * u(rng);
    x.vy = 0.5 * u(rng);
    x.yaw_rate = 0.4 * u(rng);
    for (int w = 0; w < kNumWheels; ++w) {
      x.steer[w] = 0.1 * u(rng);
      x.slip[w] = 0.05 * u(rng);
    }
    const StateVec x0 = x.to_vector();
    const InputVec u0 = InputVec::Zero();
    const double href = 0.1 * u(rng);
    const ContinuousJacobians J = rhs_jacobians(x0, u0, href, params, tires);
    auto f = [&](const StateVec& xs) {
      return prediction_rhs(VehicleState::from_vector(xs), ControlInput{}, href, params, tires);
    };
    for (int i = 0; i < sx::kSize; ++i) {
      const double h = 1e-3 * std::max(1.0, std::abs(x0[i]));
      auto at = [&](double k) {
        StateVec xs = x0;
        xs[i] += k * h;
        return f(xs);
      };
      const StateVec ref = (-at(2.0) + 8.0 * at(1.0) - 8.0 * at(-1.0) + at(-2.0)) / (12.0 * h);
      const double scale = std::max(1.0, ref.cwiseAbs().maxCoeff());
      worst = std::max(worst, (J.A.col(i) - ref).cwiseAbs().maxCoeff() / scale);
    }
  }
  return {worst < 1e-6, fmt("Jacobian max relative deviation %.2e", worst)};
}

double brute_force(const QpProblem& qp) {
  const int n = qp.num_vars();
  int combos = 1;
  for (int i = 0; i < n; ++i) combos *= 3;
  double best = INFINITY;
  for (int c = 0; c < combos; ++c) {
    Eigen::VectorXd z = Eigen::VectorXd::Zero(n);
    std::vector<int> free;
    std::vector<bool> is_free(n, false);
    int code = c;
    for (int i = 0; i < n; ++i) {
      const int s = code % 3;
      code /= 3;
      if (s == 0) z[i] = qp.lower[i];
      if (s == 2) z[i] = qp.upper[i];
      if (s == 1) {
        free.push_back(i);
        is_free[i] = true;
      }
    }
    const int nf = static_cast<int>(free.size());
    if (nf > 0) {
      Eigen::MatrixXd Hff(nf, nf);
      Eigen::VectorXd rhs(nf);
      for (int a = 0; a < nf; ++a) {
        rhs[a] = -qp.g[free[a]];
        for (int j = 0; j < n; ++j) {
          if (!is_free[j]) rhs[a] -= qp.H(free[a], j) * z[j];
        }
        for (int b = 0; b < nf; ++b) Hff(a, b) = qp.H(free[a], free[b]);
      }
      const Eigen::VectorXd zf = Hff.llt().solve(rhs);
      for (int a = 0; a < nf; ++a) z[free[a]] = zf[a];
    }
    bool feasible = true;
    for (int i = 0; i < n; ++i) {
      feasible = feasible && z[i] >= qp.lower[i] - 1e-12 && z[i] <= qp.upper[i] + 1e-12;
    }
    if (feasible) best = std::min(best, qp.objective(z));
  }
  return best;
}

Outcome qp_oracle() {
  std::mt19937 rng(7);
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> ud(0.1, 2.0);
  std::uniform_int_distribution<int> size(1, 10);
  double worst_kkt = 0.0;
  double worst_gap = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const int n = size(rng);
    Eigen::MatrixXd M(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) M(i, j) = nd(rng);
    }
    Eigen::VectorXd g(n), lo(n), hi(n);
    for (int i = 0; i < n; ++i) {
      g[i] = 3.0 * nd(rng);
      lo[i] = -ud(rng);
      hi[i] = ud(rng);
    }
    const QpProblem qp = QpProblem::box(M * M.transpose() + 0.1 * Eigen::MatrixXd::Identity(n, n),
                                        g, lo, hi);
    const QpSolution s = solve_qp(qp);
    const double oracle = brute_force(qp);
    worst_kkt = std::max(worst_kkt, s.kkt.max());
    worst_gap = std::max(worst_gap, std::abs(s.objective - oracle) / (1.0 + std::abs(oracle)));
  }
  return {worst_kkt < 1e-6 && worst_gap < 1e-9,
          fmt("50 random box QPs: max KKT residual %.2e, max objective gap %.2e", worst_kkt,
              worst_gap)};
}

Outcome smooth_abs_bound() {
  double worst = 0.0;
  double worst_x = 0.0;
  for (double x = 1.0; x <= 1e4; x *= 1.001) {
    for (double s : {x, -x}) {
      const double dev = std::abs(smooth_abs(s) - std::abs(s));
      if (dev > worst) {
        worst = dev;
        worst_x = s;
      }
    }
  }
  const bool exact_zero = smooth_abs(0.0) == 0.1273;
  return {exact_zero && worst <= 1e-4,
          fmt("smooth_abs(0) exact %.0f; max |smooth_abs(x) - |x|| over |x| >= 1 is %.3e at x = %g",
              exact_zero, worst, worst_x)};
}

Outcome friction_circle() {
  const TireParams tires;
  double worst = 0.0;
  for (double fz : {500.0, 5000.0, 12000.0}) {
    for (int i = 0; i < 100; ++i) {
      const double lam = -1.0 + 2.0 * i / 99.0;
      for (int j = 0; j < 100; ++j) {
        const double alpha = -std::numbers::pi / 2.0 + std::numbers::pi * j / 99.0;
        const WheelForce f = combined_slip_force(lam, alpha, fz, tires);
        worst = std::max(worst, std::hypot(f.fx, f.fy) / (tires.mu_max * fz));
      }
    }
  }
  return {worst <= 1.0 + 1e-12, fmt("max |F| / (mu Fz) on 100x100 grid %.6f", worst)};
}

Outcome metrics_oracle() {
  RunLog log;
  const int n = 10001;
  for (int i = 0; i < n; ++i) {
    LogRow r;
    r.t = std::numbers::pi * i / (n - 1);
    r.err_t = r.err_n = r.err_psi = std::sin(r.t);
    log.rows.push_back(r);
  }
  const MetricsReport m = compute_metrics(log);
  const double dev = std::max({std::abs(m.t_avg - 2.0 / std::numbers::pi),
                               std::abs(m.n_avg - 2.0 / std::numbers::pi),
                               std::abs(m.psi_avg - 2.0 / std::numbers::pi)});
  return {dev <= 1e-6, fmt("|sin| log average deviation from 2/pi %.2e", dev)};
}

Outcome timing_contract(const std::map<std::string, Run>& runs) {
  Outcome o;
  int checked = 0;
  for (const auto& [name, r] : runs) {
    if (r.cfg.events.empty()) continue;
    ++checked;
    double reveal = INFINITY;
    for (const auto& e : r.cfg.events) reveal = std::min(reveal, e.t_trigger + r.cfg.t_ddi);
    const double expected = std::ceil(reveal / r.cfg.ts - 1e-9) * r.cfg.ts;
    const RunLog& log = r.result.log;
    std::optional<double> first_row;
    for (const LogRow& row : log.rows) {
      if (row.reconfigured) {
        first_row = row.t;
        break;
      }
    }
    const bool ok = log.first_reconfig_time && first_row &&
                    std::abs(*log.first_reconfig_time - expected) < 1e-9 &&
                    std::abs(*first_row - expected) < 1e-9 && std::abs(expected - 1.2) < 1e-9;
    if (!ok) {
      o.pass = false;
      o.detail += name + fmt(" reconfigured at %.3f s, expected %.3f s; ",
                             log.first_reconfig_time.value_or(-1.0), expected);
    }
  }
  if (o.pass) o.detail = fmt("%.0f degradation scenarios reconfigure at 1.200 s", checked);
  if (checked == 0) o = {false, "no degradation scenarios found"};
  return o;
}

}  // namespace

int main() {
  std::map<std::string, Run> runs;
  try {
    runs = run_all();
  } catch (const std::exception& e) {
    std::printf("FAIL setup: %s\n", e.what());
    return 1;
  }
  for (const auto& [name, r] : runs) {
    if (r.result.log.aborted) std::printf("note: %s aborted: %s\n", name.c_str(), r.result.log.error.c_str());
  }

  auto guarded = [](const char* id, auto&& fn) {
    try {
      report(id, fn());
    } catch (const std::exception& e) {
      report(id, {false, std::string("exception: ") + e.what()});
    }
  };
  guarded("1", [&] { return nominal_tracking(runs.at("01_nominal")); });
  guarded("2", [&] {
    return robustness(metrics(runs, "01_nominal"), metrics(runs, "02_variation"));
  });
  guarded("3", [&] { return compensability(runs); });
  guarded("4", [&] { return longitudinal_ordering(runs); });
  guarded("5", [&] { return steering_ordering(runs); });
  guarded("6", [&] { return saturation(runs.at("01_nominal")); });
  guarded("7a", jacobian_oracle);
  guarded("7b", qp_oracle);
  guarded("7c", smooth_abs_bound);
  guarded("7d", friction_circle);
  guarded("7e", metrics_oracle);
  guarded("8", [&] { return timing_contract(runs); });

  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
