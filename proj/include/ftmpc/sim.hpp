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

// Closed-loop harness: reference generation, adaptive MPC, wheel slip
// control, fault injection and the plant, plus the tracking metrics.

#ifndef FTMPC_SIM_HPP_
#define FTMPC_SIM_HPP_

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ftmpc/degradation.hpp"
#include "ftmpc/dynamics.hpp"
#include "ftmpc/linearize.hpp"
#include "ftmpc/mpc.hpp"
#include "ftmpc/plant.hpp"
#include "ftmpc/trajectory.hpp"
#include "ftmpc/wheelslip.hpp"

namespace ftmpc {

struct SafetyThresholds {
  double tangential = 1.0;           // [m]
  double normal = 0.3;               // [m]
  double heading = deg2rad(10.0);    // [rad]
};

// Plant deviations from the controller's model (robustness runs).
struct PlantOverrides {
  double mass_scale = 1.0;
  double inertia_scale = 1.0;
  double cg_shift_rear = 0.0;  // [m]

  VehicleParams apply(VehicleParams p) const {
    p.mass *= mass_scale;
    p.yaw_inertia *= inertia_scale;
    p.lf += cg_shift_rear;
    p.lr -= cg_shift_rear;
    return p;
  }

  bool is_identity() const {
    return mass_scale == 1.0 && inertia_scale == 1.0 && cg_shift_rear == 0.0;
  }
};

struct SimConfig {
  std::string name = "nominal";
  std::string description = "degradation-free";
  double ts = 0.05;
  double plant_dt = 0.001;
  double t_p = 1.0;
  double t_c = 0.25;
  double t_ddi = 0.2;
  double duration = 6.0;
  double initial_speed = 12.0;

  VehicleParams vehicle;
  PlantOverrides plant;
  bool load_transfer = true;
  TireParams tires;
  ActuatorLimits limits;
  SineWithDwell maneuver;
  MpcConfig mpc;
  SlipControllerGains slip_gains;
  SafetyThresholds thresholds;
  std::vector<DegradationEvent> events;

  int steps_per_sample() const { return static_cast<int>(std::lround(ts / plant_dt)); }
  int num_samples() const { return static_cast<int>(std::lround(duration / ts)); }

  // MPC configuration implied by the timing and actuator limits.
  MpcConfig effective_mpc() const {
    MpcConfig m = mpc;
    m.ts = ts;
    m.n_p = static_cast<int>(std::lround(t_p / ts));
    m.n_c = static_cast<int>(std::lround(t_c / ts));
    m.output_bounds = MpcConfig::default_output_bounds(limits);
    m.input_bounds = MpcConfig::default_input_bounds(limits);
    return m;
  }

  SineWithDwell effective_maneuver() const {
    SineWithDwell m = maneuver;
    m.duration = std::max(m.duration, duration + t_p + 1.0);
    m.mu_max = tires.mu_max;
    return m;
  }

  void validate() const {
    if (!(ts > 0.0) || !(plant_dt > 0.0) || plant_dt > kMaxPlantStep) {
      throw std::invalid_argument("SimConfig: invalid time steps");
    }
    if (std::abs(steps_per_sample() * plant_dt - ts) > 1e-9) {
      throw std::invalid_argument("SimConfig: plant step must divide T_S");
    }
    if (t_c > t_p) throw std::invalid_argument("SimConfig: T_C must not exceed T_P");
    if (t_ddi < 0.0) throw std::invalid_argument("SimConfig: T_DDI must be non-negative");
    if (!(duration > 0.0)) throw std::invalid_argument("SimConfig: duration must be positive");
    const double maneuver_end = maneuver.lead_in + maneuver.maneuver_time();
    if (duration < maneuver_end) {
      throw std::invalid_argument("SimConfig: duration shorter than the maneuver");
    }
    vehicle.validate();
    plant.apply(vehicle).validate();
    tires.validate();
    effective_mpc().validate();
    for (const auto& e : events) e.validate();
  }
};

// One row per controller sample.
struct LogRow {
  double t = 0.0;
  double X = 0.0, Y = 0.0, psi = 0.0;
  double vx = 0.0, vy = 0.0, yaw_rate = 0.0;
  double s = 0.0, d = 0.0;
  double s_ref = 0.0, psi_ref = 0.0, v_ref = 0.0;
  double err_t = 0.0, err_n = 0.0, err_psi = 0.0;  // signed
  WheelArray steer{}, slip{}, slip_angle{}, omega{}, fz{}, utilization{};
  WheelArray cmd_steer_rate{}, cmd_slip_rate{}, cmd_slip{}, torque{};
  std::string status = "none";
  int iterations = 0;
  double objective = 0.0;
  bool reconfigured = false;  // directives applied at this sample
};

// One row per plant step: realised actuation after fault injection.
struct ActuationRow {
  double t = 0.0;
  WheelArray torque{};
  WheelArray steer_rate{};
};

struct RunLog {
  std::vector<LogRow> rows;
  std::vector<ActuationRow> actuation;
  bool aborted = false;
  std::string error;
  std::optional<double> first_reconfig_time;
  int solver_flags = 0;  // non-optimal solves
};

struct MetricsReport {
  double t_max = 0.0, t_avg = 0.0, t_end = 0.0;
  double n_max = 0.0, n_avg = 0.0, n_end = 0.0;
  double psi_max = 0.0, psi_avg = 0.0, psi_end = 0.0;  // [rad]
  double mu_avg = 0.0;
  double mu_peak = 0.0;
  bool tangential_ok = true;
  bool normal_ok = true;
  bool heading_ok = true;

  bool all_ok() const { return tangential_ok && normal_ok && heading_ok; }
};

class MetricsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

struct SeriesStats {
  double max = 0.0;
  double avg = 0.0;
  double end = 0.0;
};

// max, trapezoidal time average and final value of |x(t)|.
inline SeriesStats series_stats(const std::vector<double>& t, const std::vector<double>& x) {
  SeriesStats s;
  const std::size_t n = t.size();
  for (std::size_t i = 0; i < n; ++i) s.max = std::max(s.max, std::abs(x[i]));
  s.end = std::abs(x.back());
  const double T = t.back() - t.front();
  if (n < 2 || !(T > 0.0)) {
    s.avg = std::abs(x.front());
    return s;
  }
  double integral = 0.0;
  for (std::size_t i = 1; i < n; ++i) {
    integral += 0.5 * (std::abs(x[i]) + std::abs(x[i - 1])) * (t[i] - t[i - 1]);
  }
  s.avg = integral / T;
  return s;
}

}  // namespace detail

inline MetricsReport compute_metrics(const RunLog& log, const SafetyThresholds& thr = {}) {
  if (log.rows.empty()) throw MetricsError("compute_metrics: empty log");
  std::vector<double> t, et, en, ep, mu;
  double mu_peak = 0.0;
  for (const LogRow& r : log.rows) {
    t.push_back(r.t);
    et.push_back(r.err_t);
    en.push_back(r.err_n);
    ep.push_back(r.err_psi);
    double m = 0.0;
    for (double u : r.utilization) {
      m += u;
      mu_peak = std::max(mu_peak, u);
    }
    mu.push_back(m / kNumWheels);
  }
  const auto st = detail::series_stats(t, et);
  const auto sn = detail::series_stats(t, en);
  const auto sp = detail::series_stats(t, ep);
  const auto sm = detail::series_stats(t, mu);

  MetricsReport rep;
  rep.t_max = st.max;
  rep.t_avg = st.avg;
  rep.t_end = st.end;
  rep.n_max = sn.max;
  rep.n_avg = sn.avg;
  rep.n_end = sn.end;
  rep.psi_max = sp.max;
  rep.psi_avg = sp.avg;
  rep.psi_end = sp.end;
  rep.mu_avg = sm.avg;
  rep.mu_peak = mu_peak;
  rep.tangential_ok = rep.t_max <= thr.tangential;
  rep.normal_ok = rep.n_max <= thr.normal;
  rep.heading_ok = rep.psi_max <= thr.heading;

  const double slack = 1e-12;
  for (const auto* s : {&st, &sn, &sp}) {
    if (s->max + slack < s->avg || s->max + slack < s->end || s->avg < 0.0) {
      throw MetricsError("compute_metrics: max/avg/end ordering violated");
    }
  }
  return rep;
}

// Utilisation of the friction budget at one wheel; unloaded wheels count as 0.
inline double tire_utilization(double fx, double fy, double fz, double mu_max) {
  if (fz < 1.0) return 0.0;
  return std::hypot(fx, fy) / (mu_max * fz);
}

struct RunResult {
  RunLog log;
  MetricsReport metrics;
  ReferenceTrajectory trajectory;
};

inline RunResult run_scenario(const SimConfig& cfg) {
  cfg.validate();
  RunResult result;
  result.trajectory = build_sine_with_dwell(cfg.effective_maneuver());
  const ReferenceTrajectory& traj = result.trajectory;
  RunLog& log = result.log;

  const VehicleParams& ctrl_params = cfg.vehicle;
  const VehicleParams plant_params = cfg.plant.apply(cfg.vehicle);
  const TireParams& tires = cfg.tires;
  PlantConfig plant_cfg;
  plant_cfg.load_transfer = cfg.load_transfer;

  const MpcConfig nominal_mpc = cfg.effective_mpc();
  MpcConfig mpc = nominal_mpc;
  ReconfigDirective directive;
  DdiEmulator ddi(cfg.events, cfg.t_ddi);
  FaultInjector injector(cfg.events);

  PlantState plant = rolling_plant_state(traj.X[0], traj.Y[0], traj.psi[0], cfg.initial_speed,
                                         plant_params);
  SlipControllerState slip_ctrl;
  slip_ctrl.gains = cfg.slip_gains;
  ControlInput u_prev;
  std::optional<Eigen::VectorXd> warm;
  std::size_t hint = 0;
  const int inner = cfg.steps_per_sample();
  const double dt = cfg.plant_dt;
  WheelArray applied_torque{};
  WheelArray prev_target{};
  bool have_target = false;

  for (int k = 0; k <= cfg.num_samples(); ++k) {
    const double t = k * cfg.ts;
    LogRow row;
    row.t = t;
    try {
      const FrenetPose fp = project_to_frenet(plant.X, plant.Y, plant.psi, traj, hint);
      hint = fp.index;
      const PlantTireState pts = plant_tire_state(plant, plant_params, tires);

      row.X = plant.X;
      row.Y = plant.Y;
      row.psi = plant.psi;
      row.vx = plant.vx;
      row.vy = plant.vy;
      row.yaw_rate = plant.yaw_rate;
      row.s = fp.s;
      row.d = fp.d;
      row.s_ref = traj.s_at_time(t);
      row.psi_ref = traj.heading_at_s(row.s_ref);
      row.v_ref = traj.speed_at_s(row.s_ref);
      row.err_t = row.s - row.s_ref;
      row.err_n = row.d;
      row.err_psi = plant.psi - row.psi_ref;
      row.steer = plant.steer;
      row.slip = pts.slips.slip;
      row.slip_angle = pts.slips.slip_angle;
      row.omega = plant.omega;
      row.fz = plant.fz;
      for (int w = 0; w < kNumWheels; ++w) {
        row.utilization[w] = tire_utilization(pts.forces.fx_wheel[w], pts.forces.fy_wheel[w],
                                              plant.fz[w], tires.mu_max);
      }
      row.torque = applied_torque;

      if (k == cfg.num_samples()) {
        log.rows.push_back(row);
        break;
      }

      const auto revealed = ddi.poll(t);
      if (!revealed.empty()) {
        for (const auto& ev : revealed) directive.merge(directives_for(ev));
        mpc = apply_directive(nominal_mpc, directive);
        row.reconfigured = true;
        if (!log.first_reconfig_time) log.first_reconfig_time = t;
      }

      VehicleState xhat;
      xhat.s = fp.s;
      xhat.d = fp.d;
      xhat.psi = plant.psi;
      xhat.vx = plant.vx;
      xhat.vy = plant.vy;
      xhat.yaw_rate = plant.yaw_rate;
      xhat.steer = plant.steer;
      xhat.slip = pts.slips.slip;

      LinearizedModel model =
          linearize_at(xhat, u_prev, fp.ref_heading, cfg.ts, ctrl_params, tires);
      model = apply_reconfiguration(std::move(model), directive);
      ReferenceSample refs = reference_window(traj, t, mpc.n_p, cfg.ts);
      preview_path_heading(refs, traj, fp.s, plant.vx, cfg.ts);

      auto [u, sol] = control_step(model, refs, u_prev, mpc, warm);
      warm = shift_moves(sol.moves, mpc.n_c);
      row.status = to_string(sol.status);
      row.iterations = sol.iterations;
      row.objective = sol.objective;
      if (sol.status != QpStatus::kOptimal) ++log.solver_flags;
      row.cmd_steer_rate = u.steer_rate;
      row.cmd_slip_rate = u.slip_rate;

      // Slip targets ramp from the measured slip at the commanded rate.
      const WheelArray base = pts.slips.slip;
      if (!have_target) {
        prev_target = base;
        have_target = true;
      }
      for (int i = 0; i < inner; ++i) {
        const double tt = t + i * dt;
        WheelArray target{};
        for (int w = 0; w < kNumWheels; ++w) {
          target[w] = std::clamp(base[w] + u.slip_rate[w] * (i + 1) * dt, -1.0, 1.0);
        }
        if (i + 1 == inner) row.cmd_slip = target;
        injector.shape_slip_targets(target, prev_target, tt, dt);
        prev_target = target;

        const WheelArray measured = plant_tire_state(plant, plant_params, tires).slips.slip;
        PlantActuation act;
        act.torque = slip_to_torque(target, measured, slip_ctrl, dt, cfg.limits.torque);
        act.steer_rate = u.steer_rate;
        injector.apply(act, plant, tt, dt, cfg.limits.torque, plant_cfg.steer_rate);
        log.actuation.push_back({tt, act.torque, act.steer_rate});
        applied_torque = act.torque;
        plant = plant_step(plant, act, dt, plant_params, tires, plant_cfg);
      }
      u_prev = u;
      log.rows.push_back(row);
    } catch (const std::exception& e) {
      log.rows.push_back(row);
      log.aborted = true;
      log.error = e.what();
      break;
    }
  }
  result.metrics = compute_metrics(log, cfg.thresholds);
  return result;
}

}  // namespace ftmpc

#endif  // FTMPC_SIM_HPP_
