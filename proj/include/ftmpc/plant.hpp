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

// Simulation plant: double-track body with wheel spin dynamics and
// quasi-static roll/pitch load transfer, integrated with fixed-step RK4.

#ifndef FTMPC_PLANT_HPP_
#define FTMPC_PLANT_HPP_

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

#include "ftmpc/dynamics.hpp"

namespace ftmpc {

class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct PlantState {
  double X = 0.0;
  double Y = 0.0;
  double psi = 0.0;
  double vx = 0.0;
  double vy = 0.0;
  double yaw_rate = 0.0;
  WheelArray steer{};
  WheelArray omega{};  // wheel spin [rad/s]
  WheelArray fz{};     // vertical loads [N]

  bool is_finite() const {
    auto ok = [](const WheelArray& a) {
      for (double v : a) {
        if (!std::isfinite(v)) return false;
      }
      return true;
    };
    return std::isfinite(X) && std::isfinite(Y) && std::isfinite(psi) && std::isfinite(vx) &&
           std::isfinite(vy) && std::isfinite(yaw_rate) && ok(steer) && ok(omega) && ok(fz);
  }
};

// Free-rolling straight-line state at the given pose and speed.
inline PlantState rolling_plant_state(double X, double Y, double psi, double speed,
                                      const VehicleParams& params) {
  PlantState st;
  st.X = X;
  st.Y = Y;
  st.psi = psi;
  st.vx = speed;
  for (int w = 0; w < kNumWheels; ++w) st.omega[w] = speed / params.wheel_radius[w];
  st.fz = static_wheel_loads(params);
  return st;
}

struct PlantActuation {
  WheelArray torque{};      // drive/brake torque [N m]
  WheelArray steer_rate{};  // [rad/s]
  // A held brake keeps a stopped wheel at zero spin instead of reversing it.
  std::array<bool, kNumWheels> brake_hold{};
};

struct PlantConfig {
  bool load_transfer = true;
  WheelRanges steer_angle = ActuatorLimits{}.steer_angle;  // mechanical stops
  WheelRanges steer_rate = ActuatorLimits{}.steer_rate;    // motor rate limit
};

// Quasi-static load distribution for body accelerations (ax, ay). The total
// always equals m g; a lifted wheel hands its deficit to the axle partner.
inline WheelArray quasi_static_loads(double ax, double ay, const VehicleParams& params) {
  const double m = params.mass;
  const double h = params.cg_height;
  const double l = params.wheelbase();
  const double front = m * (kGravity * params.lr - ax * h) / l;
  const double rear = m * (kGravity * params.lf + ax * h) / l;
  const double df = m * ay * h * (params.lr / l) / params.track_front;
  const double dr = m * ay * h * (params.lf / l) / params.track_rear;
  WheelArray fz{front / 2.0 - df, front / 2.0 + df, rear / 2.0 - dr, rear / 2.0 + dr};
  for (int w = 0; w < kNumWheels; w += 2) {
    if (fz[w] < 0.0) {
      fz[w + 1] += fz[w];
      fz[w] = 0.0;
    } else if (fz[w + 1] < 0.0) {
      fz[w] += fz[w + 1];
      fz[w + 1] = 0.0;
    }
  }
  return fz;
}

struct PlantTireState {
  WheelVelocities velocities;
  SlipQuantities slips;
  TireForces forces;
};

inline PlantTireState plant_tire_state(const PlantState& st, const VehicleParams& params,
                                       const TireParams& tires) {
  PlantTireState out;
  out.velocities = wheel_velocities(st.vx, st.vy, st.yaw_rate, st.steer, params);
  out.slips = slip_quantities(out.velocities, st.omega, params);
  out.forces = tire_forces(out.slips.slip, out.slips.slip_angle, st.fz, st.steer, tires);
  return out;
}

namespace detail {

// X, Y, psi, vx, vy, r, steer[4], omega[4]
using PlantVec = Eigen::Matrix<double, 14, 1>;

inline PlantVec pack(const PlantState& st) {
  PlantVec v;
  v << st.X, st.Y, st.psi, st.vx, st.vy, st.yaw_rate, st.steer[0], st.steer[1], st.steer[2],
      st.steer[3], st.omega[0], st.omega[1], st.omega[2], st.omega[3];
  return v;
}

inline PlantState unpack(const PlantVec& v, const WheelArray& fz) {
  PlantState st;
  st.X = v[0];
  st.Y = v[1];
  st.psi = v[2];
  st.vx = v[3];
  st.vy = v[4];
  st.yaw_rate = v[5];
  for (int w = 0; w < kNumWheels; ++w) {
    st.steer[w] = v[6 + w];
    st.omega[w] = v[10 + w];
  }
  st.fz = fz;
  return st;
}

inline double saturated_steer_rate(double angle, double cmd, const Range& angle_range,
                                   const Range& rate_range) {
  const double rate = rate_range.clamp(cmd);
  if (!angle_range.is_void) {
    if (angle >= angle_range.hi && rate > 0.0) return 0.0;
    if (angle <= angle_range.lo && rate < 0.0) return 0.0;
  }
  return rate;
}

inline PlantVec plant_rhs(const PlantVec& v, const WheelArray& fz, const PlantActuation& act,
                          const VehicleParams& params, const TireParams& tires,
                          const PlantConfig& cfg) {
  const PlantState st = unpack(v, fz);
  const PlantTireState ts = plant_tire_state(st, params, tires);
  const BodyAccel acc = body_derivatives(st.vx, st.vy, st.yaw_rate, st.steer, ts.forces, params);
  const double c = std::cos(st.psi);
  const double s = std::sin(st.psi);
  PlantVec dv;
  dv[0] = st.vx * c - st.vy * s;
  dv[1] = st.vx * s + st.vy * c;
  dv[2] = st.yaw_rate;
  dv[3] = acc.vx_dot;
  dv[4] = acc.vy_dot;
  dv[5] = acc.yaw_accel;
  for (int w = 0; w < kNumWheels; ++w) {
    dv[6 + w] = saturated_steer_rate(st.steer[w], act.steer_rate[w], cfg.steer_angle[w],
                                     cfg.steer_rate[w]);
    double spin = (act.torque[w] - params.wheel_radius[w] * ts.forces.fx_wheel[w]) /
                  params.wheel_inertia;
    if (act.brake_hold[w] && st.omega[w] <= 0.0 && spin < 0.0) spin = 0.0;
    dv[10 + w] = spin;
  }
  return dv;
}

}  // namespace detail

inline constexpr double kMaxPlantStep = 0.005;

// Advances the plant by dt with torques and steering rates held constant.
inline PlantState plant_step(const PlantState& state, const PlantActuation& act, double dt,
                             const VehicleParams& params, const TireParams& tires,
                             const PlantConfig& cfg = {}) {
  if (!(dt > 0.0) || dt > kMaxPlantStep) {
    throw std::invalid_argument("plant_step: dt must be in (0, 5 ms]");
  }
  using detail::PlantVec;
  const WheelArray& fz = state.fz;
  const PlantVec x0 = detail::pack(state);
  const PlantVec k1 = detail::plant_rhs(x0, fz, act, params, tires, cfg);
  const PlantVec k2 = detail::plant_rhs(x0 + 0.5 * dt * k1, fz, act, params, tires, cfg);
  const PlantVec k3 = detail::plant_rhs(x0 + 0.5 * dt * k2, fz, act, params, tires, cfg);
  const PlantVec k4 = detail::plant_rhs(x0 + dt * k3, fz, act, params, tires, cfg);
  PlantState next = detail::unpack(x0 + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4), fz);

  for (int w = 0; w < kNumWheels; ++w) {
    next.steer[w] = cfg.steer_angle[w].clamp(next.steer[w]);
    if (act.brake_hold[w] && next.omega[w] < 0.0) next.omega[w] = 0.0;
  }

  if (cfg.load_transfer) {
    const TireForces f = plant_tire_state(next, params, tires).forces;
    double fx = 0.0;
    double fy = 0.0;
    for (int w = 0; w < kNumWheels; ++w) {
      fx += f.fx_vehicle[w];
      fy += f.fy_vehicle[w];
    }
    next.fz = quasi_static_loads(fx / params.mass, fy / params.mass, params);
  } else {
    next.fz = state.fz;
  }

  if (!next.is_finite()) {
    throw DivergenceError("plant_step: non-finite plant state");
  }
  return next;
}

// Translational plus rotational kinetic energy including wheel spin.
inline double kinetic_energy(const PlantState& st, const VehicleParams& params) {
  double e = 0.5 * params.mass * (st.vx * st.vx + st.vy * st.vy) +
             0.5 * params.yaw_inertia * st.yaw_rate * st.yaw_rate;
  for (double om : st.omega) e += 0.5 * params.wheel_inertia * om * om;
  return e;
}

}  // namespace ftmpc

#endif  // FTMPC_PLANT_HPP_
