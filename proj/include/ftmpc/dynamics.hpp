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

#ifndef FTMPC_DYNAMICS_HPP_
#define FTMPC_DYNAMICS_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace ftmpc {

inline constexpr int kNumWheels = 4;
inline constexpr double kGravity = 9.81;

// Wheel order used by every per-wheel array in the library.
enum Wheel : int { kFrontLeft = 0, kFrontRight = 1, kRearLeft = 2, kRearRight = 3 };

using WheelArray = std::array<double, kNumWheels>;

inline const char* wheel_name(int w) {
  static constexpr const char* kNames[] = {"fl", "fr", "rl", "rr"};
  return (w >= 0 && w < kNumWheels) ? kNames[w] : "??";
}

inline int wheel_from_name(const std::string& name) {
  for (int w = 0; w < kNumWheels; ++w) {
    if (name == wheel_name(w)) return w;
  }
  throw std::invalid_argument("unknown wheel '" + name + "' (expected fl, fr, rl or rr)");
}

inline bool is_front(int w) { return w == kFrontLeft || w == kFrontRight; }

// The other wheel on the same axle.
inline int axle_partner(int w) { return w ^ 1; }

// The other wheel on the same side of the vehicle.
inline int side_partner(int w) { return (w + 2) % kNumWheels; }

inline constexpr double deg2rad(double deg) { return deg * std::numbers::pi / 180.0; }
inline constexpr double rad2deg(double rad) { return rad * 180.0 / std::numbers::pi; }

// ---------------------------------------------------------------------------
// Parameters
// ---------------------------------------------------------------------------

struct VehicleParams {
  double mass = 2200.0;          // [kg]
  double yaw_inertia = 2000.0;   // [kg m^2]
  double lf = 1.36;              // CG to front axle [m]
  double lr = 1.36;              // CG to rear axle [m]
  double track_front = 1.75;     // [m]
  double track_rear = 1.75;      // [m]
  WheelArray wheel_radius{0.28, 0.28, 0.28, 0.28};  // [m]
  double wheel_inertia = 2.0;    // spin inertia per wheel [kg m^2]
  double cg_height = 0.3;        // [m]

  double wheelbase() const { return lf + lr; }

  // Lateral lever arm of each wheel centre (positive to the left).
  WheelArray lateral_arm() const {
    return {track_front / 2.0, -track_front / 2.0, track_rear / 2.0, -track_rear / 2.0};
  }

  // Longitudinal lever arm of each wheel centre (positive forward).
  WheelArray longitudinal_arm() const { return {lf, lf, -lr, -lr}; }

  void validate() const {
    auto positive = [](double v, const char* what) {
      if (!(v > 0.0) || !std::isfinite(v)) {
        throw std::invalid_argument(std::string("VehicleParams: ") + what + " must be positive");
      }
    };
    positive(mass, "mass");
    positive(yaw_inertia, "yaw_inertia");
    positive(lf, "lf");
    positive(lr, "lr");
    positive(track_front, "track_front");
    positive(track_rear, "track_rear");
    positive(wheel_inertia, "wheel_inertia");
    positive(cg_height, "cg_height");
    for (double r : wheel_radius) positive(r, "wheel_radius");
  }
};

// Closed interval. A void range places no bound on the quantity.
struct Range {
  double lo = 0.0;
  double hi = 0.0;
  bool is_void = false;

  static Range symmetric(double half) { return {-half, half, false}; }
  static Range none() { return {0.0, 0.0, true}; }

  bool contains(double v) const { return is_void || (v >= lo && v <= hi); }
  double clamp(double v) const { return is_void ? v : std::clamp(v, lo, hi); }

  friend bool operator==(const Range&, const Range&) = default;
};

using WheelRanges = std::array<Range, kNumWheels>;

inline WheelRanges uniform_ranges(Range r) { return {r, r, r, r}; }

struct ActuatorLimits {
  WheelRanges steer_angle = uniform_ranges(Range::symmetric(deg2rad(30.0)));   // [rad]
  WheelRanges steer_rate = uniform_ranges(Range::symmetric(deg2rad(120.0)));   // [rad/s]
  WheelRanges torque = uniform_ranges(Range::symmetric(2000.0));               // [N m]
  WheelRanges slip = uniform_ranges(Range::symmetric(0.12));                   // [-]
  WheelRanges slip_angle = uniform_ranges(Range::symmetric(0.2));              // [rad]
  WheelRanges slip_rate = uniform_ranges(Range::symmetric(2.0));               // [1/s]

  friend bool operator==(const ActuatorLimits&, const ActuatorLimits&) = default;
};

// One channel of the Magic Formula: y = D sin(C atan(Bx - E(Bx - atan(Bx)))).
struct MagicFormula {
  double B = 10.0;
  double C = 1.9;
  double E = 0.97;

  double shape(double x) const {
    const double bx = B * x;
    return std::sin(C * std::atan(bx - E * (bx - std::atan(bx))));
  }

  // Slip at which shape() reaches its maximum of one. Requires C > 1, E < 1.
  double peak_slip() const {
    const double target = std::tan(std::numbers::pi / (2.0 * C));
    auto phi = [&](double x) {
      const double bx = B * x;
      return bx - E * (bx - std::atan(bx));
    };
    double lo = 0.0;
    double hi = 1.0;
    while (phi(hi) < target) hi *= 2.0;
    for (int i = 0; i < 200; ++i) {
      const double mid = 0.5 * (lo + hi);
      (phi(mid) < target ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  }
};

struct TireParams {
  MagicFormula longitudinal{10.0, 1.9, 0.97};
  MagicFormula lateral{8.0, 1.3, -1.0};
  double mu_max = 1.0;
  double nominal_load = 2200.0 * kGravity / 4.0;  // [N]

  // Normalisation slips for the combined-slip model; refreshed by calibrate().
  double longitudinal_peak = MagicFormula{10.0, 1.9, 0.97}.peak_slip();
  double lateral_peak = MagicFormula{8.0, 1.3, -1.0}.peak_slip();

  void calibrate() {
    longitudinal_peak = longitudinal.peak_slip();
    lateral_peak = lateral.peak_slip();
  }

  void validate() const {
    for (const MagicFormula* mf : {&longitudinal, &lateral}) {
      if (!(mf->B > 0.0) || !(mf->C > 1.0) || !(mf->E < 1.0)) {
        throw std::invalid_argument("TireParams: need B > 0, C > 1 and E < 1");
      }
    }
    if (!(mu_max > 0.0)) throw std::invalid_argument("TireParams: mu_max must be positive");
    if (!(longitudinal_peak > 0.0) || !(lateral_peak > 0.0)) {
      throw std::invalid_argument("TireParams: peaks not calibrated");
    }
  }
};

// ---------------------------------------------------------------------------
// State, input and output vectors of the prediction model
// ---------------------------------------------------------------------------

namespace sx {
inline constexpr int kS = 0;
inline constexpr int kD = 1;
inline constexpr int kPsi = 2;
inline constexpr int kVx = 3;
inline constexpr int kVy = 4;
inline constexpr int kYawRate = 5;
inline constexpr int kSteer = 6;   // + wheel
inline constexpr int kSlip = 10;   // + wheel
inline constexpr int kSize = 14;
}  // namespace sx

namespace ux {
inline constexpr int kSteerRate = 0;  // + wheel
inline constexpr int kSlipRate = 4;   // + wheel
inline constexpr int kSize = 8;
}  // namespace ux

namespace yx {
inline constexpr int kS = 0;
inline constexpr int kD = 1;
inline constexpr int kPsi = 2;
inline constexpr int kVx = 3;
inline constexpr int kBeta = 4;
inline constexpr int kYawRate = 5;
inline constexpr int kSteer = 6;       // + wheel
inline constexpr int kSlip = 10;       // + wheel
inline constexpr int kSlipAngle = 14;  // + wheel
inline constexpr int kSteerDiffFront = 18;
inline constexpr int kSteerDiffRear = 19;
inline constexpr int kSize = 20;
}  // namespace yx

using StateVec = Eigen::Matrix<double, sx::kSize, 1>;
using InputVec = Eigen::Matrix<double, ux::kSize, 1>;
using OutputVec = Eigen::Matrix<double, yx::kSize, 1>;

struct VehicleState {
  double s = 0.0;         // path distance [m]
  double d = 0.0;         // lateral deviation, positive left [m]
  double psi = 0.0;       // yaw angle [rad]
  double vx = 0.0;        // body longitudinal velocity [m/s]
  double vy = 0.0;        // body lateral velocity [m/s]
  double yaw_rate = 0.0;  // [rad/s]
  WheelArray steer{};     // [rad]
  WheelArray slip{};      // longitudinal slip [-]

  StateVec to_vector() const {
    StateVec x;
    x << s, d, psi, vx, vy, yaw_rate, steer[0], steer[1], steer[2], steer[3], slip[0], slip[1],
        slip[2], slip[3];
    return x;
  }

  static VehicleState from_vector(const StateVec& x) {
    VehicleState st;
    st.s = x[sx::kS];
    st.d = x[sx::kD];
    st.psi = x[sx::kPsi];
    st.vx = x[sx::kVx];
    st.vy = x[sx::kVy];
    st.yaw_rate = x[sx::kYawRate];
    for (int w = 0; w < kNumWheels; ++w) {
      st.steer[w] = x[sx::kSteer + w];
      st.slip[w] = x[sx::kSlip + w];
    }
    return st;
  }
};

struct ControlInput {
  WheelArray steer_rate{};  // [rad/s]
  WheelArray slip_rate{};   // [1/s]

  InputVec to_vector() const {
    InputVec u;
    for (int w = 0; w < kNumWheels; ++w) {
      u[ux::kSteerRate + w] = steer_rate[w];
      u[ux::kSlipRate + w] = slip_rate[w];
    }
    return u;
  }

  static ControlInput from_vector(const InputVec& u) {
    ControlInput c;
    for (int w = 0; w < kNumWheels; ++w) {
      c.steer_rate[w] = u[ux::kSteerRate + w];
      c.slip_rate[w] = u[ux::kSlipRate + w];
    }
    return c;
  }

  friend bool operator==(const ControlInput&, const ControlInput&) = default;
};

// ---------------------------------------------------------------------------
// Kinematics
// ---------------------------------------------------------------------------

inline constexpr double kSmoothAbsSlope = 5.0;
inline constexpr double kSmoothAbsOffset = 0.1273;

// Differentiable, strictly positive stand-in for |x|.
inline double smooth_abs(double x, double slope = kSmoothAbsSlope,
                         double offset = kSmoothAbsOffset) {
  return x * (2.0 / std::numbers::pi) * std::atan(slope * x) + offset;
}

struct WheelVelocities {
  WheelArray vx_vehicle{};
  WheelArray vy_vehicle{};
  WheelArray vx_wheel{};
  WheelArray vy_wheel{};
};

inline WheelVelocities wheel_velocities(double vx, double vy, double yaw_rate,
                                        const WheelArray& steer, const VehicleParams& params) {
  const WheelArray p = params.lateral_arm();
  const WheelArray q = params.longitudinal_arm();
  WheelVelocities out;
  for (int w = 0; w < kNumWheels; ++w) {
    const double vxv = vx - p[w] * yaw_rate;
    const double vyv = vy + q[w] * yaw_rate;
    const double c = std::cos(steer[w]);
    const double s = std::sin(steer[w]);
    out.vx_vehicle[w] = vxv;
    out.vy_vehicle[w] = vyv;
    out.vx_wheel[w] = vxv * c + vyv * s;
    out.vy_wheel[w] = vyv * c - vxv * s;
  }
  return out;
}

inline WheelVelocities wheel_velocities(const VehicleState& state, const VehicleParams& params) {
  return wheel_velocities(state.vx, state.vy, state.yaw_rate, state.steer, params);
}

inline double slip_angle(double vx_wheel, double vy_wheel) {
  return std::atan(vy_wheel / smooth_abs(vx_wheel));
}

inline double longitudinal_slip(double vx_wheel, double circumferential_speed) {
  const double denom = std::max(smooth_abs(vx_wheel), smooth_abs(circumferential_speed));
  return std::clamp((circumferential_speed - vx_wheel) / denom, -1.0, 1.0);
}

struct SlipQuantities {
  WheelArray slip{};
  WheelArray slip_angle{};
};

inline SlipQuantities slip_quantities(const WheelVelocities& vel, const WheelArray& omega,
                                      const VehicleParams& params) {
  SlipQuantities out;
  for (int w = 0; w < kNumWheels; ++w) {
    out.slip[w] = longitudinal_slip(vel.vx_wheel[w], params.wheel_radius[w] * omega[w]);
    out.slip_angle[w] = slip_angle(vel.vx_wheel[w], vel.vy_wheel[w]);
  }
  return out;
}

// Side-slip angle. Reported as zero below the standstill speed.
inline constexpr double kStandstillSpeed = 0.5;

inline double sideslip(double vx, double vy) {
  if (std::hypot(vx, vy) < kStandstillSpeed) return 0.0;
  return std::atan(vy / vx);
}

inline double sideslip(const VehicleState& st) { return sideslip(st.vx, st.vy); }

// ---------------------------------------------------------------------------
// Tires
// ---------------------------------------------------------------------------

struct WheelForce {
  double fx = 0.0;
  double fy = 0.0;
};

// Combined-slip Magic Formula. Both slips are normalised by their pure-slip
// peaks; the resultant normalised slip drives each pure curve and the force is
// split along the normalised slip direction. |F| <= mu_max * Fz by construction.
// Lateral force opposes the lateral sliding velocity, so Fy has the opposite
// sign of alpha.
inline WheelForce combined_slip_force(double slip, double alpha, double fz,
                                      const TireParams& tires) {
  if (fz < 0.0) throw std::invalid_argument("tire_forces: negative wheel load");
  const double peak_force = tires.mu_max * fz;
  const double sx_n = slip / tires.longitudinal_peak;
  const double sy_n = alpha / tires.lateral_peak;
  const double s = std::hypot(sx_n, sy_n);
  const MagicFormula& lon = tires.longitudinal;
  const MagicFormula& lat = tires.lateral;
  WheelForce f;
  if (s < 1e-12) {
    f.fx = peak_force * lon.B * lon.C * slip;
    f.fy = -peak_force * lat.B * lat.C * alpha;
    return f;
  }
  f.fx = peak_force * (sx_n / s) * lon.shape(s * tires.longitudinal_peak);
  f.fy = -peak_force * (sy_n / s) * lat.shape(s * tires.lateral_peak);
  return f;
}

struct TireForces {
  WheelArray fx_wheel{};
  WheelArray fy_wheel{};
  WheelArray fx_vehicle{};
  WheelArray fy_vehicle{};
  WheelArray fz{};
};

inline TireForces tire_forces(const WheelArray& slip, const WheelArray& slip_angle,
                              const WheelArray& fz, const WheelArray& steer,
                              const TireParams& tires) {
  TireForces out;
  for (int w = 0; w < kNumWheels; ++w) {
    const WheelForce f = combined_slip_force(std::clamp(slip[w], -1.0, 1.0), slip_angle[w],
                                             fz[w], tires);
    const double c = std::cos(steer[w]);
    const double s = std::sin(steer[w]);
    out.fx_wheel[w] = f.fx;
    out.fy_wheel[w] = f.fy;
    out.fx_vehicle[w] = c * f.fx - s * f.fy;
    out.fy_vehicle[w] = s * f.fx + c * f.fy;
    out.fz[w] = fz[w];
  }
  return out;
}

inline WheelArray static_wheel_loads(const VehicleParams& params) {
  const double l = params.wheelbase();
  const double front = params.mass * kGravity * params.lr / l;
  const double rear = params.mass * kGravity * params.lf / l;
  return {front / 2.0, front / 2.0, rear / 2.0, rear / 2.0};
}

// ---------------------------------------------------------------------------
// Rigid-body equilibria
// ---------------------------------------------------------------------------

struct BodyAccel {
  double vx_dot = 0.0;
  double vy_dot = 0.0;
  double yaw_accel = 0.0;
};

// Force and moment balance of the double-track body. The yaw moment of each
// wheel force is q * Fy^V - p * Fx^V, the sign pairing that matches the wheel
// velocity transform above (p positive to the left).
inline BodyAccel body_derivatives(double vx, double vy, double yaw_rate, const WheelArray& steer,
                                  const TireForces& forces, const VehicleParams& params) {
  const WheelArray p = params.lateral_arm();
  const WheelArray q = params.longitudinal_arm();
  double fx = 0.0;
  double fy = 0.0;
  double mz = 0.0;
  for (int w = 0; w < kNumWheels; ++w) {
    const double c = std::cos(steer[w]);
    const double s = std::sin(steer[w]);
    const double fxw = forces.fx_wheel[w];
    const double fyw = forces.fy_wheel[w];
    fx += c * fxw - s * fyw;
    fy += s * fxw + c * fyw;
    mz += (q[w] * s - p[w] * c) * fxw + (q[w] * c + p[w] * s) * fyw;
  }
  return {vy * yaw_rate + fx / params.mass, -vx * yaw_rate + fy / params.mass,
          mz / params.yaw_inertia};
}

inline BodyAccel body_derivatives(const VehicleState& st, const TireForces& forces,
                                  const VehicleParams& params) {
  return body_derivatives(st.vx, st.vy, st.yaw_rate, st.steer, forces, params);
}

// ---------------------------------------------------------------------------
// Prediction model
// ---------------------------------------------------------------------------

// Tire forces of the prediction model: slip from the state, slip angle from
// kinematics, static wheel loads.
inline TireForces prediction_tire_forces(const VehicleState& st, const VehicleParams& params,
                                         const TireParams& tires) {
  const WheelVelocities vel = wheel_velocities(st, params);
  WheelArray alpha{};
  for (int w = 0; w < kNumWheels; ++w) alpha[w] = slip_angle(vel.vx_wheel[w], vel.vy_wheel[w]);
  return tire_forces(st.slip, alpha, static_wheel_loads(params), st.steer, tires);
}

// Continuous-time right-hand side of the prediction model. Steering angles and
// slips are integrators of the commanded rates.
inline StateVec prediction_rhs(const VehicleState& st, const ControlInput& u, double ref_heading,
                               const VehicleParams& params, const TireParams& tires) {
  const double dpsi = st.psi - ref_heading;
  const double c = std::cos(dpsi);
  const double s = std::sin(dpsi);
  const BodyAccel acc = body_derivatives(st, prediction_tire_forces(st, params, tires), params);

  StateVec xdot;
  xdot[sx::kS] = st.vx * c - st.vy * s;
  xdot[sx::kD] = st.vx * s + st.vy * c;
  xdot[sx::kPsi] = st.yaw_rate;
  xdot[sx::kVx] = acc.vx_dot;
  xdot[sx::kVy] = acc.vy_dot;
  xdot[sx::kYawRate] = acc.yaw_accel;
  for (int w = 0; w < kNumWheels; ++w) {
    xdot[sx::kSteer + w] = u.steer_rate[w];
    xdot[sx::kSlip + w] = u.slip_rate[w];
  }
  return xdot;
}

inline OutputVec output_map(const VehicleState& st, const VehicleParams& params) {
  OutputVec y;
  y[yx::kS] = st.s;
  y[yx::kD] = st.d;
  y[yx::kPsi] = st.psi;
  y[yx::kVx] = st.vx;
  y[yx::kBeta] = sideslip(st);
  y[yx::kYawRate] = st.yaw_rate;
  const WheelVelocities vel = wheel_velocities(st, params);
  for (int w = 0; w < kNumWheels; ++w) {
    y[yx::kSteer + w] = st.steer[w];
    y[yx::kSlip + w] = st.slip[w];
    y[yx::kSlipAngle + w] = slip_angle(vel.vx_wheel[w], vel.vy_wheel[w]);
  }
  y[yx::kSteerDiffFront] = st.steer[kFrontLeft] - st.steer[kFrontRight];
  y[yx::kSteerDiffRear] = st.steer[kRearLeft] - st.steer[kRearRight];
  return y;
}

}  // namespace ftmpc

#endif  // FTMPC_DYNAMICS_HPP_
