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

// Actuator degradation catalogue D1..D10: plant-side fault injection and the
// controller reconfiguration each kind maps to.

#ifndef FTMPC_DEGRADATION_HPP_
#define FTMPC_DEGRADATION_HPP_

#include <algorithm>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ftmpc/dynamics.hpp"
#include "ftmpc/linearize.hpp"
#include "ftmpc/mpc.hpp"
#include "ftmpc/plant.hpp"

namespace ftmpc {

enum class DegradationKind { D1 = 1, D2, D3, D4, D5, D6, D7, D8, D9, D10 };

inline std::string to_string(DegradationKind k) { return "D" + std::to_string(static_cast<int>(k)); }

inline DegradationKind degradation_kind_from_string(const std::string& s) {
  std::string t = s;
  if (!t.empty() && (t[0] == 'D' || t[0] == 'd')) t = t.substr(1);
  if (!t.empty() && t[0] == '.') t = t.substr(1);
  int n = 0;
  try {
    n = std::stoi(t);
  } catch (const std::exception&) {
    n = 0;
  }
  if (n < 1 || n > 10) throw std::invalid_argument("unknown degradation kind '" + s + "'");
  return static_cast<DegradationKind>(n);
}

struct DegradationEvent {
  DegradationKind kind = DegradationKind::D4;
  int wheel = kFrontRight;
  double t_trigger = 1.0;
  double torque = 400.0;  // D1 [N m]
  Range range = Range::none();  // D2 slip, D3 slip rate, D7 angle [rad], D8 rate [rad/s]
  double held = 0.0;      // D5 slip or D9 angle [rad]
  int sign = -1;          // D6: -1 locking, +1 spinning

  void validate() const {
    if (wheel < 0 || wheel >= kNumWheels) throw std::invalid_argument("DegradationEvent: bad wheel");
    switch (kind) {
      case DegradationKind::D2:
      case DegradationKind::D3:
      case DegradationKind::D7:
      case DegradationKind::D8:
        if (range.is_void || range.lo > range.hi) {
          throw std::invalid_argument("DegradationEvent: " + to_string(kind) + " needs a range");
        }
        break;
      case DegradationKind::D5:
        if (held < -1.0 || held > 1.0) throw std::invalid_argument("DegradationEvent: held slip outside [-1, 1]");
        break;
      case DegradationKind::D6:
        if (sign != 1 && sign != -1) throw std::invalid_argument("DegradationEvent: D6 sign must be +1 or -1");
        break;
      case DegradationKind::D9:
        if (std::abs(held) > deg2rad(30.0) + 1e-12) {
          throw std::invalid_argument("DegradationEvent: held steering angle beyond mechanical stops");
        }
        break;
      default:
        break;
    }
  }

  friend bool operator==(const DegradationEvent&, const DegradationEvent&) = default;
};

// How the controller adapts to a known degradation.
struct ReconfigDirective {
  std::vector<int> zero_output_weights;                 // indices into w_y
  std::vector<std::pair<int, Range>> output_bounds;     // replaced entries of Y
  std::vector<std::pair<int, Range>> input_bounds;      // replaced entries of U
  MatrixZeroing zeroing;

  bool empty() const {
    return zero_output_weights.empty() && output_bounds.empty() && input_bounds.empty() &&
           zeroing.empty();
  }

  void merge(const ReconfigDirective& o) {
    auto add_unique = [](std::vector<int>& v, int x) {
      if (std::find(v.begin(), v.end(), x) == v.end()) v.push_back(x);
    };
    for (int i : o.zero_output_weights) add_unique(zero_output_weights, i);
    for (const auto& b : o.output_bounds) output_bounds.push_back(b);
    for (const auto& b : o.input_bounds) input_bounds.push_back(b);
    for (int i : o.zeroing.states) add_unique(zeroing.states, i);
    for (int i : o.zeroing.inputs) add_unique(zeroing.inputs, i);
  }

  friend bool operator==(const ReconfigDirective&, const ReconfigDirective&) = default;
};

namespace detail {

inline ReconfigDirective freeze_slip(int w) {
  ReconfigDirective d;
  d.zero_output_weights.push_back(yx::kSlip + w);
  d.output_bounds.emplace_back(yx::kSlip + w, Range::none());
  d.zeroing.states.push_back(sx::kSlip + w);
  d.zeroing.inputs.push_back(ux::kSlipRate + w);
  return d;
}

inline ReconfigDirective freeze_steering(int w) {
  ReconfigDirective d;
  d.zero_output_weights.push_back(yx::kSteer + w);
  d.output_bounds.emplace_back(yx::kSteer + w, Range::none());
  // Large slip angles are expected on the whole axle; alpha stays weighted.
  d.output_bounds.emplace_back(yx::kSlipAngle + w, Range::none());
  d.output_bounds.emplace_back(yx::kSlipAngle + axle_partner(w), Range::none());
  d.zeroing.states.push_back(sx::kSteer + w);
  d.zeroing.inputs.push_back(ux::kSteerRate + w);
  return d;
}

}  // namespace detail

inline ReconfigDirective directives_for(const DegradationEvent& ev) {
  const int w = ev.wheel;
  ReconfigDirective d;
  switch (ev.kind) {
    case DegradationKind::D2:
      d.output_bounds.emplace_back(yx::kSlip + w, ev.range);
      break;
    case DegradationKind::D3:
      d.input_bounds.emplace_back(ux::kSlipRate + w, ev.range);
      break;
    case DegradationKind::D7:
      d.output_bounds.emplace_back(yx::kSteer + w, ev.range);
      break;
    case DegradationKind::D8:
      d.input_bounds.emplace_back(ux::kSteerRate + w, ev.range);
      break;
    case DegradationKind::D1:
    case DegradationKind::D4:
    case DegradationKind::D5:
    case DegradationKind::D6:
      d = detail::freeze_slip(w);
      break;
    case DegradationKind::D9:
      d = detail::freeze_steering(w);
      break;
    case DegradationKind::D10:
      d = detail::freeze_steering(w);
      d.merge(detail::freeze_slip(w));
      break;
  }
  return d;
}

inline MpcConfig apply_directive(MpcConfig cfg, const ReconfigDirective& d) {
  for (int i : d.zero_output_weights) cfg.w_y[i] = 0.0;
  for (const auto& [i, r] : d.output_bounds) cfg.output_bounds[i] = r;
  for (const auto& [j, r] : d.input_bounds) cfg.input_bounds[j] = r;
  return cfg;
}

inline LinearizedModel apply_reconfiguration(LinearizedModel model, const ReconfigDirective& d) {
  return apply_reconfiguration(std::move(model), d.zeroing);
}

// The controller learns of a degradation only after the detection and
// isolation delay has elapsed.
inline std::optional<DegradationEvent> reveal_after_ddi(const DegradationEvent& ev, double t,
                                                        double t_ddi) {
  if (t_ddi < 0.0) throw std::invalid_argument("reveal_after_ddi: negative delay");
  if (t + 1e-9 >= ev.t_trigger + t_ddi) return ev;
  return std::nullopt;
}

// Emits each event once, at the first poll at or after its reveal time.
class DdiEmulator {
 public:
  DdiEmulator(std::vector<DegradationEvent> events, double t_ddi)
      : events_(std::move(events)), revealed_(events_.size(), false), t_ddi_(t_ddi) {}

  std::vector<DegradationEvent> poll(double t) {
    std::vector<DegradationEvent> out;
    for (std::size_t i = 0; i < events_.size(); ++i) {
      if (!revealed_[i] && reveal_after_ddi(events_[i], t, t_ddi_)) {
        revealed_[i] = true;
        out.push_back(events_[i]);
      }
    }
    return out;
  }

 private:
  std::vector<DegradationEvent> events_;
  std::vector<bool> revealed_;
  double t_ddi_;
};

// Plant-side realisation of the degradations. Slip targets are shaped before
// the wheel slip controller; torques and steering rates after it.
class FaultInjector {
 public:
  FaultInjector() = default;
  explicit FaultInjector(std::vector<DegradationEvent> events) : events_(std::move(events)) {
    for (const auto& e : events_) e.validate();
    captured_.assign(events_.size(), std::nullopt);
  }

  bool active(const DegradationEvent& e, double t) const { return t + 1e-12 >= e.t_trigger; }

  void shape_slip_targets(WheelArray& targets, const WheelArray& previous, double t,
                          double dt) const {
    for (const auto& e : events_) {
      if (!active(e, t)) continue;
      double& target = targets[e.wheel];
      switch (e.kind) {
        case DegradationKind::D2:
          target = e.range.clamp(target);
          break;
        case DegradationKind::D3: {
          const double rate = e.range.clamp((target - previous[e.wheel]) / dt);
          target = previous[e.wheel] + rate * dt;
          break;
        }
        case DegradationKind::D5:
          target = e.held;
          break;
        default:
          break;
      }
    }
  }

  // torque_limits bound the D6 saturation torque; steer_rate_limits bound the
  // plant's own steering motion toward a held angle.
  void apply(PlantActuation& act, const PlantState& st, double t, double dt,
             const WheelRanges& torque_limits, const WheelRanges& steer_rate_limits) {
    for (std::size_t i = 0; i < events_.size(); ++i) {
      const auto& e = events_[i];
      if (!active(e, t)) continue;
      const int w = e.wheel;
      double& rate = act.steer_rate[w];
      const double angle = st.steer[w];
      switch (e.kind) {
        case DegradationKind::D1:
          act.torque[w] = e.torque;
          break;
        case DegradationKind::D4:
          act.torque[w] = 0.0;
          break;
        case DegradationKind::D6:
          act.torque[w] = e.sign < 0 ? torque_limits[w].lo : torque_limits[w].hi;
          act.brake_hold[w] = e.sign < 0;
          break;
        case DegradationKind::D7:
          if (angle > e.range.hi) {
            rate = steer_rate_limits[w].clamp((e.range.hi - angle) / dt);
          } else if (angle < e.range.lo) {
            rate = steer_rate_limits[w].clamp((e.range.lo - angle) / dt);
          } else {
            rate = std::clamp(rate, (e.range.lo - angle) / dt, (e.range.hi - angle) / dt);
          }
          break;
        case DegradationKind::D8:
          rate = e.range.clamp(rate);
          break;
        case DegradationKind::D9:
          rate = steer_rate_limits[w].clamp((e.held - angle) / dt);
          break;
        case DegradationKind::D10:
          if (!captured_[i]) captured_[i] = angle;
          rate = steer_rate_limits[w].clamp((*captured_[i] - angle) / dt);
          act.torque[w] = 0.0;
          break;
        default:
          break;
      }
    }
  }

  const std::vector<DegradationEvent>& events() const { return events_; }

 private:
  std::vector<DegradationEvent> events_;
  std::vector<std::optional<double>> captured_;
};

}  // namespace ftmpc

#endif  // FTMPC_DEGRADATION_HPP_
