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

#ifndef FTMPC_WHEELSLIP_HPP_
#define FTMPC_WHEELSLIP_HPP_

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ftmpc/dynamics.hpp"

namespace ftmpc {

struct SlipControllerGains {
  double kp = 5.0e4;  // [N m per unit slip]
  double ki = 1.5e6;  // [N m per unit slip and second]
};

// Per-wheel PI state of the wheel rotational dynamics controller.
struct SlipControllerState {
  WheelArray integral{};     // [s]
  WheelArray last_torque{};  // [N m]
  SlipControllerGains gains;
};

// PI law on the slip error of each wheel, saturated to the torque range. While
// the output saturates in the direction of the error the integral advances at
// most to the value that just reaches the limit, and it is kept within the
// range that alone would saturate the output.
inline WheelArray slip_to_torque(const WheelArray& target, const WheelArray& measured,
                                 SlipControllerState& state, double dt,
                                 const WheelRanges& torque_limits) {
  if (!(dt > 0.0)) throw std::invalid_argument("slip_to_torque: dt must be positive");
  const double kp = state.gains.kp;
  const double ki = state.gains.ki;
  WheelArray torque{};
  for (int w = 0; w < kNumWheels; ++w) {
    const Range& lim = torque_limits[w];
    const double e = target[w] - measured[w];
    const double candidate = state.integral[w] + e * dt;
    const double raw = kp * e + ki * candidate;
    double& integral = state.integral[w];
    if (!lim.is_void && ki > 0.0 && raw > lim.hi && e > 0.0) {
      integral = std::max(integral, std::min(candidate, (lim.hi - kp * e) / ki));
    } else if (!lim.is_void && ki > 0.0 && raw < lim.lo && e < 0.0) {
      integral = std::min(integral, std::max(candidate, (lim.lo - kp * e) / ki));
    } else {
      integral = candidate;
    }
    if (!lim.is_void && ki > 0.0) {
      state.integral[w] = std::clamp(state.integral[w], lim.lo / ki, lim.hi / ki);
    }
    torque[w] = lim.clamp(kp * e + ki * state.integral[w]);
    state.last_torque[w] = torque[w];
  }
  return torque;
}

}  // namespace ftmpc

#endif  // FTMPC_WHEELSLIP_HPP_
