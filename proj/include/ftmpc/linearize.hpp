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

#ifndef FTMPC_LINEARIZE_HPP_
#define FTMPC_LINEARIZE_HPP_

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "ftmpc/dynamics.hpp"

namespace ftmpc {

class LinearizationError : public std::runtime_error {
 public:
  LinearizationError(const std::string& what, int row, int col)
      : std::runtime_error(what + " at (" + std::to_string(row) + ", " + std::to_string(col) + ")"),
        row_(row),
        col_(col) {}
  int row() const { return row_; }
  int col() const { return col_; }

 private:
  int row_;
  int col_;
};

using StateMat = Eigen::Matrix<double, sx::kSize, sx::kSize>;
using InputMat = Eigen::Matrix<double, sx::kSize, ux::kSize>;
using OutputMat = Eigen::Matrix<double, yx::kSize, sx::kSize>;

// Discrete affine prediction model around (x0, u0):
//   dx[k+1] = A dx[k] + B du[k] + r0 + E (psi_path[k] - psi_path[0])
//   y[k]    = C dx[k] + h0
struct LinearizedModel {
  StateMat A = StateMat::Zero();
  InputMat B = InputMat::Zero();
  OutputMat C = OutputMat::Zero();
  StateVec E = StateVec::Zero();  // sensitivity to the path heading
  StateVec r0 = StateVec::Zero();
  OutputVec h0 = OutputVec::Zero();
  StateVec x0 = StateVec::Zero();
  InputVec u0 = InputVec::Zero();
  double ref_heading = 0.0;
  double ts = 0.05;

  bool operator==(const LinearizedModel& o) const {
    return A == o.A && B == o.B && C == o.C && E == o.E && r0 == o.r0 && h0 == o.h0 &&
           x0 == o.x0 && u0 == o.u0 && ref_heading == o.ref_heading && ts == o.ts;
  }
};

inline double fd_step(double v) { return 1e-6 * std::max(1.0, std::abs(v)); }

struct ContinuousJacobians {
  StateMat A;
  InputMat B;
  StateVec E;
};

// Central finite differences of prediction_rhs.
inline ContinuousJacobians rhs_jacobians(const StateVec& x0, const InputVec& u0,
                                         double ref_heading, const VehicleParams& params,
                                         const TireParams& tires) {
  auto f = [&](const StateVec& x, const InputVec& u, double href) {
    return prediction_rhs(VehicleState::from_vector(x), ControlInput::from_vector(u), href, params,
                          tires);
  };
  ContinuousJacobians J;
  for (int i = 0; i < sx::kSize; ++i) {
    const double h = fd_step(x0[i]);
    StateVec xp = x0;
    StateVec xm = x0;
    xp[i] += h;
    xm[i] -= h;
    J.A.col(i) = (f(xp, u0, ref_heading) - f(xm, u0, ref_heading)) / (xp[i] - xm[i]);
  }
  for (int j = 0; j < ux::kSize; ++j) {
    const double h = fd_step(u0[j]);
    InputVec up = u0;
    InputVec um = u0;
    up[j] += h;
    um[j] -= h;
    J.B.col(j) = (f(x0, up, ref_heading) - f(x0, um, ref_heading)) / (up[j] - um[j]);
  }
  const double h = fd_step(ref_heading);
  J.E = (f(x0, u0, ref_heading + h) - f(x0, u0, ref_heading - h)) / (2.0 * h);
  return J;
}

// Output matrix: selector rows are set exactly; beta and alpha rows are
// differentiated numerically.
inline OutputMat output_jacobian(const StateVec& x0, const VehicleParams& params) {
  OutputMat C = OutputMat::Zero();
  C(yx::kS, sx::kS) = 1.0;
  C(yx::kD, sx::kD) = 1.0;
  C(yx::kPsi, sx::kPsi) = 1.0;
  C(yx::kVx, sx::kVx) = 1.0;
  C(yx::kYawRate, sx::kYawRate) = 1.0;
  for (int w = 0; w < kNumWheels; ++w) {
    C(yx::kSteer + w, sx::kSteer + w) = 1.0;
    C(yx::kSlip + w, sx::kSlip + w) = 1.0;
  }
  C(yx::kSteerDiffFront, sx::kSteer + kFrontLeft) = 1.0;
  C(yx::kSteerDiffFront, sx::kSteer + kFrontRight) = -1.0;
  C(yx::kSteerDiffRear, sx::kSteer + kRearLeft) = 1.0;
  C(yx::kSteerDiffRear, sx::kSteer + kRearRight) = -1.0;

  auto h = [&](const StateVec& x) { return output_map(VehicleState::from_vector(x), params); };
  for (int i = 0; i < sx::kSize; ++i) {
    const double step = fd_step(x0[i]);
    StateVec xp = x0;
    StateVec xm = x0;
    xp[i] += step;
    xm[i] -= step;
    const OutputVec dy = (h(xp) - h(xm)) / (xp[i] - xm[i]);
    C(yx::kBeta, i) = dy[yx::kBeta];
    for (int w = 0; w < kNumWheels; ++w) C(yx::kSlipAngle + w, i) = dy[yx::kSlipAngle + w];
  }
  return C;
}

// Linearises the prediction model at (x0, u0) and discretises it with forward
// Euler over ts.
inline LinearizedModel linearize_at(const VehicleState& x0, const ControlInput& u0,
                                    double ref_heading, double ts, const VehicleParams& params,
                                    const TireParams& tires) {
  if (!(ts > 0.0)) throw std::invalid_argument("linearize_at: ts must be positive");
  LinearizedModel m;
  m.x0 = x0.to_vector();
  m.u0 = u0.to_vector();
  m.ref_heading = ref_heading;
  m.ts = ts;
  if (!m.x0.allFinite() || !m.u0.allFinite() || !std::isfinite(ref_heading)) {
    throw std::invalid_argument("linearize_at: non-finite operating point");
  }

  const ContinuousJacobians J = rhs_jacobians(m.x0, m.u0, ref_heading, params, tires);
  m.A = StateMat::Identity() + ts * J.A;
  m.B = ts * J.B;
  m.E = ts * J.E;
  m.r0 = ts * prediction_rhs(x0, u0, ref_heading, params, tires);
  m.C = output_jacobian(m.x0, params);
  m.h0 = output_map(x0, params);

  auto check = [](const auto& M, const char* name) {
    for (int r = 0; r < M.rows(); ++r) {
      for (int c = 0; c < M.cols(); ++c) {
        if (!std::isfinite(M(r, c))) {
          throw LinearizationError(std::string("linearize_at: non-finite entry in ") + name, r, c);
        }
      }
    }
  };
  check(m.A, "A");
  check(m.B, "B");
  check(m.C, "C");
  check(m.r0, "r0");
  check(m.h0, "h0");
  return m;
}

// Actuator states removed from the prediction. A frozen state's row and column
// of A and the matching input column of B are zeroed so the prediction only
// sees it through r0.
struct MatrixZeroing {
  std::vector<int> states;
  std::vector<int> inputs;

  bool empty() const { return states.empty() && inputs.empty(); }
  friend bool operator==(const MatrixZeroing&, const MatrixZeroing&) = default;
};

inline LinearizedModel apply_reconfiguration(LinearizedModel model, const MatrixZeroing& z) {
  for (int i : z.states) {
    model.A.row(i).setZero();
    model.A.col(i).setZero();
  }
  for (int j : z.inputs) model.B.col(j).setZero();
  return model;
}

inline const char* state_label(int i) {
  static constexpr const char* kLabels[] = {
      "s",         "d",         "psi",       "vx",        "vy",        "yaw_rate",  "delta_fl",
      "delta_fr",  "delta_rl",  "delta_rr",  "lambda_fl", "lambda_fr", "lambda_rl", "lambda_rr"};
  return kLabels[i];
}

inline const char* input_label(int j) {
  static constexpr const char* kLabels[] = {"ddelta_fl",  "ddelta_fr",  "ddelta_rl",
                                            "ddelta_rr",  "dlambda_fl", "dlambda_fr",
                                            "dlambda_rl", "dlambda_rr"};
  return kLabels[j];
}

inline const char* output_label(int k) {
  static constexpr const char* kLabels[] = {
      "s",         "d",         "psi",       "vx",        "beta",      "yaw_rate",  "delta_fl",
      "delta_fr",  "delta_rl",  "delta_rr",  "lambda_fl", "lambda_fr", "lambda_rl", "lambda_rr",
      "alpha_fl",  "alpha_fr",  "alpha_rl",  "alpha_rr",  "ddelta_f",  "ddelta_r"};
  return kLabels[k];
}

// Labeled row-major text dump of a model, for fixtures and debugging.
inline void write_model(std::ostream& os, const LinearizedModel& m) {
  os << std::setprecision(10);
  auto dump = [&](const char* name, const auto& M, auto row_label, auto col_label) {
    os << "# " << name << ' ' << M.rows() << 'x' << M.cols() << '\n' << "row";
    for (int c = 0; c < M.cols(); ++c) os << ' ' << col_label(c);
    os << '\n';
    for (int r = 0; r < M.rows(); ++r) {
      os << row_label(r);
      for (int c = 0; c < M.cols(); ++c) os << ' ' << M(r, c);
      os << '\n';
    }
  };
  auto one = [](int) { return "value"; };
  dump("A", m.A, state_label, state_label);
  dump("B", m.B, state_label, input_label);
  dump("C", m.C, output_label, state_label);
  dump("E", m.E, state_label, one);
  dump("r0", m.r0, state_label, one);
  dump("h0", m.h0, output_label, one);
}

}  // namespace ftmpc

#endif  // FTMPC_LINEARIZE_HPP_
