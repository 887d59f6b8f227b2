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

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "ftmpc/linearize.hpp"

namespace ftmpc {
namespace {

VehicleState cornering_state() {
  VehicleState x;
  x.s = 30.0;
  x.d = 0.2;
  x.psi = 0.12;
  x.vx = 13.8;
  x.vy = 0.35;
  x.yaw_rate = 0.3;
  x.steer = {0.06, 0.05, -0.01, -0.01};
  x.slip = {0.02, -0.015, 0.03, 0.01};
  return x;
}

StateVec rhs(const StateVec& x, const InputVec& u, double href) {
  return prediction_rhs(VehicleState::from_vector(x), ControlInput::from_vector(u), href,
                        VehicleParams{}, TireParams{});
}

// Five-point stencil with Richardson-level accuracy (error O(h^4)).
StateVec five_point_column(const StateVec& x0, const InputVec& u0, double href, int i) {
  const double h = 1e-3 * std::max(1.0, std::abs(x0[i]));
  auto at = [&](double k) {
    StateVec x = x0;
    x[i] += k * h;
    return rhs(x, u0, href);
  };
  return (-at(2.0) + 8.0 * at(1.0) - 8.0 * at(-1.0) + at(-2.0)) / (12.0 * h);
}

TEST(Linearize, JacobianMatchesFivePointOracle) {
  const StateVec x0 = cornering_state().to_vector();
  const InputVec u0 = InputVec::Constant(0.1);
  const ContinuousJacobians J = rhs_jacobians(x0, u0, 0.1, VehicleParams{}, TireParams{});
  for (int i = 0; i < sx::kSize; ++i) {
    const StateVec ref = five_point_column(x0, u0, 0.1, i);
    const double scale = std::max(1.0, ref.cwiseAbs().maxCoeff());
    EXPECT_LT((J.A.col(i) - ref).cwiseAbs().maxCoeff() / scale, 1e-6) << state_label(i);
  }
}

TEST(Linearize, ForwardEulerDiscretisation) {
  const VehicleState x = cornering_state();
  const double ts = 0.05;
  const LinearizedModel m = linearize_at(x, ControlInput{}, 0.1, ts, VehicleParams{}, TireParams{});
  const ContinuousJacobians J =
      rhs_jacobians(x.to_vector(), InputVec::Zero(), 0.1, VehicleParams{}, TireParams{});
  EXPECT_TRUE(m.A.isApprox(StateMat::Identity() + ts * J.A, 1e-14));
  EXPECT_TRUE(m.B.isApprox(ts * J.B, 1e-14));
  EXPECT_TRUE(m.r0.isApprox(ts * rhs(x.to_vector(), InputVec::Zero(), 0.1), 1e-14));
}

TEST(Linearize, StraightRollingOffset) {
  VehicleState x;
  x.vx = 14.0;
  const LinearizedModel m = linearize_at(x, ControlInput{}, 0.0, 0.05, VehicleParams{},
                                         TireParams{});
  StateVec expected = StateVec::Zero();
  expected[sx::kS] = 0.7;
  EXPECT_LT((m.r0 - expected).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Linearize, InputMatrixIsSampleTimeSelector) {
  const LinearizedModel m = linearize_at(cornering_state(), ControlInput{}, 0.1, 0.05,
                                         VehicleParams{}, TireParams{});
  InputMat expected = InputMat::Zero();
  for (int w = 0; w < kNumWheels; ++w) {
    expected(sx::kSteer + w, ux::kSteerRate + w) = 0.05;
    expected(sx::kSlip + w, ux::kSlipRate + w) = 0.05;
  }
  EXPECT_LT((m.B - expected).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Linearize, HeadingFeedforwardMirrorsHeadingColumn) {
  const LinearizedModel m = linearize_at(cornering_state(), ControlInput{}, 0.1, 0.05,
                                         VehicleParams{}, TireParams{});
  // Frenet rates depend on psi - psi_ref only.
  EXPECT_NEAR(m.E[sx::kS], -m.A(sx::kS, sx::kPsi), 1e-8);
  EXPECT_NEAR(m.E[sx::kD], -m.A(sx::kD, sx::kPsi), 1e-8);
  for (int i = sx::kPsi; i < sx::kSize; ++i) EXPECT_EQ(m.E[i], 0.0);
}

TEST(Linearize, ResidualIsSecondOrder) {
  const StateVec x0 = cornering_state().to_vector();
  const InputVec u0 = InputVec::Zero();
  const ContinuousJacobians J = rhs_jacobians(x0, u0, 0.1, VehicleParams{}, TireParams{});
  StateVec dir = StateVec::Zero();
  dir[sx::kVy] = 1.0;
  dir[sx::kYawRate] = 0.5;
  dir[sx::kSteer + kFrontLeft] = 0.05;
  dir[sx::kSlip + kRearRight] = 0.02;
  dir[sx::kPsi] = 0.1;
  auto residual = [&](double eps) {
    const StateVec lin = rhs(x0, u0, 0.1) + eps * J.A * dir;
    return (rhs(x0 + eps * dir, u0, 0.1) - lin).norm();
  };
  double prev = residual(0.1);
  for (double eps = 0.05; eps > 0.002; eps *= 0.5) {
    const double r = residual(eps);
    EXPECT_GE(prev / r, 1.9 * 1.9) << eps;
    prev = r;
  }
}

TEST(Linearize, OutputSelectorRows) {
  const LinearizedModel m = linearize_at(cornering_state(), ControlInput{}, 0.1, 0.05,
                                         VehicleParams{}, TireParams{});
  for (int w = 0; w < kNumWheels; ++w) {
    Eigen::Matrix<double, 1, sx::kSize> row = Eigen::Matrix<double, 1, sx::kSize>::Zero();
    row[sx::kSteer + w] = 1.0;
    EXPECT_EQ(m.C.row(yx::kSteer + w), row);
    row.setZero();
    row[sx::kSlip + w] = 1.0;
    EXPECT_EQ(m.C.row(yx::kSlip + w), row);
  }
  EXPECT_EQ(m.C(yx::kSteerDiffFront, sx::kSteer + kFrontLeft), 1.0);
  EXPECT_EQ(m.C(yx::kSteerDiffFront, sx::kSteer + kFrontRight), -1.0);
  EXPECT_EQ(m.C.row(yx::kSteerDiffFront).cwiseAbs().sum(), 2.0);
  EXPECT_TRUE(m.h0.isApprox(output_map(cornering_state(), VehicleParams{})));
}

TEST(Linearize, RejectsNonFiniteOperatingPoint) {
  VehicleState x = cornering_state();
  x.vy = NAN;
  EXPECT_THROW(linearize_at(x, ControlInput{}, 0.0, 0.05, VehicleParams{}, TireParams{}),
               std::invalid_argument);
  EXPECT_THROW(linearize_at(cornering_state(), ControlInput{}, 0.0, 0.0, VehicleParams{},
                            TireParams{}),
               std::invalid_argument);
}

TEST(Reconfiguration, ZeroesFrozenStateAndInput) {
  const LinearizedModel m = linearize_at(cornering_state(), ControlInput{}, 0.1, 0.05,
                                         VehicleParams{}, TireParams{});
  const int st = sx::kSteer + kFrontRight;
  const int in = ux::kSteerRate + kFrontRight;
  const LinearizedModel r = apply_reconfiguration(m, MatrixZeroing{{st}, {in}});
  EXPECT_TRUE(r.A.row(st).isZero(0.0));
  EXPECT_TRUE(r.A.col(st).isZero(0.0));
  EXPECT_TRUE(r.B.col(in).isZero(0.0));
  EXPECT_EQ(r.r0, m.r0);
  EXPECT_EQ(r.C, m.C);
  // Untouched entries are bit-identical.
  for (int i = 0; i < sx::kSize; ++i) {
    for (int j = 0; j < sx::kSize; ++j) {
      if (i != st && j != st) EXPECT_EQ(r.A(i, j), m.A(i, j));
    }
  }
}

TEST(Reconfiguration, IdempotentAndEmptyIsIdentity) {
  const LinearizedModel m = linearize_at(cornering_state(), ControlInput{}, 0.1, 0.05,
                                         VehicleParams{}, TireParams{});
  const MatrixZeroing z{{sx::kSlip + kRearLeft}, {ux::kSlipRate + kRearLeft}};
  const LinearizedModel once = apply_reconfiguration(m, z);
  EXPECT_TRUE(apply_reconfiguration(once, z) == once);
  EXPECT_TRUE(apply_reconfiguration(m, MatrixZeroing{}) == m);
}

TEST(WriteModel, LabelledDump) {
  const LinearizedModel m = linearize_at(cornering_state(), ControlInput{}, 0.1, 0.05,
                                         VehicleParams{}, TireParams{});
  std::ostringstream os;
  write_model(os, m);
  const std::string s = os.str();
  EXPECT_NE(s.find("# A 14x14"), std::string::npos);
  EXPECT_NE(s.find("# C 20x14"), std::string::npos);
  EXPECT_NE(s.find("lambda_rr"), std::string::npos);
}

}  // namespace
}  // namespace ftmpc
