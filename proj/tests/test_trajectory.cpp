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
#include <numbers>
#include <random>
#include <sstream>

#include "ftmpc/trajectory.hpp"

namespace ftmpc {
namespace {

ReferenceTrajectory default_path() {
  SineWithDwell m;
  m.duration = 8.0;
  return build_sine_with_dwell(m);
}

TEST(SineWithDwell, ZeroAmplitudeIsStraight) {
  SineWithDwell m;
  m.lateral_amplitude = 0.0;
  const ReferenceTrajectory t = build_sine_with_dwell(m);
  for (std::size_t i = 0; i < t.size(); ++i) {
    EXPECT_EQ(t.psi[i], 0.0);
    EXPECT_EQ(t.Y[i], 0.0);
  }
}

TEST(SineWithDwell, DefaultPeakLateralAccelerationNearSaturation) {
  const SineWithDwell m;
  const double w = 2.0 * std::numbers::pi * m.frequency;
  const double a = m.lateral_amplitude * w * w;
  EXPECT_DOUBLE_EQ(m.peak_lateral_accel(), a);
  EXPECT_GE(a, 0.75 * m.mu_max * kGravity);
  EXPECT_LE(a, 0.95 * m.mu_max * kGravity);
}

TEST(SineWithDwell, RejectsUndrivableReference) {
  SineWithDwell m;
  m.lateral_amplitude = 0.6;
  EXPECT_THROW(build_sine_with_dwell(m), TrajectoryError);
  m = SineWithDwell{};
  m.duration = 2.0;
  EXPECT_THROW(build_sine_with_dwell(m), TrajectoryError);
}

TEST(SineWithDwell, TimeLawAndSpacing) {
  const ReferenceTrajectory t = default_path();
  for (std::size_t i = 1; i < t.size(); ++i) {
    EXPECT_GT(t.s[i], t.s[i - 1]);
    EXPECT_NEAR(t.s[i] - t.s[i - 1], 0.1, 1e-9);
    EXPECT_NEAR(t.t[i], t.s[i] / 14.0, 1e-12);
  }
}

TEST(SineWithDwell, HeadingConsistentWithPointDifferences) {
  const ReferenceTrajectory t = default_path();
  for (std::size_t i = 1; i < t.size(); ++i) {
    const double chord = std::atan2(t.Y[i] - t.Y[i - 1], t.X[i] - t.X[i - 1]);
    EXPECT_NEAR(chord, 0.5 * (t.psi[i] + t.psi[i - 1]), 1e-3) << i;
    EXPECT_LT(std::abs(t.psi[i] - t.psi[i - 1]), 5e-3) << i;  // no kinks
  }
}

TEST(SineWithDwell, ArcLengthMatchesPointDistances) {
  const ReferenceTrajectory t = default_path();
  for (std::size_t i = 1; i < t.size(); ++i) {
    EXPECT_NEAR(std::hypot(t.X[i] - t.X[i - 1], t.Y[i] - t.Y[i - 1]), 0.1, 1e-5);
  }
}

TEST(SineWithDwell, ShapeHasDwellAndReturnsToCentreline) {
  const SineWithDwell m;
  const ReferenceTrajectory t = default_path();
  double ymax = 0.0;
  double ymin = 0.0;
  for (double y : t.Y) {
    ymax = std::max(ymax, y);
    ymin = std::min(ymin, y);
  }
  EXPECT_NEAR(ymax, m.lateral_amplitude, 1e-4);  // sampled peak
  EXPECT_NEAR(ymin, -m.lateral_amplitude, 1e-12);
  // Dwell at the negative peak lasts m.dwell seconds.
  double held = 0.0;
  for (std::size_t i = 1; i < t.size(); ++i) {
    if (t.Y[i] == -m.lateral_amplitude && t.Y[i - 1] == -m.lateral_amplitude) {
      held += t.t[i] - t.t[i - 1];
    }
  }
  EXPECT_NEAR(held, m.dwell, 0.02);
  EXPECT_EQ(t.Y.back(), 0.0);
  EXPECT_EQ(t.psi.back(), 0.0);
}

TEST(SineWithDwell, CurvatureDrivable) {
  const SineWithDwell m;
  const ReferenceTrajectory t = default_path();
  for (std::size_t i = 1; i < t.size(); ++i) {
    const double kappa = (t.psi[i] - t.psi[i - 1]) / (t.s[i] - t.s[i - 1]);
    EXPECT_LE(std::abs(kappa) * m.speed * m.speed, m.mu_max * kGravity * 1.001);
  }
}

TEST(Projection, OnPathRoundTrip) {
  const ReferenceTrajectory t = default_path();
  std::size_t hint = 0;
  for (std::size_t i = 0; i < t.size(); i += 7) {
    const FrenetPose p = project_to_frenet(t.X[i], t.Y[i], t.psi[i], t, hint);
    EXPECT_NEAR(p.s, t.s[i], 1e-9);
    EXPECT_NEAR(p.d, 0.0, 1e-9);
    EXPECT_NEAR(p.heading_error, 0.0, 1e-9);
    hint = p.index;
  }
}

TEST(Projection, LeftOffsetIsPositive) {
  SineWithDwell m;
  m.lateral_amplitude = 0.0;
  const ReferenceTrajectory t = build_sine_with_dwell(m);
  const FrenetPose p = project_to_frenet(10.05, 1.0, 0.0, t, 100);
  EXPECT_NEAR(p.d, 1.0, 1e-12);
  EXPECT_NEAR(p.s, 10.05, 1e-9);
}

TEST(Projection, MatchesBruteForceNearestSample) {
  const ReferenceTrajectory t = default_path();
  std::mt19937 rng(7);
  std::uniform_int_distribution<std::size_t> pick(0, t.size() - 1);
  std::uniform_real_distribution<double> off(-1.5, 1.5);
  for (int n = 0; n < 500; ++n) {
    const std::size_t i = pick(rng);
    const double X = t.X[i] + off(rng);
    const double Y = t.Y[i] + off(rng);
    std::size_t best = 0;
    double best_d2 = INFINITY;
    for (std::size_t j = 0; j < t.size(); ++j) {
      const double d2 = std::pow(X - t.X[j], 2) + std::pow(Y - t.Y[j], 2);
      if (d2 < best_d2) {
        best_d2 = d2;
        best = j;
      }
    }
    const FrenetPose p = project_to_frenet(X, Y, 0.0, t, i);
    EXPECT_LE(std::abs(p.s - t.s[best]), t.spacing + 1e-9);
    EXPECT_LE(std::abs(p.d), std::sqrt(best_d2) + 1e-9);
  }
}

TEST(Projection, HeadingErrorWrapped) {
  const ReferenceTrajectory t = default_path();
  const FrenetPose p = project_to_frenet(t.X[50], t.Y[50], t.psi[50] + 2.0 * std::numbers::pi + 0.1,
                                         t, 50);
  EXPECT_NEAR(p.heading_error, 0.1, 1e-9);
}

TEST(Projection, LostOutsideWindow) {
  const ReferenceTrajectory t = default_path();
  EXPECT_THROW(project_to_frenet(t.X[800], t.Y[800], 0.0, t, 0), ProjectionLostError);
}

TEST(ReferenceWindow, SpansHorizon) {
  const ReferenceTrajectory t = default_path();
  const ReferenceSample r = reference_window(t, 0.0, 20, 0.05);
  ASSERT_EQ(r.steps(), 20u);
  EXPECT_NEAR(r.time.back() - 0.0, 1.0, 1e-12);
  for (std::size_t k = 0; k < 20; ++k) {
    EXPECT_NEAR(r.s_ref[k], 0.7 * static_cast<double>(k + 1), 1e-9);
    EXPECT_EQ(r.psi_ref[k], 0.0);  // straight lead-in
    EXPECT_GE(r.v_ref[k], 0.0);
  }
}

TEST(ReferenceWindow, EndOfTrajectory) {
  const ReferenceTrajectory t = default_path();
  EXPECT_THROW(reference_window(t, t.duration() - 0.5, 20, 0.05), TrajectoryError);
}

TEST(TrajectoryCsv, RoundTrip) {
  const ReferenceTrajectory t = default_path();
  std::stringstream ss;
  write_trajectory_csv(t, ss);
  const ReferenceTrajectory back = read_trajectory_csv(ss);
  ASSERT_EQ(back.size(), t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    EXPECT_EQ(back.X[i], t.X[i]);
    EXPECT_EQ(back.psi[i], t.psi[i]);
    EXPECT_EQ(back.t[i], t.t[i]);
  }
}

}  // namespace
}  // namespace ftmpc
