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

#ifndef FTMPC_TRAJECTORY_HPP_
#define FTMPC_TRAJECTORY_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "ftmpc/dynamics.hpp"

namespace ftmpc {

class TrajectoryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ProjectionLostError : public TrajectoryError {
 public:
  using TrajectoryError::TrajectoryError;
};

inline double wrap_angle(double a) {
  a = std::remainder(a, 2.0 * std::numbers::pi);
  if (a <= -std::numbers::pi) a += 2.0 * std::numbers::pi;
  return a;
}

// Arc-length sampled reference path with a time law.
struct ReferenceTrajectory {
  std::vector<double> X;
  std::vector<double> Y;
  std::vector<double> psi;  // unwrapped tangent heading
  std::vector<double> s;
  std::vector<double> v;
  std::vector<double> t;
  double spacing = 0.1;

  std::size_t size() const { return s.size(); }
  double duration() const { return t.empty() ? 0.0 : t.back(); }
  double length() const { return s.empty() ? 0.0 : s.back(); }

  // Index i with s[i] <= query < s[i+1], clamped to valid segments.
  std::size_t segment_at_s(double query) const {
    auto it = std::upper_bound(s.begin(), s.end(), query);
    std::size_t i = it == s.begin() ? 0 : static_cast<std::size_t>(it - s.begin()) - 1;
    return std::min(i, size() - 2);
  }

  double heading_at_s(double query) const {
    const std::size_t i = segment_at_s(query);
    const double a = std::clamp((query - s[i]) / (s[i + 1] - s[i]), 0.0, 1.0);
    return psi[i] + a * (psi[i + 1] - psi[i]);
  }

  double speed_at_s(double query) const {
    const std::size_t i = segment_at_s(query);
    const double a = std::clamp((query - s[i]) / (s[i + 1] - s[i]), 0.0, 1.0);
    return v[i] + a * (v[i + 1] - v[i]);
  }

  double s_at_time(double time) const {
    auto it = std::upper_bound(t.begin(), t.end(), time);
    std::size_t i = it == t.begin() ? 0 : static_cast<std::size_t>(it - t.begin()) - 1;
    i = std::min(i, size() - 2);
    const double a = std::clamp((time - t[i]) / (t[i + 1] - t[i]), 0.0, 1.0);
    return s[i] + a * (s[i + 1] - s[i]);
  }

  void validate() const {
    const std::size_t n = size();
    if (n < 2 || X.size() != n || Y.size() != n || psi.size() != n || v.size() != n ||
        t.size() != n) {
      throw TrajectoryError("ReferenceTrajectory: inconsistent sample arrays");
    }
    for (std::size_t i = 1; i < n; ++i) {
      if (!(s[i] > s[i - 1])) throw TrajectoryError("ReferenceTrajectory: s not increasing");
      if (!(t[i] > t[i - 1])) throw TrajectoryError("ReferenceTrajectory: t not increasing");
    }
  }
};

struct SineWithDwell {
  double speed = 14.0;              // [m/s]
  double lateral_amplitude = 0.43;  // [m]
  double frequency = 0.7;           // [Hz]
  double dwell = 0.5;               // [s]
  double lead_in = 1.5;             // straight section before the sine [s]
  double duration = 12.0;           // total trajectory time [s]
  double spacing = 0.1;             // arc-length sample spacing [m]
  double mu_max = 1.0;

  // Lateral motion time after the lead-in.
  double maneuver_time() const { return 1.5 / frequency + dwell; }

  // Peak lateral acceleration of the sine part at constant forward speed.
  double peak_lateral_accel() const {
    const double w = 2.0 * std::numbers::pi * frequency;
    return lateral_amplitude * w * w;
  }
};

namespace detail {

// Lateral offset Y(X) of the sine-with-dwell path and its first two
// derivatives. The swing from +A to -A is half a sine period; entry and exit
// are half-cosine ramps one half wavelength long so the heading is continuous.
struct LateralProfile {
  double x0, wavelength, amplitude, dwell_length;

  double length() const { return 1.5 * wavelength + dwell_length; }

  void eval(double x, double& y, double& dy, double& ddy) const {
    y = dy = ddy = 0.0;
    const double k = 2.0 * std::numbers::pi / wavelength;
    const double a = amplitude;
    const double half = 0.5 * wavelength;
    const double u = x - x0;
    if (u <= 0.0 || u >= length()) return;
    if (u < half) {
      y = 0.5 * a * (1.0 - std::cos(k * u));
      dy = 0.5 * a * k * std::sin(k * u);
      ddy = 0.5 * a * k * k * std::cos(k * u);
    } else if (u < wavelength) {
      const double v = u - half + 0.25 * wavelength;
      y = a * std::sin(k * v);
      dy = a * k * std::cos(k * v);
      ddy = -a * k * k * std::sin(k * v);
    } else if (u < wavelength + dwell_length) {
      y = -a;
    } else {
      const double w = u - wavelength - dwell_length;
      y = -0.5 * a * (1.0 + std::cos(k * w));
      dy = 0.5 * a * k * std::sin(k * w);
      ddy = 0.5 * a * k * k * std::cos(k * w);
    }
  }
};

}  // namespace detail

inline ReferenceTrajectory build_sine_with_dwell(const SineWithDwell& m) {
  if (!(m.speed > 0.0)) throw TrajectoryError("build_sine_with_dwell: speed must be positive");
  if (!(m.frequency > 0.0) || m.dwell < 0.0 || m.lead_in < 0.0 || !(m.spacing > 0.0)) {
    throw TrajectoryError("build_sine_with_dwell: invalid maneuver parameters");
  }
  const double maneuver_time = m.lead_in + m.maneuver_time();
  if (m.duration < maneuver_time) {
    throw TrajectoryError("build_sine_with_dwell: duration shorter than the maneuver");
  }
  if (m.peak_lateral_accel() > m.mu_max * kGravity) {
    throw TrajectoryError("build_sine_with_dwell: peak lateral acceleration exceeds mu_max g");
  }

  const detail::LateralProfile prof{m.speed * m.lead_in, m.speed / m.frequency,
                                    m.lateral_amplitude, m.speed * m.dwell};
  const double total_s = m.speed * m.duration;

  // Fine integration of arc length over X, then resample at fixed spacing.
  const double dx = m.spacing / 20.0;
  std::vector<double> xs{0.0};
  std::vector<double> arc{0.0};
  double y, dy, ddy;
  prof.eval(0.0, y, dy, ddy);
  double prev_g = std::sqrt(1.0 + dy * dy);
  while (arc.back() < total_s + m.spacing) {
    const double x = xs.back() + dx;
    prof.eval(x, y, dy, ddy);
    const double g = std::sqrt(1.0 + dy * dy);
    arc.push_back(arc.back() + 0.5 * (g + prev_g) * dx);
    xs.push_back(x);
    prev_g = g;
  }

  ReferenceTrajectory traj;
  traj.spacing = m.spacing;
  const auto n = static_cast<std::size_t>(std::floor(total_s / m.spacing + 1e-9)) + 1;
  std::size_t j = 0;
  double max_lat_accel = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double si = static_cast<double>(i) * m.spacing;
    while (j + 2 < arc.size() && arc[j + 1] < si) ++j;
    const double a = (si - arc[j]) / (arc[j + 1] - arc[j]);
    const double x = xs[j] + a * (xs[j + 1] - xs[j]);
    prof.eval(x, y, dy, ddy);
    traj.X.push_back(x);
    traj.Y.push_back(y);
    traj.psi.push_back(std::atan(dy));
    traj.s.push_back(si);
    traj.v.push_back(m.speed);
    traj.t.push_back(si / m.speed);
    const double curvature = ddy / std::pow(1.0 + dy * dy, 1.5);
    max_lat_accel = std::max(max_lat_accel, std::abs(curvature) * m.speed * m.speed);
  }
  if (max_lat_accel > m.mu_max * kGravity) {
    throw TrajectoryError("build_sine_with_dwell: path curvature exceeds mu_max g at speed");
  }
  traj.validate();
  return traj;
}

struct FrenetPose {
  double s = 0.0;
  double d = 0.0;
  double heading_error = 0.0;  // psi - psi_ref, wrapped to (-pi, pi]
  double ref_heading = 0.0;
  std::size_t index = 0;       // hint for the next projection
};

inline constexpr std::size_t kProjectionWindow = 300;

// Projects a pose onto the path, searching near the hint index.
inline FrenetPose project_to_frenet(double X, double Y, double psi,
                                    const ReferenceTrajectory& traj, std::size_t hint = 0) {
  const std::size_t n = traj.size();
  if (n < 2) throw TrajectoryError("project_to_frenet: empty trajectory");
  hint = std::min(hint, n - 1);
  const std::size_t lo = hint > kProjectionWindow ? hint - kProjectionWindow : 0;
  const std::size_t hi = std::min(n - 1, hint + kProjectionWindow);

  std::size_t best = lo;
  double best_d2 = INFINITY;
  for (std::size_t i = lo; i <= hi; ++i) {
    const double dx = X - traj.X[i];
    const double dy = Y - traj.Y[i];
    const double d2 = dx * dx + dy * dy;
    if (d2 < best_d2) {
      best_d2 = d2;
      best = i;
    }
  }
  if ((best == lo && lo > 0) || (best == hi && hi < n - 1)) {
    throw ProjectionLostError("project_to_frenet: nearest sample at search window boundary");
  }

  FrenetPose out;
  double best_seg_d2 = INFINITY;
  const std::size_t first = best > 0 ? best - 1 : 0;
  const std::size_t last = std::min(best, n - 2);
  for (std::size_t i = first; i <= last; ++i) {
    const double ex = traj.X[i + 1] - traj.X[i];
    const double ey = traj.Y[i + 1] - traj.Y[i];
    const double len2 = ex * ex + ey * ey;
    const double px = X - traj.X[i];
    const double py = Y - traj.Y[i];
    const double a = std::clamp((px * ex + py * ey) / len2, 0.0, 1.0);
    const double rx = px - a * ex;
    const double ry = py - a * ey;
    const double d2 = rx * rx + ry * ry;
    if (d2 < best_seg_d2) {
      best_seg_d2 = d2;
      out.s = traj.s[i] + a * (traj.s[i + 1] - traj.s[i]);
      out.d = (ex * py - ey * px) / std::sqrt(len2);
      out.ref_heading = traj.psi[i] + a * (traj.psi[i + 1] - traj.psi[i]);
    }
  }
  out.heading_error = wrap_angle(psi - out.ref_heading);
  out.index = best;
  return out;
}

// Reference values at the future controller samples t_now + k T_S, k = 1..N_P.
struct ReferenceSample {
  std::vector<double> time;
  std::vector<double> s_ref;
  std::vector<double> psi_ref;
  std::vector<double> v_ref;
  // Path heading at the positions the vehicle is predicted to pass; feeds the
  // reference-heading term of the prediction.
  std::vector<double> path_heading;

  std::size_t steps() const { return s_ref.size(); }
};

inline ReferenceSample reference_window(const ReferenceTrajectory& traj, double t_now, int n_p,
                                        double ts) {
  if (n_p <= 0 || !(ts > 0.0)) throw TrajectoryError("reference_window: invalid horizon");
  if (t_now + n_p * ts > traj.duration() + 1e-9) {
    throw TrajectoryError("reference_window: horizon runs past the end of the trajectory");
  }
  ReferenceSample r;
  for (int k = 1; k <= n_p; ++k) {
    const double tk = t_now + k * ts;
    const double sk = traj.s_at_time(tk);
    r.time.push_back(tk);
    r.s_ref.push_back(sk);
    r.psi_ref.push_back(traj.heading_at_s(sk));
    r.v_ref.push_back(traj.speed_at_s(sk));
  }
  return r;
}

// Fills path_heading for a vehicle at s_now moving at constant speed vx.
inline void preview_path_heading(ReferenceSample& r, const ReferenceTrajectory& traj,
                                 double s_now, double vx, double ts) {
  r.path_heading.clear();
  for (std::size_t k = 1; k <= r.steps(); ++k) {
    r.path_heading.push_back(traj.heading_at_s(s_now + vx * ts * static_cast<double>(k)));
  }
}

inline void write_trajectory_csv(const ReferenceTrajectory& traj, std::ostream& os) {
  os << "t,X,Y,psi,s,v\n";
  os << std::setprecision(17);
  for (std::size_t i = 0; i < traj.size(); ++i) {
    os << traj.t[i] << ',' << traj.X[i] << ',' << traj.Y[i] << ',' << traj.psi[i] << ','
       << traj.s[i] << ',' << traj.v[i] << '\n';
  }
}

inline ReferenceTrajectory read_trajectory_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line.rfind("t,X,Y,psi,s,v", 0) != 0) {
    throw TrajectoryError("read_trajectory_csv: missing header 't,X,Y,psi,s,v'");
  }
  ReferenceTrajectory traj;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    double vals[6];
    for (double& v : vals) {
      if (!std::getline(ss, cell, ',')) throw TrajectoryError("read_trajectory_csv: short row");
      v = std::stod(cell);
    }
    traj.t.push_back(vals[0]);
    traj.X.push_back(vals[1]);
    traj.Y.push_back(vals[2]);
    traj.psi.push_back(vals[3]);
    traj.s.push_back(vals[4]);
    traj.v.push_back(vals[5]);
  }
  if (traj.size() >= 2) traj.spacing = traj.s[1] - traj.s[0];
  traj.validate();
  return traj;
}

}  // namespace ftmpc

#endif  // FTMPC_TRAJECTORY_HPP_
