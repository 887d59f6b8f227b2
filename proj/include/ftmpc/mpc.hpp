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

#ifndef FTMPC_MPC_HPP_
#define FTMPC_MPC_HPP_

#include <array>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>

#include <Eigen/Core>

#include "ftmpc/dynamics.hpp"
#include "ftmpc/linearize.hpp"
#include "ftmpc/qp.hpp"
#include "ftmpc/trajectory.hpp"

namespace ftmpc {

using OutputRanges = std::array<Range, yx::kSize>;
using InputRanges = std::array<Range, ux::kSize>;

struct MpcConfig {
  int n_p = 20;
  int n_c = 5;
  double ts = 0.05;
  OutputVec w_y = default_output_weights();
  InputVec w_u = default_input_weights();
  OutputRanges output_bounds = default_output_bounds(ActuatorLimits{});
  InputRanges input_bounds = default_input_bounds(ActuatorLimits{});
  double soft_weight = 1e4;

  static OutputVec default_output_weights() {
    OutputVec w = OutputVec::Zero();
    w[yx::kS] = 20.0;
    w[yx::kD] = 400.0;
    w[yx::kPsi] = 20.0;
    w[yx::kVx] = 5.0;
    w[yx::kBeta] = 1.0;
    w[yx::kYawRate] = 1.0;
    for (int k = 0; k < kNumWheels; ++k) {
      w[yx::kSteer + k] = 1.0;
      w[yx::kSlip + k] = 10.0;
      w[yx::kSlipAngle + k] = 1.0;
    }
    w[yx::kSteerDiffFront] = 1.0;
    w[yx::kSteerDiffRear] = 1.0;
    return w;
  }

  static InputVec default_input_weights() {
    InputVec w;
    for (int k = 0; k < kNumWheels; ++k) {
      w[ux::kSteerRate + k] = 0.05;
      w[ux::kSlipRate + k] = 1.0;
    }
    return w;
  }

  static OutputRanges default_output_bounds(const ActuatorLimits& lim) {
    OutputRanges r;
    r.fill(Range::none());
    for (int k = 0; k < kNumWheels; ++k) {
      r[yx::kSteer + k] = lim.steer_angle[k];
      r[yx::kSlip + k] = lim.slip[k];
      r[yx::kSlipAngle + k] = lim.slip_angle[k];
    }
    return r;
  }

  static InputRanges default_input_bounds(const ActuatorLimits& lim) {
    InputRanges r;
    for (int k = 0; k < kNumWheels; ++k) {
      r[ux::kSteerRate + k] = lim.steer_rate[k];
      r[ux::kSlipRate + k] = lim.slip_rate[k];
    }
    return r;
  }

  void validate() const {
    if (n_p <= 0 || n_c <= 0 || n_c > n_p) throw std::invalid_argument("MpcConfig: need 0 < N_C <= N_P");
    if (!(ts > 0.0)) throw std::invalid_argument("MpcConfig: ts must be positive");
    if ((w_y.array() < 0.0).any() || (w_u.array() < 0.0).any()) {
      throw std::invalid_argument("MpcConfig: weights must be non-negative");
    }
    for (const Range& r : output_bounds) {
      if (!r.is_void && r.lo > r.hi) throw std::invalid_argument("MpcConfig: output bound lo > hi");
    }
    for (const Range& r : input_bounds) {
      if (!r.is_void && r.lo > r.hi) throw std::invalid_argument("MpcConfig: input bound lo > hi");
    }
  }

  friend bool operator==(const MpcConfig& a, const MpcConfig& b) {
    return a.n_p == b.n_p && a.n_c == b.n_c && a.ts == b.ts && a.w_y == b.w_y &&
           a.w_u == b.w_u && a.output_bounds == b.output_bounds &&
           a.input_bounds == b.input_bounds && a.soft_weight == b.soft_weight;
  }
};

// Condensed MPC problem. Predicted outputs are y = Theta z + theta, stacked
// over k = 1..N_P; decision variables z are the N_C input moves du = u - u0.
struct MpcQp {
  QpProblem qp;
  Eigen::MatrixXd Theta;
  Eigen::VectorXd theta;
  Eigen::VectorXd y_ref;
  InputVec u0 = InputVec::Zero();
  int n_p = 0;
  int n_c = 0;

  int move_block(int k) const { return std::min(k, n_c - 1); }
};

inline MpcQp build_qp(const LinearizedModel& model, const ReferenceSample& refs,
                      const ControlInput& u_prev, const MpcConfig& cfg) {
  cfg.validate();
  if (static_cast<int>(refs.steps()) != cfg.n_p) {
    throw std::invalid_argument("build_qp: reference window length does not match N_P");
  }
  if (!refs.path_heading.empty() && static_cast<int>(refs.path_heading.size()) != cfg.n_p) {
    throw std::invalid_argument("build_qp: path heading preview length does not match N_P");
  }
  if (u_prev.to_vector() != model.u0) {
    throw std::invalid_argument("build_qp: model must be linearised at the previous input");
  }
  constexpr int nx = sx::kSize;
  constexpr int nu = ux::kSize;
  constexpr int ny = yx::kSize;
  const int np = cfg.n_p;
  const int nz = nu * cfg.n_c;

  MpcQp out;
  out.n_p = np;
  out.n_c = cfg.n_c;
  out.u0 = u_prev.to_vector();
  out.Theta.resize(ny * np, nz);
  out.theta.resize(ny * np);
  out.y_ref = Eigen::VectorXd::Zero(ny * np);

  Eigen::MatrixXd Phi = Eigen::MatrixXd::Zero(nx, nz);
  Eigen::VectorXd phi = Eigen::VectorXd::Zero(nx);
  for (int k = 0; k < np; ++k) {
    // Step k -> k+1 with move block min(k, N_C-1).
    Eigen::MatrixXd next = model.A * Phi;
    next.middleCols(nu * out.move_block(k), nu) += model.B;
    Phi = std::move(next);
    double heading_offset = 0.0;
    if (k > 0 && !refs.path_heading.empty()) heading_offset = refs.path_heading[k - 1] - model.ref_heading;
    phi = model.A * phi + model.r0 + model.E * heading_offset;

    out.Theta.middleRows(ny * k, ny) = model.C * Phi;
    out.theta.segment(ny * k, ny) = model.C * phi + model.h0;
    out.y_ref[ny * k + yx::kS] = refs.s_ref[k];
    out.y_ref[ny * k + yx::kPsi] = refs.psi_ref[k];
    out.y_ref[ny * k + yx::kVx] = refs.v_ref[k];
  }

  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(nz, nz);
  Eigen::VectorXd g = Eigen::VectorXd::Zero(nz);
  double constant = 0.0;
  const Eigen::VectorXd q = cfg.w_y;
  for (int k = 0; k < np; ++k) {
    const auto Tk = out.Theta.middleRows(ny * k, ny);
    const Eigen::VectorXd ek = out.theta.segment(ny * k, ny) - out.y_ref.segment(ny * k, ny);
    const Eigen::MatrixXd QT = q.asDiagonal() * Tk;
    H.noalias() += 2.0 * Tk.transpose() * QT;
    g.noalias() += 2.0 * QT.transpose() * ek;
    constant += ek.dot(q.asDiagonal() * ek);

    // Input penalty on u_k = u0 + du_block, u_ref = 0.
    const int b = out.move_block(k);
    H.block(nu * b, nu * b, nu, nu).diagonal() += 2.0 * cfg.w_u;
    g.segment(nu * b, nu) += 2.0 * cfg.w_u.cwiseProduct(out.u0);
    constant += out.u0.dot(cfg.w_u.cwiseProduct(out.u0));
  }
  H = 0.5 * (H + H.transpose());

  Eigen::VectorXd lo(nz);
  Eigen::VectorXd hi(nz);
  for (int b = 0; b < cfg.n_c; ++b) {
    for (int j = 0; j < nu; ++j) {
      const Range& r = cfg.input_bounds[j];
      lo[nu * b + j] = r.is_void ? -kInf : r.lo - out.u0[j];
      hi[nu * b + j] = r.is_void ? kInf : r.hi - out.u0[j];
    }
  }
  out.qp = QpProblem::box(std::move(H), std::move(g), std::move(lo), std::move(hi));
  out.qp.constant = constant;
  out.qp.soft_weight = cfg.soft_weight;

  int rows = 0;
  for (const Range& r : cfg.output_bounds) rows += r.is_void ? 0 : 1;
  rows *= np;
  out.qp.G.resize(rows, nz);
  out.qp.c.resize(rows);
  out.qp.soft_lower.resize(rows);
  out.qp.soft_upper.resize(rows);
  int row = 0;
  for (int k = 0; k < np; ++k) {
    for (int i = 0; i < ny; ++i) {
      const Range& r = cfg.output_bounds[i];
      if (r.is_void) continue;
      out.qp.G.row(row) = out.Theta.row(ny * k + i);
      out.qp.c[row] = out.theta[ny * k + i];
      out.qp.soft_lower[row] = r.lo;
      out.qp.soft_upper[row] = r.hi;
      ++row;
    }
  }
  return out;
}

// Tracking cost J of a move sequence, summed directly over the predicted
// sequence (no soft-constraint penalty).
inline double tracking_cost(const MpcQp& m, const Eigen::VectorXd& z, const MpcConfig& cfg) {
  constexpr int ny = yx::kSize;
  constexpr int nu = ux::kSize;
  const Eigen::VectorXd y = m.Theta * z + m.theta;
  double J = 0.0;
  for (int k = 0; k < m.n_p; ++k) {
    const Eigen::VectorXd e = y.segment(ny * k, ny) - m.y_ref.segment(ny * k, ny);
    J += e.dot(cfg.w_y.cwiseProduct(e));
    const Eigen::VectorXd u = m.u0 + z.segment(nu * m.move_block(k), nu);
    J += u.dot(cfg.w_u.cwiseProduct(u));
  }
  return J;
}

struct MpcSolution {
  ControlInput first_move;
  Eigen::MatrixXd predicted_outputs;  // N_P x 20
  QpStatus status = QpStatus::kOptimal;
  double objective = 0.0;
  int iterations = 0;
  Eigen::VectorXd moves;  // raw decision vector, for warm starting
};

inline ControlInput saturate(const ControlInput& u, const InputRanges& bounds) {
  InputVec v = u.to_vector();
  for (int j = 0; j < ux::kSize; ++j) v[j] = bounds[j].clamp(v[j]);
  return ControlInput::from_vector(v);
}

// One receding-horizon step: solve and return the first move, saturated to U.
inline std::pair<ControlInput, MpcSolution> control_step(
    const LinearizedModel& model, const ReferenceSample& refs, const ControlInput& u_prev,
    const MpcConfig& cfg, const std::optional<Eigen::VectorXd>& warm_start = std::nullopt) {
  const MpcQp m = build_qp(model, refs, u_prev, cfg);
  const QpSolution qs = solve_qp(m.qp, warm_start);
  MpcSolution sol;
  sol.status = qs.status;
  sol.objective = qs.objective;
  sol.iterations = qs.iterations;
  sol.moves = qs.z;
  const Eigen::VectorXd y = m.Theta * qs.z + m.theta;
  sol.predicted_outputs.resize(m.n_p, yx::kSize);
  for (int k = 0; k < m.n_p; ++k) {
    sol.predicted_outputs.row(k) = y.segment(yx::kSize * k, yx::kSize).transpose();
  }
  const InputVec u = m.u0 + qs.z.head(ux::kSize);
  sol.first_move = saturate(ControlInput::from_vector(u), cfg.input_bounds);
  return {sol.first_move, sol};
}

// Warm start for the next cycle: moves shifted one block and re-expressed
// relative to the input just applied.
inline Eigen::VectorXd shift_moves(const Eigen::VectorXd& moves, int n_c) {
  constexpr int nu = ux::kSize;
  Eigen::VectorXd out(moves.size());
  const Eigen::VectorXd first = moves.head(nu);
  for (int b = 0; b < n_c; ++b) {
    const int src = std::min(b + 1, n_c - 1);
    out.segment(nu * b, nu) = moves.segment(nu * src, nu) - first;
  }
  return out;
}

}  // namespace ftmpc

#endif  // FTMPC_MPC_HPP_
