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

// Dense convex QP with hard box bounds and softened linear rows:
//
//   min  1/2 z'Hz + g'z + c0 + rho/2 * sum_i dist(G_i z + c_i, [lo_i, hi_i])^2
//   s.t. zlo <= z <= zhi
//
// Solved by a primal active-set method on the box, wrapped in a Newton-type
// iteration over the set of violated soft rows with exact line search. Every
// accepted iterate lowers the objective.

#ifndef FTMPC_QP_HPP_
#define FTMPC_QP_HPP_

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

namespace ftmpc {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class QpStatus { kOptimal, kMaxIterations, kInfeasibleRelaxed };

inline const char* to_string(QpStatus s) {
  switch (s) {
    case QpStatus::kOptimal:
      return "optimal";
    case QpStatus::kMaxIterations:
      return "max-iterations";
    case QpStatus::kInfeasibleRelaxed:
      return "infeasible-relaxed";
  }
  return "unknown";
}

struct QpProblem {
  Eigen::MatrixXd H;
  Eigen::VectorXd g;
  double constant = 0.0;
  Eigen::VectorXd lower;  // hard box, -inf for none
  Eigen::VectorXd upper;  // hard box, +inf for none

  // Soft rows G z + c in [soft_lower, soft_upper]; infinite sides are void.
  Eigen::MatrixXd G;
  Eigen::VectorXd c;
  Eigen::VectorXd soft_lower;
  Eigen::VectorXd soft_upper;
  double soft_weight = 1e4;

  int num_vars() const { return static_cast<int>(g.size()); }
  int num_soft() const { return static_cast<int>(c.size()); }

  // Box-only problem of the given size.
  static QpProblem box(Eigen::MatrixXd H, Eigen::VectorXd g, Eigen::VectorXd lower,
                       Eigen::VectorXd upper) {
    QpProblem qp;
    const auto n = g.size();
    qp.H = std::move(H);
    qp.g = std::move(g);
    qp.lower = std::move(lower);
    qp.upper = std::move(upper);
    qp.G.resize(0, n);
    qp.c.resize(0);
    qp.soft_lower.resize(0);
    qp.soft_upper.resize(0);
    return qp;
  }

  // Amount by which each soft row leaves its interval (signed: + above, - below).
  Eigen::VectorXd soft_violation(const Eigen::VectorXd& z) const {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(num_soft());
    if (num_soft() == 0) return v;
    const Eigen::VectorXd a = G * z + c;
    for (int i = 0; i < num_soft(); ++i) {
      if (a[i] > soft_upper[i]) {
        v[i] = a[i] - soft_upper[i];
      } else if (a[i] < soft_lower[i]) {
        v[i] = a[i] - soft_lower[i];
      }
    }
    return v;
  }

  double objective(const Eigen::VectorXd& z) const {
    const Eigen::VectorXd v = soft_violation(z);
    return 0.5 * z.dot(H * z) + g.dot(z) + constant + 0.5 * soft_weight * v.squaredNorm();
  }

  Eigen::VectorXd gradient(const Eigen::VectorXd& z) const {
    Eigen::VectorXd grad = H * z + g;
    if (num_soft() > 0) grad += soft_weight * (G.transpose() * soft_violation(z));
    return grad;
  }
};

struct KktResiduals {
  double stationarity = 0.0;    // |grad| on free variables
  double primal = 0.0;          // box violation
  double complementarity = 0.0; // wrong-signed multipliers on active bounds

  double max() const { return std::max({stationarity, primal, complementarity}); }
};

inline KktResiduals kkt_residuals(const QpProblem& qp, const Eigen::VectorXd& z,
                                  double active_tol = 1e-9) {
  KktResiduals r;
  const Eigen::VectorXd grad = qp.gradient(z);
  const double scale = 1.0 + qp.g.cwiseAbs().maxCoeff();
  for (int i = 0; i < qp.num_vars(); ++i) {
    const double lo = qp.lower[i];
    const double hi = qp.upper[i];
    r.primal = std::max({r.primal, lo - z[i], z[i] - hi});
    const double width = 1.0 + std::abs(z[i]);
    const bool at_lo = std::isfinite(lo) && z[i] <= lo + active_tol * width;
    const bool at_hi = std::isfinite(hi) && z[i] >= hi - active_tol * width;
    if (at_lo && at_hi) continue;
    if (at_lo) {
      r.complementarity = std::max(r.complementarity, -grad[i] / scale);
    } else if (at_hi) {
      r.complementarity = std::max(r.complementarity, grad[i] / scale);
    } else {
      r.stationarity = std::max(r.stationarity, std::abs(grad[i]) / scale);
    }
  }
  r.primal = std::max(r.primal, 0.0);
  return r;
}

struct QpSolution {
  Eigen::VectorXd z;
  QpStatus status = QpStatus::kOptimal;
  double objective = 0.0;
  int iterations = 0;
  KktResiduals kkt;
};

struct QpOptions {
  int max_iterations = 500;
  double tolerance = 1e-10;
  double relaxed_violation = 1e-3;  // soft violation above which a solve is flagged relaxed
  std::vector<double>* objective_trace = nullptr;
};

namespace detail {

// Primal active-set method for min 1/2 z'Hz + g'z over lo <= z <= hi.
// Returns the iteration count; z holds the final iterate.
inline int solve_box_qp(const Eigen::MatrixXd& H, const Eigen::VectorXd& g,
                        const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
                        Eigen::VectorXd& z, int max_iterations, double tol, bool& converged) {
  const int n = static_cast<int>(g.size());
  // 0 free, -1 at lower, +1 at upper
  std::vector<int> state(n, 0);
  z = z.cwiseMax(lo).cwiseMin(hi);
  Eigen::VectorXd grad = H * z + g;
  for (int i = 0; i < n; ++i) {
    if (z[i] <= lo[i] && grad[i] > 0.0) state[i] = -1;
    if (z[i] >= hi[i] && grad[i] < 0.0) state[i] = 1;
  }
  const double gscale = 1.0 + g.cwiseAbs().maxCoeff() + H.cwiseAbs().maxCoeff();
  converged = false;
  int it = 0;
  for (; it < max_iterations; ++it) {
    std::vector<int> free;
    for (int i = 0; i < n; ++i) {
      if (state[i] == 0) free.push_back(i);
    }
    Eigen::VectorXd p = Eigen::VectorXd::Zero(n);
    if (!free.empty()) {
      const int nf = static_cast<int>(free.size());
      Eigen::MatrixXd Hff(nf, nf);
      Eigen::VectorXd rhs(nf);
      for (int a = 0; a < nf; ++a) {
        rhs[a] = -grad[free[a]];
        for (int b = 0; b < nf; ++b) Hff(a, b) = H(free[a], free[b]);
      }
      Eigen::LDLT<Eigen::MatrixXd> ldlt(Hff);
      Eigen::VectorXd pf = ldlt.solve(rhs);
      if (!pf.allFinite() || ldlt.info() != Eigen::Success) {
        Hff.diagonal().array() += 1e-10 * gscale;
        pf = Hff.ldlt().solve(rhs);
      }
      for (int a = 0; a < nf; ++a) p[free[a]] = pf[a];
    }

    if (p.cwiseAbs().maxCoeff() <= tol * (1.0 + z.cwiseAbs().maxCoeff())) {
      // Stationary on the working set: check multiplier signs.
      int worst = -1;
      double worst_val = -tol * gscale;
      for (int i = 0; i < n; ++i) {
        const double mult = state[i] == -1 ? grad[i] : (state[i] == 1 ? -grad[i] : 0.0);
        if (mult < worst_val) {
          worst_val = mult;
          worst = i;
        }
      }
      if (worst < 0) {
        converged = true;
        return it;
      }
      state[worst] = 0;
      continue;
    }

    double step = 1.0;
    int blocking = -1;
    int blocking_side = 0;
    for (int i = 0; i < n; ++i) {
      if (state[i] != 0) continue;
      if (p[i] < 0.0 && std::isfinite(lo[i])) {
        const double a = (lo[i] - z[i]) / p[i];
        if (a < step) {
          step = std::max(a, 0.0);
          blocking = i;
          blocking_side = -1;
        }
      } else if (p[i] > 0.0 && std::isfinite(hi[i])) {
        const double a = (hi[i] - z[i]) / p[i];
        if (a < step) {
          step = std::max(a, 0.0);
          blocking = i;
          blocking_side = 1;
        }
      }
    }
    z += step * p;
    if (blocking >= 0) {
      z[blocking] = blocking_side < 0 ? lo[blocking] : hi[blocking];
      state[blocking] = blocking_side;
    }
    grad = H * z + g;
  }
  return it;
}

}  // namespace detail

inline QpSolution solve_qp(const QpProblem& qp,
                           const std::optional<Eigen::VectorXd>& warm_start = std::nullopt,
                           const QpOptions& opt = {}) {
  const int n = qp.num_vars();
  QpSolution sol;
  bool relaxed = false;

  Eigen::VectorXd lo = qp.lower;
  Eigen::VectorXd hi = qp.upper;
  for (int i = 0; i < n; ++i) {
    if (lo[i] > hi[i]) {
      lo[i] = hi[i] = 0.5 * (lo[i] + hi[i]);
      relaxed = true;
    }
  }

  Eigen::VectorXd z = Eigen::VectorXd::Zero(n);
  if (warm_start && warm_start->size() == n && warm_start->allFinite()) z = *warm_start;
  z = z.cwiseMax(lo).cwiseMin(hi);
  if (opt.objective_trace) opt.objective_trace->push_back(qp.objective(z));

  const int m = qp.num_soft();
  const double rho = qp.soft_weight;
  bool converged = false;
  int total_iterations = 0;

  for (int outer = 0; outer < opt.max_iterations; ++outer) {
    // Quadratic model with the currently violated soft rows switched on.
    const Eigen::VectorXd viol = qp.soft_violation(z);
    Eigen::MatrixXd Hm = qp.H;
    Eigen::VectorXd gm = qp.g;
    std::vector<int> active;
    for (int i = 0; i < m; ++i) {
      if (viol[i] != 0.0) active.push_back(i);
    }
    if (!active.empty()) {
      const int na = static_cast<int>(active.size());
      Eigen::MatrixXd Ga(na, n);
      Eigen::VectorXd ca(na);
      for (int a = 0; a < na; ++a) {
        const int i = active[a];
        Ga.row(a) = qp.G.row(i);
        ca[a] = qp.c[i] - (viol[i] > 0.0 ? qp.soft_upper[i] : qp.soft_lower[i]);
      }
      Hm.noalias() += rho * Ga.transpose() * Ga;
      gm.noalias() += rho * Ga.transpose() * ca;
    }

    Eigen::VectorXd z_model = z;
    bool inner_ok = false;
    total_iterations += detail::solve_box_qp(Hm, gm, lo, hi, z_model,
                                             opt.max_iterations, opt.tolerance, inner_ok);
    const Eigen::VectorXd dz = z_model - z;
    if (dz.cwiseAbs().maxCoeff() <= opt.tolerance * (1.0 + z.cwiseAbs().maxCoeff())) {
      converged = inner_ok;
      break;
    }

    // Exact line search on the convex piecewise-quadratic objective.
    double t = 1.0;
    if (m > 0) {
      const Eigen::VectorXd a0 = qp.G * z + qp.c;
      const Eigen::VectorXd da = qp.G * dz;
      const Eigen::VectorXd Hdz = qp.H * dz;
      const double lin0 = qp.g.dot(dz) + z.dot(Hdz);
      const double quad = dz.dot(Hdz);
      auto slope = [&](double s) {
        double d = lin0 + s * quad;
        for (int i = 0; i < m; ++i) {
          const double ai = a0[i] + s * da[i];
          if (ai > qp.soft_upper[i]) {
            d += rho * (ai - qp.soft_upper[i]) * da[i];
          } else if (ai < qp.soft_lower[i]) {
            d += rho * (ai - qp.soft_lower[i]) * da[i];
          }
        }
        return d;
      };
      if (slope(1.0) > 0.0) {
        double a = 0.0;
        double b = 1.0;
        for (int k = 0; k < 60; ++k) {
          const double mid = 0.5 * (a + b);
          (slope(mid) > 0.0 ? b : a) = mid;
        }
        t = 0.5 * (a + b);
      }
    }
    const double f_old = qp.objective(z);
    Eigen::VectorXd z_new = z + t * dz;
    z_new = z_new.cwiseMax(lo).cwiseMin(hi);
    if (qp.objective(z_new) > f_old) z_new = z;
    const bool stalled = (z_new - z).cwiseAbs().maxCoeff() == 0.0;
    z = z_new;
    if (opt.objective_trace) opt.objective_trace->push_back(qp.objective(z));
    if (stalled) {
      converged = inner_ok;
      break;
    }
  }

  sol.z = z;
  sol.iterations = total_iterations;
  sol.objective = qp.objective(z);
  sol.kkt = kkt_residuals(qp, z);
  if (!converged) {
    sol.status = QpStatus::kMaxIterations;
  } else if (relaxed ||
             (m > 0 && qp.soft_violation(z).cwiseAbs().maxCoeff() > opt.relaxed_violation)) {
    sol.status = QpStatus::kInfeasibleRelaxed;
  } else {
    sol.status = QpStatus::kOptimal;
  }
  return sol;
}

}  // namespace ftmpc

#endif  // FTMPC_QP_HPP_
