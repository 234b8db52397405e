#pragma once

// Independent stationary solver for the planar case (n = 2): damped Newton
// iteration on the nodal residual
//
//     R_i(h) = phi(h_i) G(X_i) (h''_i + h_i) - f_i,
//
// with the Jacobian assembled by forward-mode (dual-number) differentiation
// of the residual through its own 7-point stencils.  This file deliberately
// re-derives the discretization instead of calling the flow's operators, so
// the two pipelines share nothing but the model definitions.
//
// The linear solve uses a truncated SVD.  For phi = G = 1 the stationary
// equation is a Christoffel problem whose linearization is singular on the
// two-dimensional space of translations; plain LU injects O(0.1) spurious
// translation modes into the step, while dropping singular values below
// threshold * sigma_max keeps the step inside the solvable complement.

#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "orlicz_flow/body_geometry.hpp"
#include "orlicz_flow/dual.hpp"
#include "orlicz_flow/errors.hpp"
#include "orlicz_flow/logging.hpp"
#include "orlicz_flow/problem_data.hpp"
#include "orlicz_flow/sphere_grid.hpp"

namespace orlicz_flow {

struct NewtonConfig {
  double damping = 1.0;  // initial step fraction, halved when a step is rejected
  int max_iters = 50;
  double tol = 1e-10;  // residual sup-norm target
};

struct NewtonStats {
  int iterations = 0;
  double final_residual = 0.0;
  long rejected_steps = 0;
};

namespace oracle_detail {

// Residual at one node from its 7-point neighborhood s = (h_{i-3},...,h_{i+3});
// classic coefficient-form 6th-order first and second derivatives.
template <class Scalar>
Scalar node_residual(const ProblemData& data, double theta, double dtheta,
                     const std::array<Scalar, 7>& s, double f_i) {
  using std::sqrt;
  const Scalar h = s[3];
  const Scalar d1 = (-s[0] + 9.0 * s[1] - 45.0 * s[2] + 45.0 * s[4] - 9.0 * s[5] +
                     s[6]) /
                    (60.0 * dtheta);
  const Scalar d2 = (2.0 * s[0] - 27.0 * s[1] + 270.0 * s[2] - 490.0 * s[3] +
                     270.0 * s[4] - 27.0 * s[5] + 2.0 * s[6]) /
                    (180.0 * dtheta * dtheta);
  const Scalar b = d2 + h;
  const double c = std::cos(theta), sn = std::sin(theta);
  const Scalar rho = sqrt(h * h + d1 * d1);
  const std::array<Scalar, 3> u = {(h * c - d1 * sn) / rho, (h * sn + d1 * c) / rho,
                                   Scalar(0.0)};
  return eval_phi(data, h) * eval_G(data, rho, u) * b - Scalar(f_i);
}

inline std::array<double, 7> gather(const std::vector<double>& h, int i, int N) {
  std::array<double, 7> s;
  for (int o = -3; o <= 3; ++o)
    s[static_cast<std::size_t>(o + 3)] =
        h[static_cast<std::size_t>(((i + o) % N + N) % N)];
  return s;
}

// Positivity + uniform convexity of a candidate iterate, via the same
// stencils the residual uses.
inline bool admissible(const std::vector<double>& h, double dtheta) {
  const int N = static_cast<int>(h.size());
  for (int i = 0; i < N; ++i) {
    if (!(std::isfinite(h[static_cast<std::size_t>(i)]) &&
          h[static_cast<std::size_t>(i)] > 0.0))
      return false;
  }
  for (int i = 0; i < N; ++i) {
    const auto s = gather(h, i, N);
    const double d2 = (2.0 * s[0] - 27.0 * s[1] + 270.0 * s[2] - 490.0 * s[3] +
                       270.0 * s[4] - 27.0 * s[5] + 2.0 * s[6]) /
                      (180.0 * dtheta * dtheta);
    if (!(d2 + s[3] > 0.0)) return false;
  }
  return true;
}

}  // namespace oracle_detail

// Damped Newton solve of phi(h) G(grad h + h x) (h'' + h) = f on the planar
// grid.  Steps that would break positivity or convexity halve the damping;
// running out of iterations raises NonConvergenceError with the last
// residual.  `stats`, when given, reports iteration count and final residual.
inline ScalarField solve_stationary_n2(const ProblemData& data,
                                       const SphericalGrid& grid,
                                       const ScalarField& h_init,
                                       const NewtonConfig& cfg = {},
                                       NewtonStats* stats = nullptr) {
  if (grid.n != 2)
    throw NotApplicableError("the stationary Newton solver covers n = 2 only");
  if (h_init.grid != &grid)
    throw ConfigError("h_init must live on the supplied grid");
  if (!(cfg.damping > 0.0 && cfg.damping <= 1.0))
    throw ConfigError("newton.damping must lie in (0, 1]");
  if (!(cfg.tol > 0.0)) throw ConfigError("newton.tol must be positive");
  if (cfg.max_iters < 1) throw ConfigError("newton.max_iters must be >= 1");

  const int N = grid.N;
  const double dth = grid.dtheta;
  const auto fv = f_values(data, grid);

  std::vector<double> h(h_init.values);
  if (!oracle_detail::admissible(h, dth))
    throw ConvexityError("b", -1, 0.0);

  NewtonStats local;
  Eigen::VectorXd R(N);
  Eigen::MatrixXd A(N, N);

  double sup = 0.0;
  for (int iter = 0; iter <= cfg.max_iters; ++iter) {
    sup = 0.0;
    for (int i = 0; i < N; ++i) {
      const auto s = oracle_detail::gather(h, i, N);
      const double r = oracle_detail::node_residual(
          data, grid.theta[static_cast<std::size_t>(i)], dth, s,
          fv[static_cast<std::size_t>(i)]);
      R(i) = r;
      sup = std::max(sup, std::abs(r));
    }
    local.iterations = iter;
    local.final_residual = sup;
    if (sup <= cfg.tol) {
      if (stats) *stats = local;
      return {grid, std::move(h)};
    }
    if (iter == cfg.max_iters) break;

    A.setZero();
    for (int i = 0; i < N; ++i) {
      const auto s = oracle_detail::gather(h, i, N);
      for (int o = -3; o <= 3; ++o) {
        std::array<Dual, 7> sd;
        for (int m = 0; m < 7; ++m)
          sd[static_cast<std::size_t>(m)] = Dual(s[static_cast<std::size_t>(m)],
                                                 m == o + 3 ? 1.0 : 0.0);
        const Dual r = oracle_detail::node_residual(
            data, grid.theta[static_cast<std::size_t>(i)], dth, sd,
            fv[static_cast<std::size_t>(i)]);
        A(i, ((i + o) % N + N) % N) += r.d;
      }
    }

    Eigen::BDCSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
    svd.setThreshold(1e-12);
    const Eigen::VectorXd delta = svd.solve(-R);

    double lambda = cfg.damping;
    bool accepted = false;
    while (lambda >= 1e-8 * cfg.damping) {
      std::vector<double> trial(h);
      for (int i = 0; i < N; ++i)
        trial[static_cast<std::size_t>(i)] += lambda * delta(i);
      if (oracle_detail::admissible(trial, dth)) {
        h = std::move(trial);
        accepted = true;
        if (lambda < cfg.damping) ++local.rejected_steps;
        break;
      }
      lambda *= 0.5;
      ++local.rejected_steps;
    }
    if (!accepted) {
      if (stats) *stats = local;
      throw NonConvergenceError(iter, sup);
    }
  }
  if (stats) *stats = local;
  throw NonConvergenceError(local.iterations, sup);
}

// Chord-sum boundary length of a planar body; converges to the true
// perimeter (= the integral of the principal radius) at second order.
inline double polygonal_length(const BodyGeometry& body) {
  const SphericalGrid& g = *body.grid;
  if (g.n != 2)
    throw NotApplicableError("polygonal_length covers planar bodies only");
  double L = 0.0;
  for (int i = 0; i < g.N; ++i) {
    const auto& a = body.X[static_cast<std::size_t>(i)];
    const auto& b = body.X[static_cast<std::size_t>((i + 1) % g.N)];
    const double dx = b[0] - a[0], dy = b[1] - a[1];
    L += std::sqrt(dx * dx + dy * dy);
  }
  return L;
}

}  // namespace orlicz_flow
