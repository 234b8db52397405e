#pragma once

// All geometric quantities of a convex body derived from its support
// function h on the sphere grid:
//
//   principal radii   n=2:  b  = h'' + h
//                     n=3:  r1 = h_tt + h,  r2 = h_t*cot(t) + h
//                           (at the two nodes nearest the poles r2 uses the
//                            L'Hopital limit h_t*cot(t) -> h_tt)
//   Gauss curvature   K = 1/det(b)
//   boundary point    X = grad(h) + h*x
//   radial data       rho = sqrt(h^2 + |grad h|^2),  u = X/rho
//
// A body is rejected if h is not strictly positive (origin outside) or a
// principal radius is nonpositive (uniform convexity lost).

#include <array>
#include <cmath>
#include <utility>
#include <vector>

#include "orlicz_flow/errors.hpp"
#include "orlicz_flow/sphere_grid.hpp"

namespace orlicz_flow {

struct BodyGeometry {
  const SphericalGrid* grid = nullptr;
  ScalarField h;
  ScalarField grad;   // h' (n=2) or h_theta (n=3)
  ScalarField r1;     // h''+h; the only radius for n=2
  ScalarField r2;     // n=3 only (empty for n=2)
  ScalarField detb;   // b (n=2) or r1*r2 (n=3)
  ScalarField K;      // 1/detb
  ScalarField rho;
  std::vector<std::array<double, 3>> X;  // boundary points
  std::vector<std::array<double, 3>> u;  // X/rho, unit radial directions

  // Extremes, computed once in fixed order (used by traces and guards).
  double min_h = 0.0, max_h = 0.0;
  double max_abs_grad = 0.0;
  double min_principal_radius = 0.0;
  double max_K = 0.0;
  double min_rho = 0.0, max_rho = 0.0;
};

inline BodyGeometry body_geometry(const ScalarField& h) {
  const SphericalGrid& g = *h.grid;
  for (int i = 0; i < g.N; ++i)
    if (!(h[i] > 0.0)) throw DomainError("support function must be positive", i);

  BodyGeometry body;
  body.grid = &g;
  body.h = h;
  auto [d1, d2] = differentiate(h);
  body.grad = std::move(d1);

  body.r1 = ScalarField(g);
  body.detb = ScalarField(g);
  body.K = ScalarField(g);
  body.rho = ScalarField(g);
  const auto count = static_cast<std::size_t>(g.N);
  body.X.resize(count);
  body.u.resize(count);

  for (int i = 0; i < g.N; ++i) {
    const double v = d2[i] + h[i];
    body.r1[i] = v;
    if (!(v > 0.0)) throw ConvexityError(g.n == 2 ? "b" : "r1", i, v);
  }

  if (g.n == 3) {
    body.r2 = ScalarField(g);
    for (int i = 0; i < g.N; ++i) {
      const auto k = static_cast<std::size_t>(i);
      double v;
      if (i == 0 || i == g.N - 1) {
        v = body.r1[i];  // pole limit: h_t*cot(t) -> h_tt
      } else {
        v = body.grad[i] * (g.cos_theta[k] / g.sin_theta[k]) + h[i];
      }
      body.r2[i] = v;
      if (!(v > 0.0)) throw ConvexityError("r2", i, v);
    }
  }

  for (int i = 0; i < g.N; ++i) {
    const auto k = static_cast<std::size_t>(i);
    const double det = g.n == 2 ? body.r1[i] : body.r1[i] * body.r2[i];
    body.detb[i] = det;
    body.K[i] = 1.0 / det;
    const double hp = body.grad[i];
    body.rho[i] = std::sqrt(h[i] * h[i] + hp * hp);
    if (g.n == 2) {
      // X = h'*(-sin, cos) + h*(cos, sin)
      body.X[k] = {h[i] * g.cos_theta[k] - hp * g.sin_theta[k],
                   h[i] * g.sin_theta[k] + hp * g.cos_theta[k], 0.0};
    } else {
      // meridian plane: x = (sin t, 0, cos t), e_t = (cos t, 0, -sin t)
      body.X[k] = {h[i] * g.sin_theta[k] + hp * g.cos_theta[k], 0.0,
                   h[i] * g.cos_theta[k] - hp * g.sin_theta[k]};
    }
    const double inv_rho = 1.0 / body.rho[i];
    body.u[k] = {body.X[k][0] * inv_rho, body.X[k][1] * inv_rho,
                 body.X[k][2] * inv_rho};
  }

  body.min_h = body.max_h = h[0];
  body.max_abs_grad = 0.0;
  body.min_principal_radius = body.r1[0];
  body.max_K = body.K[0];
  body.min_rho = body.max_rho = body.rho[0];
  for (int i = 0; i < g.N; ++i) {
    body.min_h = std::min(body.min_h, h[i]);
    body.max_h = std::max(body.max_h, h[i]);
    body.max_abs_grad = std::max(body.max_abs_grad, std::abs(body.grad[i]));
    body.min_principal_radius = std::min(body.min_principal_radius, body.r1[i]);
    if (g.n == 3)
      body.min_principal_radius = std::min(body.min_principal_radius, body.r2[i]);
    body.max_K = std::max(body.max_K, body.K[i]);
    body.min_rho = std::min(body.min_rho, body.rho[i]);
    body.max_rho = std::max(body.max_rho, body.rho[i]);
  }
  return body;
}

// Integral over radial directions u in S^{n-1} of g(rho(u), u), computed on
// the x-grid through the change of variables
//   du = h(x) * rho^{-n} * det(b) dx,   u = X(x)/rho(x).
template <class GFun>
double integrate_radial(const BodyGeometry& body, GFun&& gfun) {
  const SphericalGrid& g = *body.grid;
  double sum = 0.0;
  for (int i = 0; i < g.N; ++i) {
    const auto k = static_cast<std::size_t>(i);
    const double jac =
        body.h[i] * std::pow(body.rho[i], -static_cast<double>(g.n)) * body.detb[i];
    sum += gfun(body.rho[i], body.u[k]) * jac * g.weights[k];
  }
  return sum;
}

}  // namespace orlicz_flow
