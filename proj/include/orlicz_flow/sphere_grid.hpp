#pragma once

// Discretization of the unit sphere S^{n-1} and covariant derivatives of
// scalar fields on it.
//
// n = 2: the circle, uniform nodes theta_i = 2*pi*i/N, periodic.
// n = 3: axisymmetric bodies only; fields depend on the polar angle and
//        live at theta_i = (i + 1/2)*pi/N (poles excluded).  Quadrature
//        weights are the exact cell integrals of 2*pi*sin(theta), so the
//        weights sum to 4*pi exactly (a plain midpoint weight would miss
//        by O(dtheta^2)).
//
// Derivatives use 6th-order central differences, written in difference
// form so constant fields are annihilated exactly in floating point.
// Periodic wrap for n = 2; even reflection across the poles for n = 3
// (smooth axisymmetric functions have even extensions there).

#include <array>
#include <cmath>
#include <utility>
#include <vector>

#include "orlicz_flow/errors.hpp"

namespace orlicz_flow {

struct SphericalGrid {
  int n = 2;       // ambient dimension (sphere is S^{n-1})
  int N = 0;       // node count
  double dtheta = 0.0;
  std::vector<double> theta;
  std::vector<double> cos_theta;
  std::vector<double> sin_theta;
  std::vector<double> weights;  // quadrature for integrals over S^{n-1}

  double area() const { return n == 2 ? 2.0 * M_PI : 4.0 * M_PI; }

  // Outward unit direction of node i.  For n = 3 the meridian plane y = 0
  // carries the whole axisymmetric problem: x = (sin t, 0, cos t).
  std::array<double, 3> node_x(int i) const {
    const auto k = static_cast<std::size_t>(i);
    if (n == 2) return {cos_theta[k], sin_theta[k], 0.0};
    return {sin_theta[k], 0.0, cos_theta[k]};
  }
};

inline SphericalGrid build_grid(int n, int N) {
  if (n != 2 && n != 3)
    throw ConfigError("grid dimension must be 2 or 3, got " + std::to_string(n));
  if (N < 16)
    throw ConfigError("grid needs at least 16 nodes, got " + std::to_string(N));

  SphericalGrid g;
  g.n = n;
  g.N = N;
  const auto count = static_cast<std::size_t>(N);
  g.theta.resize(count);
  g.cos_theta.resize(count);
  g.sin_theta.resize(count);
  g.weights.resize(count);

  if (n == 2) {
    g.dtheta = 2.0 * M_PI / N;
    for (std::size_t i = 0; i < count; ++i) {
      g.theta[i] = 2.0 * M_PI * static_cast<double>(i) / N;
      g.cos_theta[i] = std::cos(g.theta[i]);
      g.sin_theta[i] = std::sin(g.theta[i]);
      g.weights[i] = 2.0 * M_PI / N;  // trapezoid on a periodic grid
    }
  } else {
    g.dtheta = M_PI / N;
    for (std::size_t i = 0; i < count; ++i) {
      g.theta[i] = (static_cast<double>(i) + 0.5) * M_PI / N;
      g.cos_theta[i] = std::cos(g.theta[i]);
      g.sin_theta[i] = std::sin(g.theta[i]);
      // cell integral of 2*pi*sin: 2*pi*(cos(t - d/2) - cos(t + d/2))
      g.weights[i] = 4.0 * M_PI * std::sin(0.5 * g.dtheta) * g.sin_theta[i];
    }
  }
  return g;
}

struct ScalarField {
  const SphericalGrid* grid = nullptr;
  std::vector<double> values;

  ScalarField() = default;
  explicit ScalarField(const SphericalGrid& g, double fill = 0.0)
      : grid(&g), values(static_cast<std::size_t>(g.N), fill) {}
  ScalarField(const SphericalGrid& g, std::vector<double> v)
      : grid(&g), values(std::move(v)) {
    if (static_cast<int>(values.size()) != g.N)
      throw ConfigError("field has " + std::to_string(values.size()) +
                        " values for a grid of " + std::to_string(g.N));
  }

  int size() const { return grid ? grid->N : 0; }
  double& operator[](int i) { return values[static_cast<std::size_t>(i)]; }
  double operator[](int i) const { return values[static_cast<std::size_t>(i)]; }
};

namespace detail {

// Index map realizing the boundary treatment: periodic wrap on the circle,
// even reflection across both poles for the axisymmetric case.
inline int stencil_index(const SphericalGrid& g, int j) {
  if (g.n == 2) {
    if (j < 0) return j + g.N;
    if (j >= g.N) return j - g.N;
    return j;
  }
  if (j < 0) return -1 - j;
  if (j >= g.N) return 2 * g.N - 1 - j;
  return j;
}

}  // namespace detail

// First and second derivative in theta, 6th-order central differences.
inline std::pair<ScalarField, ScalarField> differentiate(const ScalarField& h) {
  const SphericalGrid& g = *h.grid;
  for (int i = 0; i < g.N; ++i)
    if (!std::isfinite(h[i])) throw DomainError("nonfinite field value", i);

  ScalarField d1(g), d2(g);
  const double inv1 = 1.0 / (60.0 * g.dtheta);
  const double inv2 = 1.0 / (g.dtheta * g.dtheta);
  for (int i = 0; i < g.N; ++i) {
    const double c = h[i];
    const double p1 = h[detail::stencil_index(g, i + 1)];
    const double m1 = h[detail::stencil_index(g, i - 1)];
    const double p2 = h[detail::stencil_index(g, i + 2)];
    const double m2 = h[detail::stencil_index(g, i - 2)];
    const double p3 = h[detail::stencil_index(g, i + 3)];
    const double m3 = h[detail::stencil_index(g, i - 3)];
    d1[i] = (45.0 * (p1 - m1) - 9.0 * (p2 - m2) + (p3 - m3)) * inv1;
    d2[i] = (((p3 - c) + (m3 - c)) / 90.0 - 3.0 * ((p2 - c) + (m2 - c)) / 20.0 +
             1.5 * ((p1 - c) + (m1 - c))) * inv2;
  }
  return {std::move(d1), std::move(d2)};
}

// Quadrature over x in S^{n-1}; fixed summation order keeps runs
// bit-identical.
inline double integrate_x(const ScalarField& gfield) {
  const SphericalGrid& g = *gfield.grid;
  double sum = 0.0;
  for (int i = 0; i < g.N; ++i) sum += gfield[i] * g.weights[static_cast<std::size_t>(i)];
  return sum;
}

}  // namespace orlicz_flow
