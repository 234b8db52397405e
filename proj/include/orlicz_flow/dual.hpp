#pragma once

#include <cmath>

namespace orlicz_flow {

// Forward-mode first-order dual number: value + one derivative channel.
// Arithmetic and the function set of the expression DSL are overloaded so
// any templated evaluation (expressions, stencil residuals) can be
// differentiated exactly by seeding d = 1 on the quantity of interest.
struct Dual {
  double v = 0.0;  // value
  double d = 0.0;  // derivative

  Dual() = default;
  Dual(double value) : v(value), d(0.0) {}  // NOLINT: implicit promotion wanted
  Dual(double value, double deriv) : v(value), d(deriv) {}
};

inline Dual operator+(Dual a, Dual b) { return {a.v + b.v, a.d + b.d}; }
inline Dual operator-(Dual a, Dual b) { return {a.v - b.v, a.d - b.d}; }
inline Dual operator-(Dual a) { return {-a.v, -a.d}; }
inline Dual operator*(Dual a, Dual b) { return {a.v * b.v, a.d * b.v + a.v * b.d}; }
inline Dual operator/(Dual a, Dual b) {
  const double inv = 1.0 / b.v;
  const double q = a.v * inv;
  return {q, (a.d - q * b.d) * inv};
}
inline Dual& operator+=(Dual& a, Dual b) { a = a + b; return a; }
inline Dual& operator-=(Dual& a, Dual b) { a = a - b; return a; }
inline Dual& operator*=(Dual& a, Dual b) { a = a * b; return a; }
inline Dual& operator/=(Dual& a, Dual b) { a = a / b; return a; }

inline bool operator<(Dual a, Dual b) { return a.v < b.v; }
inline bool operator>(Dual a, Dual b) { return a.v > b.v; }
inline bool operator<=(Dual a, Dual b) { return a.v <= b.v; }
inline bool operator>=(Dual a, Dual b) { return a.v >= b.v; }

inline Dual exp(Dual a) {
  const double e = std::exp(a.v);
  return {e, e * a.d};
}
inline Dual log(Dual a) { return {std::log(a.v), a.d / a.v}; }
inline Dual sin(Dual a) { return {std::sin(a.v), std::cos(a.v) * a.d}; }
inline Dual cos(Dual a) { return {std::cos(a.v), -std::sin(a.v) * a.d}; }
inline Dual sqrt(Dual a) {
  const double s = std::sqrt(a.v);
  return {s, 0.5 * a.d / s};
}
inline Dual abs(Dual a) { return a.v < 0.0 ? Dual{-a.v, -a.d} : Dual{a.v, a.d}; }
inline Dual pow(Dual a, double b) {
  const double p = std::pow(a.v, b);
  // d/dx a(x)^b = b a^(b-1) a'.  Avoids log(a), so exact-zero derivative
  // channels stay exact, negative bases with integer exponents work, and b
  // may hit integer fast paths.
  return {p, b * std::pow(a.v, b - 1.0) * a.d};
}
inline Dual pow(Dual a, Dual b) {
  // Constant exponents (the only kind expression literals produce) take the
  // log-free rule so bases may be negative; a genuinely varying exponent
  // requires a > 0.
  if (b.d == 0.0) return pow(a, b.v);
  const double p = std::pow(a.v, b.v);
  return {p, p * (b.d * std::log(a.v) + b.v * a.d / a.v)};
}
inline Dual pow(double a, Dual b) {
  const double p = std::pow(a, b.v);
  return {p, p * std::log(a) * b.d};
}

inline bool isfinite(Dual a) { return std::isfinite(a.v) && std::isfinite(a.d); }

// Helpers so templated code can treat double and Dual uniformly.
inline double value_of(double x) { return x; }
inline double value_of(Dual x) { return x.v; }

}  // namespace orlicz_flow
