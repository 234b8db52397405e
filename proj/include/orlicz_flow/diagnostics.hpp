#pragma once

// Run diagnostics: the Lyapunov energy J, a per-step monotonicity audit,
// the dissipation identity
//
//     dJ/dt = - int (G(X)/K) h (f K / (phi G) - 1)^2 dx,
//
// the dual curvature measure of a region, and an a-priori bound report that
// compares the observed h-range of a run against the trap predicted by the
// psi-scan.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "orlicz_flow/body_geometry.hpp"
#include "orlicz_flow/errors.hpp"
#include "orlicz_flow/flow.hpp"
#include "orlicz_flow/problem_data.hpp"
#include "orlicz_flow/sphere_grid.hpp"

namespace orlicz_flow {

// J = int phi_tilde(h) f dx - int G_tilde(rho,u) du.  The u-side integral is
// pulled back to the x-grid through the radial map (no u-grid, no
// interpolation): int g(u) du = int g(u(x)) h rho^{-n} det(b) dx.
inline double energy(const FlowState& state, const ProblemData& data) {
  const BodyGeometry body = body_geometry(state.h);
  const SphericalGrid& g = *state.h.grid;
  const auto fv = f_values(data, g);
  double first = 0.0;
  for (int i = 0; i < g.N; ++i)
    first += phi_tilde(data, body.h[i]) * fv[static_cast<std::size_t>(i)] *
             g.weights[static_cast<std::size_t>(i)];
  const double second = integrate_radial(
      body, [&](double r, const std::array<double, 3>& u) { return G_tilde(data, r, u); });
  return first - second;
}

struct MonotonicityViolation {
  long step = 0;      // step index of the offending row (the later one)
  double jump = 0.0;  // J_{k+1} - J_k
  double allowance = 0.0;
};

struct MonotonicityReport {
  bool pass = true;
  std::vector<MonotonicityViolation> violations;
  double worst_excess = 0.0;  // max over pairs of jump - allowance (<= 0 iff pass)
};

// J must not rise between adjacent rows beyond the scheme's truncation
// allowance tol = 10 dt^2 (1 + |J_k|), dt taken from the later row.
inline MonotonicityReport monotonicity_report(const EnergyTrace& trace) {
  MonotonicityReport rep;
  rep.worst_excess = -std::numeric_limits<double>::infinity();
  if (trace.rows.size() < 2) {
    rep.worst_excess = 0.0;
    return rep;
  }
  for (std::size_t k = 0; k + 1 < trace.rows.size(); ++k) {
    const EnergyTraceRow& a = trace.rows[k];
    const EnergyTraceRow& b = trace.rows[k + 1];
    const double tol = 10.0 * b.dt * b.dt * (1.0 + std::abs(a.J));
    const double jump = b.J - a.J;
    rep.worst_excess = std::max(rep.worst_excess, jump - tol);
    if (jump > tol) rep.violations.push_back({b.step, jump, tol});
  }
  rep.pass = rep.violations.empty();
  return rep;
}

struct DissipationCheck {
  double lhs = 0.0;  // centered finite difference of J along the flow direction
  double rhs = 0.0;  // -int (G/K) h (f K/(phi G) - 1)^2 dx
};

// Compares dJ/dt measured by two explicit micro-steps h +- delta*(h - F)
// against the closed-form dissipation integral.  Micro-steps are independent
// of the run's own dt so the identity is tested, not the scheme.
inline DissipationCheck energy_dissipation_check(const FlowState& state,
                                                 const ProblemData& data,
                                                 double delta = 1e-5) {
  if (!(delta > 0.0)) throw ConfigError("dissipation check needs delta > 0");
  const SphericalGrid& g = *state.h.grid;
  const BodyGeometry body = body_geometry(state.h);
  const auto fv = f_values(data, g);
  const auto F = detail::speed_values(body, data, fv);

  ScalarField hp(g), hm(g);
  for (int i = 0; i < g.N; ++i) {
    const double v = state.h[i] - F[static_cast<std::size_t>(i)];
    hp[i] = state.h[i] + delta * v;
    hm[i] = state.h[i] - delta * v;
  }
  FlowState sp, sm;
  sp.h = std::move(hp);
  sm.h = std::move(hm);
  DissipationCheck out;
  out.lhs = (energy(sp, data) - energy(sm, data)) / (2.0 * delta);

  double rhs = 0.0;
  for (int i = 0; i < g.N; ++i) {
    const auto k = static_cast<std::size_t>(i);
    const double G = eval_G(data, body.rho[i], body.u[k]);
    const double phi = eval_phi(data, body.h[i]);
    const double ratio = fv[k] * body.K[i] / (phi * G) - 1.0;
    rhs -= (G / body.K[i]) * body.h[i] * ratio * ratio * g.weights[k];
  }
  out.rhs = rhs;
  return out;
}

// Curvature measure of a region E on the x-grid:
//   (1/n) int_E phi(h) G(grad h + h x) det(b) dx.
// `region` marks which grid nodes belong to E.
inline double curvature_measure(const BodyGeometry& body, const ProblemData& data,
                                const std::vector<bool>& region) {
  const SphericalGrid& g = *body.grid;
  if (static_cast<int>(region.size()) != g.N)
    throw ConfigError("region indicator size must match the grid");
  double sum = 0.0;
  for (int i = 0; i < g.N; ++i) {
    if (!region[static_cast<std::size_t>(i)]) continue;
    const auto k = static_cast<std::size_t>(i);
    sum += eval_phi(data, body.h[i]) * eval_G(data, body.rho[i], body.u[k]) *
           body.detb[i] * g.weights[k];
  }
  return sum / static_cast<double>(g.n);
}

// Region helper: nodes whose colatitude/azimuth theta lies in [a, b), with
// wrap-around when a > b.  "all" is the everywhere-true indicator.
inline std::vector<bool> region_all(const SphericalGrid& grid) {
  return std::vector<bool>(static_cast<std::size_t>(grid.N), true);
}

inline std::vector<bool> region_arc(const SphericalGrid& grid, double a, double b) {
  std::vector<bool> mask(static_cast<std::size_t>(grid.N), false);
  for (int i = 0; i < grid.N; ++i) {
    const double t = grid.theta[static_cast<std::size_t>(i)];
    const bool in = (a <= b) ? (t >= a && t < b) : (t >= a || t < b);
    mask[static_cast<std::size_t>(i)] = in;
  }
  return mask;
}

struct BoundsReport {
  bool conclusive = false;
  double C1 = std::numeric_limits<double>::quiet_NaN();  // stationary upper bound
  double C2 = std::numeric_limits<double>::quiet_NaN();  // stationary lower bound
  double trap_lo = 0.0;  // min(C2, min h0)
  double trap_hi = 0.0;  // max(C1, max h0)
  double epsilon = 0.0;  // tolerance band around the trap
  double observed_min_h = 0.0;
  double observed_max_h = 0.0;
  double observed_min_principal_radius = 0.0;
  double observed_max_K = 0.0;
  bool trapped = false;
  std::string diagnostic;

  std::string to_text() const {
    char buf[400];
    std::string out;
    auto put = [&](const char* key, double v) {
      std::snprintf(buf, sizeof buf, "%s = %.17g\n", key, v);
      out += buf;
    };
    out += std::string("conclusive = ") + (conclusive ? "yes" : "no") + "\n";
    put("C1", C1);
    put("C2", C2);
    put("trap_lo", trap_lo);
    put("trap_hi", trap_hi);
    put("epsilon", epsilon);
    put("observed_min_h", observed_min_h);
    put("observed_max_h", observed_max_h);
    put("observed_min_principal_radius", observed_min_principal_radius);
    put("observed_max_K", observed_max_K);
    out += std::string("trapped = ") + (trapped ? "yes" : "no") + "\n";
    if (!diagnostic.empty()) out += "diagnostic = " + diagnostic + "\n";
    return out;
  }
};

namespace detail {

struct PsiTables {
  std::vector<double> s, psi_hi, psi_lo;
  double min_f = 0.0, max_f = 0.0;
};

inline PsiTables psi_tables(const ProblemData& data, const SphericalGrid& grid,
                            const ConditionScan& scan) {
  if (!(scan.s_min > 0.0) || !(scan.s_min < scan.s_max) || scan.count < 2)
    throw ConfigError("condition scan needs 0 < s_min < s_max and count >= 2");
  PsiTables t;
  double gmax = 1.0, gmin = 1.0;
  if (data.G_angular) {
    for (int i = 0; i < grid.N; ++i) {
      const double v = eval_G_angular(data, grid.node_x(i));
      if (i == 0) { gmax = gmin = v; }
      gmax = std::max(gmax, v);
      gmin = std::min(gmin, v);
    }
  }
  const auto fv = f_values(data, grid);
  t.min_f = t.max_f = fv[0];
  for (double v : fv) {
    t.min_f = std::min(t.min_f, v);
    t.max_f = std::max(t.max_f, v);
  }
  const double lg_min = std::log10(scan.s_min);
  const double lg_max = std::log10(scan.s_max);
  const double step = (lg_max - lg_min) / (scan.count - 1);
  const double nm1 = static_cast<double>(data.n) - 1.0;
  t.s.resize(static_cast<std::size_t>(scan.count));
  t.psi_hi.resize(static_cast<std::size_t>(scan.count));
  t.psi_lo.resize(static_cast<std::size_t>(scan.count));
  for (int k = 0; k < scan.count; ++k) {
    const auto j = static_cast<std::size_t>(k);
    const double s = std::pow(10.0, lg_min + step * k);
    const double base = eval_phi(data, s) * eval_G_radial(data, s) * std::pow(s, nm1);
    t.s[j] = s;
    t.psi_hi[j] = base * gmax;
    t.psi_lo[j] = base * gmin;
  }
  return t;
}

}  // namespace detail

// Trapping report: the scan predicts stationary bounds
//   C1 = smallest scanned s with psi(s') < min f for every scanned s' >= s,
//   C2 = largest scanned s with psi(s') > max f for every scanned s' <= s,
// and any run must keep h inside [min(C2, min h0), max(C1, max h0)] up to
// epsilon = 10 * stop_residual.  Observed extremes come from the trace (or
// from the initial range when the run converged before its first step).
inline BoundsReport bounds_report(const EnergyTrace& trace, const ProblemData& data,
                                  const SphericalGrid& grid, double h0_min,
                                  double h0_max, double stop_residual,
                                  const ConditionScan& scan = {}) {
  if (!(h0_min > 0.0) || !(h0_max >= h0_min))
    throw ConfigError("bounds_report needs 0 < h0_min <= h0_max");
  BoundsReport rep;
  rep.epsilon = 10.0 * stop_residual;

  if (trace.rows.empty()) {
    rep.observed_min_h = h0_min;
    rep.observed_max_h = h0_max;
    rep.observed_min_principal_radius = std::numeric_limits<double>::quiet_NaN();
    rep.observed_max_K = std::numeric_limits<double>::quiet_NaN();
    rep.diagnostic = "empty trace; observed range taken from the initial state";
  } else {
    rep.observed_min_h = trace.rows[0].min_h;
    rep.observed_max_h = trace.rows[0].max_h;
    rep.observed_min_principal_radius = trace.rows[0].min_principal_radius;
    rep.observed_max_K = trace.rows[0].max_K;
    for (const auto& r : trace.rows) {
      rep.observed_min_h = std::min(rep.observed_min_h, r.min_h);
      rep.observed_max_h = std::max(rep.observed_max_h, r.max_h);
      rep.observed_min_principal_radius =
          std::min(rep.observed_min_principal_radius, r.min_principal_radius);
      rep.observed_max_K = std::max(rep.observed_max_K, r.max_K);
    }
  }

  try {
    const detail::PsiTables t = detail::psi_tables(data, grid, scan);
    const int count = static_cast<int>(t.s.size());

    int c1 = count;  // first index of the all-below-min_f tail
    while (c1 > 0 && t.psi_hi[static_cast<std::size_t>(c1 - 1)] < t.min_f) --c1;
    int c2 = -1;  // last index of the all-above-max_f prefix
    while (c2 + 1 < count && t.psi_lo[static_cast<std::size_t>(c2 + 1)] > t.max_f) ++c2;

    if (c1 >= count) {
      rep.diagnostic = "psi never falls below min f within the scan; "
                       "no upper trap bound";
      return rep;
    }
    if (c2 < 0) {
      rep.diagnostic = "psi never rises above max f within the scan; "
                       "no lower trap bound";
      return rep;
    }
    rep.C1 = t.s[static_cast<std::size_t>(c1)];
    rep.C2 = t.s[static_cast<std::size_t>(c2)];
    rep.conclusive = true;
    rep.trap_lo = std::min(rep.C2, h0_min);
    rep.trap_hi = std::max(rep.C1, h0_max);
    rep.trapped = rep.observed_min_h >= rep.trap_lo - rep.epsilon &&
                  rep.observed_max_h <= rep.trap_hi + rep.epsilon;
  } catch (const std::exception& e) {
    rep.conclusive = false;
    rep.diagnostic = std::string("evaluation failed during scan: ") + e.what();
  }
  return rep;
}

// CSV serialization of a trace; the column order is the file-format contract.
inline void write_trace_csv(std::ostream& out, const EnergyTrace& trace) {
  out << "step,time,dt,J,residual_sup_rel,residual_l2_rel,min_h,max_h,"
         "max_grad_h,min_principal_radius,max_K\n";
  char buf[40];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out << ',' << buf;
  };
  for (const auto& r : trace.rows) {
    out << r.step;
    put(r.time);
    put(r.dt);
    put(r.J);
    put(r.residual_sup_rel);
    put(r.residual_l2_rel);
    put(r.min_h);
    put(r.max_h);
    put(r.max_grad_h);
    put(r.min_principal_radius);
    put(r.max_K);
    out << '\n';
  }
}

}  // namespace orlicz_flow
