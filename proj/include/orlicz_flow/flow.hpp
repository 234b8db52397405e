#pragma once

// The support-function evolution
//
//     dh/dt = -F + h,      F = f(x) K h / (G(grad h + h x) phi(h)),
//
// advanced by Heun's method (explicit trapezoidal) with positivity and
// convexity guards (dt halving down to dt_min), a stability-based adaptive
// step, and a dual stopping rule: stationarity residual sup-norm, or an
// energy-slope stall.  Stationary points satisfy
// phi(h) G(grad h + h x) det(hess h + h I) = f.

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "orlicz_flow/body_geometry.hpp"
#include "orlicz_flow/errors.hpp"
#include "orlicz_flow/logging.hpp"
#include "orlicz_flow/problem_data.hpp"
#include "orlicz_flow/sphere_grid.hpp"

namespace orlicz_flow {

struct GuardFlags {
  long halvings = 0;            // total dt halvings over the run
  long steps_with_halving = 0;  // accepted steps that needed at least one
  int last_node = -1;           // node of the most recent violation
  std::string last_quantity;    // which guard tripped there
};

struct FlowState {
  double time = 0.0;
  ScalarField h;
  double last_dt = 0.0;
  long step_index = 0;
  GuardFlags guard_flags;
};

struct FlowConfig {
  double dt0 = 0.0;      // initial step; 0 = auto (0.1 * min principal radius of h0)
  double dt_min = 1e-10;
  double safety = 0.8;   // fraction of the explicit stability limit
  long max_steps = 100000;
  double stop_residual = 1e-8;      // sup-norm stationarity tolerance
  double stop_energy_slope = 0.0;   // |dJ|/dt stall threshold, which must hold
                                    // for several consecutive steps (measured
                                    // slopes near the rounding floor of J are
                                    // noisy).  0 = auto (1e-2 * stop_residual^2,
                                    // far below the slope at the residual
                                    // target); negative disables the stall stop.
};

enum class RunStatus { converged, max_steps, guard_failure };

inline const char* to_string(RunStatus s) {
  switch (s) {
    case RunStatus::converged: return "converged";
    case RunStatus::max_steps: return "max_steps";
    case RunStatus::guard_failure: return "guard_failure";
  }
  return "?";
}

struct EnergyTraceRow {
  long step = 0;
  double time = 0.0;
  double dt = 0.0;
  double J = 0.0;
  double residual_sup_rel = 0.0;
  double residual_l2_rel = 0.0;
  double min_h = 0.0;
  double max_h = 0.0;
  double max_grad_h = 0.0;
  double min_principal_radius = 0.0;
  double max_K = 0.0;
};

struct EnergyTrace {
  std::vector<EnergyTraceRow> rows;
};

struct ResidualReport {
  ScalarField field;
  double sup_rel = 0.0;
  double l2_rel = 0.0;
};

struct RunResult {
  FlowState final_state;
  RunStatus status = RunStatus::max_steps;
  std::string stop_reason;  // "residual", "energy_slope", "max_steps", guard text
  EnergyTrace trace;
  double residual_sup_rel = 0.0;
  double residual_l2_rel = 0.0;
  ConditionReport condition;
};

namespace detail {

// Largest eigenvalue of the (negated) 6th-order second-difference symbol,
// attained at the grid's Nyquist mode: 49/18 + 3 + 3/10 + 1/45 = 272/45.
inline constexpr double kStencilSymbolMax = 272.0 / 45.0;

// Consecutive sub-threshold energy slopes required to call the run stalled.
// A single measured slope is unreliable once the true per-step energy change
// drops below the rounding noise of evaluating J.
inline constexpr int kStallRunsRequired = 5;

inline std::vector<double> speed_values(const BodyGeometry& body,
                                        const ProblemData& data,
                                        const std::vector<double>& fv) {
  const SphericalGrid& g = *body.grid;
  std::vector<double> F(static_cast<std::size_t>(g.N));
  for (int i = 0; i < g.N; ++i) {
    const auto k = static_cast<std::size_t>(i);
    const double G = eval_G(data, body.rho[i], body.u[k]);
    const double phi = eval_phi(data, body.h[i]);
    F[k] = fv[k] * body.K[i] * body.h[i] / (G * phi);
  }
  return F;
}

inline ResidualReport residual_values(const BodyGeometry& body,
                                      const ProblemData& data,
                                      const std::vector<double>& fv) {
  const SphericalGrid& g = *body.grid;
  ResidualReport rep;
  rep.field = ScalarField(g);
  double max_f = 0.0, sup = 0.0, num = 0.0, den = 0.0;
  for (int i = 0; i < g.N; ++i) {
    const auto k = static_cast<std::size_t>(i);
    const double G = eval_G(data, body.rho[i], body.u[k]);
    const double phi = eval_phi(data, body.h[i]);
    const double R = phi * G * body.detb[i] - fv[k];
    rep.field[i] = R;
    sup = std::max(sup, std::abs(R));
    max_f = std::max(max_f, fv[k]);
    num += R * R * g.weights[k];
    den += fv[k] * fv[k] * g.weights[k];
  }
  rep.sup_rel = sup / max_f;
  rep.l2_rel = std::sqrt(num / den);
  return rep;
}

inline double stable_dt(const BodyGeometry& body, const std::vector<double>& F,
                        double safety) {
  const SphericalGrid& g = *body.grid;
  double stiff = 0.0;
  for (int i = 0; i < g.N; ++i) {
    const auto k = static_cast<std::size_t>(i);
    double s = 1.0 / body.r1[i];
    if (g.n == 3) s += 1.0 / body.r2[i];
    stiff = std::max(stiff, F[k] * kStencilSymbolMax * s);
  }
  return safety * 2.0 * g.dtheta * g.dtheta / stiff;
}

// One Heun step at a fixed dt.  Throws DomainError/ConvexityError when a
// stage state violates positivity or uniform convexity.
inline std::pair<ScalarField, BodyGeometry> heun_once(
    const ScalarField& h, const std::vector<double>& F1, const ProblemData& data,
    const std::vector<double>& fv, double dt) {
  const SphericalGrid& g = *h.grid;
  ScalarField trial(g);
  for (int i = 0; i < g.N; ++i)
    trial[i] = h[i] + dt * (h[i] - F1[static_cast<std::size_t>(i)]);
  BodyGeometry geom_t = body_geometry(trial);
  const std::vector<double> F2 = speed_values(geom_t, data, fv);

  ScalarField hnew(g);
  for (int i = 0; i < g.N; ++i) {
    const auto k = static_cast<std::size_t>(i);
    hnew[i] = h[i] + 0.5 * dt * ((h[i] - F1[k]) + (trial[i] - F2[k]));
  }
  BodyGeometry geom_new = body_geometry(hnew);
  return {std::move(hnew), std::move(geom_new)};
}

// Chebyshev interpolant of a smooth 1-D function on [lo, hi]; used to make
// per-step energy evaluation cheap.  Interpolation error for the analytic
// antiderivatives here is far below every tolerance gate.
class Cheb1D {
public:
  template <class F>
  void build(double lo, double hi, int degree, F&& f) {
    lo_ = lo;
    hi_ = hi;
    const int M = degree;
    std::vector<double> fx(static_cast<std::size_t>(M));
    for (int j = 0; j < M; ++j) {
      const double y = std::cos(M_PI * (j + 0.5) / M);
      const double x = 0.5 * (lo + hi) + 0.5 * (hi - lo) * y;
      fx[static_cast<std::size_t>(j)] = f(x);
    }
    c_.assign(static_cast<std::size_t>(M), 0.0);
    for (int m = 0; m < M; ++m) {
      double acc = 0.0;
      for (int j = 0; j < M; ++j)
        acc += fx[static_cast<std::size_t>(j)] * std::cos(M_PI * m * (j + 0.5) / M);
      c_[static_cast<std::size_t>(m)] = 2.0 * acc / M;
    }
    built_ = true;
  }

  bool covers(double lo, double hi) const { return built_ && lo >= lo_ && hi <= hi_; }

  double operator()(double x) const {
    const double y = (2.0 * x - (lo_ + hi_)) / (hi_ - lo_);
    double b1 = 0.0, b2 = 0.0;
    for (int m = static_cast<int>(c_.size()) - 1; m >= 1; --m) {
      const double t = 2.0 * y * b1 - b2 + c_[static_cast<std::size_t>(m)];
      b2 = b1;
      b1 = t;
    }
    return y * b1 - b2 + 0.5 * c_[0];
  }

private:
  double lo_ = 0.0, hi_ = 0.0;
  std::vector<double> c_;
  bool built_ = false;
};

class EnergyEvaluator {
public:
  EnergyEvaluator(const ProblemData& data, const std::vector<double>& fv)
      : data_(&data), fv_(&fv) {}

  double eval(const BodyGeometry& body) {
    const double lo = std::min(body.min_h, body.min_rho);
    const double hi = std::max(body.max_h, body.max_rho);
    if (!phit_.covers(lo, hi)) {
      const double blo = 0.5 * lo, bhi = 2.0 * hi;
      phit_.build(blo, bhi, 96, [&](double t) { return phi_tilde(*data_, t); });
      gtil_.build(blo, bhi, 96, [&](double r) { return G_tilde_radial(*data_, r); });
    }
    const SphericalGrid& g = *body.grid;
    double first = 0.0, second = 0.0;
    for (int i = 0; i < g.N; ++i) {
      const auto k = static_cast<std::size_t>(i);
      first += phit_(body.h[i]) * (*fv_)[k] * g.weights[k];
      double gt = gtil_(body.rho[i]);
      if (data_->G_angular) gt *= eval_G_angular(*data_, body.u[k]);
      second += gt * body.h[i] * std::pow(body.rho[i], -static_cast<double>(g.n)) *
                body.detb[i] * g.weights[k];
    }
    return first - second;
  }

private:
  const ProblemData* data_;
  const std::vector<double>* fv_;
  Cheb1D phit_, gtil_;
};

}  // namespace detail

// F = f K h / (G(X) phi(h)), the speed factor of the evolution.
inline ScalarField speed_term(const FlowState& state, const ProblemData& data) {
  const BodyGeometry body = body_geometry(state.h);
  const auto fv = f_values(data, *state.h.grid);
  return {*state.h.grid, detail::speed_values(body, data, fv)};
}

// Stationarity residual R = phi(h) G(X) det(b) - f and its norms
// (sup-norm relative to max f; weighted L2 relative to ||f||).
inline ResidualReport residual(const FlowState& state, const ProblemData& data) {
  const BodyGeometry body = body_geometry(state.h);
  const auto fv = f_values(data, *state.h.grid);
  return detail::residual_values(body, data, fv);
}

// One guarded Heun step: halves dt (down to dt_min) while the trial state
// violates h > 0 or uniform convexity.
inline FlowState step(const FlowState& state, const ProblemData& data, double dt,
                      double dt_min = 1e-12) {
  if (!(dt > 0.0)) throw ConfigError("step needs dt > 0");
  const BodyGeometry geom = body_geometry(state.h);
  const auto fv = f_values(data, *state.h.grid);
  const auto F1 = detail::speed_values(geom, data, fv);

  FlowState next = state;
  double dt_try = dt;
  for (;;) {
    try {
      auto [hnew, geom_new] = detail::heun_once(state.h, F1, data, fv, dt_try);
      next.h = std::move(hnew);
      next.time = state.time + dt_try;
      next.last_dt = dt_try;
      next.step_index = state.step_index + 1;
      if (next.guard_flags.halvings > state.guard_flags.halvings)
        ++next.guard_flags.steps_with_halving;
      return next;
    } catch (const ConvexityError& e) {
      ++next.guard_flags.halvings;
      next.guard_flags.last_node = e.node();
      next.guard_flags.last_quantity = e.quantity();
    } catch (const DomainError& e) {
      ++next.guard_flags.halvings;
      next.guard_flags.last_node = e.node();
      next.guard_flags.last_quantity = "h";
    }
    dt_try *= 0.5;
    if (dt_try < dt_min)
      throw GuardFailure(next.guard_flags.last_quantity,
                         next.guard_flags.last_node, dt_try);
  }
}

// Full run loop: adaptive dt from the explicit stability limit, guards,
// energy/residual trace, stopping on residual, energy stall, or max_steps.
inline RunResult run(
    const ProblemData& data, const ScalarField& h0, const FlowConfig& config,
    const std::function<void(const FlowState&, const BodyGeometry&)>& observer = {}) {
  const SphericalGrid& g = *h0.grid;
  if (!(config.dt_min > 0.0)) throw ConfigError("flow.dt_min must be positive");
  if (!(config.safety > 0.0 && config.safety < 1.0))
    throw ConfigError("flow.safety must lie in (0,1)");
  if (!(config.stop_residual > 0.0))
    throw ConfigError("flow.stop_residual must be positive");
  if (config.max_steps < 0) throw ConfigError("flow.max_steps must be >= 0");

  RunResult result;
  const auto fv = f_values(data, g);
  result.condition = check_condition(data, g);
  if (result.condition.verdict != ConditionVerdict::satisfied)
    logging::warn(std::string("solvability condition ") +
                  to_string(result.condition.verdict) +
                  "; the run proceeds and records what happens");

  BodyGeometry geom = body_geometry(h0);

  FlowConfig cfg = config;
  if (cfg.dt0 <= 0.0) cfg.dt0 = 0.1 * geom.min_principal_radius;
  if (cfg.dt0 < cfg.dt_min) cfg.dt0 = cfg.dt_min;
  const bool stall_enabled = !(cfg.stop_energy_slope < 0.0);
  if (cfg.stop_energy_slope == 0.0)
    cfg.stop_energy_slope = 1e-2 * cfg.stop_residual * cfg.stop_residual;

  FlowState state;
  state.h = h0;

  ResidualReport res = detail::residual_values(geom, data, fv);
  result.residual_sup_rel = res.sup_rel;
  result.residual_l2_rel = res.l2_rel;
  if (res.sup_rel <= cfg.stop_residual) {
    result.final_state = std::move(state);
    result.status = RunStatus::converged;
    result.stop_reason = "residual";
    return result;
  }

  detail::EnergyEvaluator energy_eval(data, fv);
  double J_prev = energy_eval.eval(geom);
  auto F = detail::speed_values(geom, data, fv);
  double dt_next = std::min(cfg.dt0, detail::stable_dt(geom, F, cfg.safety));
  int stall_runs = 0;

  while (state.step_index < cfg.max_steps) {
    double dt_try = dt_next;
    bool halved = false;
    for (;;) {
      try {
        auto [hnew, geom_new] = detail::heun_once(state.h, F, data, fv, dt_try);
        state.h = std::move(hnew);
        geom = std::move(geom_new);
        break;
      } catch (const ConvexityError& e) {
        ++state.guard_flags.halvings;
        state.guard_flags.last_node = e.node();
        state.guard_flags.last_quantity = e.quantity();
        halved = true;
      } catch (const DomainError& e) {
        ++state.guard_flags.halvings;
        state.guard_flags.last_node = e.node();
        state.guard_flags.last_quantity = "h";
        halved = true;
      }
      dt_try *= 0.5;
      if (dt_try < cfg.dt_min) {
        result.final_state = state;
        result.status = RunStatus::guard_failure;
        result.stop_reason = "guard failure: " + state.guard_flags.last_quantity +
                             " at node " + std::to_string(state.guard_flags.last_node);
        logging::error(result.stop_reason);
        return result;
      }
    }
    if (halved) ++state.guard_flags.steps_with_halving;

    state.time += dt_try;
    state.last_dt = dt_try;
    ++state.step_index;

    res = detail::residual_values(geom, data, fv);
    const double J = energy_eval.eval(geom);

    EnergyTraceRow row;
    row.step = state.step_index;
    row.time = state.time;
    row.dt = dt_try;
    row.J = J;
    row.residual_sup_rel = res.sup_rel;
    row.residual_l2_rel = res.l2_rel;
    row.min_h = geom.min_h;
    row.max_h = geom.max_h;
    row.max_grad_h = geom.max_abs_grad;
    row.min_principal_radius = geom.min_principal_radius;
    row.max_K = geom.max_K;
    result.trace.rows.push_back(row);

    if (observer) observer(state, geom);

    if (state.step_index % 1000 == 0)
      logging::debug("step " + std::to_string(state.step_index) + " t=" +
                     std::to_string(state.time) + " residual=" +
                     std::to_string(res.sup_rel));

    if (res.sup_rel <= cfg.stop_residual) {
      result.final_state = std::move(state);
      result.status = RunStatus::converged;
      result.stop_reason = "residual";
      result.residual_sup_rel = res.sup_rel;
      result.residual_l2_rel = res.l2_rel;
      return result;
    }
    if (stall_enabled) {
      if (std::abs(J - J_prev) / dt_try <= cfg.stop_energy_slope)
        ++stall_runs;
      else
        stall_runs = 0;
      if (stall_runs >= detail::kStallRunsRequired) {
        result.final_state = std::move(state);
        result.status = RunStatus::max_steps;
        result.stop_reason = "energy_slope";
        result.residual_sup_rel = res.sup_rel;
        result.residual_l2_rel = res.l2_rel;
        return result;
      }
    }
    J_prev = J;

    F = detail::speed_values(geom, data, fv);
    dt_next = detail::stable_dt(geom, F, cfg.safety);
  }

  result.final_state = std::move(state);
  result.status = RunStatus::max_steps;
  result.stop_reason = "max_steps";
  result.residual_sup_rel = res.sup_rel;
  result.residual_l2_rel = res.l2_rel;
  return result;
}

}  // namespace orlicz_flow
