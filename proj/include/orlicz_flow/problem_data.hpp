#pragma once

// Problem data (phi, G, f) for the equation
//
//     phi(h) * G(grad h + h x) * det(hess h + h I) = f(x)   on S^{n-1},
//
// held as expression ASTs, plus the solvability scan (the sandwich condition
// on psi(s) = phi(s) * max_{|y|=s} G(y) * s^{n-1}) and the scaling-based
// uniqueness check.
//
// G splits multiplicatively into a radial and an optional angular part:
// G(y) = G_radial(|y|) * G_angular(y/|y|).  The builtin lp_dual{p,q}
// shortcut means phi(s) = s^{1-p}, G(y) = |y|^{q-n}.

#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "orlicz_flow/dual.hpp"
#include "orlicz_flow/errors.hpp"
#include "orlicz_flow/expression.hpp"
#include "orlicz_flow/sphere_grid.hpp"

namespace orlicz_flow {

struct ProblemData {
  int n = 2;

  bool lp_dual = false;
  double p = 0.0, q = 0.0;

  std::optional<ExpressionAst> phi;        // variable s
  std::optional<ExpressionAst> G_radial;   // variable r
  std::optional<ExpressionAst> G_angular;  // variables u1..un (default 1)
  std::optional<ExpressionAst> f;          // variables x1..xn

  // Nodal override for f, used for manufactured problems whose data is
  // produced by the discrete operators themselves and has no closed form.
  std::optional<std::vector<double>> f_nodal;
};

inline ProblemData make_lp_dual(int n, double p, double q,
                                const std::string& f_text = "1") {
  ProblemData d;
  d.n = n;
  d.lp_dual = true;
  d.p = p;
  d.q = q;
  std::vector<std::string> xvars;
  for (int i = 1; i <= n; ++i) xvars.push_back("x" + std::to_string(i));
  d.f = parse_expression(f_text, xvars);
  return d;
}

inline ProblemData make_orlicz(int n, const std::string& phi_text,
                               const std::string& g_radial_text,
                               const std::string& f_text,
                               const std::optional<std::string>& g_angular_text =
                                   std::nullopt) {
  ProblemData d;
  d.n = n;
  d.phi = parse_expression(phi_text, {"s"});
  d.G_radial = parse_expression(g_radial_text, {"r"});
  if (g_angular_text) {
    std::vector<std::string> uvars;
    for (int i = 1; i <= n; ++i) uvars.push_back("u" + std::to_string(i));
    d.G_angular = parse_expression(*g_angular_text, uvars);
  }
  std::vector<std::string> xvars;
  for (int i = 1; i <= n; ++i) xvars.push_back("x" + std::to_string(i));
  d.f = parse_expression(f_text, xvars);
  return d;
}

// --- pointwise evaluation ---------------------------------------------------

template <class Scalar>
Scalar eval_phi(const ProblemData& data, Scalar s) {
  using std::pow;
  Scalar out;
  if (data.lp_dual) {
    out = pow(s, 1.0 - data.p);
  } else {
    out = data.phi->eval(std::vector<Scalar>{s});
  }
  const double v = value_of(out);
  if (!std::isfinite(v) || v <= 0.0)
    throw ModelError("phi must be positive and finite, got " + std::to_string(v) +
                     " at s = " + std::to_string(value_of(s)));
  return out;
}

template <class Scalar>
Scalar eval_G_radial(const ProblemData& data, Scalar r) {
  using std::pow;
  Scalar out;
  if (data.lp_dual) {
    out = pow(r, data.q - static_cast<double>(data.n));
  } else {
    out = data.G_radial->eval(std::vector<Scalar>{r});
  }
  const double v = value_of(out);
  if (!std::isfinite(v) || v <= 0.0)
    throw ModelError("G must be positive and finite, got " + std::to_string(v) +
                     " at r = " + std::to_string(value_of(r)));
  return out;
}

template <class Scalar>
Scalar eval_G_angular(const ProblemData& data, const std::array<Scalar, 3>& u) {
  if (!data.G_angular) return Scalar(1.0);
  std::vector<Scalar> vars(static_cast<std::size_t>(data.n));
  for (int i = 0; i < data.n; ++i) vars[static_cast<std::size_t>(i)] = u[static_cast<std::size_t>(i)];
  Scalar out = data.G_angular->eval(vars);
  const double v = value_of(out);
  if (!std::isfinite(v) || v <= 0.0)
    throw ModelError("G_angular must be positive and finite, got " + std::to_string(v));
  return out;
}

template <class Scalar>
Scalar eval_G(const ProblemData& data, Scalar r, const std::array<Scalar, 3>& u) {
  return eval_G_radial(data, r) * eval_G_angular(data, u);
}

inline double eval_f(const ProblemData& data, const std::array<double, 3>& x) {
  std::vector<double> vars(static_cast<std::size_t>(data.n));
  for (int i = 0; i < data.n; ++i) vars[static_cast<std::size_t>(i)] = x[static_cast<std::size_t>(i)];
  const double v = data.f->eval(vars);
  if (!std::isfinite(v) || v <= 0.0)
    throw ModelError("f must be positive and finite, got " + std::to_string(v));
  return v;
}

// Nodal table of f on a grid, honoring the manufactured-data override.
inline std::vector<double> f_values(const ProblemData& data,
                                    const SphericalGrid& grid) {
  if (data.f_nodal) {
    if (static_cast<int>(data.f_nodal->size()) != grid.N)
      throw ConfigError("nodal f override has wrong length");
    for (double v : *data.f_nodal)
      if (!std::isfinite(v) || v <= 0.0)
        throw ModelError("nodal f override must be positive and finite");
    return *data.f_nodal;
  }
  std::vector<double> out(static_cast<std::size_t>(grid.N));
  for (int i = 0; i < grid.N; ++i)
    out[static_cast<std::size_t>(i)] = eval_f(data, grid.node_x(i));
  return out;
}

// --- antiderivatives ---------------------------------------------------------
//
// phi_tilde(t) = int_1^t ds / phi(s),     G_tilde(r,u) = int_1^r G(s,u) s^{n-1} ds,
// both with base point 1, by adaptive Gauss-Kronrod quadrature (tol 1e-10).

namespace detail {

template <class F>
double antiderivative_from_one(F&& integrand, double t) {
  if (t == 1.0) return 0.0;
  const double a = std::min(1.0, t), b = std::max(1.0, t);
  const double sign = t >= 1.0 ? 1.0 : -1.0;
  const double val = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
      integrand, a, b, 15, 1e-10);
  return sign * val;
}

}  // namespace detail

inline double phi_tilde(const ProblemData& data, double t) {
  if (!(t > 0.0)) throw ModelError("phi_tilde needs t > 0");
  return detail::antiderivative_from_one(
      [&](double s) { return 1.0 / eval_phi(data, s); }, t);
}

inline double G_tilde_radial(const ProblemData& data, double r) {
  if (!(r > 0.0)) throw ModelError("G_tilde needs r > 0");
  const double nm1 = static_cast<double>(data.n) - 1.0;
  return detail::antiderivative_from_one(
      [&](double s) { return eval_G_radial(data, s) * std::pow(s, nm1); }, r);
}

inline double G_tilde(const ProblemData& data, double r,
                      const std::array<double, 3>& u) {
  return G_tilde_radial(data, r) * eval_G_angular(data, u);
}

// --- solvability condition ---------------------------------------------------

struct ConditionScan {
  double s_min = 1e-6;
  double s_max = 1e6;
  int count = 121;
};

enum class ConditionVerdict { satisfied, violated, inconclusive };

struct ConditionReport {
  ConditionVerdict verdict = ConditionVerdict::inconclusive;
  double upper_proxy = 0.0;  // max of psi (with max_u G) over the top decade
  double lower_proxy = 0.0;  // min of psi (with min_u G) over the bottom decade
  double min_f = 0.0;
  double max_f = 0.0;
  double margin_upper = 0.0;  // min_f - upper_proxy
  double margin_lower = 0.0;  // lower_proxy - max_f
  std::string diagnostic;
};

inline const char* to_string(ConditionVerdict v) {
  switch (v) {
    case ConditionVerdict::satisfied: return "satisfied";
    case ConditionVerdict::violated: return "violated";
    case ConditionVerdict::inconclusive: return "inconclusive";
  }
  return "?";
}

// psi(s) = phi(s) * [extreme of G over directions sampled on the grid] * s^{n-1},
// scanned log-spaced; the sandwich requires psi < min f at large s and
// psi > max f at small s.  A finite scan cannot certify the limits, so the
// verdict degrades to "inconclusive" when psi is not monotone near an end.
inline ConditionReport check_condition(const ProblemData& data,
                                       const SphericalGrid& grid,
                                       const ConditionScan& scan = {}) {
  if (!(scan.s_min > 0.0) || !(scan.s_min < scan.s_max) || scan.count < 2)
    throw ConfigError("condition scan needs 0 < s_min < s_max and count >= 2");

  ConditionReport rep;
  try {
    double gmax = 1.0, gmin = 1.0;
    if (data.G_angular) {
      gmax = 0.0;
      gmin = 0.0;
      for (int i = 0; i < grid.N; ++i) {
        const double v = eval_G_angular(data, grid.node_x(i));
        if (i == 0) { gmax = gmin = v; }
        gmax = std::max(gmax, v);
        gmin = std::min(gmin, v);
      }
    }

    const auto fv = f_values(data, grid);
    rep.min_f = fv[0];
    rep.max_f = fv[0];
    for (double v : fv) {
      rep.min_f = std::min(rep.min_f, v);
      rep.max_f = std::max(rep.max_f, v);
    }

    const double lg_min = std::log10(scan.s_min);
    const double lg_max = std::log10(scan.s_max);
    const double step = (lg_max - lg_min) / (scan.count - 1);
    const double nm1 = static_cast<double>(data.n) - 1.0;

    std::vector<double> lg(static_cast<std::size_t>(scan.count));
    std::vector<double> psi_hi(static_cast<std::size_t>(scan.count));
    std::vector<double> psi_lo(static_cast<std::size_t>(scan.count));
    for (int k = 0; k < scan.count; ++k) {
      const auto j = static_cast<std::size_t>(k);
      lg[j] = lg_min + step * k;
      const double s = std::pow(10.0, lg[j]);
      const double base = eval_phi(data, s) * eval_G_radial(data, s) * std::pow(s, nm1);
      psi_hi[j] = base * gmax;
      psi_lo[j] = base * gmin;
    }

    // Decade windows at the two ends of the scan.
    const double top_cut = lg_max - 1.0 - 1e-9;
    const double bot_cut = lg_min + 1.0 + 1e-9;
    bool first = true;
    bool inc_top = true, dec_top = true, inc_bot = true, dec_bot = true;
    double prev_hi = 0.0, prev_lo = 0.0;
    for (int k = 0; k < scan.count; ++k) {
      const auto j = static_cast<std::size_t>(k);
      if (lg[j] >= top_cut) {
        if (first || psi_hi[j] > rep.upper_proxy) rep.upper_proxy = psi_hi[j];
        first = false;
      }
    }
    first = true;
    for (int k = 0; k < scan.count; ++k) {
      const auto j = static_cast<std::size_t>(k);
      if (lg[j] <= bot_cut) {
        if (first || psi_lo[j] < rep.lower_proxy) rep.lower_proxy = psi_lo[j];
        first = false;
      }
    }
    bool have_prev = false;
    for (int k = 0; k < scan.count; ++k) {
      const auto j = static_cast<std::size_t>(k);
      if (lg[j] >= top_cut) {
        if (have_prev) {
          if (psi_hi[j] > prev_hi) dec_top = false;
          if (psi_hi[j] < prev_hi) inc_top = false;
        }
        prev_hi = psi_hi[j];
        have_prev = true;
      }
    }
    have_prev = false;
    for (int k = 0; k < scan.count; ++k) {
      const auto j = static_cast<std::size_t>(k);
      if (lg[j] <= bot_cut) {
        if (have_prev) {
          if (psi_lo[j] > prev_lo) dec_bot = false;
          if (psi_lo[j] < prev_lo) inc_bot = false;
        }
        prev_lo = psi_lo[j];
        have_prev = true;
      }
    }

    rep.margin_upper = rep.min_f - rep.upper_proxy;
    rep.margin_lower = rep.lower_proxy - rep.max_f;

    if (!(inc_top || dec_top) || !(inc_bot || dec_bot)) {
      rep.verdict = ConditionVerdict::inconclusive;
      rep.diagnostic = "psi is not monotone near the scan ends; the limit "
                       "behavior cannot be certified from a finite scan";
    } else if (rep.margin_upper > 0.0 && rep.margin_lower > 0.0) {
      rep.verdict = ConditionVerdict::satisfied;
    } else {
      rep.verdict = ConditionVerdict::violated;
    }
  } catch (const std::exception& e) {
    rep.verdict = ConditionVerdict::inconclusive;
    rep.diagnostic = std::string("evaluation failed during scan: ") + e.what();
  }
  return rep;
}

// --- uniqueness condition -----------------------------------------------------
//
// The scaling comparison: solutions are unique when for all s1, s2 > 0 and
// every lambda in (0,1)
//     phi(lambda s1) G(lambda s2) > phi(s1) G(s2) lambda^{1-n}.
// Sampling can refute the hypothesis (exhibit a triple where <= holds) but
// only support it, never prove it.

struct UniquenessSamples {
  std::vector<double> s_grid = {0.01, 0.1, 1.0, 10.0, 100.0};
  std::vector<double> lambda_grid = {0.05, 0.10, 0.15, 0.20, 0.25, 0.30, 0.35,
                                     0.40, 0.45, 0.50, 0.55, 0.60, 0.65, 0.70,
                                     0.75, 0.80, 0.85, 0.90, 0.95};
};

struct UniquenessWitness {
  double s1 = 0.0, s2 = 0.0, lambda = 0.0;
};

struct UniquenessVerdict {
  bool supported = false;
  std::optional<UniquenessWitness> witness;  // set when refuted
};

inline UniquenessVerdict check_uniqueness_condition(
    const ProblemData& data, const UniquenessSamples& samples = {}) {
  if (data.G_angular) {
    // Accept an explicitly isotropic "1"; reject anything direction-dependent.
    static const std::array<std::array<double, 3>, 4> probes = {{
        {1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}, {-0.6, 0.8, 0.0}, {0.0, 0.0, 1.0}}};
    for (const auto& u : probes) {
      if (data.n == 2 && u[2] != 0.0) continue;
      if (eval_G_angular(data, u) != 1.0)
        throw NotApplicableError(
            "the uniqueness condition assumes G(y) = G(|y|); G_angular is "
            "direction-dependent");
    }
  }
  for (double s : samples.s_grid)
    if (!(s > 0.0)) throw ConfigError("uniqueness s-grid must be positive");
  for (double l : samples.lambda_grid)
    if (!(l > 0.0 && l < 1.0))
      throw ConfigError("uniqueness lambda-grid must lie in (0,1)");

  const double nm1 = static_cast<double>(data.n) - 1.0;
  for (double s1 : samples.s_grid) {
    for (double s2 : samples.s_grid) {
      const double rhs_base = eval_phi(data, s1) * eval_G_radial(data, s2);
      for (double lambda : samples.lambda_grid) {
        const double lhs =
            eval_phi(data, lambda * s1) * eval_G_radial(data, lambda * s2);
        const double rhs = rhs_base * std::pow(lambda, -nm1);
        // Relative guard: only a strict exceedance counts as the inequality
        // failing; ties (the p = q case) refute.
        if (!(lhs > rhs * (1.0 + 1e-12))) {
          UniquenessVerdict v;
          v.supported = false;
          v.witness = UniquenessWitness{s1, s2, lambda};
          return v;
        }
      }
    }
  }
  UniquenessVerdict v;
  v.supported = true;
  return v;
}

}  // namespace orlicz_flow
