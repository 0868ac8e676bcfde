// SPDX-License-Identifier: Apache-2.0
//
// Executable oracles: comparison principle, ratio principle, a-priori sup
// bounds, sign-change, and the power-transform residual check, each emitting
// a reproducible violation report. Continuum inequalities are tested at a
// resolution-tied tolerance, C h^{1/3} by default, matching what the scheme
// can resolve on 4/3-Hoelder profiles.
#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "ilap/dirichlet.hpp"
#include "ilap/geometry.hpp"
#include "ilap/operator.hpp"

namespace ilap::verify {

struct DomainMismatch : std::invalid_argument {
  DomainMismatch() : std::invalid_argument("fields live on different domains") {}
};
struct NonPositiveV : std::invalid_argument {
  NonPositiveV() : std::invalid_argument("ratio denominator must be positive") {}
};
struct NonPositiveField : std::invalid_argument {
  NonPositiveField() : std::invalid_argument("power transform needs a positive field") {}
};

enum class Verdict { Pass, Fail, PassWithSlack };

struct Violation {
  int node = -1;       // flat node id, or -1 for a global quantity
  double magnitude = 0.0;
};

struct ViolationReport {
  std::string check;
  std::vector<Violation> violations;  // entries exceeding the tolerance
  double tolerance = 0.0;
  double worst_slack = 0.0;  // largest sub-tolerance near-miss
  Verdict verdict = Verdict::Pass;
  std::string note;

  bool pass() const { return verdict != Verdict::Fail; }
  void record(int node, double excess) {
    if (excess > tolerance) {
      violations.push_back({node, excess});
      verdict = Verdict::Fail;
    } else if (excess > 0.0) {
      worst_slack = std::max(worst_slack, excess);
      if (verdict == Verdict::Pass) verdict = Verdict::PassWithSlack;
    }
  }
};

inline double default_tol(double h, double C = 1.0) { return C * std::cbrt(h); }

// At an interior maximum point of u - v that beats the boundary maximum, the
// reaction terms must be ordered: lambda1 u^3 >= lambda2 v^3 there.
inline ViolationReport check_comparison(const op::ScalarField& u,
                                        const op::ScalarField& v, double lambda1,
                                        double lambda2, double tol) {
  if (u.dom != v.dom || !u.dom) throw DomainMismatch();
  const auto& d = *u.dom;
  ViolationReport rep;
  rep.check = "comparison";
  rep.tolerance = tol;

  double sup_bd = -std::numeric_limits<double>::infinity();
  for (int f : d.boundary) sup_bd = std::max(sup_bd, u.values[f] - v.values[f]);
  double sup_in = -std::numeric_limits<double>::infinity();
  int argmax = -1;
  for (int f : d.interior) {
    const double diff = u.values[f] - v.values[f];
    if (diff > sup_in) { sup_in = diff; argmax = f; }
  }
  if (sup_in <= sup_bd + tol || argmax < 0) {
    rep.note = "difference peaks on the boundary; vacuous";
    return rep;
  }
  const double up = u.values[argmax], vp = v.values[argmax];
  const double lhs = lambda1 * up * up * up, rhs = lambda2 * vp * vp * vp;
  rep.record(argmax, rhs - lhs);
  if (!rep.pass()) rep.note = "interior max violates the reaction ordering";
  return rep;
}

// max of u/v over a compactly contained subdomain must be attained on its
// boundary ring; checked on concentric disks around the domain's out-center.
inline ViolationReport check_ratio_principle(const op::ScalarField& u,
                                             const op::ScalarField& v, double tol,
                                             int n_radii = 5) {
  if (u.dom != v.dom || !u.dom) throw DomainMismatch();
  const auto& d = *u.dom;
  ViolationReport rep;
  rep.check = "ratio_principle";
  rep.tolerance = tol;

  for (int f : d.interior)
    if (v.values[f] <= 0.0) throw NonPositiveV();
  for (int f : d.boundary)
    if (v.values[f] <= 0.0) throw NonPositiveV();

  for (int k = 1; k <= n_radii; ++k) {
    const double rho = d.R_out * k / (n_radii + 1.0);
    double in_max = -std::numeric_limits<double>::infinity();
    double ring_max = -std::numeric_limits<double>::infinity();
    int arg_in = -1;
    auto inside = [&](int f) {
      auto p = d.pos(f);
      return geom::dist(p, d.out_center) < rho;
    };
    for (int f : d.interior) {
      const double ratio = u.values[f] / v.values[f];
      if (inside(f)) {
        if (ratio > in_max) { in_max = ratio; arg_in = f; }
      }
    }
    // ring: usable nodes just outside the subdomain, 8-adjacent to it
    for (int f = 0; f < static_cast<int>(d.kind.size()); ++f) {
      if (!d.usable(f) || inside(f)) continue;
      const int i = f % d.nx, j = f / d.nx;
      bool touches = false;
      for (int dj = -1; dj <= 1 && !touches; ++dj)
        for (int di = -1; di <= 1 && !touches; ++di) {
          if (!di && !dj) continue;
          const int ii = i + di, jj = j + dj;
          if (ii < 0 || jj < 0 || ii >= d.nx || jj >= d.ny) continue;
          const int g = d.idx(ii, jj);
          if (d.is_interior(g) && inside(g)) touches = true;
        }
      if (touches) ring_max = std::max(ring_max, u.values[f] / v.values[f]);
    }
    if (arg_in < 0 || !std::isfinite(ring_max)) continue;  // degenerate ring
    rep.record(arg_in, in_max - ring_max);
  }
  if (!rep.pass()) rep.note = "interior ratio exceeds its boundary-ring value";
  return rep;
}

// Node-wise sup bounds for a converged solve; for 0 < lambda < lambda0 with
// constant boundary data delta, additionally the closed-form two-sided bound.
inline ViolationReport check_apriori_bounds(const dir::SolveReport& rep_in,
                                            const dir::ProblemParams& p,
                                            const dir::AnalyticBounds& b, double tol) {
  ViolationReport rep;
  rep.check = "apriori_bounds";
  rep.tolerance = tol;
  if (rep_in.outcome != dir::Outcome::Converged) {
    rep.verdict = Verdict::Fail;
    rep.note = "report is not a converged solve";
    rep.violations.push_back({-1, 0.0});
    return rep;
  }
  const auto& d = *rep_in.field.dom;
  const auto& u = rep_in.field.values;

  double sup_b = -std::numeric_limits<double>::infinity();
  double inf_b = std::numeric_limits<double>::infinity();
  for (int f : d.boundary) {
    sup_b = std::max(sup_b, u[f]);
    inf_b = std::min(inf_b, u[f]);
  }
  double sup_pos = 0.0, inf_neg = 0.0;
  for (int f : d.interior) {
    sup_pos = std::max(sup_pos, u[f]);
    inf_neg = std::min(inf_neg, u[f]);
  }

  if (p.lambda == 0.0) {
    if (sup_b - inf_b <= tol) {
      // constant data: the solution is that constant
      for (int f : d.interior) rep.record(f, std::abs(u[f] - inf_b));
    } else {
      for (int f : d.interior) {
        rep.record(f, inf_b - u[f]);
        rep.record(f, u[f] - sup_b);
      }
    }
  } else if (p.lambda < 0.0) {
    for (int f : d.interior) {
      rep.record(f, -u[f]);          // u >= 0
      rep.record(f, u[f] - sup_b);   // u < sup of boundary data
    }
  } else {
    const double c = std::cbrt(p.lambda / b.lambda0);
    for (int f : d.interior) {
      rep.record(f, u[f] - (sup_b + b.sigma * c * sup_pos));
      rep.record(f, (inf_b + c * inf_neg) - u[f]);
    }
    if (p.lambda < b.lambda0 && !p.boundary && p.delta > 0.0) {
      const double hi = p.delta / (1.0 - c);
      for (int f : d.interior) {
        rep.record(f, p.delta - u[f]);
        rep.record(f, u[f] - hi);
      }
    }
  }
  if (!rep.pass()) rep.note = "solution escapes the a-priori interval";
  return rep;
}

// A field claimed to solve the zero-boundary problem above the principal
// eigenvalue must change sign; at or below it the check is inapplicable.
inline ViolationReport check_sign_change(const std::vector<double>& values,
                                         double lambda, double lambda_hat,
                                         double tol) {
  ViolationReport rep;
  rep.check = "sign_change";
  rep.tolerance = tol;
  if (lambda <= lambda_hat) {
    rep.note = "OneSign: lambda not above the principal eigenvalue; vacuous";
    return rep;
  }
  double vmin = 0.0, vmax = 0.0;
  for (double v : values) {
    vmin = std::min(vmin, v);
    vmax = std::max(vmax, v);
  }
  // require both signs with magnitude beyond tolerance
  if (!(vmax > tol && -vmin > tol)) {
    rep.verdict = Verdict::Fail;
    rep.violations.push_back({-1, tol - std::min(vmax, -vmin)});
    rep.note = "claimed super-critical field does not change sign";
  }
  return rep;
}

// If w is a discrete sub-solution (residual >= 0) then w^q for q > 1 stays a
// sub-solution of the problem with lambda q^3; q < 1 preserves the
// super-solution sign. Residuals compared with a magnitude-scaled tolerance.
inline ViolationReport check_power_transform(const op::ScalarField& w, double lambda,
                                             const geom::WeightField& a, double q,
                                             const op::Stencil& st, double tol) {
  if (!w.dom) throw DomainMismatch();
  const auto& d = *w.dom;
  ViolationReport rep;
  rep.check = "power_transform";
  rep.tolerance = tol;

  for (int f : d.interior)
    if (w.values[f] <= 0.0) throw NonPositiveField();

  op::ScalarField wq(d);
  for (std::size_t k = 0; k < wq.values.size(); ++k)
    wq.values[k] = std::pow(std::max(w.values[k], 0.0), q);

  // classify the base field by its residual sign
  double rmin = std::numeric_limits<double>::infinity();
  double rmax = -std::numeric_limits<double>::infinity();
  auto residual = [&](const op::ScalarField& fld, double lam, int f) {
    const double wv = fld.values[f];
    return op::dinf_apply(fld, st, f) + lam * a.values[f] * wv * wv * wv;
  };
  for (int f : d.interior) {
    const double r = residual(w, lambda, f);
    rmin = std::min(rmin, r);
    rmax = std::max(rmax, r);
  }
  const bool sub = rmin >= -tol;
  const bool super = rmax <= tol;
  if (!sub && !super) {
    rep.verdict = Verdict::Fail;
    rep.violations.push_back({-1, std::max(-rmin, rmax)});
    rep.note = "base field has no definite residual sign";
    return rep;
  }
  const bool want_sub = q > 1.0 ? sub : super;
  const double lam_q = lambda * q * q * q;
  for (int f : d.interior) {
    const double wv = wq.values[f];
    const double scale = 1.0 + std::abs(lam_q) * a.values[f] * wv * wv * wv;
    const double r = residual(wq, lam_q, f) / scale;
    rep.record(f, want_sub ? -r : r);
  }
  if (!rep.pass()) rep.note = "transformed field loses its residual sign";
  return rep;
}

}  // namespace ilap::verify
