// SPDX-License-Identifier: Apache-2.0
//
// Principal eigenvalue search. The feasible set S holds the lambda for which
// the Dirichlet problem with positive constant boundary data still has a
// bounded positive solution; its supremum is the principal eigenvalue. We
// locate it by bisecting membership between the analytic brackets, then
// normalize a solve just below the threshold to get an eigenfunction.
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

#include "ilap/dirichlet.hpp"
#include "ilap/geometry.hpp"
#include "ilap/operator.hpp"

namespace ilap::eigen {

struct BracketInversion : std::runtime_error {
  BracketInversion() : std::runtime_error("analytic eigenvalue bracket is inverted") {}
};
struct NotConverged : std::runtime_error {
  NotConverged() : std::runtime_error("no boundary level in the sequence produced a converged solve") {}
};
struct EmptyLevelSet : std::invalid_argument {
  EmptyLevelSet() : std::invalid_argument("superlevel set is empty at threshold >= 1") {}
};

enum class Membership { InS, NotInS, Inconclusive };

struct MembershipRecord {
  double lambda = 0.0;
  Membership classification = Membership::Inconclusive;
  double sup_u = 0.0;
  double hint = 0.0;  // lambda (1 + (delta/sup_u)^3), a verified-jump candidate
};

struct EigenOptions {
  double delta = 1.0;
  double tol_lambda = 1e-2;
  dir::SolveOptions solve;
  bool use_hint = true;  // jump the lower end to the growth-bound hint, re-verified
};

struct EigenEstimate {
  double lambda_hat = 0.0;
  double lo = 0.0, hi = 0.0;
  op::ScalarField eigenfunction;
  std::vector<MembershipRecord> trace;
  bool soft = false;            // some probe stalled; bracket is conservative
  double boundary_level = 0.0;  // delta / sup(u) of the normalizing solve
};

struct LevelSetReport {
  std::vector<double> thresholds;
  std::vector<double> lambda_t;
  std::vector<double> lower_bound;  // lambda_hat (1 + theta a^3 t^3 / (1 - a t)^3)
  std::vector<bool> clipped;        // threshold set was disconnected, largest kept
  double lambda_hat = 0.0;
  double theta = 0.5, alpha = 0.5;
};

inline MembershipRecord membership(const geom::GridDomain& d,
                                   const geom::WeightField& a, const op::Stencil& st,
                                   double lambda, double delta,
                                   dir::SolveOptions opts = {}) {
  if (lambda < 0.0 || delta <= 0.0)
    throw std::invalid_argument("membership: lambda >= 0 and delta > 0 required");
  // the scheme is exactly cubic-homogeneous, so the solve is run at boundary
  // level 1 and rescaled; classification is then independent of delta by
  // construction, not merely up to solver tolerances
  dir::ProblemParams p;
  p.lambda = lambda;
  p.a = &a;
  p.delta = 1.0;
  auto rep = dir::solve_dirichlet(d, p, st, opts);
  MembershipRecord rec;
  rec.lambda = lambda;
  rec.sup_u = delta * (rep.sup_history.empty() ? 1.0 : rep.sup_history.back());
  switch (rep.outcome) {
    case dir::Outcome::Converged: rec.classification = Membership::InS; break;
    case dir::Outcome::Diverged: rec.classification = Membership::NotInS; break;
    case dir::Outcome::Stalled: rec.classification = Membership::Inconclusive; break;
  }
  const double q = delta / std::max(rec.sup_u, delta);
  rec.hint = lambda * (1.0 + q * q * q);
  return rec;
}

namespace detail {

// One membership probe that keeps the converged field for warm starts. A
// solution at a smaller lambda is a sub-solution at any larger lambda, so it
// is always a valid start for probes above it.
struct Prober {
  const geom::GridDomain& d;
  const geom::WeightField& a;
  const op::Stencil& st;
  double delta;
  dir::SolveOptions base;
  op::ScalarField last_in;  // converged field at lambda_in
  double lambda_in = -1.0;

  explicit Prober(const geom::GridDomain& dom, const geom::WeightField& w,
                  const op::Stencil& s, double del, dir::SolveOptions o)
      : d(dom), a(w), st(s), delta(del), base(o), last_in(dom) {}

  MembershipRecord probe(double lambda) {
    dir::ProblemParams p;
    p.lambda = lambda;
    p.a = &a;
    p.delta = 1.0;  // normalized level; see membership()
    dir::SolveOptions o = base;
    if (lambda_in >= 0.0 && lambda >= lambda_in) o.init = &last_in;
    auto rep = dir::solve_dirichlet(d, p, st, o);
    MembershipRecord rec;
    rec.lambda = lambda;
    rec.sup_u = delta * (rep.sup_history.empty() ? 1.0 : rep.sup_history.back());
    switch (rep.outcome) {
      case dir::Outcome::Converged: rec.classification = Membership::InS; break;
      case dir::Outcome::Diverged: rec.classification = Membership::NotInS; break;
      case dir::Outcome::Stalled: rec.classification = Membership::Inconclusive; break;
    }
    const double q = delta / std::max(rec.sup_u, delta);
    rec.hint = lambda * (1.0 + q * q * q);
    if (rec.classification == Membership::InS) {
      last_in = std::move(rep.field);
      lambda_in = lambda;
    }
    return rec;
  }
};

}  // namespace detail

inline op::ScalarField extract_eigenfunction(const geom::GridDomain& d,
                                             const geom::WeightField& a,
                                             const op::Stencil& st, double lambda_lo,
                                             const std::vector<double>& deltas = {1.0, 0.5, 0.25},
                                             dir::SolveOptions opts = {},
                                             double* boundary_level = nullptr) {
  if (deltas.empty()) throw std::invalid_argument("extract_eigenfunction: empty delta sequence");
  op::ScalarField norm(d), raw(d);
  bool have_norm = false;
  double raw_del = 0.0;
  const double settle_tol = 1e-9;
  for (double del : deltas) {
    dir::ProblemParams p;
    p.lambda = lambda_lo;
    p.a = &a;
    p.delta = del;
    dir::SolveOptions o = opts;
    op::ScalarField warm(d);
    if (have_norm) {
      // the scheme is exactly cubic-homogeneous, so the previous solution
      // rescaled to the new boundary level is already (near) the answer
      for (std::size_t k = 0; k < warm.values.size(); ++k)
        warm.values[k] = raw.values[k] * (del / raw_del);
      o.init = &warm;
    }
    auto rep = dir::solve_dirichlet(d, p, st, o);
    if (rep.outcome != dir::Outcome::Converged) continue;
    double sup = 0.0;
    for (int f : d.interior) sup = std::max(sup, rep.field.values[f]);
    if (sup <= 0.0) continue;
    op::ScalarField next(d);
    for (std::size_t k = 0; k < next.values.size(); ++k)
      next.values[k] = rep.field.values[k] / sup;
    if (boundary_level) *boundary_level = del / sup;
    double change = std::numeric_limits<double>::infinity();
    if (have_norm) {
      change = 0.0;
      for (int f : d.interior)
        change = std::max(change, std::abs(next.values[f] - norm.values[f]));
    }
    norm = std::move(next);
    raw = std::move(rep.field);
    raw_del = del;
    have_norm = true;
    if (change <= settle_tol) return norm;
  }
  if (have_norm) return norm;
  throw NotConverged();
}

inline EigenEstimate estimate_principal(const geom::GridDomain& d,
                                        const geom::WeightField& a,
                                        const op::Stencil& st,
                                        EigenOptions opts = {}) {
  if (opts.tol_lambda <= 0.0)
    throw std::invalid_argument("estimate_principal: tol_lambda > 0 required");
  const auto b = dir::analytic_bounds(d, a);
  if (b.lambda0 > b.Lambda) throw BracketInversion();

  EigenEstimate est;

  double lo = b.lambda0, hi = b.Lambda;
  detail::Prober prober(d, a, st, opts.delta, opts.solve);

  while (hi - lo > opts.tol_lambda) {
    const double mid = 0.5 * (lo + hi);
    auto rec = prober.probe(mid);
    est.trace.push_back(rec);
    switch (rec.classification) {
      case Membership::InS: {
        lo = mid;
        if (opts.use_hint && rec.hint > mid && rec.hint < hi - 0.25 * opts.tol_lambda) {
          // growth-bound hint: only adopted after an independent probe agrees
          auto jump = prober.probe(rec.hint);
          est.trace.push_back(jump);
          if (jump.classification == Membership::InS) lo = rec.hint;
          else if (jump.classification == Membership::NotInS) hi = rec.hint;
          else { hi = rec.hint; est.soft = true; }
        }
        break;
      }
      case Membership::NotInS:
        hi = mid;
        break;
      case Membership::Inconclusive:
        hi = mid;
        est.soft = true;
        break;
    }
  }
  est.lo = lo;
  est.hi = hi;
  est.lambda_hat = 0.5 * (lo + hi);

  // normalize a solve at the verified lower end
  if (prober.lambda_in >= 0.0) {
    double sup = 0.0;
    for (int f : d.interior) sup = std::max(sup, prober.last_in.values[f]);
    if (sup > 0.0) {
      est.eigenfunction = prober.last_in;
      for (auto& v : est.eigenfunction.values) v /= sup;
      est.boundary_level = 1.0 / sup;  // the normalizing solve ran at level 1
      return est;
    }
  }
  est.eigenfunction =
      extract_eigenfunction(d, a, st, lo, {opts.delta, 0.5 * opts.delta},
                            opts.solve, &est.boundary_level);
  return est;
}

inline LevelSetReport level_set_analysis(
    const geom::GridDomain& d, const op::ScalarField& eigenfunction,
    const std::function<double(double, double)>& weight, const op::Stencil& st,
    std::vector<double> thresholds, EigenOptions opts = {}) {
  std::sort(thresholds.begin(), thresholds.end());
  LevelSetReport rep;
  rep.theta = 0.5;
  rep.alpha = 0.5;
  {
    auto aw = geom::WeightField::sample(d, weight);
    auto base = estimate_principal(d, aw, st, opts);
    rep.lambda_hat = base.lambda_hat;
  }
  for (double t : thresholds) {
    if (t >= 1.0) throw EmptyLevelSet();
    if (t <= 0.0) throw std::invalid_argument("level_set_analysis: thresholds in (0,1)");

    // bitmap over the parent lattice
    std::vector<std::uint8_t> bits(static_cast<std::size_t>(d.nx) * d.ny, 0);
    for (int f : d.interior)
      if (eigenfunction.values[f] > t) bits[f] = 1;

    // keep the largest 4-connected component
    std::vector<std::int32_t> comp(bits.size(), -1);
    int ncomp = 0, best = -1, best_size = 0;
    std::vector<int> stack;
    for (std::size_t s0 = 0; s0 < bits.size(); ++s0) {
      if (!bits[s0] || comp[s0] >= 0) continue;
      int size = 0;
      stack.push_back(static_cast<int>(s0));
      comp[s0] = ncomp;
      while (!stack.empty()) {
        const int f = stack.back();
        stack.pop_back();
        ++size;
        const int i = f % d.nx, j = f / d.nx;
        const int off[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
        for (auto& o : off) {
          const int ii = i + o[0], jj = j + o[1];
          if (ii < 0 || jj < 0 || ii >= d.nx || jj >= d.ny) continue;
          const int g = d.idx(ii, jj);
          if (bits[g] && comp[g] < 0) {
            comp[g] = ncomp;
            stack.push_back(g);
          }
        }
      }
      if (size > best_size) { best_size = size; best = ncomp; }
      ++ncomp;
    }
    if (best_size == 0) throw EmptyLevelSet();
    std::vector<std::uint8_t> kept(bits.size(), 0);
    for (std::size_t k = 0; k < bits.size(); ++k)
      if (bits[k] && comp[k] == best) kept[k] = 1;

    auto spec = geom::DomainSpec::from_mask(std::move(kept), d.nx, d.ny, d.origin, d.h);
    auto sub = geom::build_domain(spec);
    auto aw = geom::WeightField::sample(sub, weight);
    auto est = estimate_principal(sub, aw, st, opts);

    rep.thresholds.push_back(t);
    rep.lambda_t.push_back(est.lambda_hat);
    const double at = rep.alpha * t;
    rep.lower_bound.push_back(rep.lambda_hat *
                              (1.0 + rep.theta * at * at * at / std::pow(1.0 - at, 3)));
    rep.clipped.push_back(ncomp > 1);
  }
  return rep;
}

}  // namespace ilap::eigen
