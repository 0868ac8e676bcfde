// SPDX-License-Identifier: Apache-2.0
//
// Dirichlet solver for dinf(u) + lambda a(x) u^3 = rhs with boundary data,
// by node-wise Gauss-Seidel relaxation from a sub-solution, plus the
// analytic eigenvalue brackets and a-priori sup bounds.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <thread>
#include <vector>

#include "ilap/constants.hpp"
#include "ilap/geometry.hpp"
#include "ilap/operator.hpp"

namespace ilap::dir {

struct NoPositiveMass : std::runtime_error {
  NoPositiveMass() : std::runtime_error("all weight superlevel sets are empty") {}
};
struct InvalidCap : std::invalid_argument {
  InvalidCap() : std::invalid_argument("divergence cap must exceed sup of boundary data") {}
};

struct AnalyticBounds {
  double sigma = kSigma;
  double lambda0 = 0.0;  // below: positive solutions for every delta
  double Lambda = 0.0;   // above: no positive solutions
};

inline std::vector<double> default_alpha_grid() {
  std::vector<double> g;
  for (int k = 1; k <= 18; ++k) g.push_back(0.05 * k);
  g.push_back(0.95);
  g.push_back(0.99);
  g.push_back(0.999);
  return g;
}

// lambda0 = 1/(sigma^3 mu R_out^4); Lambda = 4^4/(3^3 sigma^3 mu) * inf over
// the alpha grid of 1/(alpha rho_alpha^4).
inline AnalyticBounds analytic_bounds(const geom::GridDomain& d,
                                      const geom::WeightField& a,
                                      const std::vector<double>& alphas = default_alpha_grid()) {
  AnalyticBounds b;
  const double R4 = std::pow(d.R_out, 4);
  b.lambda0 = 1.0 / (kSigmaCubed * a.mu * R4);
  double best = std::numeric_limits<double>::infinity();
  for (double alpha : alphas) {
    const double rho = geom::superlevel_inball(d, a, alpha);
    if (rho <= 0.0) continue;
    best = std::min(best, 1.0 / (alpha * std::pow(rho, 4)));
  }
  if (!std::isfinite(best)) throw NoPositiveMass();
  b.Lambda = 256.0 / (27.0 * kSigmaCubed * a.mu) * best;
  b.Lambda = std::max(b.Lambda, b.lambda0);  // discrete metrics can graze on tiny grids
  return b;
}

struct AprioriInterval {
  bool bounded = true;
  double lo = 0.0, hi = 0.0;
};

inline AprioriInterval apriori_interval(double delta, double lambda,
                                        const AnalyticBounds& b) {
  AprioriInterval r;
  if (lambda < 0.0) {
    r.lo = 0.0;
    r.hi = delta;
  } else if (lambda == 0.0) {
    r.lo = r.hi = delta;
  } else if (lambda < b.lambda0) {
    r.lo = delta;
    r.hi = delta / (1.0 - std::cbrt(lambda / b.lambda0));
  } else {
    r.bounded = false;
    r.lo = delta;
    r.hi = std::numeric_limits<double>::infinity();
  }
  return r;
}

struct ProblemParams {
  double lambda = 0.0;
  const geom::WeightField* a = nullptr;
  double delta = 0.0;                          // constant boundary level
  const std::vector<double>* boundary = nullptr;  // per-flat-node override
  const op::ScalarField* rhs = nullptr;        // default 0
};

enum class Outcome { Converged, Diverged, Stalled };

struct SolveOptions {
  double tol = -1.0;       // default 1e-8 (1 + sup|b|)
  int max_sweeps = 100000;
  double cap = -1.0;       // default 1e4 max(sup|b|, 1)
  int threads = 1;
  double omega = 1.0;      // relaxation of the per-node root update
  bool accelerate = true;  // Aitken extrapolation of the dominant sweep mode
  double accel_gate = 0.999;   // reject jumps when the contraction ratio exceeds this
  double accel_damp = 1.0;     // fraction of the predicted jump to take
  double accel_max_jump = 50.0;  // cap on the jump multiplier
  const op::ScalarField* init = nullptr;  // warm start (must be a sub-solution)
  int residual_stride = 8;                // sweeps between residual checks
};

struct SolveReport {
  op::ScalarField field;
  int iterations = 0;
  double residual = 0.0;
  Outcome outcome = Outcome::Stalled;
  std::vector<double> sup_history;
};

namespace detail {

// Per-node solver context: usable symmetric sub-stencil, flattened.
struct Compiled {
  std::vector<std::int32_t> nb;      // neighbor flat ids, grouped per node
  std::vector<double> len;           // physical lengths, parallel to nb
  std::vector<std::int32_t> start;   // interior.size()+1 offsets
  std::vector<double> acoef;         // lambda-free weight per node
  std::vector<double> rhs;
};

inline Compiled compile(const geom::GridDomain& d, const ProblemParams& p,
                        const op::Stencil& st) {
  Compiled c;
  c.start.reserve(d.interior.size() + 1);
  c.start.push_back(0);
  std::array<std::uint8_t, 64> keep{};
  for (int node : d.interior) {
    op::detail::usable_dirs(d, st, node, keep);
    const int i = node % d.nx, j = node / d.nx;
    for (std::size_t k = 0; k < st.dirs.size(); ++k) {
      if (!keep[k]) continue;
      const auto& v = st.dirs[k];
      c.nb.push_back(d.idx(i + v.di, j + v.dj));
      c.len.push_back(v.len * d.h);
    }
    c.start.push_back(static_cast<std::int32_t>(c.nb.size()));
    c.acoef.push_back(p.a->values[node]);
    c.rhs.push_back(p.rhs ? p.rhs->values[node] : 0.0);
  }
  return c;
}

struct NodeEval {
  const double* uval;  // neighbor values snapshot
  const double* len;
  int n;
  double la;   // lambda * a(x)
  double rhs;

  // value and t-derivative of scheme(t) + la t^3 - rhs, where every slope
  // is (uval[k] - t)/len[k]
  void eval(double t, double& g, double& dg) const {
    double slope[64];
    for (int k = 0; k < n; ++k) slope[k] = (uval[k] - t) / len[k];
    struct Cls { double len, smin, smax; };
    Cls cls[8];
    int nc = 0;
    for (int k = 0; k < n; ++k) {
      int c = 0;
      while (c < nc && cls[c].len != len[k]) ++c;
      if (c == nc)
        cls[nc++] = {len[k], slope[k], slope[k]};
      else {
        cls[c].smin = std::min(cls[c].smin, slope[k]);
        cls[c].smax = std::max(cls[c].smax, slope[k]);
      }
    }
    auto phi = [](double sa, double la_, double sb, double lb, double& d) {
      const double w = 2.0 / (la_ + lb);
      double m, dm;
      if (std::abs(sa) >= std::abs(sb)) {
        m = std::abs(sa);
        dm = sa >= 0.0 ? -1.0 / la_ : 1.0 / la_;
      } else {
        m = std::abs(sb);
        dm = sb >= 0.0 ? -1.0 / lb : 1.0 / lb;
      }
      d = (2.0 * m * dm * (sa + sb) + m * m * (-1.0 / la_ - 1.0 / lb)) * w;
      return m * m * (sa + sb) * w;
    };
    double maxmin = -std::numeric_limits<double>::infinity(), dmaxmin = 0.0;
    double minmax = std::numeric_limits<double>::infinity(), dminmax = 0.0;
    for (int a = 0; a < n; ++a) {
      double lo = std::numeric_limits<double>::infinity(), dlo = 0.0;
      double hi = -std::numeric_limits<double>::infinity(), dhi = 0.0;
      for (int c = 0; c < nc; ++c) {
        double d1, d2;
        const double v1 = phi(slope[a], len[a], cls[c].smin, cls[c].len, d1);
        const double v2 = phi(slope[a], len[a], cls[c].smax, cls[c].len, d2);
        if (v1 < lo) { lo = v1; dlo = d1; }
        if (v2 > hi) { hi = v2; dhi = d2; }
      }
      if (lo > maxmin) { maxmin = lo; dmaxmin = dlo; }
      if (hi < minmax) { minmax = hi; dminmax = dhi; }
    }
    g = 0.5 * (maxmin + minmax) + la * t * t * t - rhs;
    dg = 0.5 * (dmaxmin + dminmax) + 3.0 * la * t * t;
  }
};

// Nearest root of g in the direction of sign(g(t0)) (g is nonincreasing in t
// up to the cubic reaction term): safeguarded Newton with expansion when no
// bracket exists yet. Returns the last iterate if the walk runs away; the
// caller's divergence cap handles that.
inline double node_root(const NodeEval& ne, double t0, double scale) {
  double g, dg;
  ne.eval(t0, g, dg);
  const double gtol = 1e-12 * (1.0 + std::abs(g));
  if (std::abs(g) <= gtol) return t0;
  const double dirn = g > 0.0 ? 1.0 : -1.0;
  // g falls through the sought root, so sign classifies the side:
  // g > 0 below the root, g < 0 above it.
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  (g > 0.0 ? lo : hi) = t0;
  double t = t0;
  for (int it = 0; it < 120; ++it) {
    const bool bracketed = std::isfinite(lo) && std::isfinite(hi);
    double tn;
    if (dg < -1e-300) {
      tn = t - g / dg;
      if (bracketed && (tn <= lo || tn >= hi)) tn = 0.5 * (lo + hi);
      if (!bracketed) {
        if ((tn - t) * dirn <= 0.0) tn = t + dirn * 0.05 * scale;
        if (std::abs(tn - t) > 64.0 * scale) tn = t + dirn * 64.0 * scale;
      }
    } else {
      tn = bracketed ? 0.5 * (lo + hi)
                     : t + dirn * 0.05 * scale * double(1 << std::min(it, 20));
    }
    ne.eval(tn, g, dg);
    if (!std::isfinite(g)) return tn;
    if (std::abs(g) <= gtol) return tn;
    (g > 0.0 ? lo : hi) = tn;
    if (std::isfinite(lo) && std::isfinite(hi) &&
        hi - lo <= 1e-14 * (1.0 + std::abs(tn)))
      return 0.5 * (lo + hi);
    t = tn;
  }
  return t;
}

template <typename Fn>
inline void parallel_over(const std::vector<std::int32_t>& items, int threads, Fn&& fn) {
  if (threads <= 1 || items.size() < 256) {
    for (std::size_t k = 0; k < items.size(); ++k) fn(k);
    return;
  }
  std::vector<std::thread> pool;
  const std::size_t chunk = (items.size() + threads - 1) / threads;
  for (int t = 0; t < threads; ++t) {
    const std::size_t lo = t * chunk, hi = std::min(items.size(), lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &fn] {
      for (std::size_t k = lo; k < hi; ++k) fn(k);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace detail

inline SolveReport solve_dirichlet(const geom::GridDomain& d, const ProblemParams& p,
                                   const op::Stencil& st, SolveOptions opts = {}) {
  if (!p.a) throw std::invalid_argument("solve_dirichlet: weight required");

  // boundary data
  double sup_b = 0.0, min_b = std::numeric_limits<double>::infinity();
  op::ScalarField u(d);
  if (p.boundary && p.boundary->size() != static_cast<std::size_t>(d.nx) * d.ny)
    throw std::invalid_argument("solve_dirichlet: boundary override must cover the grid");
  for (int f : d.boundary) {
    const double bv = p.boundary ? (*p.boundary)[f] : p.delta;
    if (!std::isfinite(bv)) throw std::invalid_argument("solve_dirichlet: boundary data");
    u.values[f] = bv;
    sup_b = std::max(sup_b, std::abs(bv));
    min_b = std::min(min_b, bv);
  }
  if (d.boundary.empty()) min_b = 0.0;
  const double tol = opts.tol > 0.0 ? opts.tol : 1e-8 * (1.0 + sup_b);
  const double cap = opts.cap > 0.0 ? opts.cap : 1e4 * std::max(sup_b, 1.0);
  if (cap <= sup_b) throw InvalidCap();

  if (opts.init) {
    for (int f : d.interior) u.values[f] = opts.init->values[f];
  } else {
    for (int f : d.interior) u.values[f] = min_b;
  }

  const auto c = detail::compile(d, p, st);
  const std::size_t n_int = d.interior.size();

  // four-color partition: knight and diagonal moves change (i mod 2, j mod 2)
  std::array<std::vector<std::int32_t>, 4> color;  // indices into d.interior
  for (std::size_t k = 0; k < n_int; ++k) {
    const int node = d.interior[k];
    const int i = node % d.nx, j = node / d.nx;
    color[(i & 1) | ((j & 1) << 1)].push_back(static_cast<std::int32_t>(k));
  }

  SolveReport rep{op::ScalarField(d), 0, 0.0, Outcome::Stalled, {}};
  std::vector<double> snapshot(64);

  auto eval_at = [&](std::size_t k, double t) {
    const int lo = c.start[k], hi = c.start[k + 1];
    double slope[64];
    const double* len = c.len.data() + lo;
    for (int q = 0; q < hi - lo; ++q) slope[q] = (u.values[c.nb[lo + q]] - t) / len[q];
    return op::pair_scheme(slope, len, hi - lo) + p.lambda * c.acoef[k] * t * t * t -
           c.rhs[k];
  };

  auto full_residual = [&] {
    double r = 0.0;
    for (std::size_t k = 0; k < n_int; ++k)
      r = std::max(r, std::abs(eval_at(k, u.values[d.interior[k]])));
    return r;
  };

  const double scale = std::max({1.0, sup_b, d.h});
  bool nonfinite = false;
  // Aitken state: snapshots K sweeps apart of the interior values
  const int accel_stride = 40;
  std::vector<double> snapA, snapB;  // u at k-2K and k-K
  for (int sweep = 0; sweep < opts.max_sweeps; ++sweep) {
    for (const auto& cls : color) {
      detail::parallel_over(cls, opts.threads, [&](std::size_t idx) {
        const std::size_t k = cls[idx];
        const int node = d.interior[k];
        const int lo = c.start[k], hi = c.start[k + 1];
        double vals[64];
        for (int q = 0; q < hi - lo; ++q) vals[q] = u.values[c.nb[lo + q]];
        detail::NodeEval g{vals, c.len.data() + lo, hi - lo,
                           p.lambda * c.acoef[k], c.rhs[k]};
        const double told = u.values[node];
        const double troot = detail::node_root(g, told, scale);
        u.values[node] = told + opts.omega * (troot - told);
      });
    }
    ++rep.iterations;
    double sup = 0.0;
    for (int f : d.interior) {
      const double v = u.values[f];
      if (!std::isfinite(v)) nonfinite = true;
      sup = std::max(sup, std::abs(v));
    }
    rep.sup_history.push_back(sup);
    if (nonfinite || sup > cap) {
      rep.outcome = Outcome::Diverged;
      break;
    }
    if ((sweep + 1) % std::max(1, opts.residual_stride) == 0) {
      const double r = full_residual();
      if (r <= tol) {
        rep.residual = r;
        rep.outcome = Outcome::Converged;
        break;
      }
    }
    if (opts.accelerate && (sweep + 1) % accel_stride == 0) {
      std::vector<double> cur(n_int);
      for (std::size_t k = 0; k < n_int; ++k) cur[k] = u.values[d.interior[k]];
      if (!snapA.empty() && !snapB.empty()) {
        double d1 = 0.0, d2 = 0.0;
        for (std::size_t k = 0; k < n_int; ++k) {
          d1 = std::max(d1, std::abs(cur[k] - snapB[k]));
          d2 = std::max(d2, std::abs(snapB[k] - snapA[k]));
        }
        const double rho = d2 > 0.0 ? d1 / d2 : 0.0;
        if (rho > 0.05 && rho < opts.accel_gate) {
          const double f =
              opts.accel_damp * std::min(rho / (1.0 - rho), opts.accel_max_jump);
          double pred_sup = 0.0;
          for (std::size_t k = 0; k < n_int; ++k)
            pred_sup = std::max(pred_sup, std::abs(cur[k] + f * (cur[k] - snapB[k])));
          // never let the jump trip the divergence cap on its own
          if (pred_sup < 0.9 * cap) {
            for (std::size_t k = 0; k < n_int; ++k)
              u.values[d.interior[k]] = cur[k] + f * (cur[k] - snapB[k]);
            for (std::size_t k = 0; k < n_int; ++k) cur[k] = u.values[d.interior[k]];
            snapA.clear();
            snapB.clear();
          }
        }
      }
      snapA = std::move(snapB);
      snapB = std::move(cur);
    }
  }
  if (rep.outcome == Outcome::Stalled) rep.residual = full_residual();
  if (rep.outcome == Outcome::Stalled && rep.residual <= tol)
    rep.outcome = Outcome::Converged;
  rep.field = std::move(u);
  return rep;
}

}  // namespace ilap::dir
