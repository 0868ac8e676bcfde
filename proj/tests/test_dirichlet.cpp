// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "ilap/dirichlet.hpp"
#include "ilap/radial.hpp"

using namespace ilap;

namespace {

struct Setup {
  geom::GridDomain dom;
  geom::WeightField a;
  op::Stencil st;
};

Setup unit_disk(double h, double weight = 1.0) {
  auto d = geom::build_domain(geom::DomainSpec::disk({0.0, 0.0}, 1.0, h));
  auto a = geom::WeightField::constant(d, weight);
  return {std::move(d), std::move(a), op::Stencil::make(3)};
}

dir::SolveReport run(const Setup& s, double lambda, double delta,
                     dir::SolveOptions opts = {}) {
  dir::ProblemParams p;
  p.lambda = lambda;
  p.a = &s.a;
  p.delta = delta;
  if (opts.threads == 1) opts.threads = 2;
  return dir::solve_dirichlet(s.dom, p, s.st, opts);
}

}  // namespace

TEST_CASE("analytic bracket on the unit disk with unit weight") {
  auto s = unit_disk(1.0 / 32);
  auto b = dir::analytic_bounds(s.dom, s.a);
  CHECK(b.sigma == doctest::Approx(std::pow(3.0, 4.0 / 3.0) / 4.0).epsilon(1e-12));
  // R_out and the superlevel inradius carry O(h) grid error, so the golden
  // values hold to a few percent, not machine precision.
  CHECK(b.lambda0 == doctest::Approx(64.0 / 81.0).epsilon(0.05));
  CHECK(b.Lambda == doctest::Approx(16384.0 / 2187.0).epsilon(0.05));
  CHECK(b.lambda0 < b.Lambda);

  // doubling the weight halves both thresholds
  auto s2 = unit_disk(1.0 / 32, 2.0);
  auto b2 = dir::analytic_bounds(s2.dom, s2.a);
  CHECK(b2.lambda0 == doctest::Approx(b.lambda0 / 2.0).epsilon(1e-12));
  CHECK(b2.Lambda == doctest::Approx(b.Lambda / 2.0).epsilon(1e-12));
}

TEST_CASE("a-priori sup interval") {
  dir::AnalyticBounds b;
  b.lambda0 = 0.8;
  b.Lambda = 7.0;

  auto zero = dir::apriori_interval(0.5, 0.0, b);
  CHECK(zero.bounded);
  CHECK(zero.lo == 0.5);
  CHECK(zero.hi == 0.5);

  auto neg = dir::apriori_interval(0.5, -2.0, b);
  CHECK(neg.bounded);
  CHECK(neg.lo == 0.0);
  CHECK(neg.hi == 0.5);

  // at lambda0 / 8 the bound is delta / (1 - 1/2) = 2 delta
  auto mid = dir::apriori_interval(0.5, 0.1, b);
  CHECK(mid.bounded);
  CHECK(mid.lo == 0.5);
  CHECK(mid.hi == doctest::Approx(1.0).epsilon(1e-12));

  auto past = dir::apriori_interval(0.5, 0.9, b);
  CHECK_FALSE(past.bounded);
}

TEST_CASE("lambda = 0 gives the constant boundary level") {
  auto s = unit_disk(1.0 / 16);
  auto r = run(s, 0.0, 0.7);
  CHECK(r.outcome == dir::Outcome::Converged);
  for (int f : s.dom.interior)
    CHECK(r.field.values[f] == doctest::Approx(0.7).epsilon(1e-7));
}

TEST_CASE("negative lambda pulls the solution into [0, delta]") {
  auto s = unit_disk(1.0 / 16);
  auto r = run(s, -3.0, 1.0);
  CHECK(r.outcome == dir::Outcome::Converged);
  for (int f : s.dom.interior) {
    CHECK(r.field.values[f] >= -1e-10);
    CHECK(r.field.values[f] <= 1.0 + 1e-10);
  }
}

TEST_CASE("subcritical solve: bounds, residual certificate, radial agreement") {
  const double lam = 0.4, delta = 1.0;
  auto s = unit_disk(1.0 / 16);
  auto r = run(s, lam, delta);
  REQUIRE(r.outcome == dir::Outcome::Converged);
  CHECK(r.residual <= 1e-8 * (1.0 + delta));

  auto b = dir::analytic_bounds(s.dom, s.a);
  auto box = dir::apriori_interval(delta, lam, b);
  REQUIRE(box.bounded);
  double sup = 0.0;
  for (int f : s.dom.interior) {
    CHECK(r.field.values[f] >= delta - 1e-9);  // climbs from the boundary level
    sup = std::max(sup, r.field.values[f]);
  }
  CHECK(sup <= box.hi);

  // the radial closed form (scaled so u(R) = delta) is the continuum limit;
  // at this resolution the scheme lands within ~20% of it everywhere
  const double uR = radial::closed_form_value(lam, 1.0, 1.0, 1.0);
  double worst = 0.0;
  for (int f : s.dom.interior) {
    auto xy = s.dom.pos(f);
    const double ex =
        delta * radial::closed_form_value(lam, 1.0, 1.0, std::hypot(xy.x, xy.y)) / uR;
    worst = std::max(worst, std::abs(r.field.values[f] - ex));
  }
  const double center = delta / uR;
  CHECK(worst / center < 0.20);

  // and the mismatch shrinks under refinement
  auto s2 = unit_disk(1.0 / 32);
  auto r2 = run(s2, lam, delta);
  REQUIRE(r2.outcome == dir::Outcome::Converged);
  double worst2 = 0.0;
  for (int f : s2.dom.interior) {
    auto xy = s2.dom.pos(f);
    const double ex =
        delta * radial::closed_form_value(lam, 1.0, 1.0, std::hypot(xy.x, xy.y)) / uR;
    worst2 = std::max(worst2, std::abs(r2.field.values[f] - ex));
  }
  CHECK(worst2 < worst);
}

TEST_CASE("supercritical lambda blows past the cap") {
  auto s = unit_disk(1.0 / 16);
  dir::SolveOptions o;
  o.cap = 100.0;
  auto r = run(s, 3.0, 1.0, o);
  CHECK(r.outcome == dir::Outcome::Diverged);
  CHECK(r.sup_history.back() > 100.0);
  // sup grows monotonically once the reaction takes over
  const auto& hgl = r.sup_history;
  CHECK(hgl.back() > hgl.front());
}

TEST_CASE("monotone in the boundary level and in lambda") {
  auto s = unit_disk(1.0 / 16);
  auto lo = run(s, 0.4, 1.0);
  auto hi = run(s, 0.4, 1.2);
  REQUIRE(lo.outcome == dir::Outcome::Converged);
  REQUIRE(hi.outcome == dir::Outcome::Converged);
  for (int f : s.dom.interior)
    CHECK(hi.field.values[f] >= lo.field.values[f] - 1e-7);

  auto lam_lo = run(s, 0.3, 1.0);
  auto lam_hi = run(s, 0.6, 1.0);
  REQUIRE(lam_lo.outcome == dir::Outcome::Converged);
  REQUIRE(lam_hi.outcome == dir::Outcome::Converged);
  for (int f : s.dom.interior)
    CHECK(lam_hi.field.values[f] >= lam_lo.field.values[f] - 1e-7);
}

TEST_CASE("per-node boundary override matches the constant level") {
  auto s = unit_disk(1.0 / 16);
  // indexed by flat grid id; only boundary entries are read
  std::vector<double> bdry(static_cast<std::size_t>(s.dom.nx) * s.dom.ny, 0.9);
  dir::ProblemParams p;
  p.lambda = 0.4;
  p.a = &s.a;
  p.delta = 0.0;  // ignored when the override is present
  p.boundary = &bdry;
  dir::SolveOptions o;
  o.threads = 2;
  auto r = dir::solve_dirichlet(s.dom, p, s.st, o);
  auto ref = run(s, 0.4, 0.9);
  REQUIRE(r.outcome == dir::Outcome::Converged);
  for (int f : s.dom.interior)
    CHECK(r.field.values[f] == doctest::Approx(ref.field.values[f]).epsilon(1e-6));
}

TEST_CASE("thread count does not change the result") {
  auto s = unit_disk(1.0 / 16);
  dir::SolveOptions o1, o4;
  o1.threads = 1;
  o4.threads = 4;
  dir::ProblemParams p;
  p.lambda = 0.5;
  p.a = &s.a;
  p.delta = 1.0;
  auto r1 = dir::solve_dirichlet(s.dom, p, s.st, o1);
  auto r4 = dir::solve_dirichlet(s.dom, p, s.st, o4);
  REQUIRE(r1.outcome == dir::Outcome::Converged);
  REQUIRE(r4.outcome == dir::Outcome::Converged);
  CHECK(r1.iterations == r4.iterations);
  for (int f : s.dom.interior)
    CHECK(r1.field.values[f] == r4.field.values[f]);  // bit-identical
}

TEST_CASE("warm start from a nearby solve cuts the sweep count") {
  auto s = unit_disk(1.0 / 16);
  auto base = run(s, 0.40, 1.0);
  REQUIRE(base.outcome == dir::Outcome::Converged);
  dir::SolveOptions warm;
  warm.init = &base.field;
  auto cold = run(s, 0.44, 1.0);
  auto fast = run(s, 0.44, 1.0, warm);
  REQUIRE(cold.outcome == dir::Outcome::Converged);
  REQUIRE(fast.outcome == dir::Outcome::Converged);
  CHECK(fast.iterations < cold.iterations);
}

TEST_CASE("a cap below the boundary data is rejected") {
  auto s = unit_disk(1.0 / 8);
  dir::SolveOptions o;
  o.cap = 0.5;
  CHECK_THROWS_AS(run(s, 0.4, 1.0, o), dir::InvalidCap);
}

TEST_CASE("sweep budget exhaustion reports Stalled") {
  auto s = unit_disk(1.0 / 16);
  dir::SolveOptions o;
  o.max_sweeps = 3;
  auto r = run(s, 0.4, 1.0, o);
  CHECK(r.outcome == dir::Outcome::Stalled);
  CHECK(r.residual > 0.0);
}
