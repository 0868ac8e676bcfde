// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>

#include "ilap/eigen.hpp"
#include "ilap/radial.hpp"

using namespace ilap;

namespace {

struct Setup {
  geom::GridDomain dom;
  geom::WeightField a;
  op::Stencil st;
};

Setup disk(double R, double h, double weight = 1.0) {
  auto d = geom::build_domain(geom::DomainSpec::disk({0.0, 0.0}, R, h));
  auto a = geom::WeightField::constant(d, weight);
  return {std::move(d), std::move(a), op::Stencil::make(3)};
}

eigen::EigenOptions fast_opts(double tol_lambda = 0.05) {
  eigen::EigenOptions o;
  o.tol_lambda = tol_lambda;
  o.solve.tol = 1e-6;
  o.solve.max_sweeps = 1500;
  o.solve.cap = 100.0;
  return o;
}

}  // namespace

TEST_CASE("membership classification on the unit disk") {
  auto s = disk(1.0, 1.0 / 8);
  dir::SolveOptions o;
  o.cap = 100.0;

  auto zero = eigen::membership(s.dom, s.a, s.st, 0.0, 1.0, o);
  CHECK(zero.classification == eigen::Membership::InS);
  CHECK(zero.sup_u == doctest::Approx(1.0).epsilon(1e-6));

  auto low = eigen::membership(s.dom, s.a, s.st, 0.4, 1.0, o);
  CHECK(low.classification == eigen::Membership::InS);
  CHECK(low.hint >= 0.4);
  CHECK(low.sup_u > 1.0);

  auto high = eigen::membership(s.dom, s.a, s.st, 4.0, 1.0, o);
  CHECK(high.classification == eigen::Membership::NotInS);

  dir::SolveOptions starved;
  starved.max_sweeps = 2;
  auto stuck = eigen::membership(s.dom, s.a, s.st, 0.4, 1.0, starved);
  CHECK(stuck.classification == eigen::Membership::Inconclusive);

  CHECK_THROWS_AS(eigen::membership(s.dom, s.a, s.st, -1.0, 1.0, o),
                  std::invalid_argument);
  CHECK_THROWS_AS(eigen::membership(s.dom, s.a, s.st, 1.0, 0.0, o),
                  std::invalid_argument);
}

TEST_CASE("principal estimate: bracket and eigenfunction invariants") {
  auto s = disk(1.0, 1.0 / 8);
  auto est = eigen::estimate_principal(s.dom, s.a, s.st, fast_opts());
  auto b = dir::analytic_bounds(s.dom, s.a);

  CHECK(est.lo <= est.lambda_hat);
  CHECK(est.lambda_hat <= est.hi);
  CHECK(est.hi - est.lo <= 0.05 + 1e-12);
  CHECK(est.lo >= b.lambda0 - 1e-12);
  CHECK(est.hi <= b.Lambda + 1e-12);
  CHECK_FALSE(est.trace.empty());

  double sup = 0.0;
  for (int f : s.dom.interior) {
    CHECK(est.eigenfunction.values[f] > 0.0);
    sup = std::max(sup, est.eigenfunction.values[f]);
  }
  CHECK(sup == doctest::Approx(1.0).epsilon(1e-12));
  // the normalizing solve had finite boundary data, so the trace on the
  // boundary is small but positive and equals the reported level
  for (int f : s.dom.boundary)
    CHECK(est.eigenfunction.values[f] == doctest::Approx(est.boundary_level).epsilon(1e-9));
  CHECK(est.boundary_level < 0.25);
}

TEST_CASE("estimate is independent of the boundary level") {
  auto s = disk(1.0, 1.0 / 8);
  auto o1 = fast_opts();
  o1.delta = 0.5;
  auto o2 = fast_opts();
  o2.delta = 2.0;
  auto e1 = eigen::estimate_principal(s.dom, s.a, s.st, o1);
  auto e2 = eigen::estimate_principal(s.dom, s.a, s.st, o2);
  CHECK(std::abs(e1.lambda_hat - e2.lambda_hat) <= 2 * 0.05);
}

TEST_CASE("weight monotonicity of the estimate") {
  auto s1 = disk(1.0, 1.0 / 8, 1.0);
  auto s2 = disk(1.0, 1.0 / 8, 2.0);
  auto e1 = eigen::estimate_principal(s1.dom, s1.a, s1.st, fast_opts());
  // doubling the weight is an exact rescaling of the whole search once the
  // stopping width is rescaled with it
  auto e2 = eigen::estimate_principal(s2.dom, s2.a, s2.st, fast_opts(0.05 / 2));
  CHECK(e2.lambda_hat == doctest::Approx(e1.lambda_hat / 2.0).epsilon(1e-10));

  // a >= 1 node-wise pushes the estimate down (up to bracket tolerance)
  auto d = geom::build_domain(geom::DomainSpec::disk({0.0, 0.0}, 1.0, 1.0 / 8));
  auto rim = geom::WeightField::sample(
      d, [](double x, double y) { return 1.0 + std::hypot(x, y); });
  auto e3 = eigen::estimate_principal(d, rim, s1.st, fast_opts());
  CHECK(e3.lambda_hat <= e1.lambda_hat + 2 * 0.05);
}

TEST_CASE("domain monotonicity of the estimate") {
  auto big = disk(1.0, 1.0 / 8);
  auto small = disk(0.7, 1.0 / 8);
  auto eb = eigen::estimate_principal(big.dom, big.a, big.st, fast_opts());
  auto es = eigen::estimate_principal(small.dom, small.a, small.st, fast_opts());
  CHECK(es.lambda_hat > eb.lambda_hat - 2 * 0.05);
  // here the gap is large: the continuum ratio is (1/0.7)^4 > 4
  CHECK(es.lambda_hat > 2.0 * eb.lambda_hat);
}

TEST_CASE("dilating the domain rescales the estimate by the fourth power") {
  // R=2 at h=1/4 is the exact 2x dilation of R=1 at h=1/8 node for node,
  // and the scheme is exactly 4-homogeneous under that dilation
  auto s1 = disk(1.0, 1.0 / 8);
  auto s2 = disk(2.0, 1.0 / 4);
  auto e1 = eigen::estimate_principal(s1.dom, s1.a, s1.st, fast_opts());
  auto e2 = eigen::estimate_principal(s2.dom, s2.a, s2.st, fast_opts(0.05 / 16));
  CHECK(e2.lambda_hat == doctest::Approx(e1.lambda_hat / 16.0).epsilon(1e-10));
}

TEST_CASE("extracted eigenfunction is radially symmetric and near the profile") {
  auto s = disk(1.0, 1.0 / 8);
  auto est = eigen::estimate_principal(s.dom, s.a, s.st, fast_opts());
  auto u = eigen::extract_eigenfunction(s.dom, s.a, s.st, est.lo, {1.0, 0.5},
                                        fast_opts().solve);

  // nodes at the same lattice radius must carry (nearly) the same value
  std::map<long long, std::pair<double, double>> rings;  // r^2/h^2 -> min,max
  for (int f : s.dom.interior) {
    auto p = s.dom.pos(f);
    const long long r2 =
        std::llround((p.x * p.x + p.y * p.y) / (s.dom.h * s.dom.h));
    auto it = rings.find(r2);
    if (it == rings.end())
      rings[r2] = {u.values[f], u.values[f]};
    else {
      it->second.first = std::min(it->second.first, u.values[f]);
      it->second.second = std::max(it->second.second, u.values[f]);
    }
  }
  double spread = 0.0;
  for (auto& [r2, mm] : rings) spread = std::max(spread, mm.second - mm.first);
  CHECK(spread < 0.06);

  // and tracks the closed-form radial profile at this resolution
  const double beta = radial::beta();
  double worst = 0.0;
  for (int f : s.dom.interior) {
    auto p = s.dom.pos(f);
    const double ex = radial::F_inverse(std::pow(beta, 0.25) * std::hypot(p.x, p.y));
    worst = std::max(worst, std::abs(u.values[f] - ex));
  }
  CHECK(worst < 0.12);

  // infeasible lambda: nothing in the sequence converges
  CHECK_THROWS_AS(eigen::extract_eigenfunction(s.dom, s.a, s.st, 5.0, {1.0, 0.5},
                                               fast_opts().solve),
                  eigen::NotConverged);
}

TEST_CASE("level-set eigenvalues increase with the threshold") {
  auto s = disk(1.0, 1.0 / 8);
  auto est = eigen::estimate_principal(s.dom, s.a, s.st, fast_opts());
  auto rep = eigen::level_set_analysis(
      s.dom, est.eigenfunction, [](double, double) { return 1.0; }, s.st,
      {0.3, 0.6}, fast_opts());

  REQUIRE(rep.lambda_t.size() == 2);
  CHECK(rep.lambda_t[0] > rep.lambda_hat);
  CHECK(rep.lambda_t[1] >= rep.lambda_t[0]);
  for (std::size_t k = 0; k < rep.lambda_t.size(); ++k)
    CHECK(rep.lambda_t[k] >= rep.lower_bound[k] - 1e-9);

  CHECK_THROWS_AS(eigen::level_set_analysis(
                      s.dom, est.eigenfunction, [](double, double) { return 1.0; },
                      s.st, {1.0}, fast_opts()),
                  eigen::EmptyLevelSet);
}
