// SPDX-License-Identifier: Apache-2.0
//
// One-dimensional radial machinery for the weighted infinity-Laplacian
// eigenvalue problem: the profile integral equation solved by Picard
// iteration, the F-integral and the unit-ball constant beta = F(0)^4,
// closed-form eigenvalues on balls and annuli, the radial eigenvalue
// ladder, and reflect-and-periodize extensions.
//
// The radial operator is (u')^2 u'' regardless of dimension, so everything
// here is dimension-free.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <utility>
#include <stdexcept>
#include <string>
#include <vector>

#include "ilap/constants.hpp"

namespace ilap::radial {

namespace detail {

// Adaptive Simpson with absolute tolerance.
template <typename Fn>
double simpson_adapt(const Fn& f, double a, double b, double fa, double fm,
                     double fb, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol)
    return left + right + delta / 15.0;
  return simpson_adapt(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_adapt(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

template <typename Fn>
double integrate(const Fn& f, double a, double b, double tol) {
  if (a == b) return 0.0;
  const double m = 0.5 * (a + b);
  const double fa = f(a), fm = f(m), fb = f(b);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson_adapt(f, a, b, fa, fm, fb, whole, tol, 48);
}

// Substituted F-integrand: with s = 1 - tau^4 the endpoint singularity of
// (1-s^4)^{-1/4} cancels and the integrand 4 tau^2 / (1+s+s^2+s^3)^{1/4}
// is smooth on [0, (1-t)^{1/4}].
inline double f_integrand_tau(double tau) {
  const double s = 1.0 - tau * tau * tau * tau;
  const double g = 1.0 + s * (1.0 + s * (1.0 + s));
  return 4.0 * tau * tau / std::pow(g, 0.25);
}

}  // namespace detail

// F(t) = \int_t^1 (1 - s^4)^{-1/4} ds, absolute error <= 1e-10.
inline double F_quadrature(double t) {
  if (t < 0.0 || t > 1.0)
    throw std::invalid_argument("F_quadrature: argument out of [0,1]");
  if (t == 1.0) return 0.0;
  const double tau_max = std::pow(1.0 - t, 0.25);
  return detail::integrate(detail::f_integrand_tau, 0.0, tau_max, 1e-12);
}

// beta = F(0)^4; equals pi^4/64 in closed form.
inline double beta() {
  static const double b = [] {
    const double f0 = F_quadrature(0.0);
    return f0 * f0 * f0 * f0;
  }();
  return b;
}

// Solve F(y) = target for y in [0,1]. Newton in the variable tau where
// y = 1 - tau^4; the derivative of tau -> F(1-tau^4) is the substituted
// integrand, which is known analytically.
inline double F_inverse(double target) {
  const double f0 = F_quadrature(0.0);
  if (target <= 0.0) return 1.0;
  if (target >= f0) return 0.0;
  double tau = std::pow(target / f0, 1.0 / 3.0);  // rough start, F ~ tau^3 near 1
  for (int it = 0; it < 60; ++it) {
    const double g = F_quadrature(1.0 - tau * tau * tau * tau) - target;
    const double dg = detail::f_integrand_tau(tau);
    double step = (dg > 0.0) ? g / dg : 0.0;
    double next = tau - step;
    if (next <= 0.0) next = 0.5 * tau;
    if (next >= 1.0) next = 0.5 * (tau + 1.0);
    if (std::abs(next - tau) < 1e-14) {
      tau = next;
      break;
    }
    tau = next;
  }
  const double y = 1.0 - tau * tau * tau * tau;
  return std::clamp(y, 0.0, 1.0);
}

// Closed-form radial solution for constant weight k: u(r) with
// F(u(r)/m) = (lambda k)^{1/4} r, continued as 0 ... callers use it only
// up to the first zero r0 = F(0)/(lambda k)^{1/4}.
inline double closed_form_value(double lambda, double k, double m, double r) {
  if (lambda <= 0.0 || k <= 0.0) throw std::invalid_argument("closed_form_value: lambda,k > 0 required");
  return m * F_inverse(std::pow(lambda * k, 0.25) * r);
}

struct RadialProfile {
  std::vector<double> r;       // uniform grid, r[0] = 0
  std::vector<double> u;       // profile values
  std::vector<double> weight;  // weight samples a(r_i)
  double dr = 0.0;
  double lambda = 0.0;
  double m = 0.0;  // u(0)
  std::optional<double> first_zero;
};

namespace detail {

inline std::optional<double> locate_first_zero(const std::vector<double>& r,
                                               const std::vector<double>& u) {
  for (std::size_t i = 1; i < u.size(); ++i) {
    if (u[i] <= 0.0 && u[i - 1] > 0.0) {
      const double f = u[i - 1] / (u[i - 1] - u[i]);
      return r[i - 1] + f * (r[i] - r[i - 1]);
    }
  }
  // No crossing on the grid, but a zero may sit just past the end (the
  // boundary case of an eigenfunction profile): extrapolate from the last
  // cell and accept it if it lands within one cell of the end.
  const std::size_t n = u.size() - 1;
  if (n >= 1 && u[n] > 0.0 && u[n] < u[n - 1]) {
    const double dr = r[n] - r[n - 1];
    const double z = r[n] + u[n] * dr / (u[n - 1] - u[n]);
    if (z <= r[n] + dr) return z;
  }
  return std::nullopt;
}

}  // namespace detail

// Fixed-point iteration of
//   u(r) = m - (3 lambda)^{1/3} \int_0^r [ \int_0^t a(s) u(s)^3 ds ]^{1/3} dt
// with cumulative trapezoid quadrature. The first cell of the outer
// integral uses the exact antiderivative of the local t^{1/3} behavior so
// the integrable kink at the origin does not dominate the error. Values
// past the first zero continue the formula.
inline RadialProfile picard_radial(const std::vector<double>& a, double lambda,
                                   double m, double R, double dr,
                                   int max_sweeps = 500,
                                   double fixed_point_tol = 1e-11) {
  if (lambda <= 0.0) throw std::invalid_argument("picard_radial: lambda > 0 required");
  if (m <= 0.0) throw std::invalid_argument("picard_radial: m > 0 required");
  if (dr <= 0.0 || R <= 0.0) throw std::invalid_argument("picard_radial: R, dr > 0 required");
  const std::size_t n = static_cast<std::size_t>(std::llround(R / dr));
  if (n < 2) throw std::invalid_argument("picard_radial: grid too coarse");
  if (a.size() != n + 1)
    throw std::invalid_argument("picard_radial: weight samples must match the grid (" +
                                std::to_string(n + 1) + " values)");
  const double step = R / static_cast<double>(n);

  RadialProfile p;
  p.dr = step;
  p.lambda = lambda;
  p.m = m;
  p.weight = a;
  p.r.resize(n + 1);
  for (std::size_t i = 0; i <= n; ++i) p.r[i] = step * static_cast<double>(i);

  std::vector<double> u(n + 1, m), unew(n + 1), inner(n + 1), f(n + 1);
  const double c = std::cbrt(3.0 * lambda);
  bool converged = false;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    inner[0] = 0.0;
    for (std::size_t i = 1; i <= n; ++i) {
      const double gi = a[i] * u[i] * u[i] * u[i];
      const double gp = a[i - 1] * u[i - 1] * u[i - 1] * u[i - 1];
      inner[i] = inner[i - 1] + 0.5 * step * (gp + gi);
    }
    for (std::size_t i = 0; i <= n; ++i) f[i] = std::cbrt(inner[i]);
    unew[0] = m;
    // inner ~ a(0) m^3 t near 0, so f ~ (const) t^{1/3} with singular
    // curvature; for the leading cells use a rule exact on (a + b t) t^{1/3}
    // (trapezoid on g = f / t^{1/3} against the exact t^{1/3} moments),
    // plain trapezoid afterwards.
    const std::size_t graded = std::min<std::size_t>(32, n);
    double acc = 0.75 * step * f[1];
    unew[1] = m - c * acc;
    double tp = step, gp = f[1] / std::cbrt(tp);
    for (std::size_t i = 2; i <= graded; ++i) {
      const double t1 = step * static_cast<double>(i);
      const double g1 = f[i] / std::cbrt(t1);
      const double m0 = 0.75 * (std::pow(t1, 4.0 / 3.0) - std::pow(tp, 4.0 / 3.0));
      const double m1 = (3.0 / 7.0) * (std::pow(t1, 7.0 / 3.0) - std::pow(tp, 7.0 / 3.0));
      acc += gp * m0 + (g1 - gp) * (m1 - tp * m0) / step;
      unew[i] = m - c * acc;
      tp = t1;
      gp = g1;
    }
    for (std::size_t i = graded + 1; i <= n; ++i) {
      acc += 0.5 * step * (f[i - 1] + f[i]);
      unew[i] = m - c * acc;
    }
    double diff = 0.0;
    for (std::size_t i = 0; i <= n; ++i) diff = std::max(diff, std::abs(unew[i] - u[i]));
    u.swap(unew);
    if (diff <= fixed_point_tol * m) {
      converged = true;
      break;
    }
  }
  if (!converged)
    throw std::runtime_error("picard_radial: no convergence after max_sweeps");
  p.u = std::move(u);
  p.first_zero = detail::locate_first_zero(p.r, p.u);
  return p;
}

inline RadialProfile picard_radial(const std::function<double(double)>& a,
                                   double lambda, double m, double R, double dr,
                                   int max_sweeps = 500) {
  const std::size_t n = static_cast<std::size_t>(std::llround(R / dr));
  const double step = R / static_cast<double>(std::max<std::size_t>(n, 1));
  std::vector<double> samples(n + 1);
  for (std::size_t i = 0; i <= n; ++i) samples[i] = a(step * static_cast<double>(i));
  return picard_radial(samples, lambda, m, R, step, max_sweeps);
}

// First radial eigenvalue on [0, R]: bisection on lambda of the boundary
// value u(R; lambda), which is strictly decreasing in lambda. Returns the
// eigenvalue and the m = 1 profile with u(R) = 0.
inline std::pair<double, RadialProfile> radial_first_eigen(
    const std::function<double(double)>& a, double R, double tol_lambda,
    double dr = -1.0) {
  if (R <= 0.0 || tol_lambda <= 0.0)
    throw std::invalid_argument("radial_first_eigen: R, tol_lambda > 0 required");
  if (dr <= 0.0) dr = 1e-4 * R;
  const std::size_t n = static_cast<std::size_t>(std::llround(R / dr));
  const double step = R / static_cast<double>(n);
  std::vector<double> samples(n + 1);
  double mu = 0.0, nu = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i <= n; ++i) {
    samples[i] = a(step * static_cast<double>(i));
    if (samples[i] <= 0.0)
      throw std::invalid_argument("radial_first_eigen: weight must be positive");
    mu = std::max(mu, samples[i]);
    nu = std::min(nu, samples[i]);
  }
  const double R4 = R * R * R * R;
  double lo = 0.5 * beta() / (mu * R4);
  double hi = 2.0 * beta() / (nu * R4);
  auto boundary_value = [&](double lambda) {
    return picard_radial(samples, lambda, 1.0, R, step).u[n];
  };
  double flo = boundary_value(lo), fhi = boundary_value(hi);
  for (int grow = 0; grow < 8 && (flo <= 0.0 || fhi >= 0.0); ++grow) {
    if (flo <= 0.0) { lo *= 0.5; flo = boundary_value(lo); }
    if (fhi >= 0.0) { hi *= 2.0; fhi = boundary_value(hi); }
  }
  if (flo <= 0.0 || fhi >= 0.0)
    throw std::runtime_error("radial_first_eigen: bracket failure");
  while (hi - lo > tol_lambda) {
    const double mid = 0.5 * (lo + hi);
    if (boundary_value(mid) > 0.0)
      lo = mid;
    else
      hi = mid;
  }
  const double lambda = 0.5 * (lo + hi);
  RadialProfile p = picard_radial(samples, lambda, 1.0, R, step);
  if (!p.first_zero) p.first_zero = R;
  return {lambda, std::move(p)};
}

// Radial eigenvalue ladder on a ball of radius R: beta (2l-1)^4 / R^4.
inline double eigen_ladder(double R, int ell) {
  if (ell < 1) throw std::invalid_argument("eigen_ladder: ell >= 1 required");
  if (R <= 0.0) throw std::invalid_argument("eigen_ladder: R > 0 required");
  const double q = static_cast<double>(2 * ell - 1);
  return beta() * q * q * q * q / (R * R * R * R);
}

// First eigenvalue of the spherical annulus kappa < |x-p| < tau:
// equals the ball value beta / ((tau-kappa)/2)^4. kappa = 0 is the
// punctured ball and gives the same value.
inline double annulus_lambda(double kappa, double tau) {
  if (kappa < 0.0 || tau <= kappa)
    throw std::invalid_argument("annulus_lambda: need 0 <= kappa < tau");
  const double R = 0.5 * (tau - kappa);
  return beta() / (R * R * R * R);
}

// Odd reflection about r = R, even reflection about r = 2R, then 4R-periodic
// extension. The input must be a first-eigenfunction profile (u(R) ~ 0).
// The extension vanishes at odd multiples of R and alternates sign.
inline RadialProfile extend_reflect(const RadialProfile& p, int n_periods) {
  if (n_periods < 1) throw std::invalid_argument("extend_reflect: n_periods >= 1");
  const std::size_t n = p.u.size() - 1;
  const double R = p.r.back();
  if (std::abs(p.u.back()) > 1e-6 * std::abs(p.m))
    throw std::invalid_argument("extend_reflect: profile not zero at R");
  RadialProfile e;
  e.dr = p.dr;
  e.lambda = p.lambda;
  e.m = p.m;
  const std::size_t total = 4 * n * static_cast<std::size_t>(n_periods);
  e.r.resize(total + 1);
  e.u.resize(total + 1);
  e.weight.resize(total + 1);
  for (std::size_t i = 0; i <= total; ++i) {
    const std::size_t j = i % (4 * n);  // position within one period
    std::size_t k;                      // index into [0, n] after reflections
    double sign;
    if (j <= n) {
      k = j;
      sign = 1.0;
    } else if (j <= 2 * n) {
      k = 2 * n - j;
      sign = -1.0;
    } else if (j <= 3 * n) {
      k = j - 2 * n;
      sign = -1.0;
    } else {
      k = 4 * n - j;
      sign = 1.0;
    }
    e.r[i] = p.dr * static_cast<double>(i);
    e.u[i] = sign * p.u[k];
    e.weight[i] = p.weight.empty() ? 1.0 : p.weight[k];
  }
  e.u[0] = p.u[0];
  e.first_zero = R;
  return e;
}

// Finite-difference residual (u')^2 u'' + lambda a u^3 at node i using a
// stride of `stride` cells; larger strides trade truncation error against
// amplified profile noise.
inline double fd_residual(const RadialProfile& p, std::size_t i, std::size_t stride = 1) {
  const std::size_t n = p.u.size() - 1;
  if (i < stride || i + stride > n) throw std::out_of_range("fd_residual: node too close to the ends");
  const double hh = p.dr * static_cast<double>(stride);
  const double du = (p.u[i + stride] - p.u[i - stride]) / (2.0 * hh);
  const double d2u = (p.u[i + stride] - 2.0 * p.u[i] + p.u[i - stride]) / (hh * hh);
  const double w = p.weight.empty() ? 1.0 : p.weight[i];
  return du * du * d2u + p.lambda * w * p.u[i] * p.u[i] * p.u[i];
}

struct DistanceBoundReport {
  int checked = 0;
  int violations = 0;        // beyond tolerance
  double max_slack = 0.0;    // max of bound - d over checked points
  double worst_excess = 0.0; // max of d - bound (positive means violation side)
  double tolerance = 0.0;
  bool pass() const { return violations == 0; }
};

// Verify d(x) <= F(delta/u(x)) / (lambda nu)^{1/4} over (distance, value)
// samples of a positive solution with boundary level delta.
inline DistanceBoundReport distance_bound_check(
    const std::vector<std::pair<double, double>>& dist_and_value, double delta,
    double lambda, double nu, double tol) {
  if (lambda <= 0.0 || nu <= 0.0)
    throw std::invalid_argument("distance_bound_check: lambda, nu > 0 required");
  DistanceBoundReport rep;
  rep.tolerance = tol;
  const double scale = std::pow(lambda * nu, 0.25);
  for (const auto& [d, uval] : dist_and_value) {
    if (uval <= 0.0) continue;
    const double ratio = std::clamp(delta / uval, 0.0, 1.0);
    const double bound = F_quadrature(ratio) / scale;
    ++rep.checked;
    rep.max_slack = std::max(rep.max_slack, bound - d);
    rep.worst_excess = std::max(rep.worst_excess, d - bound);
    if (d - bound > tol) ++rep.violations;
  }
  return rep;
}

// Radial convenience. The estimate concerns the domain where u > delta, so
// the relevant boundary is the delta-level radius r_delta and the distance
// of a point r < r_delta is r_delta - r.
inline DistanceBoundReport distance_bound_check(const RadialProfile& p,
                                                double delta, double lambda,
                                                double nu, double tol) {
  double r_delta = -1.0;
  for (std::size_t i = 1; i < p.u.size(); ++i) {
    if (p.u[i] <= delta && p.u[i - 1] > delta) {
      const double f = (p.u[i - 1] - delta) / (p.u[i - 1] - p.u[i]);
      r_delta = p.r[i - 1] + f * p.dr;
      break;
    }
  }
  if (r_delta < 0.0)
    throw std::invalid_argument("distance_bound_check: profile never reaches delta");
  std::vector<std::pair<double, double>> samples;
  samples.reserve(p.u.size());
  for (std::size_t i = 0; i < p.u.size() && p.r[i] < r_delta; ++i)
    samples.emplace_back(r_delta - p.r[i], p.u[i]);
  return distance_bound_check(samples, delta, lambda, nu, tol);
}

}  // namespace ilap::radial
