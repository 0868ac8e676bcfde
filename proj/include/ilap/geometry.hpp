// SPDX-License-Identifier: Apache-2.0
//
// Discrete 2-D domains on a uniform lattice: disk, annulus, rectangle and
// arbitrary bitmap masks, with the geometric scalars the eigenvalue bounds
// consume (out-ball radius, in-ball radius, superlevel-set in-ball radii).
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace ilap::geom {

struct Vec2 {
  double x = 0.0, y = 0.0;
};

inline double dist(const Vec2& a, const Vec2& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

struct EmptyInterior : std::runtime_error {
  EmptyInterior() : std::runtime_error("domain has no interior node") {}
};
struct DisconnectedInterior : std::runtime_error {
  DisconnectedInterior() : std::runtime_error("domain interior is not connected") {}
};

struct DomainSpec {
  enum class Kind { Disk, Annulus, Rectangle, Mask };
  Kind kind = Kind::Disk;
  double h = 0.0;

  Vec2 center;                      // disk, annulus
  double radius = 0.0;              // disk
  double kappa = 0.0, tau = 0.0;    // annulus radii, 0 <= kappa < tau
  Vec2 corner;                      // rectangle lower-left
  double width = 0.0, height = 0.0; // rectangle extents

  std::vector<std::uint8_t> mask;   // row-major bitmap, 1 = inside
  int mask_nx = 0, mask_ny = 0;
  Vec2 mask_origin;                 // world position of mask cell (0,0)

  static DomainSpec disk(Vec2 c, double R, double h) {
    if (R <= 0.0 || h <= 0.0) throw std::invalid_argument("disk: R, h > 0 required");
    DomainSpec s;
    s.kind = Kind::Disk;
    s.center = c;
    s.radius = R;
    s.h = h;
    return s;
  }
  static DomainSpec annulus(Vec2 c, double kappa, double tau, double h) {
    if (kappa < 0.0 || tau <= kappa || h <= 0.0)
      throw std::invalid_argument("annulus: 0 <= kappa < tau and h > 0 required");
    DomainSpec s;
    s.kind = Kind::Annulus;
    s.center = c;
    s.kappa = kappa;
    s.tau = tau;
    s.h = h;
    return s;
  }
  static DomainSpec rectangle(Vec2 corner, double width, double height, double h) {
    if (width <= 0.0 || height <= 0.0 || h <= 0.0)
      throw std::invalid_argument("rectangle: widths and h > 0 required");
    DomainSpec s;
    s.kind = Kind::Rectangle;
    s.corner = corner;
    s.width = width;
    s.height = height;
    s.h = h;
    return s;
  }
  static DomainSpec from_mask(std::vector<std::uint8_t> bits, int nx, int ny,
                              Vec2 origin, double h) {
    if (nx <= 0 || ny <= 0 || static_cast<int>(bits.size()) != nx * ny || h <= 0.0)
      throw std::invalid_argument("from_mask: inconsistent bitmap");
    DomainSpec s;
    s.kind = Kind::Mask;
    s.mask = std::move(bits);
    s.mask_nx = nx;
    s.mask_ny = ny;
    s.mask_origin = origin;
    s.h = h;
    return s;
  }
};

// Node classification within the bounding box.
enum class NodeKind : std::uint8_t { Outside = 0, Interior = 1, Boundary = 2 };

struct GridDomain {
  double h = 0.0;
  int nx = 0, ny = 0;  // bounding box in nodes
  Vec2 origin;         // world position of node (0,0)
  std::vector<NodeKind> kind;          // size nx*ny
  std::vector<Vec2> trace;             // boundary nodes: analytic trace position
  std::vector<std::int32_t> interior;  // flat indices
  std::vector<std::int32_t> boundary;  // flat indices

  double R_out = 0.0;  // minimal enclosing circle radius of the interior
  Vec2 out_center;
  double rho_in = 0.0;  // in-ball radius of the interior

  int idx(int i, int j) const { return j * nx + i; }
  Vec2 pos(int flat) const {
    return {origin.x + h * (flat % nx), origin.y + h * (flat / nx)};
  }
  bool is_interior(int i, int j) const {
    return i >= 0 && j >= 0 && i < nx && j < ny && kind[idx(i, j)] == NodeKind::Interior;
  }
  bool usable(int i, int j) const {
    return i >= 0 && j >= 0 && i < nx && j < ny && kind[idx(i, j)] != NodeKind::Outside;
  }
  bool is_interior(int flat) const { return is_interior(flat % nx, flat / nx); }
  bool usable(int flat) const { return usable(flat % nx, flat / nx); }
};

namespace detail {

// 1-D squared distance transform (lower envelope of parabolas).
inline void edt_1d(const std::vector<double>& f, std::vector<double>& d,
                   std::vector<int>& v, std::vector<double>& z) {
  const int n = static_cast<int>(f.size());
  int k = 0;
  v[0] = 0;
  z[0] = -std::numeric_limits<double>::infinity();
  z[1] = std::numeric_limits<double>::infinity();
  auto intersect = [&](int q, int p) {
    return ((f[q] + q * q) - (f[p] + p * p)) / (2.0 * (q - p));
  };
  for (int q = 1; q < n; ++q) {
    double s = intersect(q, v[k]);
    while (s <= z[k]) {
      --k;
      s = intersect(q, v[k]);
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = std::numeric_limits<double>::infinity();
  }
  k = 0;
  for (int q = 0; q < n; ++q) {
    while (z[k + 1] < q) ++k;
    d[q] = (q - v[k]) * (q - v[k]) + f[v[k]];
  }
}

// Exact squared Euclidean distance (in lattice units) from each cell to the
// nearest zero cell of `inside`.
inline std::vector<double> edt_sq(const std::vector<std::uint8_t>& inside, int nx, int ny) {
  const double inf = 1e18;
  std::vector<double> g(static_cast<std::size_t>(nx) * ny);
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = inside[i] ? inf : 0.0;
  const int n = std::max(nx, ny);
  std::vector<double> f(n), d(n), z(n + 1);
  std::vector<int> v(n);
  for (int j = 0; j < ny; ++j) {  // rows
    for (int i = 0; i < nx; ++i) f[i] = g[j * nx + i];
    f.resize(nx);
    d.resize(nx);
    edt_1d(f, d, v, z);
    for (int i = 0; i < nx; ++i) g[j * nx + i] = d[i];
    f.resize(n);
    d.resize(n);
  }
  for (int i = 0; i < nx; ++i) {  // columns
    for (int j = 0; j < ny; ++j) f[j] = g[j * nx + i];
    f.resize(ny);
    d.resize(ny);
    edt_1d(f, d, v, z);
    for (int j = 0; j < ny; ++j) g[j * nx + i] = d[j];
    f.resize(n);
    d.resize(n);
  }
  return g;
}

struct Circle {
  Vec2 c;
  double r = 0.0;
  bool contains(const Vec2& p) const { return dist(c, p) <= r + 1e-9 * (1.0 + r); }
};

inline Circle circle2(const Vec2& a, const Vec2& b) {
  Circle c;
  c.c = {0.5 * (a.x + b.x), 0.5 * (a.y + b.y)};
  c.r = 0.5 * dist(a, b);
  return c;
}

inline Circle circle3(const Vec2& a, const Vec2& b, const Vec2& c) {
  const double bx = b.x - a.x, by = b.y - a.y;
  const double cx = c.x - a.x, cy = c.y - a.y;
  const double d = 2.0 * (bx * cy - by * cx);
  if (std::abs(d) < 1e-14) {  // collinear: take the widest pair
    Circle best = circle2(a, b);
    for (const Circle& alt : {circle2(a, c), circle2(b, c)})
      if (alt.r > best.r) best = alt;
    return best;
  }
  const double ux = (cy * (bx * bx + by * by) - by * (cx * cx + cy * cy)) / d;
  const double uy = (bx * (cx * cx + cy * cy) - cx * (bx * bx + by * by)) / d;
  Circle out;
  out.c = {a.x + ux, a.y + uy};
  out.r = std::hypot(ux, uy);
  return out;
}

// Welzl's minimal enclosing circle, iterative move-to-front flavor.
inline Circle min_enclosing_circle(std::vector<Vec2> pts) {
  if (pts.empty()) return {};
  std::mt19937 rng(12345);
  std::shuffle(pts.begin(), pts.end(), rng);
  Circle c{pts[0], 0.0};
  for (std::size_t i = 1; i < pts.size(); ++i) {
    if (c.contains(pts[i])) continue;
    c = {pts[i], 0.0};
    for (std::size_t j = 0; j < i; ++j) {
      if (c.contains(pts[j])) continue;
      c = circle2(pts[i], pts[j]);
      for (std::size_t k = 0; k < j; ++k) {
        if (c.contains(pts[k])) continue;
        c = circle3(pts[i], pts[j], pts[k]);
      }
    }
  }
  return c;
}

inline bool inside_shape(const DomainSpec& s, const Vec2& p) {
  switch (s.kind) {
    case DomainSpec::Kind::Disk:
      return dist(p, s.center) < s.radius;
    case DomainSpec::Kind::Annulus: {
      const double d = dist(p, s.center);
      return d > s.kappa && d < s.tau;
    }
    case DomainSpec::Kind::Rectangle:
      return p.x > s.corner.x && p.x < s.corner.x + s.width && p.y > s.corner.y &&
             p.y < s.corner.y + s.height;
    case DomainSpec::Kind::Mask: {
      const int i = static_cast<int>(std::lround((p.x - s.mask_origin.x) / s.h));
      const int j = static_cast<int>(std::lround((p.y - s.mask_origin.y) / s.h));
      return i >= 0 && j >= 0 && i < s.mask_nx && j < s.mask_ny &&
             s.mask[static_cast<std::size_t>(j) * s.mask_nx + i] != 0;
    }
  }
  return false;
}

// Nearest point of the analytic boundary, used as the trace position of a
// boundary node. For masks the node position itself is kept.
inline Vec2 boundary_trace(const DomainSpec& s, const Vec2& p) {
  switch (s.kind) {
    case DomainSpec::Kind::Disk: {
      const double d = dist(p, s.center);
      if (d < 1e-30) return {s.center.x + s.radius, s.center.y};
      const double f = s.radius / d;
      return {s.center.x + f * (p.x - s.center.x), s.center.y + f * (p.y - s.center.y)};
    }
    case DomainSpec::Kind::Annulus: {
      const double d = dist(p, s.center);
      const double target =
          (std::abs(d - s.kappa) < std::abs(d - s.tau)) ? s.kappa : s.tau;
      if (d < 1e-30) return {s.center.x + target, s.center.y};
      const double f = target / d;
      return {s.center.x + f * (p.x - s.center.x), s.center.y + f * (p.y - s.center.y)};
    }
    case DomainSpec::Kind::Rectangle: {
      Vec2 q{std::clamp(p.x, s.corner.x, s.corner.x + s.width),
             std::clamp(p.y, s.corner.y, s.corner.y + s.height)};
      // a clamped exterior point already lies on the boundary
      return q;
    }
    case DomainSpec::Kind::Mask:
      return p;
  }
  return p;
}

}  // namespace detail

inline GridDomain build_domain(const DomainSpec& spec) {
  if (spec.h <= 0.0) throw std::invalid_argument("build_domain: h > 0 required");
  // bounding box with a 3-node margin so wide stencils stay in range
  double x0, y0, x1, y1;
  switch (spec.kind) {
    case DomainSpec::Kind::Disk:
      x0 = spec.center.x - spec.radius;
      x1 = spec.center.x + spec.radius;
      y0 = spec.center.y - spec.radius;
      y1 = spec.center.y + spec.radius;
      break;
    case DomainSpec::Kind::Annulus:
      x0 = spec.center.x - spec.tau;
      x1 = spec.center.x + spec.tau;
      y0 = spec.center.y - spec.tau;
      y1 = spec.center.y + spec.tau;
      break;
    case DomainSpec::Kind::Rectangle:
      x0 = spec.corner.x;
      x1 = spec.corner.x + spec.width;
      y0 = spec.corner.y;
      y1 = spec.corner.y + spec.height;
      break;
    case DomainSpec::Kind::Mask:
      x0 = spec.mask_origin.x;
      x1 = spec.mask_origin.x + spec.h * (spec.mask_nx - 1);
      y0 = spec.mask_origin.y;
      y1 = spec.mask_origin.y + spec.h * (spec.mask_ny - 1);
      break;
    default:
      throw std::invalid_argument("build_domain: unknown kind");
  }
  const int margin = 4;
  const double h = spec.h;
  GridDomain d;
  d.h = h;
  const int i0 = static_cast<int>(std::floor(x0 / h)) - margin;
  const int j0 = static_cast<int>(std::floor(y0 / h)) - margin;
  const int i1 = static_cast<int>(std::ceil(x1 / h)) + margin;
  const int j1 = static_cast<int>(std::ceil(y1 / h)) + margin;
  d.nx = i1 - i0 + 1;
  d.ny = j1 - j0 + 1;
  d.origin = {h * i0, h * j0};
  d.kind.assign(static_cast<std::size_t>(d.nx) * d.ny, NodeKind::Outside);

  for (int j = 0; j < d.ny; ++j)
    for (int i = 0; i < d.nx; ++i) {
      const Vec2 p{d.origin.x + h * i, d.origin.y + h * j};
      if (detail::inside_shape(spec, p)) {
        d.kind[d.idx(i, j)] = NodeKind::Interior;
        d.interior.push_back(d.idx(i, j));
      }
    }
  if (d.interior.empty()) throw EmptyInterior();

  // boundary ring: non-interior nodes 8-adjacent to the interior
  d.trace.assign(d.kind.size(), Vec2{});
  for (int j = 0; j < d.ny; ++j)
    for (int i = 0; i < d.nx; ++i) {
      if (d.kind[d.idx(i, j)] != NodeKind::Outside) continue;
      bool touches = false;
      for (int dj = -1; dj <= 1 && !touches; ++dj)
        for (int di = -1; di <= 1 && !touches; ++di)
          if ((di || dj) && d.is_interior(i + di, j + dj)) touches = true;
      if (!touches) continue;
      const int f = d.idx(i, j);
      d.kind[f] = NodeKind::Boundary;
      d.boundary.push_back(f);
      d.trace[f] = detail::boundary_trace(spec, d.pos(f));
    }

  // 4-edge connectivity of the interior
  {
    std::vector<std::uint8_t> seen(d.kind.size(), 0);
    std::vector<std::int32_t> stack{d.interior.front()};
    seen[d.interior.front()] = 1;
    std::size_t reached = 0;
    while (!stack.empty()) {
      const int f = stack.back();
      stack.pop_back();
      ++reached;
      const int i = f % d.nx, j = f / d.nx;
      const int off[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
      for (auto& o : off) {
        const int ii = i + o[0], jj = j + o[1];
        if (d.is_interior(ii, jj) && !seen[d.idx(ii, jj)]) {
          seen[d.idx(ii, jj)] = 1;
          stack.push_back(d.idx(ii, jj));
        }
      }
    }
    if (reached != d.interior.size()) throw DisconnectedInterior();
  }

  // metrics
  {
    std::vector<std::uint8_t> inside(d.kind.size(), 0);
    for (int f : d.interior) inside[f] = 1;
    const auto dsq = detail::edt_sq(inside, d.nx, d.ny);
    double best = 0.0;
    for (int f : d.interior) best = std::max(best, dsq[f]);
    // the nearest outside node overshoots the inscribed radius by up to a
    // cell; correct by half a cell and keep rho_in <= R_out
    d.rho_in = std::max(std::sqrt(best) - 0.5, 0.25) * h;

    std::vector<Vec2> pts;
    pts.reserve(d.interior.size());
    for (int f : d.interior) pts.push_back(d.pos(f));
    const auto mec = detail::min_enclosing_circle(std::move(pts));
    d.R_out = std::max(mec.r, 0.5 * h);  // a single node still encloses half a cell
    d.out_center = mec.c;
    d.rho_in = std::min(d.rho_in, d.R_out);
  }
  return d;
}

struct WeightField {
  std::vector<double> values;  // per flat node, meaningful on interior+boundary
  double mu = 0.0;             // sup over the domain
  double nu = 0.0;             // inf over the domain

  static WeightField sample(const GridDomain& d,
                            const std::function<double(double, double)>& a) {
    WeightField w;
    w.values.assign(d.kind.size(), 0.0);
    w.mu = -std::numeric_limits<double>::infinity();
    w.nu = std::numeric_limits<double>::infinity();
    auto take = [&](int f) {
      const Vec2 p = d.pos(f);
      const double v = a(p.x, p.y);
      if (!(v > 0.0) || !std::isfinite(v))
        throw std::invalid_argument("WeightField: weight must be positive and finite");
      w.values[f] = v;
      w.mu = std::max(w.mu, v);
      w.nu = std::min(w.nu, v);
    };
    for (int f : d.interior) take(f);
    for (int f : d.boundary) take(f);
    return w;
  }
  static WeightField constant(const GridDomain& d, double c) {
    return sample(d, [c](double, double) { return c; });
  }
};

// In-ball radius of the superlevel set {a > alpha * mu} within the interior;
// 0 when the set is empty.
inline double superlevel_inball(const GridDomain& d, const WeightField& a, double alpha) {
  if (alpha <= 0.0 || alpha > 1.0)
    throw std::invalid_argument("superlevel_inball: alpha in (0,1] required");
  std::vector<std::uint8_t> inside(d.kind.size(), 0);
  const double threshold = alpha * a.mu;
  bool any = false;
  for (int f : d.interior)
    if (a.values[f] > threshold) {
      inside[f] = 1;
      any = true;
    }
  if (!any) return 0.0;
  const auto dsq = detail::edt_sq(inside, d.nx, d.ny);
  double best = 0.0;
  for (std::size_t f = 0; f < inside.size(); ++f)
    if (inside[f]) best = std::max(best, dsq[f]);
  return std::sqrt(best) * d.h;
}

}  // namespace ilap::geom
