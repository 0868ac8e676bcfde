// SPDX-License-Identifier: Apache-2.0
//
// Experiment configuration: a sectioned key=value text format describing the
// domain, the weight, the problem data, and solver/eigen options, plus a
// small arithmetic expression grammar (+, -, *, /, ^, parentheses, the
// variables r, x, y, and numeric constants) used for weights and boundary
// data.  Unknown sections or keys are rejected so that stale configs fail
// loudly instead of silently running a different experiment.

#pragma once

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "ilap/dirichlet.hpp"
#include "ilap/eigen.hpp"
#include "ilap/geometry.hpp"

namespace ilap::cfg {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Expression grammar over r, x, y.
//
//   expr   := term (('+' | '-') term)*
//   term   := factor (('*' | '/') factor)*
//   factor := unary ('^' factor)?          (right-associative power)
//   unary  := '-' unary | primary
//   primary:= number | 'r' | 'x' | 'y' | '(' expr ')'
// ---------------------------------------------------------------------------

class Expression {
 public:
  static Expression parse(const std::string& text) {
    Expression e;
    Parser p{text, 0};
    e.root_ = p.expr();
    p.skip_ws();
    if (p.pos != text.size())
      throw ConfigError("expression: trailing characters at position " +
                        std::to_string(p.pos) + " in '" + text + "'");
    return e;
  }

  double eval(double x, double y) const {
    const double v = root_->eval(x, y);
    if (!std::isfinite(v))
      throw ConfigError("expression: non-finite value at (" +
                        std::to_string(x) + ", " + std::to_string(y) + ")");
    return v;
  }

  std::function<double(double, double)> fn() const {
    auto node = root_;
    return [node](double x, double y) { return node->eval(x, y); };
  }

 private:
  struct Node {
    // op: '#' literal, 'x'/'y'/'r' variable, else binary/unary operator
    char op = '#';
    double value = 0.0;
    std::shared_ptr<Node> lhs, rhs;

    double eval(double x, double y) const {
      switch (op) {
        case '#': return value;
        case 'x': return x;
        case 'y': return y;
        case 'r': return std::hypot(x, y);
        case '+': return lhs->eval(x, y) + rhs->eval(x, y);
        case '-': return lhs->eval(x, y) - rhs->eval(x, y);
        case '*': return lhs->eval(x, y) * rhs->eval(x, y);
        case '/': return lhs->eval(x, y) / rhs->eval(x, y);
        case '^': return std::pow(lhs->eval(x, y), rhs->eval(x, y));
        case 'n': return -lhs->eval(x, y);
        default: throw ConfigError("expression: corrupt node");
      }
    }
  };
  using NodePtr = std::shared_ptr<Node>;

  struct Parser {
    const std::string& s;
    size_t pos;

    void skip_ws() {
      while (pos < s.size() && std::isspace((unsigned char)s[pos])) ++pos;
    }
    bool eat(char c) {
      skip_ws();
      if (pos < s.size() && s[pos] == c) {
        ++pos;
        return true;
      }
      return false;
    }
    char peek() {
      skip_ws();
      return pos < s.size() ? s[pos] : '\0';
    }

    NodePtr expr() {
      NodePtr n = term();
      for (;;) {
        if (eat('+')) n = bin('+', n, term());
        else if (eat('-')) n = bin('-', n, term());
        else return n;
      }
    }
    NodePtr term() {
      NodePtr n = factor();
      for (;;) {
        if (eat('*')) n = bin('*', n, factor());
        else if (eat('/')) n = bin('/', n, factor());
        else return n;
      }
    }
    NodePtr factor() {
      // unary minus binds below the power: -2^2 = -(2^2)
      if (eat('-')) {
        auto n = std::make_shared<Node>();
        n->op = 'n';
        n->lhs = factor();
        return n;
      }
      NodePtr base = primary();
      if (eat('^')) return bin('^', base, factor());
      return base;
    }
    NodePtr primary() {
      skip_ws();
      if (pos >= s.size()) throw ConfigError("expression: unexpected end of '" + s + "'");
      const char c = s[pos];
      if (c == '(') {
        ++pos;
        NodePtr n = expr();
        if (!eat(')')) throw ConfigError("expression: missing ')' in '" + s + "'");
        return n;
      }
      if (c == 'r' || c == 'x' || c == 'y') {
        // a variable, unless it starts a longer identifier we do not know
        if (pos + 1 < s.size() && std::isalnum((unsigned char)s[pos + 1]))
          throw ConfigError("expression: unknown identifier in '" + s + "'");
        ++pos;
        auto n = std::make_shared<Node>();
        n->op = c;
        return n;
      }
      if (std::isdigit((unsigned char)c) || c == '.') {
        char* end = nullptr;
        const double v = std::strtod(s.c_str() + pos, &end);
        if (end == s.c_str() + pos)
          throw ConfigError("expression: bad number in '" + s + "'");
        pos = (size_t)(end - s.c_str());
        auto n = std::make_shared<Node>();
        n->op = '#';
        n->value = v;
        return n;
      }
      throw ConfigError(std::string("expression: unexpected character '") + c +
                        "' in '" + s + "'");
    }
    static NodePtr bin(char op, NodePtr l, NodePtr r) {
      auto n = std::make_shared<Node>();
      n->op = op;
      n->lhs = std::move(l);
      n->rhs = std::move(r);
      return n;
    }
  };

  NodePtr root_;
};

// ---------------------------------------------------------------------------
// Sectioned key=value text.  '#' and ';' start comments; section headers are
// [name]; keys may not repeat within a section.
// ---------------------------------------------------------------------------

using SectionMap = std::map<std::string, std::map<std::string, std::string>>;

inline SectionMap parse_sections(std::istream& in) {
  SectionMap out;
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const size_t cut = line.find_first_of("#;");
    if (cut != std::string::npos) line.erase(cut);
    const size_t b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos) continue;
    const size_t e = line.find_last_not_of(" \t\r");
    line = line.substr(b, e - b + 1);
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("config line " + std::to_string(lineno) +
                          ": malformed section header");
      section = line.substr(1, line.size() - 2);
      if (section.empty())
        throw ConfigError("config line " + std::to_string(lineno) +
                          ": empty section name");
      out[section];  // register even if empty
      continue;
    }
    const size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) +
                        ": expected key = value");
    if (section.empty())
      throw ConfigError("config line " + std::to_string(lineno) +
                        ": key outside any [section]");
    std::string key = line.substr(0, eq);
    std::string val = line.substr(eq + 1);
    auto trim = [](std::string& s) {
      const size_t a = s.find_first_not_of(" \t");
      const size_t z = s.find_last_not_of(" \t");
      s = (a == std::string::npos) ? "" : s.substr(a, z - a + 1);
    };
    trim(key);
    trim(val);
    if (key.empty())
      throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
    if (!out[section].emplace(key, val).second)
      throw ConfigError("config line " + std::to_string(lineno) +
                        ": duplicate key '" + key + "' in [" + section + "]");
  }
  return out;
}

// ---------------------------------------------------------------------------
// RunConfig: the validated experiment description.
// ---------------------------------------------------------------------------

struct RunConfig {
  geom::DomainSpec domain;

  // weight: exactly one of the three is active
  std::optional<double> weight_constant;
  std::optional<Expression> weight_expr;
  std::vector<double> weight_grid;  // row-major nx*ny samples from a file
  int weight_grid_nx = 0, weight_grid_ny = 0;

  double lambda = 0.0;
  double delta = 1.0;
  std::optional<Expression> boundary_expr;  // b(x, y), defaults to delta
  std::optional<Expression> rhs_expr;       // forcing h(x, y), defaults to 0

  dir::SolveOptions solve;
  eigen::EigenOptions eigen;

  std::string out_dir = ".";

  // radial runs reuse the disk radius as R and solver h as dr
  int ladder_lmax = 3;
  std::vector<double> levelset_thresholds;  // empty = skip level-set analysis
};

namespace detail {

class SectionReader {
 public:
  SectionReader(const SectionMap& m, const std::string& name) : name_(name) {
    auto it = m.find(name);
    if (it != m.end()) kv_ = &it->second;
  }
  bool present() const { return kv_ != nullptr; }

  std::optional<std::string> str(const std::string& key) {
    if (!kv_) return std::nullopt;
    auto it = kv_->find(key);
    if (it == kv_->end()) return std::nullopt;
    seen_.push_back(key);
    return it->second;
  }
  std::optional<double> num(const std::string& key) {
    auto s = str(key);
    if (!s) return std::nullopt;
    char* end = nullptr;
    const double v = std::strtod(s->c_str(), &end);
    if (end == s->c_str() || *end != '\0')
      throw ConfigError("[" + name_ + "] " + key + ": not a number: '" + *s + "'");
    return v;
  }
  std::optional<int> integer(const std::string& key) {
    auto v = num(key);
    if (!v) return std::nullopt;
    if (*v != std::floor(*v))
      throw ConfigError("[" + name_ + "] " + key + ": expected an integer");
    return (int)*v;
  }
  std::optional<bool> boolean(const std::string& key) {
    auto s = str(key);
    if (!s) return std::nullopt;
    if (*s == "true" || *s == "1") return true;
    if (*s == "false" || *s == "0") return false;
    throw ConfigError("[" + name_ + "] " + key + ": expected true/false");
  }
  void finish() const {
    if (!kv_) return;
    for (const auto& [k, v] : *kv_) {
      (void)v;
      bool ok = false;
      for (const auto& s : seen_)
        if (s == k) ok = true;
      if (!ok) throw ConfigError("[" + name_ + "] unknown key '" + k + "'");
    }
  }

 private:
  std::string name_;
  const std::map<std::string, std::string>* kv_ = nullptr;
  std::vector<std::string> seen_;
};

// Mask bitmap file: optional "h=<v>" / "origin=<x> <y>" headers followed by
// rows of 0/1 characters (whitespace between cells allowed).  Row order is
// top-to-bottom in the file, stored bottom-to-top to match grid j order.
inline geom::DomainSpec load_mask(const std::string& path, double default_h) {
  std::ifstream in(path);
  if (!in) throw ConfigError("mask file not found: " + path);
  double h = default_h;
  geom::Vec2 origin{0.0, 0.0};
  std::vector<std::string> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("h=", 0) == 0) {
      h = std::strtod(line.c_str() + 2, nullptr);
      continue;
    }
    if (line.rfind("origin=", 0) == 0) {
      std::istringstream iss(line.substr(7));
      if (!(iss >> origin.x >> origin.y))
        throw ConfigError(path + ": malformed origin header");
      continue;
    }
    std::string cells;
    for (char c : line) {
      if (c == '0' || c == '1') cells.push_back(c);
      else if (!std::isspace((unsigned char)c))
        throw ConfigError(path + ": mask rows must contain only 0/1");
    }
    if (!cells.empty()) rows.push_back(cells);
  }
  if (rows.empty()) throw ConfigError(path + ": empty mask");
  if (!(h > 0.0)) throw ConfigError(path + ": mask needs h=<spacing> header");
  const int nx = (int)rows[0].size();
  const int ny = (int)rows.size();
  for (const auto& r : rows)
    if ((int)r.size() != nx) throw ConfigError(path + ": ragged mask rows");
  std::vector<std::uint8_t> bits((size_t)nx * ny, 0);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i)
      bits[(size_t)j * nx + i] = rows[(size_t)(ny - 1 - j)][(size_t)i] == '1';
  return geom::DomainSpec::from_mask(std::move(bits), nx, ny, origin, h);
}

}  // namespace detail

// Parses and validates a full run configuration.  `h_override` and
// `tol_lambda_override` implement the CLI flags of the same names; a
// negative value means "not given".
inline RunConfig parse_config(std::istream& in, double h_override = -1.0,
                              double tol_lambda_override = -1.0) {
  const SectionMap m = parse_sections(in);
  static const char* known[] = {"domain", "weight", "problem",
                                "solver", "eigen",  "output"};
  for (const auto& [sec, kv] : m) {
    (void)kv;
    bool ok = false;
    for (const char* k : known)
      if (sec == k) ok = true;
    if (!ok) throw ConfigError("unknown section [" + sec + "]");
  }

  RunConfig rc;

  {
    detail::SectionReader d(m, "domain");
    if (!d.present()) throw ConfigError("missing [domain] section");
    const std::string kind = d.str("kind").value_or("disk");
    double h = d.num("h").value_or(0.0);
    if (h_override > 0.0) h = h_override;
    const double cx = d.num("center_x").value_or(0.0);
    const double cy = d.num("center_y").value_or(0.0);
    if (kind == "disk") {
      const double R = d.num("radius").value_or(1.0);
      rc.domain = geom::DomainSpec::disk({cx, cy}, R, h > 0 ? h : R / 16.0);
    } else if (kind == "annulus") {
      auto kap = d.num("kappa"), tau = d.num("tau");
      if (!kap || !tau) throw ConfigError("[domain] annulus needs kappa and tau");
      rc.domain = geom::DomainSpec::annulus({cx, cy}, *kap, *tau,
                                            h > 0 ? h : *tau / 16.0);
    } else if (kind == "rectangle") {
      auto w = d.num("width"), ht = d.num("height");
      if (!w || !ht) throw ConfigError("[domain] rectangle needs width and height");
      const double ox = d.num("corner_x").value_or(0.0);
      const double oy = d.num("corner_y").value_or(0.0);
      rc.domain = geom::DomainSpec::rectangle({ox, oy}, *w, *ht,
                                              h > 0 ? h : *w / 16.0);
    } else if (kind == "mask") {
      auto file = d.str("file");
      if (!file) throw ConfigError("[domain] mask needs file=");
      rc.domain = detail::load_mask(*file, h);
      if (h_override > 0.0) rc.domain.h = h_override;
    } else {
      throw ConfigError("[domain] unknown kind '" + kind + "'");
    }
    d.finish();
  }

  {
    detail::SectionReader w(m, "weight");
    const std::string kind = w.str("kind").value_or("constant");
    if (kind == "constant") {
      rc.weight_constant = w.num("value").value_or(1.0);
      if (!(*rc.weight_constant > 0.0))
        throw ConfigError("[weight] value must be positive");
    } else if (kind == "expression") {
      auto ex = w.str("expr");
      if (!ex) throw ConfigError("[weight] expression needs expr=");
      rc.weight_expr = Expression::parse(*ex);
    } else if (kind == "grid") {
      auto file = w.str("file");
      if (!file) throw ConfigError("[weight] grid needs file=");
      std::ifstream gf(*file);
      if (!gf) throw ConfigError("weight grid file not found: " + *file);
      double v;
      std::vector<std::vector<double>> rows(1);
      std::string line;
      while (std::getline(gf, line)) {
        std::istringstream iss(line);
        std::vector<double> row;
        while (iss >> v) row.push_back(v);
        if (!row.empty()) rows.back() = row, rows.emplace_back();
      }
      rows.pop_back();
      if (rows.empty()) throw ConfigError(*file + ": empty weight grid");
      rc.weight_grid_nx = (int)rows[0].size();
      rc.weight_grid_ny = (int)rows.size();
      for (auto& r : rows) {
        if ((int)r.size() != rc.weight_grid_nx)
          throw ConfigError(*file + ": ragged weight grid");
        for (double q : r) rc.weight_grid.push_back(q);
      }
    } else {
      throw ConfigError("[weight] unknown kind '" + kind + "'");
    }
    w.finish();
  }

  {
    detail::SectionReader p(m, "problem");
    rc.lambda = p.num("lambda").value_or(0.0);
    rc.delta = p.num("delta").value_or(1.0);
    if (auto b = p.str("boundary")) rc.boundary_expr = Expression::parse(*b);
    if (auto r = p.str("rhs")) rc.rhs_expr = Expression::parse(*r);
    p.finish();
  }

  {
    detail::SectionReader s(m, "solver");
    if (auto v = s.num("tol")) rc.solve.tol = *v;
    if (auto v = s.integer("max_sweeps")) rc.solve.max_sweeps = *v;
    if (auto v = s.num("cap")) rc.solve.cap = *v;
    if (auto v = s.integer("threads")) rc.solve.threads = *v;
    if (auto v = s.boolean("accelerate")) rc.solve.accelerate = *v;
    s.finish();
  }

  {
    detail::SectionReader e(m, "eigen");
    rc.eigen.solve = rc.solve;
    if (auto v = e.num("tol_lambda")) rc.eigen.tol_lambda = *v;
    if (auto v = e.num("delta")) rc.eigen.delta = *v;
    if (auto v = e.boolean("use_hint")) rc.eigen.use_hint = *v;
    if (auto v = e.integer("ladder_lmax")) rc.ladder_lmax = *v;
    if (auto v = e.str("levelset")) {
      std::istringstream iss(*v);
      double t;
      while (iss >> t) rc.levelset_thresholds.push_back(t);
      if (!iss.eof())
        throw ConfigError("[eigen] levelset: expected space-separated numbers");
    }
    if (tol_lambda_override > 0.0) rc.eigen.tol_lambda = tol_lambda_override;
    e.finish();
  }

  {
    detail::SectionReader o(m, "output");
    if (auto v = o.str("dir")) rc.out_dir = *v;
    o.finish();
  }

  return rc;
}

inline RunConfig parse_config_file(const std::string& path,
                                   double h_override = -1.0,
                                   double tol_lambda_override = -1.0) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config file not found: " + path);
  return parse_config(in, h_override, tol_lambda_override);
}

// Materializes the configured weight on a built grid.
inline geom::WeightField make_weight(const RunConfig& rc,
                                     const geom::GridDomain& d) {
  if (rc.weight_constant) return geom::WeightField::constant(d, *rc.weight_constant);
  if (rc.weight_expr) return geom::WeightField::sample(d, rc.weight_expr->fn());
  // grid weight: the file's lattice is stretched across the bounding box of
  // the analytic domain and sampled bilinearly, clamped to the edges
  const int nx = rc.weight_grid_nx, ny = rc.weight_grid_ny;
  const auto& g = rc.weight_grid;
  geom::Vec2 lo{0, 0}, hi{0, 0};
  switch (rc.domain.kind) {
    case geom::DomainSpec::Kind::Disk:
      lo = {rc.domain.center.x - rc.domain.radius,
            rc.domain.center.y - rc.domain.radius};
      hi = {rc.domain.center.x + rc.domain.radius,
            rc.domain.center.y + rc.domain.radius};
      break;
    case geom::DomainSpec::Kind::Annulus:
      lo = {rc.domain.center.x - rc.domain.tau, rc.domain.center.y - rc.domain.tau};
      hi = {rc.domain.center.x + rc.domain.tau, rc.domain.center.y + rc.domain.tau};
      break;
    case geom::DomainSpec::Kind::Rectangle:
      lo = rc.domain.corner;
      hi = {rc.domain.corner.x + rc.domain.width,
            rc.domain.corner.y + rc.domain.height};
      break;
    case geom::DomainSpec::Kind::Mask:
      lo = rc.domain.mask_origin;
      hi = {rc.domain.mask_origin.x + rc.domain.h * (rc.domain.mask_nx - 1),
            rc.domain.mask_origin.y + rc.domain.h * (rc.domain.mask_ny - 1)};
      break;
  }
  const double sx = (hi.x > lo.x) ? (nx - 1) / (hi.x - lo.x) : 0.0;
  const double sy = (hi.y > lo.y) ? (ny - 1) / (hi.y - lo.y) : 0.0;
  return geom::WeightField::sample(d, [=, &g](double x, double y) {
    double fx = std::clamp((x - lo.x) * sx, 0.0, (double)(nx - 1));
    double fy = std::clamp((y - lo.y) * sy, 0.0, (double)(ny - 1));
    const int i0 = std::min((int)fx, nx - 2 >= 0 ? nx - 2 : 0);
    const int j0 = std::min((int)fy, ny - 2 >= 0 ? ny - 2 : 0);
    const double tx = fx - i0, ty = fy - j0;
    auto at = [&](int i, int j) {
      return g[(size_t)std::min(j, ny - 1) * nx + (size_t)std::min(i, nx - 1)];
    };
    return (1 - tx) * (1 - ty) * at(i0, j0) + tx * (1 - ty) * at(i0 + 1, j0) +
           (1 - tx) * ty * at(i0, j0 + 1) + tx * ty * at(i0 + 1, j0 + 1);
  });
}

}  // namespace ilap::cfg
