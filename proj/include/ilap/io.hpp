// SPDX-License-Identifier: Apache-2.0
//
// File outputs for the command-line tool: JSON reports, CSV dumps of grid
// fields and radial profiles, PGM grayscale images of fields, and a
// JUnit-style XML summary for verification suites.  All floating-point text
// goes through one fixed "%.17g" formatter so identical inputs produce
// byte-identical files.

#pragma once

#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "ilap/dirichlet.hpp"
#include "ilap/eigen.hpp"
#include "ilap/geometry.hpp"
#include "ilap/operator.hpp"
#include "ilap/radial.hpp"
#include "ilap/verify.hpp"

namespace ilap::io {

using json = nlohmann::ordered_json;

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Doubles are embedded as fixed-format strings parsed back by std::strtod;
// this keeps the JSON byte-stable regardless of the library's own float
// printer.
inline json num(double v) { return fmt(v); }

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << text;
  if (!out) throw IoError("write failed: " + path);
}

// ---------------------------------------------------------------------------
// JSON reports
// ---------------------------------------------------------------------------

inline const char* outcome_name(dir::Outcome o) {
  switch (o) {
    case dir::Outcome::Converged: return "Converged";
    case dir::Outcome::Diverged: return "Diverged";
    default: return "Stalled";
  }
}

inline json solve_report_json(const dir::SolveReport& rep, double lambda,
                              double delta, const geom::GridDomain& d) {
  json j;
  j["lambda"] = num(lambda);
  j["delta"] = num(delta);
  j["h"] = num(d.h);
  j["interior_nodes"] = (int)d.interior.size();
  j["boundary_nodes"] = (int)d.boundary.size();
  j["outcome"] = outcome_name(rep.outcome);
  j["iterations"] = rep.iterations;
  j["residual"] = num(rep.residual);
  double sup = 0.0;
  for (int f : d.interior) sup = std::max(sup, rep.field[f]);
  j["sup_u"] = num(sup);
  json hist = json::array();
  for (double s : rep.sup_history) hist.push_back(num(s));
  j["sup_history"] = hist;
  return j;
}

inline json eigen_estimate_json(const eigen::EigenEstimate& e,
                                const geom::GridDomain& d) {
  json j;
  j["lambda_hat"] = num(e.lambda_hat);
  j["bracket_lo"] = num(e.lo);
  j["bracket_hi"] = num(e.hi);
  j["soft_bracket"] = e.soft;
  j["boundary_level"] = num(e.boundary_level);
  j["h"] = num(d.h);
  j["probes"] = (int)e.trace.size();
  json trace = json::array();
  for (const auto& r : e.trace) {
    json t;
    t["lambda"] = num(r.lambda);
    t["classification"] = r.classification == eigen::Membership::InS ? "InS"
                          : r.classification == eigen::Membership::NotInS
                              ? "NotInS"
                              : "Inconclusive";
    t["sup_u"] = num(r.sup_u);
    trace.push_back(t);
  }
  j["trace"] = trace;
  return j;
}

inline json radial_profile_json(const radial::RadialProfile& p) {
  json j;
  j["lambda"] = num(p.lambda);
  j["m"] = num(p.m);
  j["dr"] = num(p.dr);
  j["nodes"] = (int)p.r.size();
  if (p.first_zero) j["first_zero"] = num(*p.first_zero);
  return j;
}

inline json violation_report_json(const verify::ViolationReport& r) {
  json j;
  j["check"] = r.check;
  j["verdict"] = r.verdict == verify::Verdict::Pass ? "Pass"
                 : r.verdict == verify::Verdict::Fail ? "Fail"
                                                      : "PassWithSlack";
  j["tolerance"] = num(r.tolerance);
  j["worst_slack"] = num(r.worst_slack);
  j["violations"] = (int)r.violations.size();
  if (!r.note.empty()) j["note"] = r.note;
  json v = json::array();
  for (size_t k = 0; k < r.violations.size() && k < 20; ++k) {
    json e;
    e["node"] = r.violations[k].node;
    e["magnitude"] = num(r.violations[k].magnitude);
    v.push_back(e);
  }
  j["worst_violations"] = v;
  return j;
}

// ---------------------------------------------------------------------------
// CSV / PGM field dumps
// ---------------------------------------------------------------------------

inline void write_field_csv(const std::string& path, const geom::GridDomain& d,
                            const op::ScalarField& u) {
  std::string s = "i,j,x,y,u\n";
  for (int j = 0; j < d.ny; ++j)
    for (int i = 0; i < d.nx; ++i) {
      const int f = d.idx(i, j);
      if (!d.usable(i, j)) continue;
      const geom::Vec2 p = d.pos(f);
      s += std::to_string(i) + "," + std::to_string(j) + "," + fmt(p.x) + "," +
           fmt(p.y) + "," + fmt(u[f]) + "\n";
    }
  write_text(path, s);
}

inline void write_profile_csv(const std::string& path,
                              const radial::RadialProfile& p) {
  std::string s = "r,u,a\n";
  for (size_t i = 0; i < p.r.size(); ++i)
    s += fmt(p.r[i]) + "," + fmt(p.u[i]) + "," + fmt(p.weight[i]) + "\n";
  write_text(path, s);
}

inline void write_level_curve_csv(const std::string& path,
                                  const eigen::LevelSetReport& rep) {
  std::string s = "t,lambda_t,lower_bound\n";
  for (size_t i = 0; i < rep.thresholds.size(); ++i)
    s += fmt(rep.thresholds[i]) + "," + fmt(rep.lambda_t[i]) + "," +
         fmt(rep.lower_bound[i]) + "\n";
  write_text(path, s);
}

// Plain-text PGM (P2), outside nodes black, field scaled to [0, 255].
inline void write_field_pgm(const std::string& path, const geom::GridDomain& d,
                            const op::ScalarField& u) {
  double lo = 0.0, hi = 0.0;
  bool first = true;
  for (int f = 0; f < (int)d.kind.size(); ++f) {
    if (!d.usable(f)) continue;
    if (first) lo = hi = u[f], first = false;
    lo = std::min(lo, u[f]);
    hi = std::max(hi, u[f]);
  }
  const double span = hi > lo ? hi - lo : 1.0;
  std::string s = "P2\n" + std::to_string(d.nx) + " " + std::to_string(d.ny) +
                  "\n255\n";
  for (int j = d.ny - 1; j >= 0; --j) {
    for (int i = 0; i < d.nx; ++i) {
      int g = 0;
      if (d.usable(i, j)) {
        const double t = (u[d.idx(i, j)] - lo) / span;
        g = 1 + (int)(t * 254.0 + 0.5);  // inside nodes never pure black
      }
      s += std::to_string(g);
      s += (i + 1 == d.nx) ? '\n' : ' ';
    }
  }
  write_text(path, s);
}

// ---------------------------------------------------------------------------
// Loaders for stored runs (used by the verify subcommand)
// ---------------------------------------------------------------------------

inline double json_num(const json& j) {
  if (j.is_string()) return std::strtod(j.get<std::string>().c_str(), nullptr);
  return j.get<double>();
}

struct StoredRun {
  dir::SolveReport report;
  double lambda = 0.0;
  double delta = 1.0;
};

inline op::ScalarField read_field_csv(const std::string& path,
                                      const geom::GridDomain& d) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open field CSV: " + path);
  op::ScalarField u(d, 0.0);
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    int i = 0, j = 0;
    double x, y, v;
    if (std::sscanf(line.c_str(), "%d,%d,%lf,%lf,%lf", &i, &j, &x, &y, &v) != 5)
      throw IoError(path + ": malformed CSV row: " + line);
    if (i < 0 || i >= d.nx || j < 0 || j >= d.ny)
      throw IoError(path + ": node outside grid: " + line);
    u[d.idx(i, j)] = v;
  }
  return u;
}

inline StoredRun read_solve_report_json(const std::string& path,
                                        const geom::GridDomain& d) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open report JSON: " + path);
  json j = json::parse(in, nullptr, true);
  StoredRun run;
  run.lambda = json_num(j.at("lambda"));
  run.delta = json_num(j.at("delta"));
  const std::string oc = j.at("outcome").get<std::string>();
  run.report.outcome = oc == "Converged" ? dir::Outcome::Converged
                       : oc == "Diverged" ? dir::Outcome::Diverged
                                          : dir::Outcome::Stalled;
  run.report.iterations = j.at("iterations").get<int>();
  run.report.residual = json_num(j.at("residual"));
  for (const auto& s : j.at("sup_history"))
    run.report.sup_history.push_back(json_num(s));
  run.report.field = op::ScalarField(d, 0.0);
  return run;
}

// ---------------------------------------------------------------------------
// JUnit-style XML for verification suites
// ---------------------------------------------------------------------------

inline std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

inline std::string junit_xml(const std::string& suite,
                             const std::vector<verify::ViolationReport>& reps) {
  int failures = 0;
  for (const auto& r : reps)
    if (!r.pass()) ++failures;
  std::string x = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  x += "<testsuite name=\"" + xml_escape(suite) + "\" tests=\"" +
       std::to_string(reps.size()) + "\" failures=\"" +
       std::to_string(failures) + "\">\n";
  for (const auto& r : reps) {
    x += "  <testcase name=\"" + xml_escape(r.check) + "\"";
    if (r.pass()) {
      x += "/>\n";
      continue;
    }
    x += ">\n    <failure message=\"" +
         xml_escape(std::to_string(r.violations.size()) +
                    " violation(s) beyond tolerance " + fmt(r.tolerance) +
                    (r.note.empty() ? "" : "; " + r.note)) +
         "\"/>\n  </testcase>\n";
  }
  x += "</testsuite>\n";
  return x;
}

}  // namespace ilap::io
