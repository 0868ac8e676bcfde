// SPDX-License-Identifier: Apache-2.0
//
// Command-line driver: Dirichlet solves, principal eigenvalue search, radial
// oracles, the reflected eigenvalue ladder, verification suites against
// stored runs, and scheme consistency studies.  Exit codes: 0 success
// (a recorded Diverged outcome is a valid result), 1 a verify suite failed,
// 2 configuration error, 3 solver error.

#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ilap/config.hpp"
#include "ilap/dirichlet.hpp"
#include "ilap/eigen.hpp"
#include "ilap/geometry.hpp"
#include "ilap/io.hpp"
#include "ilap/operator.hpp"
#include "ilap/radial.hpp"
#include "ilap/verify.hpp"

namespace fs = std::filesystem;
using namespace ilap;
using json = io::json;

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_dir;
  int threads = 0;          // 0 = use config
  double tol_lambda = -1.0; // <=0 = use config
  double h = -1.0;          // <=0 = use config
};

void add_common(CLI::App* cmd, CommonArgs& args, bool config_required) {
  cmd->set_help_flag("--help", "print help");  // frees -h / --h for spacing
  auto* c = cmd->add_option("--config", args.config_path,
                            "experiment configuration file");
  if (config_required) c->required();
  cmd->add_option("--out", args.out_dir, "output directory");
  cmd->add_option("--threads", args.threads, "worker thread cap");
  cmd->add_option("--tol-lambda", args.tol_lambda,
                  "eigenvalue bracket width target");
  cmd->add_option("--h", args.h, "grid spacing override");
}

cfg::RunConfig load(const CommonArgs& args) {
  cfg::RunConfig rc =
      cfg::parse_config_file(args.config_path, args.h, args.tol_lambda);
  if (!args.out_dir.empty()) rc.out_dir = args.out_dir;
  if (args.threads > 0) {
    rc.solve.threads = args.threads;
    rc.eigen.solve.threads = args.threads;
  }
  fs::create_directories(rc.out_dir);
  return rc;
}

std::string join(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

// Per-node Dirichlet data sampled from the configured expressions; boundary
// nodes are evaluated at their analytic trace position.
std::vector<double> sample_boundary(const cfg::RunConfig& rc,
                                    const geom::GridDomain& d) {
  std::vector<double> b(d.kind.size(), rc.delta);
  if (!rc.boundary_expr) return b;
  for (int f : d.boundary) {
    const geom::Vec2 p = d.trace[f];
    b[(size_t)f] = rc.boundary_expr->eval(p.x, p.y);
  }
  return b;
}

int cmd_solve(const CommonArgs& args) {
  cfg::RunConfig rc = load(args);
  auto d = geom::build_domain(rc.domain);
  auto st = op::Stencil::make(3);
  auto a = cfg::make_weight(rc, d);

  dir::ProblemParams p;
  p.lambda = rc.lambda;
  p.a = &a;
  p.delta = rc.delta;
  std::vector<double> b;
  if (rc.boundary_expr) {
    b = sample_boundary(rc, d);
    p.boundary = &b;
  }
  op::ScalarField rhs;
  if (rc.rhs_expr) {
    rhs = op::ScalarField(d, 0.0);
    for (int f : d.interior) {
      const geom::Vec2 q = d.pos(f);
      rhs[f] = rc.rhs_expr->eval(q.x, q.y);
    }
    p.rhs = &rhs;
  }

  auto rep = dir::solve_dirichlet(d, p, st, rc.solve);
  io::write_text(join(rc.out_dir, "report.json"),
                 io::solve_report_json(rep, rc.lambda, rc.delta, d).dump(2) + "\n");
  io::write_field_csv(join(rc.out_dir, "field.csv"), d, rep.field);
  io::write_field_pgm(join(rc.out_dir, "field.pgm"), d, rep.field);
  std::cout << "outcome=" << io::outcome_name(rep.outcome)
            << " iterations=" << rep.iterations
            << " residual=" << io::fmt(rep.residual) << "\n";
  return 0;
}

int cmd_eigen(const CommonArgs& args) {
  cfg::RunConfig rc = load(args);
  auto d = geom::build_domain(rc.domain);
  auto st = op::Stencil::make(3);
  auto a = cfg::make_weight(rc, d);

  // An unbounded sweep budget makes near-threshold probes arbitrarily slow;
  // default to a bounded budget unless the config asked for more.
  if (rc.eigen.solve.max_sweeps == dir::SolveOptions{}.max_sweeps)
    rc.eigen.solve.max_sweeps = 6000;
  if (rc.eigen.solve.cap < 0.0) rc.eigen.solve.cap = 100.0;
  if (rc.eigen.solve.tol < 0.0) rc.eigen.solve.tol = 1e-6;

  auto est = eigen::estimate_principal(d, a, st, rc.eigen);
  io::write_text(join(rc.out_dir, "eigen.json"),
                 io::eigen_estimate_json(est, d).dump(2) + "\n");
  io::write_field_csv(join(rc.out_dir, "eigenfunction.csv"), d,
                      est.eigenfunction);
  io::write_field_pgm(join(rc.out_dir, "eigenfunction.pgm"), d,
                      est.eigenfunction);

  if (!rc.levelset_thresholds.empty()) {
    std::function<double(double, double)> afn;
    if (rc.weight_constant) {
      const double c = *rc.weight_constant;
      afn = [c](double, double) { return c; };
    } else if (rc.weight_expr) {
      afn = rc.weight_expr->fn();
    } else {
      throw cfg::ConfigError("level-set analysis needs a constant or expression weight");
    }
    auto ls = eigen::level_set_analysis(d, est.eigenfunction, afn, st,
                                        rc.levelset_thresholds, rc.eigen);
    io::write_level_curve_csv(join(rc.out_dir, "levelset.csv"), ls);
  }

  std::cout << "lambda_hat=" << io::fmt(est.lambda_hat) << " bracket=["
            << io::fmt(est.lo) << "," << io::fmt(est.hi) << "]"
            << (est.soft ? " (soft)" : "") << "\n";
  return 0;
}

int cmd_radial(const CommonArgs& args) {
  cfg::RunConfig rc = load(args);
  if (rc.domain.kind != geom::DomainSpec::Kind::Disk)
    throw cfg::ConfigError("radial runs need a disk domain");
  const double R = rc.domain.radius;
  const double dr = rc.domain.h;

  std::function<double(double)> a1d;
  if (rc.weight_constant) {
    const double c = *rc.weight_constant;
    a1d = [c](double) { return c; };
  } else if (rc.weight_expr) {
    auto e = *rc.weight_expr;
    a1d = [e](double r) { return e.eval(r, 0.0); };
  } else {
    throw cfg::ConfigError("radial runs need a constant or expression weight");
  }

  json j;
  if (rc.lambda > 0.0) {
    auto prof = radial::picard_radial(a1d, rc.lambda, rc.delta, R, dr);
    io::write_profile_csv(join(rc.out_dir, "profile.csv"), prof);
    j = io::radial_profile_json(prof);
  } else {
    auto [lam, prof] = radial::radial_first_eigen(a1d, R, dr);
    io::write_profile_csv(join(rc.out_dir, "profile.csv"), prof);
    j = io::radial_profile_json(prof);
    j["lambda_first"] = io::num(lam);
  }
  io::write_text(join(rc.out_dir, "radial.json"), j.dump(2) + "\n");
  std::cout << j.dump(2) << "\n";
  return 0;
}

int cmd_ladder(double R, int lmax) {
  if (R <= 0.0 || lmax < 1)
    throw cfg::ConfigError("ladder: need R > 0 and lmax >= 1");
  json j;
  j["R"] = io::num(R);
  json lam = json::array();
  for (int ell = 1; ell <= lmax; ++ell)
    lam.push_back(io::num(radial::eigen_ladder(R, ell)));
  j["lambda"] = lam;
  std::cout << j.dump(2) << "\n";
  return 0;
}

// Verification suites over stored runs: each input is a directory produced
// by `solve` holding report.json + field.csv on the configured domain.
int cmd_verify(const CommonArgs& args, const std::string& suite,
               const std::vector<std::string>& inputs, double exponent) {
  cfg::RunConfig rc = load(args);
  auto d = geom::build_domain(rc.domain);
  auto st = op::Stencil::make(3);
  auto a = cfg::make_weight(rc, d);
  const double tol = verify::default_tol(d.h);

  auto load_run = [&](size_t i) {
    if (i >= inputs.size())
      throw cfg::ConfigError("verify " + suite + ": missing input run directory");
    io::StoredRun run = io::read_solve_report_json(
        join(inputs[i], "report.json"), d);
    run.report.field = io::read_field_csv(join(inputs[i], "field.csv"), d);
    return run;
  };

  std::vector<verify::ViolationReport> reps;
  if (suite == "comparison") {
    auto u = load_run(0), v = load_run(1);
    reps.push_back(verify::check_comparison(u.report.field, v.report.field,
                                            u.lambda, v.lambda, tol));
  } else if (suite == "ratio") {
    auto u = load_run(0), v = load_run(1);
    reps.push_back(
        verify::check_ratio_principle(u.report.field, v.report.field, tol));
  } else if (suite == "apriori") {
    auto u = load_run(0);
    dir::ProblemParams p;
    p.lambda = u.lambda;
    p.a = &a;
    p.delta = u.delta;
    reps.push_back(verify::check_apriori_bounds(
        u.report, p, dir::analytic_bounds(d, a), tol));
  } else if (suite == "power") {
    auto u = load_run(0);
    reps.push_back(verify::check_power_transform(u.report.field, u.lambda, a,
                                                 exponent, st, tol));
  } else {
    throw cfg::ConfigError("unknown verify suite '" + suite +
                           "' (comparison, ratio, apriori, power)");
  }

  json summary;
  summary["suite"] = suite;
  json checks = json::array();
  bool all_pass = true;
  for (const auto& r : reps) {
    checks.push_back(io::violation_report_json(r));
    all_pass = all_pass && r.pass();
  }
  summary["checks"] = checks;
  summary["pass"] = all_pass;
  io::write_text(join(rc.out_dir, "verify_" + suite + ".json"),
                 summary.dump(2) + "\n");
  io::write_text(join(rc.out_dir, "verify_" + suite + ".xml"),
                 io::junit_xml(suite, reps));
  std::cout << summary.dump(2) << "\n";
  return all_pass ? 0 : 1;
}

int cmd_consistency(double h0, int levels) {
  if (h0 <= 0.0 || levels < 1)
    throw cfg::ConfigError("consistency: need h > 0 and levels >= 1");
  auto st = op::Stencil::make(3);
  std::vector<double> hs;
  for (int k = 0; k < levels; ++k) hs.push_back(h0 / (1 << k));
  auto rows = op::scheme_consistency_report(st, hs);
  json j = json::array();
  for (const auto& r : rows) {
    json row;
    row["h"] = io::num(r.h);
    row["err_affine"] = io::num(r.err_affine);
    row["err_quadratic"] = io::num(r.err_quadratic);
    row["err_cone"] = io::num(r.err_cone);
    j.push_back(row);
  }
  std::cout << j.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"infinity-Laplacian eigenvalue toolkit"};
  app.set_help_flag("--help", "print help");
  app.require_subcommand(1);

  CommonArgs a_solve, a_eigen, a_radial, a_verify;
  double ladder_R = 1.0, cons_h = 0.25, verify_q = 2.0;
  int ladder_lmax = 3, cons_levels = 4;
  std::string verify_suite;
  std::vector<std::string> verify_inputs;

  auto* solve = app.add_subcommand("solve", "Dirichlet solve from a config");
  add_common(solve, a_solve, true);

  auto* eig = app.add_subcommand("eigen", "principal eigenvalue search");
  add_common(eig, a_eigen, true);

  auto* rad = app.add_subcommand("radial", "radial profile / first eigenvalue");
  add_common(rad, a_radial, true);

  auto* lad = app.add_subcommand("ladder", "reflected eigenvalue ladder");
  lad->add_option("--R", ladder_R, "ball radius");
  lad->add_option("--lmax", ladder_lmax, "number of ladder levels");

  auto* ver = app.add_subcommand("verify", "run a verification suite");
  add_common(ver, a_verify, true);
  ver->add_option("suite", verify_suite, "comparison|ratio|apriori|power")
      ->required();
  ver->add_option("inputs", verify_inputs, "stored run directories");
  ver->add_option("--exponent", verify_q, "power-transform exponent");

  auto* con = app.add_subcommand("consistency", "scheme refinement study");
  con->set_help_flag("--help", "print help");
  con->add_option("--h", cons_h, "coarsest spacing");
  con->add_option("--levels", cons_levels, "number of halvings");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*solve) return cmd_solve(a_solve);
    if (*eig) return cmd_eigen(a_eigen);
    if (*rad) return cmd_radial(a_radial);
    if (*lad) return cmd_ladder(ladder_R, ladder_lmax);
    if (*ver) return cmd_verify(a_verify, verify_suite, verify_inputs, verify_q);
    if (*con) return cmd_consistency(cons_h, cons_levels);
  } catch (const cfg::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const io::IoError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return 3;
  }
  return 2;
}
