#pragma once

// Orchestration behind the CLI: loads a scenario, runs the requested mode,
// writes artifacts into the output directory.  Exit codes: 0 success,
// 1 a requested check failed, 2 degeneracy abort, 3 unusable input.

#include <algorithm>
#include <fstream>
#include <future>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "westfem/certificate.hpp"
#include "westfem/energy.hpp"
#include "westfem/fixedpoint.hpp"
#include "westfem/io.hpp"
#include "westfem/mms.hpp"

namespace westfem {

struct RunConfig {
  std::string scenario_path;
  std::string out_dir = "out";
  std::string mode = "simulate";
  unsigned long seed = 20240915;
  int workers = 1;
  std::map<std::string, double> tol;
};

inline ScenarioSpec load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot read scenario file: " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("scenario parse error: ") +
                                e.what());
  }
  return scenario_from_json(j);
}

struct RunOutput {
  Trajectory traj;
  CoefficientSeries coef;
  std::vector<IterationRecord> log;
  bool converged = true;
  int iterations = 0;
};

inline RunOutput execute(const Mesh& mesh, const ScenarioSpec& spec,
                         const TimeGrid& grid) {
  RunOutput out;
  if (spec.solver.engine == "monolithic") {
    SolverOptions so{spec.solver.newton_tol, spec.solver.max_newton,
                     spec.solver.a_min};
    out.traj = solve_nonlinear_monolithic(mesh, spec, grid, so);
    out.coef = freeze_coefficients(mesh, spec, out.traj);
    out.iterations = 1;
  } else {
    PicardResult pr = picard_solve(mesh, spec, grid);
    out.traj = std::move(pr.traj);
    out.coef = std::move(pr.coef);
    out.log = std::move(pr.log);
    out.converged = pr.converged;
    out.iterations = pr.iterations;
  }
  return out;
}

inline ConstantsTable make_constants(const Mesh& mesh,
                                     const ScenarioSpec& spec,
                                     unsigned long seed) {
  AscentOptions opts;
  if (seed != 0) opts.seed = seed;
  ConstantsTable ct = ConstantsTable::estimate(mesh, spec.params.q, opts);
  for (const auto& [name, value] : spec.checks.constants)
    ct.apply_override(name, value);
  return ct;
}

inline EstimateContext make_estimate_context(
    const Mesh& mesh, const ScenarioSpec& spec, const TimeGrid& grid,
    const Trajectory& traj, const CoefficientSeries& coef,
    const ConstantsTable& ct) {
  EstimateContext ctx;
  ctx.form = spec.formulation;
  ctx.phys = spec.params;
  ctx.T = grid.T;
  ctx.ct = ct;
  const double q = spec.params.q;
  ctx.tn = TrajectoryNorms::compute(mesh, traj, q);
  ctx.dn = DataNorms::compute(mesh, traj.u.col(0), traj.v.col(0), q);
  ctx.gn = GNorms::compute(mesh, grid, fn_from_expr(spec.data.g), q);
  if (spec.formulation == Formulation::Coupled) {
    CoefficientFields f = instantiate_coefficients(mesh, spec);
    Eigen::VectorXd inv_lambda = f.lambda.cwiseInverse();
    ctx.cn = CoefficientNorms::compute(mesh, grid, coef, q, &inv_lambda);
    populate_coupled_bounds(ctx, mesh, f, spec.params);
  } else {
    ctx.cn = CoefficientNorms::compute(mesh, grid, coef, q);
    populate_coupled_bounds(ctx, mesh, CoefficientFields{}, spec.params);
  }
  ctx.free_params = spec.checks.free_params;
  if (auto it = ctx.free_params.find("cbar"); it != ctx.free_params.end()) {
    ctx.cbar = it->second;
    ctx.free_params.erase(it);
  }
  if (auto it = spec.checks.tol.find("margin"); it != spec.checks.tol.end())
    ctx.tol = it->second;
  return ctx;
}

// default estimate set per formulation; a scenario may name its own
inline std::vector<std::string> applicable_estimates(
    const ScenarioSpec& spec) {
  if (!spec.checks.estimates.empty()) return spec.checks.estimates;
  const PhysicalParams& p = spec.params;
  switch (spec.formulation) {
    case Formulation::W1: {
      std::vector<std::string> ids = {"est1", "est2"};
      if (p.beta > 0.0) {
        ids.push_back("W1_beta_est1");
        ids.push_back("W1lin_est2_beta");
      }
      if (p.gamma > 0.0) {
        ids.push_back("W1_gamma_est1");
        ids.push_back("W1lin_est2_gamma");
        ids.push_back("W1lin_est2_gamma2");
      }
      return ids;
    }
    case Formulation::W2: {
      std::vector<std::string> ids = {"W2_energyest"};
      if (p.beta > 0.0) ids.push_back("W2_energyest_1");
      return ids;
    }
    case Formulation::W3: {
      std::vector<std::string> ids;
      if (p.gamma > 0.0) {
        ids = {"W3lin_lower_gamma", "W3lin_higher_gamma"};
      } else {
        ids = {"W3lin_lower", "W3lin_higher"};
      }
      return ids;
    }
    case Formulation::Coupled:
      return {"coupled_lower"};
  }
  return {};
}

namespace detail {

inline void write_degeneracy(const std::string& out_dir,
                             const DegeneracyError& e) {
  std::ofstream out = open_out(out_dir + "/degeneracy.txt");
  out << "degenerate = true\n";
  out << "step = " << e.step << "\n";
  out << "node = " << e.node << "\n";
  out << "value = " << format_g(e.value) << "\n";
  out << "message = " << e.what() << "\n";
}

inline void write_simulation(const std::string& out_dir, const Mesh& mesh,
                             const ScenarioSpec& spec, const TimeGrid& grid,
                             const RunOutput& run) {
  const double q = spec.params.q;
  write_trajectory_csv(out_dir + "/trajectory.csv", mesh, run.traj,
                       spec.probes);
  TrajectoryNorms tn = TrajectoryNorms::compute(mesh, run.traj, q);
  DataNorms dn =
      DataNorms::compute(mesh, run.traj.u.col(0), run.traj.v.col(0), q);
  GNorms gn = GNorms::compute(mesh, grid, fn_from_expr(spec.data.g), q);
  write_norms_kv(out_dir + "/norms.txt", tn, dn, gn,
                 triple_norm(mesh, run.traj));
  write_energy_csv(out_dir + "/energy.csv", grid,
                   energy_series(mesh, run.traj, spec.params.c2));
  if (!run.log.empty())
    write_iterations_csv(out_dir + "/iterations.csv", run.log);
  Eigen::VectorXd kn = nodal_k(mesh, spec);
  DegeneracyMargin dm =
      degeneracy_margin(run.traj, spec.formulation, kn);
  std::ofstream out = open_out(out_dir + "/margin.txt");
  write_kv(out, "degeneracy_margin", dm.value);
  out << "argmin.step = " << dm.step << "\n";
  out << "argmin.node = " << dm.node << "\n";
}

inline int mode_simulate(const std::string& out_dir, const Mesh& mesh,
                         const ScenarioSpec& spec, const TimeGrid& grid) {
  RunOutput run = execute(mesh, spec, grid);
  write_simulation(out_dir, mesh, spec, grid, run);
  return 0;
}

inline int mode_check_estimates(const std::string& out_dir, const Mesh& mesh,
                                const ScenarioSpec& spec,
                                const TimeGrid& grid, unsigned long seed) {
  RunOutput run = execute(mesh, spec, grid);
  write_simulation(out_dir, mesh, spec, grid, run);
  ConstantsTable ct = make_constants(mesh, spec, seed);
  write_constants_kv(out_dir + "/constants.txt", ct);
  EstimateContext ctx =
      make_estimate_context(mesh, spec, grid, run.traj, run.coef, ct);
  bool any_fail = false;
  for (const std::string& id : applicable_estimates(spec)) {
    EnergyReport rep = energy_report(ctx, id);
    write_energy_report(out_dir + "/estimate_" + id + ".txt", rep);
    any_fail = any_fail || rep.status == "fail";
  }
  return any_fail ? 1 : 0;
}

inline int mode_certify(const std::string& out_dir, const Mesh& mesh,
                        const ScenarioSpec& spec, const TimeGrid& grid,
                        unsigned long seed) {
  RunOutput run = execute(mesh, spec, grid);
  write_simulation(out_dir, mesh, spec, grid, run);
  ConstantsTable ct = make_constants(mesh, spec, seed);
  write_constants_kv(out_dir + "/constants.txt", ct);

  const double q = spec.params.q;
  double m_bar = spec.checks.m_bar, M_bar = spec.checks.M_bar;
  BallReport ball = ball_membership(mesh, run.traj, spec.formulation, q,
                                    m_bar > 0.0 ? m_bar : 1.0,
                                    M_bar > 0.0 ? M_bar : 1.0);
  if (m_bar <= 0.0) m_bar = 1.2 * std::max(ball.val1, ball.val2);
  if (M_bar <= 0.0) M_bar = 1.2 * ball.val3;

  DataNorms dn =
      DataNorms::compute(mesh, run.traj.u.col(0), run.traj.v.col(0), q);
  GNorms gn = GNorms::compute(mesh, grid, fn_from_expr(spec.data.g), q);
  SmallnessCertificate cert =
      smallness_certificate(mesh, spec, ct, dn, gn, m_bar, M_bar);
  Eigen::VectorXd kn = nodal_k(mesh, spec);
  DegeneracyMargin dm = degeneracy_margin(run.traj, spec.formulation, kn);
  cert.params["degeneracy_margin"] = dm.value;
  write_certificate(out_dir + "/certificate.txt", cert);
  return cert.pass ? 0 : 1;
}

inline int mode_oracle_compare(const std::string& out_dir, const Mesh& mesh,
                               const ScenarioSpec& spec,
                               const TimeGrid& grid) {
  PicardResult pr = picard_solve(mesh, spec, grid);
  SolverOptions so{spec.solver.newton_tol, spec.solver.max_newton,
                   spec.solver.a_min};
  Trajectory mono = solve_nonlinear_monolithic(mesh, spec, grid, so);
  double diff = 0.0;
  std::ofstream out = open_out(out_dir + "/oracle.csv");
  out << "step,t,l2_diff\n";
  for (int n = 0; n <= grid.steps; ++n) {
    const double d =
        l2_volume(mesh, Eigen::VectorXd(pr.traj.u.col(n) - mono.u.col(n)));
    diff = std::max(diff, d);
    out << n << "," << format_g(grid.t(n)) << "," << format_g(d) << "\n";
  }
  double tol = 1e-8;
  if (auto it = spec.checks.tol.find("oracle"); it != spec.checks.tol.end())
    tol = it->second;
  std::ofstream rep = open_out(out_dir + "/oracle.txt");
  write_kv(rep, "linf_l2_difference", diff);
  write_kv(rep, "tolerance", tol);
  rep << "within_tolerance = " << (diff <= tol ? "true" : "false") << "\n";
  rep << "picard_iterations = " << pr.iterations << "\n";
  return diff <= tol ? 0 : 1;
}

inline int mode_mms(const std::string& out_dir, const ScenarioSpec& spec) {
  const PhysicalParams& p = spec.params;
  double a_amp = 0.0, f_amp = 0.0;
  if (auto it = spec.checks.free_params.find("a_amp");
      it != spec.checks.free_params.end())
    a_amp = it->second;
  if (auto it = spec.checks.free_params.find("f_amp");
      it != spec.checks.free_params.end())
    f_amp = it->second;
  MMSCase cs =
      mms_w1lin_1d(p.q, p.c2, p.b, p.delta, a_amp, f_amp, spec.time.T);
  SolverOptions so{spec.solver.newton_tol, spec.solver.max_newton,
                   spec.solver.a_min};
  ConvergenceTable temporal =
      mms_temporal(cs, spec.mesh.elements, {25, 50, 100, 200}, so);
  ConvergenceTable spatial =
      mms_spatial(cs, {8, 16, 32, 64}, spec.time.steps, so);
  write_convergence_csv(out_dir + "/mms_temporal.csv", temporal, "dt");
  write_convergence_csv(out_dir + "/mms_spatial.csv", spatial, "h");
  const bool ok = temporal.order >= 1.9 && temporal.order <= 2.1 &&
                  spatial.order >= 1.9 && spatial.order <= 2.1;
  std::ofstream rep = open_out(out_dir + "/mms.txt");
  write_kv(rep, "temporal_order", temporal.order);
  write_kv(rep, "spatial_order", spatial.order);
  rep << "within_range = " << (ok ? "true" : "false") << "\n";
  return ok ? 0 : 1;
}

inline int mode_sweep(const std::string& out_dir, const ScenarioSpec& spec,
                      int workers) {
  if (spec.sweep.empty())
    throw std::invalid_argument("sweep mode needs a non-empty sweep section");
  std::vector<std::string> axes;
  std::vector<std::vector<double>> values;
  for (const auto& [axis, vals] : spec.sweep) {
    if (vals.empty())
      throw std::invalid_argument("sweep axis '" + axis + "' has no values");
    axes.push_back(axis);
    values.push_back(vals);
  }
  int total = 1;
  for (const auto& v : values) total *= int(v.size());

  struct PointResult {
    std::vector<double> coords;
    double v_linf_l2 = 0.0;
    int iterations = 0;
    bool degenerate = false;
  };
  std::vector<PointResult> results(static_cast<size_t>(total));

  auto run_point = [&](int idx) {
    PointResult res;
    ScenarioSpec point = spec;
    point.sweep.clear();
    int rem = idx;
    for (size_t a = 0; a < axes.size(); ++a) {
      const int n = int(values[a].size());
      const double v = values[a][size_t(rem % n)];
      rem /= n;
      set_scenario_value(point, axes[a], v);
      res.coords.push_back(v);
    }
    char sub[32];
    std::snprintf(sub, sizeof(sub), "/point_%04d", idx);
    const std::string pdir = out_dir + sub;
    ensure_dir(pdir);
    Mesh mesh = build_mesh(point.mesh);
    TimeGrid grid{point.time.T, point.time.steps};
    try {
      RunOutput run = execute(mesh, point, grid);
      write_simulation(pdir, mesh, point, grid, run);
      TrajectoryNorms tn =
          TrajectoryNorms::compute(mesh, run.traj, point.params.q);
      res.v_linf_l2 = tn.v_LinfL2;
      res.iterations = run.iterations;
    } catch (const DegeneracyError& e) {
      write_degeneracy(pdir, e);
      res.degenerate = true;
    }
    results[size_t(idx)] = std::move(res);
  };

  if (workers > 1) {
    std::vector<std::future<void>> pending;
    for (int idx = 0; idx < total; ++idx) {
      pending.push_back(std::async(std::launch::async, run_point, idx));
      if (int(pending.size()) >= workers) {
        for (auto& f : pending) f.get();
        pending.clear();
      }
    }
    for (auto& f : pending) f.get();
  } else {
    for (int idx = 0; idx < total; ++idx) run_point(idx);
  }

  std::ofstream out = open_out(out_dir + "/summary.csv");
  out << "index";
  for (const auto& a : axes) out << "," << a;
  out << ",v_LinfL2,iterations,degenerate\n";
  for (int idx = 0; idx < total; ++idx) {
    const PointResult& res = results[size_t(idx)];
    out << idx;
    for (double c : res.coords) out << "," << format_g(c);
    out << "," << format_g(res.v_linf_l2) << "," << res.iterations << ","
        << (res.degenerate ? "true" : "false") << "\n";
  }
  return 0;
}

}  // namespace detail

inline int run_cli(const RunConfig& cfg) {
  static const std::vector<std::string> modes = {
      "simulate", "check-estimates", "certify",
      "oracle-compare", "mms", "sweep"};
  try {
    if (std::find(modes.begin(), modes.end(), cfg.mode) == modes.end()) {
      std::cerr << "unknown mode: " << cfg.mode << "\n";
      return 3;
    }
    ScenarioSpec spec = load_scenario(cfg.scenario_path);
    for (const auto& [name, value] : cfg.tol) spec.checks.tol[name] = value;
    std::vector<std::string> warnings = validate(spec);
    for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
    ensure_dir(cfg.out_dir);
    Mesh mesh = build_mesh(spec.mesh);
    TimeGrid grid{spec.time.T, spec.time.steps};

    if (cfg.mode == "simulate")
      return detail::mode_simulate(cfg.out_dir, mesh, spec, grid);
    if (cfg.mode == "check-estimates")
      return detail::mode_check_estimates(cfg.out_dir, mesh, spec, grid,
                                          cfg.seed);
    if (cfg.mode == "certify")
      return detail::mode_certify(cfg.out_dir, mesh, spec, grid, cfg.seed);
    if (cfg.mode == "oracle-compare")
      return detail::mode_oracle_compare(cfg.out_dir, mesh, spec, grid);
    if (cfg.mode == "mms") return detail::mode_mms(cfg.out_dir, spec);
    return detail::mode_sweep(cfg.out_dir, spec, cfg.workers);
  } catch (const DegeneracyError& e) {
    ensure_dir(cfg.out_dir);
    detail::write_degeneracy(cfg.out_dir, e);
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace westfem
