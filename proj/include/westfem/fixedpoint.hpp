#pragma once

// Fixed-point treatment of the quasilinear problems: freeze the
// state-dependent coefficients along the current iterate, solve the
// resulting linear(ized) problem, repeat.  Coefficients are frozen by
// interpolating the trajectory in time first and applying the coefficient
// formula at nodes second, so the fixed point satisfies the same discrete
// equations as the monolithic solver.
//
//   W1 / W2 / Coupled:  a = 1 - 2 k u,        f = -2 k u_t
//   W3:                 a = c^2 / (1 - 2 kt u_t),  f = 0
//
// Iteration metric: the triple norm of consecutive differences; the
// contraction factors d_n / d_{n-1} are logged for reporting.

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "westfem/evolution.hpp"
#include "westfem/mesh.hpp"
#include "westfem/norms.hpp"
#include "westfem/scenario.hpp"

namespace westfem {

inline CoefficientSeries freeze_coefficients(const Mesh& mesh,
                                             const ScenarioSpec& spec,
                                             const Trajectory& traj,
                                             double a_min = 0.0) {
  const int nn = mesh.n_nodes();
  const int N = traj.steps();
  CoefficientSeries cs;
  cs.a_step.resize(nn, N + 1);
  cs.a_mid.resize(nn, N);
  cs.f_step = Eigen::MatrixXd::Zero(nn, N + 1);
  cs.f_mid = Eigen::MatrixXd::Zero(nn, N);

  if (spec.formulation == Formulation::W3) {
    const double kt = spec.params.kt, c2 = spec.params.c2;
    auto apply = [&](const Eigen::VectorXd& v, int n, double t,
                     Eigen::Ref<Eigen::VectorXd> out) {
      for (int i = 0; i < nn; ++i) {
        const double den = 1.0 - 2.0 * kt * v(i);
        if (den <= a_min) throw DegeneracyError(n, i, den, t);
        out(i) = c2 / den;
      }
    };
    for (int n = 0; n <= N; ++n)
      apply(traj.v.col(n), n, traj.grid.t(n), cs.a_step.col(n));
    for (int n = 0; n < N; ++n)
      apply(0.5 * (traj.v.col(n) + traj.v.col(n + 1)), n, traj.grid.tmid(n),
            cs.a_mid.col(n));
    return cs;
  }

  // a is affine in u, so the midpoint formula and the midpoint of step
  // values coincide; the explicit midpoint evaluation keeps the contract.
  Eigen::VectorXd k = nodal_k(mesh, spec);
  for (int n = 0; n <= N; ++n) {
    cs.a_step.col(n) =
        Eigen::VectorXd::Ones(nn) - 2.0 * k.cwiseProduct(traj.u.col(n));
    cs.f_step.col(n) = -2.0 * k.cwiseProduct(traj.v.col(n));
    int node = 0;
    const double mn = cs.a_step.col(n).minCoeff(&node);
    if (mn <= a_min) throw DegeneracyError(n, node, mn, traj.grid.t(n));
  }
  for (int n = 0; n < N; ++n) {
    cs.a_mid.col(n) =
        Eigen::VectorXd::Ones(nn) -
        k.cwiseProduct(traj.u.col(n) + traj.u.col(n + 1));
    cs.f_mid.col(n) = -k.cwiseProduct(traj.v.col(n) + traj.v.col(n + 1));
  }
  return cs;
}

struct IterationRecord {
  int iter;
  double increment;  // d_n = |||u^n - u^{n-1}|||
  double ratio;      // d_n / d_{n-1}, zero for n = 1
};

struct PicardResult {
  Trajectory traj;
  std::vector<IterationRecord> log;
  bool converged = false;
  int iterations = 0;
  CoefficientSeries coef;  // frozen along the returned trajectory
};

namespace detail {

struct PicardContext {
  LinearizedProblem pb;  // coef filled per application
  SolverOptions opts;
};

inline PicardContext make_context(const Mesh& mesh, const ScenarioSpec& spec) {
  PicardContext ctx;
  ctx.pb.form = spec.formulation;
  ctx.pb.params = spec.params;
  ctx.pb.fields = instantiate_coefficients(mesh, spec);
  ctx.pb.g = fn_from_expr(spec.data.g);
  ctx.pb.r = fn_from_expr(spec.data.r);
  ctx.pb.u0 = nodal_from_expr(mesh, spec.data.u0);
  ctx.pb.u1 = nodal_from_expr(mesh, spec.data.u1);
  ctx.opts.newton_tol = spec.solver.newton_tol;
  ctx.opts.max_newton = spec.solver.max_newton;
  ctx.opts.a_min = spec.solver.a_min;
  return ctx;
}

}  // namespace detail

// One application of the solution operator T: freeze along prev, solve.
inline Trajectory apply_T(const Mesh& mesh, const ScenarioSpec& spec,
                          const TimeGrid& grid, const Trajectory& prev) {
  detail::PicardContext ctx = detail::make_context(mesh, spec);
  ctx.pb.coef = freeze_coefficients(mesh, spec, prev, ctx.opts.a_min);
  return solve_linearized(mesh, ctx.pb, grid, ctx.opts);
}

inline PicardResult picard_solve(const Mesh& mesh, const ScenarioSpec& spec,
                                 const TimeGrid& grid) {
  detail::PicardContext ctx = detail::make_context(mesh, spec);
  const double tol = spec.solver.picard_tol;
  const int max_iter = spec.solver.max_picard;

  Trajectory prev;
  prev.grid = grid;
  const int nn = mesh.n_nodes();
  if (spec.solver.initial_iterate == "constant") {
    // hold the initial data constant in time
    prev.u = ctx.pb.u0.replicate(1, grid.steps + 1);
    prev.v = ctx.pb.u1.replicate(1, grid.steps + 1);
  } else {
    // linear solve: freeze along the zero trajectory
    Trajectory zero;
    zero.grid = grid;
    zero.u = Eigen::MatrixXd::Zero(nn, grid.steps + 1);
    zero.v = Eigen::MatrixXd::Zero(nn, grid.steps + 1);
    ctx.pb.coef = freeze_coefficients(mesh, spec, zero, ctx.opts.a_min);
    prev = solve_linearized(mesh, ctx.pb, grid, ctx.opts);
  }

  PicardResult res;
  double d_prev = 0.0;
  for (int it = 1; it <= max_iter; ++it) {
    ctx.pb.coef = freeze_coefficients(mesh, spec, prev, ctx.opts.a_min);
    Trajectory next = solve_linearized(mesh, ctx.pb, grid, ctx.opts);

    Trajectory diff;
    diff.grid = grid;
    diff.u = next.u - prev.u;
    diff.v = next.v - prev.v;
    const double d = triple_norm(mesh, diff);

    IterationRecord rec;
    rec.iter = it;
    rec.increment = d;
    rec.ratio = (it >= 2 && d_prev > 0.0) ? d / d_prev : 0.0;
    res.log.push_back(rec);

    prev = std::move(next);
    d_prev = d;
    res.iterations = it;
    if (d <= tol) {
      res.converged = true;
      break;
    }
  }
  res.traj = std::move(prev);
  res.coef = freeze_coefficients(mesh, spec, res.traj, ctx.opts.a_min);
  return res;
}

// Measured ball norms per formulation, against the radii (m_bar, M_bar).
struct BallReport {
  std::string norm1, norm2, norm3;  // names of the measured quantities
  double val1 = 0, val2 = 0, val3 = 0;
  double m_bar = 0, M_bar = 0;
  bool inside = false;
};

inline BallReport ball_membership(const Mesh& mesh, const Trajectory& traj,
                                  Formulation form, double q, double m_bar,
                                  double M_bar) {
  TrajectoryNorms tn = TrajectoryNorms::compute(mesh, traj, q);
  BallReport br;
  br.m_bar = m_bar;
  br.M_bar = M_bar;
  switch (form) {
    case Formulation::W2:
      br.norm1 = "|u_t|_{Linf L2}";
      br.norm2 = "|grad u_t|_{L2 L2}";
      br.norm3 = "|grad u|_{Linf Lq+1}";
      br.val1 = tn.v_LinfL2;
      br.val2 = tn.gv_L2L2;
      br.val3 = tn.gu_LinfLq1;
      break;
    case Formulation::W3:
      br.norm1 = "|u_tt|_{L2 L2}";
      br.norm2 = "|u_t|_{Linf H1}";
      br.norm3 = "|grad u_t|_{Linf Lq+1}";
      br.val1 = tn.utt_L2L2;
      br.val2 = tn.v_LinfH1;
      br.val3 = tn.gv_LinfLq1;
      break;
    default:  // W1, Coupled
      br.norm1 = "|u_tt|_{L2 L2}";
      br.norm2 = "|u_t|_{Linf H1}";
      br.norm3 = "|grad u_t|_{Lq+1 Lq+1}";
      br.val1 = tn.utt_L2L2;
      br.val2 = tn.v_LinfH1;
      br.val3 = tn.gv_Lq1Lq1;
      break;
  }
  br.inside = br.val1 <= m_bar && br.val2 <= m_bar && br.val3 <= M_bar;
  return br;
}

}  // namespace westfem
