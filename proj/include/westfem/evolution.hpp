#pragma once

// Time integration of the damped wave formulations on the first-order
// system (u, v = u_t), implicit midpoint rule:
//
//   M_a(t^{n+1/2}) (v^{n+1} - v^n)/dt + S(u^{n+1/2}) + D(v^{n+1/2})
//     + B v^{n+1/2} + M_f v^{n+1/2} + L(v^{n+1/2}) = F(t^{n+1/2}),
//   u^{n+1} = u^n + dt/2 (v^n + v^{n+1})   (kinematic relation, exact).
//
// The linearized solver takes frozen nodal coefficient fields a, f sampled
// at step midpoints; the monolithic solver evaluates the state-dependent
// coefficients inside the per-step Newton loop.  Nodal products (a = 1-2ku
// and the quadratic velocity force) are formed at nodes and integrated as
// P1 fields, so the fixed point of the frozen iteration and the monolithic
// trajectory solve the same discrete equations.

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "westfem/assembly.hpp"
#include "westfem/mesh.hpp"
#include "westfem/scenario.hpp"

namespace westfem {

struct TimeGrid {
  double T = 1.0;
  int steps = 100;

  double dt() const { return T / double(steps); }
  double t(int n) const { return T * double(n) / double(steps); }
  double tmid(int n) const { return 0.5 * (t(n) + t(n + 1)); }
};

struct Trajectory {
  Eigen::MatrixXd u, v;  // n_nodes x (steps+1)
  TimeGrid grid;

  int steps() const { return int(u.cols()) - 1; }
  int n_nodes() const { return int(u.rows()); }
};

class DegeneracyError : public std::runtime_error {
public:
  int step, node;
  double value;
  DegeneracyError(int step_, int node_, double value_, double t)
      : std::runtime_error("degeneracy abort: coefficient a reached " +
                           std::to_string(value_) + " at node " +
                           std::to_string(node_) + ", step " +
                           std::to_string(step_) + " (t = " +
                           std::to_string(t) + ")"),
        step(step_), node(node_), value(value_) {}
};

class StepError : public std::runtime_error {
public:
  int step;
  double residual;
  StepError(int step_, double residual_)
      : std::runtime_error("Newton iteration stalled at step " +
                           std::to_string(step_) + ", residual " +
                           std::to_string(residual_)),
        step(step_), residual(residual_) {}
};

using SpaceTimeFn = std::function<double(double, double, double)>;

inline SpaceTimeFn fn_from_expr(const std::string& text) {
  if (text.empty() || text == "0") return nullptr;
  Expr e = Expr::parse(text);
  return [e](double x, double y, double t) { return e(x, y, t); };
}

inline Eigen::VectorXd nodal_from_expr(const Mesh& mesh, const std::string& text,
                                       double t = 0.0) {
  Expr e = Expr::parse(text);
  Eigen::VectorXd v(mesh.n_nodes());
  for (int i = 0; i < mesh.n_nodes(); ++i) {
    Eigen::Vector2d xy = mesh.node_xy(i);
    v(i) = e(xy.x(), xy.y(), t);
  }
  return v;
}

// Frozen coefficients, nodal, sampled on the step grid and at midpoints.
struct CoefficientSeries {
  Eigen::MatrixXd a_step;  // n_nodes x (steps+1)
  Eigen::MatrixXd a_mid;   // n_nodes x steps
  Eigen::MatrixXd f_step;
  Eigen::MatrixXd f_mid;
};

inline CoefficientSeries coefficient_series_from_exprs(const Mesh& mesh,
                                                       const TimeGrid& grid,
                                                       const std::string& a_expr,
                                                       const std::string& f_expr) {
  CoefficientSeries cs;
  const int nn = mesh.n_nodes();
  cs.a_step.resize(nn, grid.steps + 1);
  cs.a_mid.resize(nn, grid.steps);
  cs.f_step.resize(nn, grid.steps + 1);
  cs.f_mid.resize(nn, grid.steps);
  Expr ea = Expr::parse(a_expr.empty() ? "1" : a_expr);
  Expr ef = Expr::parse(f_expr.empty() ? "0" : f_expr);
  for (int n = 0; n <= grid.steps; ++n)
    for (int i = 0; i < nn; ++i) {
      Eigen::Vector2d xy = mesh.node_xy(i);
      cs.a_step(i, n) = ea(xy.x(), xy.y(), grid.t(n));
      cs.f_step(i, n) = ef(xy.x(), xy.y(), grid.t(n));
    }
  for (int n = 0; n < grid.steps; ++n)
    for (int i = 0; i < nn; ++i) {
      Eigen::Vector2d xy = mesh.node_xy(i);
      cs.a_mid(i, n) = ea(xy.x(), xy.y(), grid.tmid(n));
      cs.f_mid(i, n) = ef(xy.x(), xy.y(), grid.tmid(n));
    }
  return cs;
}

struct LinearizedProblem {
  Formulation form = Formulation::W1;
  PhysicalParams params;
  CoefficientFields fields;  // instantiated; lambda/rho/b/delta cellwise
  CoefficientSeries coef;    // frozen a, f
  SpaceTimeFn g, r;          // boundary excitation, volume source (may be null)
  Eigen::VectorXd u0, u1;
};

// Nodal nonlinearity coefficient: spatially varying k for Coupled, constant
// otherwise.  Products 2ku, 2kv are formed at nodes and integrated as P1.
inline Eigen::VectorXd nodal_k(const Mesh& mesh, const ScenarioSpec& spec) {
  if (spec.formulation == Formulation::Coupled && !spec.coefficients.k.empty())
    return nodal_from_expr(mesh, spec.coefficients.k);
  return Eigen::VectorXd::Constant(mesh.n_nodes(), spec.params.k);
}

struct SolverOptions {
  double newton_tol = 1e-12;
  int max_newton = 25;
  double a_min = 1e-6;
};

namespace detail {

// Operators that stay fixed over a run.
struct RunOperators {
  SparseOperator M;        // plain mass
  SparseOperator Mlam;     // (1/lambda)-weighted mass (equals M when homogeneous)
  SparseOperator Kc;       // c^2- or (1/rho)-weighted stiffness
  SparseOperator Kb;       // b-weighted stiffness (W2 damping)
  SparseOperator B;        // alpha absorbing matrix
  NonlinearTerm qdamp;     // gradient damping (W1/W3/Coupled)
  NonlinearTerm qstiff;    // W2 nonlinear stiffness
  NonlinearTerm lower;     // beta/gamma lower-order damping
  Eigen::VectorXd inv_lambda;  // cellwise
  bool use_qdamp = false, use_qstiff = false, use_lower = false, use_f = true;
};

inline RunOperators build_operators(const Mesh& mesh, const Formulation form,
                                    const PhysicalParams& p,
                                    const CoefficientFields& fields) {
  RunOperators ops;
  const int ne = mesh.n_elements();
  ops.inv_lambda = fields.lambda.size() == ne
                       ? fields.lambda.cwiseInverse().eval()
                       : Eigen::VectorXd::Ones(ne);
  ops.M = mass(mesh);
  ops.Mlam = weighted_mass(mesh, Eigen::VectorXd::Ones(mesh.n_nodes()),
                           FieldOn::Nodes, &ops.inv_lambda);
  if (form == Formulation::Coupled)
    ops.Kc = stiffness(mesh, fields.rho.cwiseInverse().eval());
  else
    ops.Kc = stiffness(mesh, p.c2);
  if (form == Formulation::W2) {
    ops.Kb = stiffness(mesh, p.b);
    ops.qstiff = qstiffness(mesh, p.c2, p.eps, p.q);
    ops.use_qstiff = true;
  } else {
    Eigen::VectorXd bc = fields.b.size() == ne
                             ? fields.b
                             : Eigen::VectorXd::Constant(ne, p.b);
    Eigen::VectorXd dc = fields.delta.size() == ne
                             ? fields.delta
                             : Eigen::VectorXd::Constant(ne, p.delta);
    ops.qdamp = qgrad_damping(mesh, bc, dc, p.q);
    ops.use_qdamp = true;
  }
  if (fields.alpha.size() == Eigen::Index(mesh.facets.size()))
    ops.B = absorbing_matrix(mesh, fields.alpha);
  else
    ops.B = absorbing_matrix(mesh, p.alpha);
  if (p.beta != 0.0 || p.gamma != 0.0) {
    ops.lower = lower_order_damping(mesh, p.beta, p.gamma, p.q);
    ops.use_lower = true;
  }
  return ops;
}

inline Eigen::VectorXd load_vector(const Mesh& mesh, const SpaceTimeFn& g,
                                   const SpaceTimeFn& r, double t) {
  Eigen::VectorXd F = Eigen::VectorXd::Zero(mesh.n_nodes());
  if (g) F += neumann_load(mesh, g, t);
  if (r) {
    std::vector<QuadPoint> qp;
    const int npe = mesh.nodes_per_element();
    for (int e = 0; e < mesh.n_elements(); ++e) {
      element_rule(mesh, e, 2, qp);
      for (const auto& p : qp) {
        const double rv = r(p.xy.x(), p.xy.y(), t);
        for (int i = 0; i < npe; ++i)
          F(mesh.elements(e, i)) += p.w * rv * p.phi[i];
      }
    }
  }
  return F;
}

inline void check_degenerate(const Eigen::VectorXd& a, double a_min, int step,
                             double t) {
  int node = 0;
  const double mn = a.minCoeff(&node);
  if (mn <= a_min) throw DegeneracyError(step, node, mn, t);
}

}  // namespace detail

// Midpoint acceleration quotients, column n holds (v^{n+1}-v^n)/dt.
inline Eigen::MatrixXd difference_quotient_accel(const Trajectory& traj) {
  const int s = traj.steps();
  Eigen::MatrixXd acc(traj.n_nodes(), s);
  for (int n = 0; n < s; ++n)
    acc.col(n) = (traj.v.col(n + 1) - traj.v.col(n)) / traj.grid.dt();
  return acc;
}

inline Trajectory solve_linearized(const Mesh& mesh, const LinearizedProblem& pb,
                                   const TimeGrid& grid,
                                   const SolverOptions& opts = {}) {
  const int nn = mesh.n_nodes();
  if (pb.u0.size() != nn || pb.u1.size() != nn)
    throw std::invalid_argument("solve_linearized: initial data size mismatch");
  if (pb.coef.a_mid.cols() != grid.steps)
    throw std::invalid_argument("solve_linearized: coefficient series does not "
                                "match the time grid");
  detail::RunOperators ops =
      detail::build_operators(mesh, pb.form, pb.params, pb.fields);
  const bool w3 = pb.form == Formulation::W3;
  const double dt = grid.dt();

  Trajectory traj;
  traj.grid = grid;
  traj.u.resize(nn, grid.steps + 1);
  traj.v.resize(nn, grid.steps + 1);
  traj.u.col(0) = pb.u0;
  traj.v.col(0) = pb.u1;

  const bool has_f = pb.coef.f_mid.size() > 0 &&
                     pb.coef.f_mid.cwiseAbs().maxCoeff() != 0.0;
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;

  for (int n = 0; n < grid.steps; ++n) {
    const double tm = grid.tmid(n);
    const Eigen::VectorXd a_n = pb.coef.a_mid.col(n);
    if (!w3) detail::check_degenerate(a_n, opts.a_min, n, tm);
    SparseOperator Ma = w3 ? ops.M
                           : weighted_mass(mesh, a_n, FieldOn::Nodes,
                                           &ops.inv_lambda);
    SparseOperator La;  // W3 stiffness with coefficient a
    if (w3) La = coefficient_laplacian(mesh, a_n);
    SparseOperator Mf;
    if (has_f)
      Mf = weighted_mass(mesh, pb.coef.f_mid.col(n), FieldOn::Nodes,
                         &ops.inv_lambda);
    const Eigen::VectorXd F = detail::load_vector(mesh, pb.g, pb.r, tm);
    const Eigen::VectorXd un = traj.u.col(n), vn = traj.v.col(n);

    Eigen::VectorXd w = vn;  // unknown v^{n+1}
    bool converged = false;
    double rnorm = 0.0;
    for (int it = 0; it < opts.max_newton; ++it) {
      const Eigen::VectorXd v_mid = 0.5 * (vn + w);
      const Eigen::VectorXd u_mid = un + 0.25 * dt * (vn + w);
      const Eigen::VectorXd acc = (w - vn) / dt;

      Eigen::VectorXd R = Ma.mat * acc;
      if (w3)
        R += La.mat * u_mid;
      else
        R += ops.Kc.mat * u_mid;
      if (ops.use_qstiff) {
        R += ops.qstiff.residual(u_mid);
        R += ops.Kb.mat * v_mid;
      }
      if (ops.use_qdamp) R += ops.qdamp.residual(v_mid);
      R += ops.B.mat * v_mid;
      if (has_f) R += Mf.mat * v_mid;
      if (ops.use_lower) R += ops.lower.residual(v_mid);
      R -= F;

      rnorm = R.norm();
      if (!std::isfinite(rnorm)) throw StepError(n, rnorm);
      if (rnorm <= opts.newton_tol) {
        converged = true;
        break;
      }

      Eigen::SparseMatrix<double> J = Ma.mat / dt;
      if (w3)
        J += (0.25 * dt) * La.mat;
      else
        J += (0.25 * dt) * ops.Kc.mat;
      if (ops.use_qstiff)
        J += (0.25 * dt) * ops.qstiff.jacobian(u_mid) + 0.5 * ops.Kb.mat;
      if (ops.use_qdamp) J += 0.5 * ops.qdamp.jacobian(v_mid);
      J += 0.5 * ops.B.mat;
      if (has_f) J += 0.5 * Mf.mat;
      if (ops.use_lower) J += 0.5 * ops.lower.jacobian(v_mid);

      lu.compute(J);
      if (lu.info() != Eigen::Success) throw StepError(n, rnorm);
      w -= lu.solve(R);
    }
    if (!converged) throw StepError(n, rnorm);

    traj.v.col(n + 1) = w;
    traj.u.col(n + 1) = un + 0.5 * dt * (vn + w);
  }
  return traj;
}

// Per-step Newton on the full nonlinear residual, state-dependent
// coefficients included.  amin_series, if given, records min_x a per step.
inline Trajectory solve_nonlinear_monolithic(const Mesh& mesh,
                                             const ScenarioSpec& spec,
                                             const TimeGrid& grid,
                                             const SolverOptions& opts = {},
                                             Eigen::VectorXd* amin_series = nullptr) {
  const int nn = mesh.n_nodes();
  const Formulation form = spec.formulation;
  const PhysicalParams& p = spec.params;
  CoefficientFields fields = instantiate_coefficients(mesh, spec);
  detail::RunOperators ops = detail::build_operators(mesh, form, p, fields);
  const bool w3 = form == Formulation::W3;
  const double dt = grid.dt();

  Eigen::VectorXd k_nodes = nodal_k(mesh, spec);

  Trajectory traj;
  traj.grid = grid;
  traj.u.resize(nn, grid.steps + 1);
  traj.v.resize(nn, grid.steps + 1);
  traj.u.col(0) = nodal_from_expr(mesh, spec.data.u0);
  traj.v.col(0) = nodal_from_expr(mesh, spec.data.u1);
  SpaceTimeFn g = fn_from_expr(spec.data.g);
  SpaceTimeFn r = fn_from_expr(spec.data.r);

  if (amin_series) amin_series->resize(grid.steps + 1);
  auto a_of = [&](const Eigen::VectorXd& state) -> Eigen::VectorXd {
    if (w3) {
      Eigen::VectorXd den =
          Eigen::VectorXd::Ones(nn) - 2.0 * p.kt * state;  // state = v
      return den;
    }
    return Eigen::VectorXd::Ones(nn) -
           2.0 * k_nodes.cwiseProduct(state);  // state = u
  };

  {  // degeneracy can already be present in the initial data
    Eigen::VectorXd a0 = a_of(w3 ? traj.v.col(0) : traj.u.col(0));
    detail::check_degenerate(a0, opts.a_min, 0, 0.0);
    if (amin_series) (*amin_series)(0) = a0.minCoeff();
  }

  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  for (int n = 0; n < grid.steps; ++n) {
    const double tm = grid.tmid(n);
    const Eigen::VectorXd F = detail::load_vector(mesh, g, r, tm);
    const Eigen::VectorXd un = traj.u.col(n), vn = traj.v.col(n);

    Eigen::VectorXd w = vn;
    bool converged = false;
    double rnorm = 0.0;
    for (int it = 0; it < opts.max_newton; ++it) {
      const Eigen::VectorXd v_mid = 0.5 * (vn + w);
      const Eigen::VectorXd u_mid = un + 0.25 * dt * (vn + w);
      const Eigen::VectorXd acc = (w - vn) / dt;

      Eigen::VectorXd R;
      Eigen::SparseMatrix<double> J;
      if (!w3) {
        const Eigen::VectorXd a = a_of(u_mid);
        detail::check_degenerate(a, opts.a_min, n, tm);
        SparseOperator Ma = weighted_mass(mesh, a, FieldOn::Nodes, &ops.inv_lambda);
        // quadratic velocity force, nodal product y = 2k v integrated as P1
        const Eigen::VectorXd y = 2.0 * k_nodes.cwiseProduct(v_mid);
        SparseOperator Wy = weighted_mass(mesh, y, FieldOn::Nodes, &ops.inv_lambda);

        R = Ma.mat * acc + ops.Kc.mat * u_mid - Wy.mat * v_mid - F;
        if (ops.use_qstiff) R += ops.qstiff.residual(u_mid) + ops.Kb.mat * v_mid;
        if (ops.use_qdamp) R += ops.qdamp.residual(v_mid);
        R += ops.B.mat * v_mid;
        if (ops.use_lower) R += ops.lower.residual(v_mid);

        rnorm = R.norm();
        if (!std::isfinite(rnorm)) throw StepError(n, rnorm);
        if (rnorm <= opts.newton_tol) { converged = true; break; }

        SparseOperator Wacc = weighted_mass(mesh, Eigen::VectorXd(acc),
                                            FieldOn::Nodes, &ops.inv_lambda);
        SparseOperator Wv = weighted_mass(mesh, Eigen::VectorXd(v_mid),
                                          FieldOn::Nodes, &ops.inv_lambda);
        J = Ma.mat / dt + (0.25 * dt) * ops.Kc.mat;
        // d a/d w = -2k (dt/4): mass-weight sensitivity
        J -= (0.5 * dt) * (Wacc.mat * k_nodes.asDiagonal()).eval();
        // quadratic force: -(W(y)/2 + W(v) diag(k))
        J -= 0.5 * Wy.mat + (Wv.mat * k_nodes.asDiagonal()).eval();
        if (ops.use_qstiff)
          J += (0.25 * dt) * ops.qstiff.jacobian(u_mid) + 0.5 * ops.Kb.mat;
        if (ops.use_qdamp) J += 0.5 * ops.qdamp.jacobian(v_mid);
        J += 0.5 * ops.B.mat;
        if (ops.use_lower) J += 0.5 * ops.lower.jacobian(v_mid);
      } else {
        const Eigen::VectorXd den = a_of(v_mid);
        detail::check_degenerate(den, opts.a_min, n, tm);
        const Eigen::VectorXd a = p.c2 * den.cwiseInverse();
        SparseOperator La = coefficient_laplacian(mesh, a);

        R = ops.M.mat * acc + La.mat * u_mid;
        if (ops.use_qdamp) R += ops.qdamp.residual(v_mid);
        R += ops.B.mat * v_mid;
        if (ops.use_lower) R += ops.lower.residual(v_mid);
        R -= F;

        rnorm = R.norm();
        if (!std::isfinite(rnorm)) throw StepError(n, rnorm);
        if (rnorm <= opts.newton_tol) { converged = true; break; }

        // a'(v) = 2 kt c2 / (1-2 kt v)^2, applied at d v_mid/d w = 1/2
        Eigen::VectorXd aprime =
            (2.0 * p.kt * p.c2) * den.cwiseProduct(den).cwiseInverse();
        SparseOperator Ga = coefficient_laplacian_wrt_a(mesh, u_mid);
        J = ops.M.mat / dt + (0.25 * dt) * La.mat;
        J += 0.5 * (Ga.mat * aprime.asDiagonal()).eval();
        if (ops.use_qdamp) J += 0.5 * ops.qdamp.jacobian(v_mid);
        J += 0.5 * ops.B.mat;
        if (ops.use_lower) J += 0.5 * ops.lower.jacobian(v_mid);
      }

      lu.compute(J);
      if (lu.info() != Eigen::Success) throw StepError(n, rnorm);
      w -= lu.solve(R);
    }
    if (!converged) throw StepError(n, rnorm);

    traj.v.col(n + 1) = w;
    traj.u.col(n + 1) = un + 0.5 * dt * (vn + w);
    if (amin_series)
      (*amin_series)(n + 1) =
          a_of(w3 ? traj.v.col(n + 1) : traj.u.col(n + 1)).minCoeff();
  }
  return traj;
}

}  // namespace westfem
