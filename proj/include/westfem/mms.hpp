#pragma once

// Manufactured-solution machinery for the linearized solver.  The exact
// solution u* = cos(pi x) cos(t) (tensorized with cos(pi y) in 2D) has zero
// Neumann flux on every boundary face, so g vanishes and only the volume
// source r carries the manufactured forcing.  The frozen coefficients can be
// perturbed (a_amp, f_amp) to exercise the nonconstant-coefficient paths.

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "westfem/evolution.hpp"
#include "westfem/norms.hpp"

namespace westfem {

struct MMSCase {
  std::string name;
  PhysicalParams params;
  double T = 1.0;
  double a_amp = 0.0, f_amp = 0.0;
  int dim = 1;
  SpaceTimeFn exact_u, exact_v, a_fn, f_fn, r_fn;
};

namespace detail {

inline double sgn_pow(double s, double q) {
  // |s|^{q-1} s
  return std::pow(std::abs(s), q - 1.0) * s;
}

}  // namespace detail

// u* = cos(pi x) cos(t) on (0,1), all-Neumann boundary
inline MMSCase mms_w1lin_1d(double q, double c2, double b, double delta,
                            double a_amp, double f_amp, double T) {
  MMSCase cs;
  cs.name = "w1lin_cospix";
  cs.params.q = q;
  cs.params.c2 = c2;
  cs.params.b = b;
  cs.params.delta = delta;
  cs.T = T;
  cs.a_amp = a_amp;
  cs.f_amp = f_amp;
  cs.dim = 1;
  const double pi = M_PI;
  cs.exact_u = [pi](double x, double, double t) {
    return std::cos(pi * x) * std::cos(t);
  };
  cs.exact_v = [pi](double x, double, double t) {
    return -std::cos(pi * x) * std::sin(t);
  };
  cs.a_fn = [pi, a_amp](double x, double, double t) {
    return 1.0 + a_amp * std::cos(pi * x) * std::cos(t);
  };
  cs.f_fn = [pi, f_amp](double x, double, double t) {
    return f_amp * std::cos(pi * x) * std::sin(t);
  };
  cs.r_fn = [=](double x, double, double t) {
    const double cx = std::cos(pi * x), sx = std::sin(pi * x);
    const double ct = std::cos(t), st = std::sin(t);
    const double a = 1.0 + a_amp * cx * ct;
    const double f = f_amp * cx * st;
    const double u_tt = -cx * ct;
    const double u_t = -cx * st;
    const double lap_u = -pi * pi * cx * ct;
    const double lap_ut = pi * pi * cx * st;
    // div(|grad u_t|^{q-1} grad u_t) for grad u_t = pi sx st
    const double div_q = q * std::pow(pi, q + 1.0) *
                         std::pow(std::abs(sx), q - 1.0) * cx *
                         detail::sgn_pow(st, q);
    return a * u_tt - c2 * lap_u - b * (1.0 - delta) * lap_ut -
           b * delta * div_q + f * u_t;
  };
  return cs;
}

// u* = cos(pi x) cos(pi y) cos(t) on the unit square, q = 1
inline MMSCase mms_w1lin_2d(double c2, double b, double T) {
  MMSCase cs;
  cs.name = "w1lin_cospix_cospiy";
  cs.params.q = 1.0;
  cs.params.c2 = c2;
  cs.params.b = b;
  cs.params.delta = 0.5;  // q = 1 makes the split immaterial
  cs.T = T;
  cs.dim = 2;
  const double pi = M_PI;
  cs.exact_u = [pi](double x, double y, double t) {
    return std::cos(pi * x) * std::cos(pi * y) * std::cos(t);
  };
  cs.exact_v = [pi](double x, double y, double t) {
    return -std::cos(pi * x) * std::cos(pi * y) * std::sin(t);
  };
  cs.a_fn = [](double, double, double) { return 1.0; };
  cs.f_fn = [](double, double, double) { return 0.0; };
  cs.r_fn = [pi, c2, b](double x, double y, double t) {
    const double cc = std::cos(pi * x) * std::cos(pi * y);
    const double u_tt = -cc * std::cos(t);
    const double lap_u = -2.0 * pi * pi * cc * std::cos(t);
    const double lap_ut = 2.0 * pi * pi * cc * std::sin(t);
    return u_tt - c2 * lap_u - b * lap_ut;
  };
  return cs;
}

inline CoefficientSeries coefficient_series_from_fns(const Mesh& mesh,
                                                     const TimeGrid& grid,
                                                     const SpaceTimeFn& a,
                                                     const SpaceTimeFn& f) {
  CoefficientSeries cs;
  const int nn = mesh.n_nodes();
  cs.a_step.resize(nn, grid.steps + 1);
  cs.a_mid.resize(nn, grid.steps);
  cs.f_step.resize(nn, grid.steps + 1);
  cs.f_mid.resize(nn, grid.steps);
  for (int i = 0; i < nn; ++i) {
    Eigen::Vector2d xy = mesh.node_xy(i);
    for (int n = 0; n <= grid.steps; ++n) {
      cs.a_step(i, n) = a(xy.x(), xy.y(), grid.t(n));
      cs.f_step(i, n) = f(xy.x(), xy.y(), grid.t(n));
    }
    for (int n = 0; n < grid.steps; ++n) {
      cs.a_mid(i, n) = a(xy.x(), xy.y(), grid.tmid(n));
      cs.f_mid(i, n) = f(xy.x(), xy.y(), grid.tmid(n));
    }
  }
  return cs;
}

inline Eigen::VectorXd nodal_from_fn(const Mesh& mesh, const SpaceTimeFn& fn,
                                     double t) {
  Eigen::VectorXd v(mesh.n_nodes());
  for (int i = 0; i < mesh.n_nodes(); ++i) {
    Eigen::Vector2d xy = mesh.node_xy(i);
    v(i) = fn(xy.x(), xy.y(), t);
  }
  return v;
}

// L2 error against the exact solution's interpolant at final time
inline double mms_error(const MMSCase& cs, const Mesh& mesh, int steps,
                        const SolverOptions& opts = {}) {
  TimeGrid grid{cs.T, steps};
  LinearizedProblem pb;
  pb.form = Formulation::W1;
  pb.params = cs.params;
  pb.coef = coefficient_series_from_fns(mesh, grid, cs.a_fn, cs.f_fn);
  pb.r = cs.r_fn;
  pb.u0 = nodal_from_fn(mesh, cs.exact_u, 0.0);
  pb.u1 = nodal_from_fn(mesh, cs.exact_v, 0.0);
  Trajectory traj = solve_linearized(mesh, pb, grid, opts);
  Eigen::VectorXd err =
      traj.u.col(steps) - nodal_from_fn(mesh, cs.exact_u, cs.T);
  return l2_volume(mesh, err);
}

struct ConvergenceTable {
  std::vector<double> scale;  // dt or h
  std::vector<double> error;
  double order = 0.0;
};

// least-squares slope of log(error) against log(scale)
inline double fit_order(const std::vector<double>& scale,
                        const std::vector<double>& error) {
  const size_t n = scale.size();
  if (n < 2 || error.size() != n)
    throw std::invalid_argument("fit_order needs matched ladders, size >= 2");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t i = 0; i < n; ++i) {
    const double x = std::log(scale[i]), y = std::log(error[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double dn = double(n);
  return (dn * sxy - sx * sy) / (dn * sxx - sx * sx);
}

inline Mesh mms_mesh(const MMSCase& cs, int elements) {
  if (cs.dim == 1) return build_interval_mesh(1.0, elements, 1.0);
  return build_rect_mesh(1.0, 1.0, elements, elements,
                         {"left", "right", "bottom", "top"});
}

inline ConvergenceTable mms_temporal(const MMSCase& cs, int fine_elements,
                                     const std::vector<int>& step_ladder,
                                     const SolverOptions& opts = {}) {
  Mesh mesh = mms_mesh(cs, fine_elements);
  ConvergenceTable tbl;
  for (int steps : step_ladder) {
    tbl.scale.push_back(cs.T / double(steps));
    tbl.error.push_back(mms_error(cs, mesh, steps, opts));
  }
  tbl.order = fit_order(tbl.scale, tbl.error);
  return tbl;
}

inline ConvergenceTable mms_spatial(const MMSCase& cs,
                                    const std::vector<int>& element_ladder,
                                    int fine_steps,
                                    const SolverOptions& opts = {}) {
  ConvergenceTable tbl;
  for (int elements : element_ladder) {
    Mesh mesh = mms_mesh(cs, elements);
    tbl.scale.push_back(1.0 / double(elements));
    tbl.error.push_back(mms_error(cs, mesh, fine_steps, opts));
  }
  tbl.order = fit_order(tbl.scale, tbl.error);
  return tbl;
}

}  // namespace westfem
