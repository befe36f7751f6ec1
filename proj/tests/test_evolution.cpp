#include <gtest/gtest.h>

#include <cmath>

#include "westfem/evolution.hpp"
#include "westfem/norms.hpp"

using namespace westfem;

namespace {

LinearizedProblem unit_problem(const Mesh& mesh, const TimeGrid& grid,
                               const PhysicalParams& p) {
  LinearizedProblem pb;
  pb.form = Formulation::W1;
  pb.params = p;
  pb.coef = coefficient_series_from_exprs(mesh, grid, "1", "0");
  pb.u0 = Eigen::VectorXd::Zero(mesh.n_nodes());
  pb.u1 = Eigen::VectorXd::Zero(mesh.n_nodes());
  return pb;
}

TEST(Linearized, ReproducesLinearExactSolution) {
  // u = x t solves the damped equation with the matching boundary flux
  //   g = +-(c2 t + b) at the endpoints, for any q (|grad u_t| = 1).
  Mesh mesh = build_interval_mesh(1.0, 8, 1.0);
  TimeGrid grid{1.0, 10};
  PhysicalParams p;
  p.c2 = 2.0;
  p.b = 0.7;
  p.delta = 0.4;
  p.q = 3.0;
  LinearizedProblem pb = unit_problem(mesh, grid, p);
  for (int i = 0; i < mesh.n_nodes(); ++i) pb.u1(i) = mesh.nodes(i, 0);
  const double c2 = p.c2, b = p.b;
  pb.g = [c2, b](double x, double, double t) {
    return (x < 0.5 ? -1.0 : 1.0) * (c2 * t + b);
  };
  Trajectory traj = solve_linearized(mesh, pb, grid);
  for (int n = 0; n <= grid.steps; ++n)
    for (int i = 0; i < mesh.n_nodes(); ++i) {
      EXPECT_NEAR(traj.u(i, n), mesh.nodes(i, 0) * grid.t(n), 1e-12);
      EXPECT_NEAR(traj.v(i, n), mesh.nodes(i, 0), 1e-12);
    }
}

TEST(Linearized, KinematicRelationExact) {
  Mesh mesh = build_interval_mesh(1.0, 16, 1.0);
  TimeGrid grid{0.5, 20};
  PhysicalParams p;
  p.q = 3.0;
  LinearizedProblem pb = unit_problem(mesh, grid, p);
  pb.u0 = nodal_from_expr(mesh, "0.1*sin(pi*x)");
  Trajectory traj = solve_linearized(mesh, pb, grid);
  const double dt = grid.dt();
  for (int n = 0; n < grid.steps; ++n) {
    Eigen::VectorXd gap = traj.u.col(n + 1) - traj.u.col(n) -
                          0.5 * dt * (traj.v.col(n) + traj.v.col(n + 1));
    EXPECT_NEAR(gap.cwiseAbs().maxCoeff(), 0.0, 1e-15);
  }
}

TEST(Linearized, EnergyDissipatesWithoutForcing) {
  Mesh mesh = build_interval_mesh(1.0, 32, 1.0);
  TimeGrid grid{1.0, 50};
  for (double q : {1.0, 3.0}) {
    PhysicalParams p;
    p.b = 0.5;
    p.q = q;
    LinearizedProblem pb = unit_problem(mesh, grid, p);
    pb.u0 = nodal_from_expr(mesh, "0.2*sin(pi*x)");
    Trajectory traj = solve_linearized(mesh, pb, grid);
    Eigen::VectorXd E = energy_series(mesh, traj, p.c2);
    EXPECT_GT(E(0), 0.0);
    for (int n = 0; n < grid.steps; ++n)
      EXPECT_LE(E(n + 1), E(n) + 1e-12 * E(0));
  }
}

TEST(Linearized, ZeroDataStaysZero) {
  Mesh mesh = build_interval_mesh(1.0, 8, 0.5);
  TimeGrid grid{1.0, 5};
  PhysicalParams p;
  p.alpha = 0.7;
  LinearizedProblem pb = unit_problem(mesh, grid, p);
  Trajectory traj = solve_linearized(mesh, pb, grid);
  EXPECT_NEAR(traj.u.cwiseAbs().maxCoeff(), 0.0, 1e-15);
  EXPECT_NEAR(traj.v.cwiseAbs().maxCoeff(), 0.0, 1e-15);
}

TEST(Linearized, W3ConstantCoefficientMatchesW1) {
  Mesh mesh = build_interval_mesh(1.0, 16, 1.0);
  TimeGrid grid{0.5, 10};
  const double c2 = 1.5;

  PhysicalParams pw1;
  pw1.c2 = c2;
  pw1.q = 3.0;
  LinearizedProblem pb1 = unit_problem(mesh, grid, pw1);
  pb1.u0 = nodal_from_expr(mesh, "0.05*sin(pi*x)");
  pb1.u1 = nodal_from_expr(mesh, "0.02*sin(2*pi*x)");
  Trajectory t1 = solve_linearized(mesh, pb1, grid);

  LinearizedProblem pb3 = pb1;
  pb3.form = Formulation::W3;
  pb3.coef = coefficient_series_from_exprs(mesh, grid, "1.5", "0");
  Trajectory t3 = solve_linearized(mesh, pb3, grid);

  EXPECT_NEAR((t1.u - t3.u).cwiseAbs().maxCoeff(), 0.0, 1e-11);
  EXPECT_NEAR((t1.v - t3.v).cwiseAbs().maxCoeff(), 0.0, 1e-11);
}

TEST(Linearized, RejectsMismatchedInput) {
  Mesh mesh = build_interval_mesh(1.0, 4, 1.0);
  TimeGrid grid{1.0, 5};
  PhysicalParams p;
  LinearizedProblem pb = unit_problem(mesh, grid, p);
  pb.u0.resize(3);
  EXPECT_THROW(solve_linearized(mesh, pb, grid), std::invalid_argument);
  pb = unit_problem(mesh, grid, p);
  pb.coef = coefficient_series_from_exprs(mesh, TimeGrid{1.0, 4}, "1", "0");
  EXPECT_THROW(solve_linearized(mesh, pb, grid), std::invalid_argument);
}

ScenarioSpec small_w1_scenario() {
  ScenarioSpec s;
  s.formulation = Formulation::W1;
  s.mesh.elements = 16;
  s.params.q = 2.0;
  s.params.b = 0.8;
  s.data.u0 = "0.05*sin(pi*x)";
  s.data.u1 = "0";
  s.time.T = 0.5;
  s.time.steps = 20;
  return s;
}

TEST(Monolithic, ConstantStateIsSteady) {
  ScenarioSpec s = small_w1_scenario();
  s.params.k = 0.5;
  s.data.u0 = "0.3";
  Mesh mesh = build_mesh(s.mesh);
  TimeGrid grid{s.time.T, s.time.steps};
  Trajectory traj = solve_nonlinear_monolithic(mesh, s, grid);
  EXPECT_NEAR((traj.u.array() - 0.3).abs().maxCoeff(), 0.0, 1e-12);
  EXPECT_NEAR(traj.v.cwiseAbs().maxCoeff(), 0.0, 1e-12);
}

TEST(Monolithic, MatchesLinearizedWhenKVanishes) {
  ScenarioSpec s = small_w1_scenario();
  Mesh mesh = build_mesh(s.mesh);
  TimeGrid grid{s.time.T, s.time.steps};
  Trajectory mono = solve_nonlinear_monolithic(mesh, s, grid);

  LinearizedProblem pb;
  pb.form = Formulation::W1;
  pb.params = s.params;
  pb.coef = coefficient_series_from_exprs(mesh, grid, "1", "0");
  pb.u0 = nodal_from_expr(mesh, s.data.u0);
  pb.u1 = nodal_from_expr(mesh, s.data.u1);
  Trajectory lin = solve_linearized(mesh, pb, grid);

  EXPECT_NEAR((mono.u - lin.u).cwiseAbs().maxCoeff(), 0.0, 1e-11);
}

TEST(Monolithic, DegeneracyAbortsBeforeTrajectory) {
  ScenarioSpec s = small_w1_scenario();
  s.params.k = 10.0;
  s.data.u0 = "0.1*sin(pi*x)";  // 1 - 2 k u dips to -1
  Mesh mesh = build_mesh(s.mesh);
  TimeGrid grid{s.time.T, s.time.steps};
  try {
    solve_nonlinear_monolithic(mesh, s, grid);
    FAIL() << "expected DegeneracyError";
  } catch (const DegeneracyError& e) {
    EXPECT_EQ(e.step, 0);
    EXPECT_LT(e.value, 1e-6);
    EXPECT_GE(e.node, 0);
  }
}

TEST(Monolithic, W2RunsAndDissipates) {
  ScenarioSpec s = small_w1_scenario();
  s.formulation = Formulation::W2;
  s.params.q = 3.0;
  s.params.eps = 0.5;
  s.params.k = 0.1;
  Mesh mesh = build_mesh(s.mesh);
  TimeGrid grid{s.time.T, s.time.steps};
  Trajectory traj = solve_nonlinear_monolithic(mesh, s, grid);
  Eigen::VectorXd E = energy_series(mesh, traj, s.params.c2);
  EXPECT_LT(E(grid.steps), E(0));
  EXPECT_TRUE(traj.u.allFinite());
}

TEST(Monolithic, RectMeshSmoke) {
  ScenarioSpec s;
  s.formulation = Formulation::W1;
  s.mesh.type = "rect";
  s.mesh.nx = 4;
  s.mesh.ny = 4;
  s.mesh.gamma_sides = {"left", "right", "bottom", "top"};
  s.params.q = 1.0;
  s.params.k = 0.1;
  s.data.u0 = "0.05*sin(pi*x)*sin(pi*y)";
  s.time.T = 0.25;
  s.time.steps = 10;
  Mesh mesh = build_mesh(s.mesh);
  TimeGrid grid{s.time.T, s.time.steps};
  Trajectory traj = solve_nonlinear_monolithic(mesh, s, grid);
  Eigen::VectorXd E = energy_series(mesh, traj, s.params.c2);
  EXPECT_TRUE(traj.u.allFinite());
  EXPECT_LT(E(grid.steps), E(0));
}

TEST(DifferenceQuotient, MidpointColumns) {
  Trajectory traj;
  traj.grid = TimeGrid{1.0, 2};
  traj.u.resize(2, 3);
  traj.v.resize(2, 3);
  traj.v << 0.0, 1.0, 3.0, 2.0, 2.0, 0.0;
  Eigen::MatrixXd acc = difference_quotient_accel(traj);
  ASSERT_EQ(acc.cols(), 2);
  EXPECT_NEAR(acc(0, 0), 2.0, 1e-15);   // (1-0)/0.5
  EXPECT_NEAR(acc(0, 1), 4.0, 1e-15);   // (3-1)/0.5
  EXPECT_NEAR(acc(1, 0), 0.0, 1e-15);
  EXPECT_NEAR(acc(1, 1), -4.0, 1e-15);
}

TEST(NodalK, CoupledEvaluatesExpressionAtNodes) {
  ScenarioSpec s;
  s.formulation = Formulation::Coupled;
  s.mesh.elements = 2;
  s.coefficients.k = "sel(x < 0.5, 1.0, 3.0)";
  Mesh mesh = build_mesh(s.mesh);
  Eigen::VectorXd kn = nodal_k(mesh, s);
  ASSERT_EQ(kn.size(), 3);
  EXPECT_NEAR(kn(0), 1.0, 1e-15);
  EXPECT_NEAR(kn(1), 3.0, 1e-15);  // x = 0.5 falls on the right branch
  EXPECT_NEAR(kn(2), 3.0, 1e-15);
}

}  // namespace
