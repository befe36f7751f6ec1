#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "westfem/evolution.hpp"
#include "westfem/norms.hpp"

using namespace westfem;

namespace {

TEST(VolumeNorms, LinearFunctionClosedForms) {
  Mesh m = build_interval_mesh(1.0, 2, 1.0);
  Eigen::VectorXd v(3);
  v << 0.0, 0.5, 1.0;  // v(x) = x
  EXPECT_NEAR(l1_volume(m, v), 0.5, 1e-14);
  EXPECT_NEAR(l2_volume(m, v), 1.0 / std::sqrt(3.0), 1e-14);
  EXPECT_NEAR(lp_volume(m, v, 4.0), std::pow(0.2, 0.25), 1e-14);
  EXPECT_NEAR(linf_volume(v), 1.0, 1e-15);
  EXPECT_NEAR(grad_l2(m, v), 1.0, 1e-14);
  EXPECT_NEAR(grad_lp(m, v, 4.0), 1.0, 1e-14);
  EXPECT_NEAR(grad_linf(m, v), 1.0, 1e-14);
  EXPECT_NEAR(h1_norm(m, v), std::sqrt(1.0 / 3.0 + 1.0), 1e-14);
  EXPECT_NEAR(w1p_norm(m, v, 4.0), std::pow(0.2 + 1.0, 0.25), 1e-14);
}

TEST(VolumeNorms, HatFunctionClosedForms) {
  Mesh m = build_interval_mesh(1.0, 2, 1.0);
  Eigen::VectorXd v(3);
  v << 0.0, 1.0, 0.0;
  EXPECT_NEAR(l1_volume(m, v), 0.5, 1e-14);
  EXPECT_NEAR(l2_volume(m, v), 1.0 / std::sqrt(3.0), 1e-14);
  EXPECT_NEAR(grad_l2(m, v), 2.0, 1e-14);
  EXPECT_NEAR(grad_lp(m, v, 3.0), 2.0, 1e-14);
  EXPECT_NEAR(grad_linf(m, v), 2.0, 1e-14);
}

TEST(VolumeNorms, CellScaleScalesTheIntegrand) {
  Mesh m = build_interval_mesh(1.0, 2, 1.0);
  Eigen::VectorXd v = Eigen::VectorXd::Ones(3);
  Eigen::VectorXd scale(2);
  scale << 2.0, 4.0;
  // int |scale * 1|^2 = 0.5*4 + 0.5*16 = 10
  EXPECT_NEAR(l2_volume(m, v, &scale), std::sqrt(10.0), 1e-14);
  EXPECT_NEAR(lp_volume(m, v, 1.0, &scale), 3.0, 1e-14);
}

TEST(BoundaryNorms, IntervalEndpointsCountingMeasure) {
  Mesh m = build_interval_mesh(1.0, 4, 0.5);  // left Neumann, right absorbing
  Eigen::VectorXd v(5);
  v << 3.0, 9.0, 9.0, 9.0, -4.0;
  EXPECT_NEAR(boundary_lp(m, v, 2.0), 5.0, 1e-14);  // sqrt(9 + 16)
  EXPECT_NEAR(boundary_lp(m, v, 2.0, BoundaryTag::GammaNeumann), 3.0, 1e-14);
  EXPECT_NEAR(boundary_lp(m, v, 2.0, BoundaryTag::GammaHatAbsorbing), 4.0,
              1e-14);
  EXPECT_NEAR(boundary_linf(m, v), 4.0, 1e-15);
  EXPECT_NEAR(boundary_lp(m, v, 4.0), std::pow(81.0 + 256.0, 0.25), 1e-13);
}

TEST(BoundaryNorms, RectEdgeIntegral) {
  Mesh m = build_rect_mesh(1.0, 1.0, 2, 2, {"left", "right", "bottom", "top"});
  Eigen::VectorXd ones = Eigen::VectorXd::Ones(m.n_nodes());
  // L2 over the whole perimeter of the unit square
  EXPECT_NEAR(boundary_lp(m, ones, 2.0), 2.0, 1e-13);
}

TEST(TimeComposition, TrapezoidAndMidpointRules) {
  std::vector<double> x = {1.0, 2.0, 3.0};
  const double dt = 0.5;
  EXPECT_NEAR(compose_linf(x), 3.0, 1e-15);
  // trapezoid of x^2: (0.5*1 + 4 + 0.5*9)*0.5 = 4.5
  EXPECT_NEAR(compose_lp(x, 2.0, dt), std::sqrt(4.5), 1e-14);
  // midpoint sum: (1 + 4 + 9)*0.5 = 7
  EXPECT_NEAR(compose_lp_mid(x, 2.0, dt), std::sqrt(7.0), 1e-14);
  EXPECT_NEAR(compose_lp({2.0}, 3.0, 0.25), 0.0, 1e-15);  // single sample
}

Trajectory hand_trajectory(const Mesh& m) {
  Trajectory traj;
  traj.grid = TimeGrid{1.0, 2};
  const int nn = m.n_nodes();
  traj.u.resize(nn, 3);
  traj.v.resize(nn, 3);
  for (int n = 0; n <= 2; ++n)
    for (int i = 0; i < nn; ++i) {
      const double x = m.nodes(i, 0), t = traj.grid.t(n);
      traj.u(i, n) = x * (1.0 + t);
      traj.v(i, n) = x - 0.5 * t * x;
    }
  return traj;
}

TEST(TrajectoryNorms, CompositionWiring) {
  Mesh m = build_interval_mesh(1.0, 2, 0.5);
  Trajectory traj = hand_trajectory(m);
  const double q = 3.0, dt = traj.grid.dt();
  TrajectoryNorms tn = TrajectoryNorms::compute(m, traj, q);

  std::vector<double> v_l2, gv_l2, gv_q1, v_q1, gu_l2;
  for (int n = 0; n <= 2; ++n) {
    Eigen::VectorXd vc = traj.v.col(n), uc = traj.u.col(n);
    v_l2.push_back(l2_volume(m, vc));
    gv_l2.push_back(grad_l2(m, vc));
    gv_q1.push_back(grad_lp(m, vc, q + 1.0));
    v_q1.push_back(lp_volume(m, vc, q + 1.0));
    gu_l2.push_back(grad_l2(m, uc));
  }
  EXPECT_NEAR(tn.v_LinfL2, compose_linf(v_l2), 1e-14);
  EXPECT_NEAR(tn.v_L2L2, compose_lp(v_l2, 2.0, dt), 1e-14);
  EXPECT_NEAR(tn.gv_L2L2, compose_lp(gv_l2, 2.0, dt), 1e-14);
  EXPECT_NEAR(tn.gv_Lq1Lq1, compose_lp(gv_q1, q + 1.0, dt), 1e-14);
  EXPECT_NEAR(tn.v_Lq1Lq1, compose_lp(v_q1, q + 1.0, dt), 1e-14);
  EXPECT_NEAR(tn.gu_LinfL2, compose_linf(gu_l2), 1e-14);

  // u_tt is the midpoint quotient of v: here v_t = -x/2 exactly
  Eigen::VectorXd utt(3);
  utt << 0.0, -0.25, -0.5;
  const double utt_l2 = l2_volume(m, utt);
  EXPECT_NEAR(tn.utt_L2L2,
              compose_lp_mid({utt_l2, utt_l2}, 2.0, dt), 1e-14);

  // absorbing-boundary trace of v at the right endpoint x = 1
  std::vector<double> v_gh;
  for (int n = 0; n <= 2; ++n)
    v_gh.push_back(boundary_lp(m, Eigen::VectorXd(traj.v.col(n)), 2.0,
                               BoundaryTag::GammaHatAbsorbing));
  EXPECT_NEAR(tn.v_L2Gh, compose_lp(v_gh, 2.0, dt), 1e-14);
  EXPECT_NEAR(tn.v_LinfGh, compose_linf(v_gh), 1e-14);
}

TEST(DataNorms, LinearInitialData) {
  Mesh m = build_interval_mesh(1.0, 2, 0.5);
  Eigen::VectorXd u0(3), u1(3);
  u0 << 0.0, 0.5, 1.0;  // x
  u1 << 1.0, 1.0, 1.0;  // constant 1
  DataNorms dn = DataNorms::compute(m, u0, u1, 3.0);
  EXPECT_NEAR(dn.u0_L1, 0.5, 1e-14);
  EXPECT_NEAR(dn.gu0_L2, 1.0, 1e-14);
  EXPECT_NEAR(dn.gu0_Lq1, 1.0, 1e-14);
  EXPECT_NEAR(dn.gu0_L4, 1.0, 1e-14);
  EXPECT_NEAR(dn.u1_L2, 1.0, 1e-14);
  EXPECT_NEAR(dn.gu1_L2, 0.0, 1e-14);
  EXPECT_NEAR(dn.u1_H1, 1.0, 1e-14);
  EXPECT_NEAR(dn.u1_W1q1, 1.0, 1e-14);   // (1 + 0)^{1/4}
  EXPECT_NEAR(dn.u1_L2Gh, 1.0, 1e-14);   // trace at the absorbing endpoint
}

TEST(GNorms, ZeroExcitationFlag) {
  Mesh m = build_interval_mesh(1.0, 4, 1.0);
  TimeGrid grid{1.0, 4};
  GNorms gn = GNorms::compute(m, grid, nullptr, 3.0);
  EXPECT_TRUE(gn.zero);
  EXPECT_DOUBLE_EQ(gn.L2L2, 0.0);
  EXPECT_DOUBLE_EQ(gn.c_gamma(3.0), 0.0);
}

TEST(GNorms, ConstantExcitationAndAggregate) {
  Mesh m = build_interval_mesh(1.0, 4, 1.0);
  TimeGrid grid{1.0, 10};
  const double q = 3.0, p = (q + 1.0) / q;
  SpaceTimeFn g = [](double, double, double) { return 2.0; };
  GNorms gn = GNorms::compute(m, grid, g, q);
  EXPECT_FALSE(gn.zero);
  // both endpoints carry g = 2: spatial L2 = sqrt(8), Lp = (2*2^p)^{1/p}
  EXPECT_NEAR(gn.LinfL2, std::sqrt(8.0), 1e-13);
  EXPECT_NEAR(gn.L2L2, std::sqrt(8.0), 1e-13);  // T = 1
  EXPECT_NEAR(gn.LinfLp, std::pow(2.0 * std::pow(2.0, p), 1.0 / p), 1e-13);
  // g_t of a constant vanishes
  EXPECT_NEAR(gn.gt_L1L2, 0.0, 1e-13);
  EXPECT_NEAR(gn.gt_LpLp, 0.0, 1e-13);
  const double want = gn.L1L2 * gn.L1L2 + gn.gt_L1L2 * gn.gt_L1L2 +
                      std::pow(gn.LpLp, p) + std::pow(gn.gt_LpLp, p) +
                      gn.LinfL2 * gn.LinfL2 + std::pow(gn.LinfLp, p);
  EXPECT_NEAR(gn.c_gamma(q), want, 1e-12);
}

TEST(TripleNorm, HandTrajectory) {
  Mesh m = build_interval_mesh(1.0, 2, 1.0);
  Trajectory traj = hand_trajectory(m);
  const double dt = traj.grid.dt();
  std::vector<double> v_l2, gv_l2, gu_l2;
  for (int n = 0; n <= 2; ++n) {
    v_l2.push_back(l2_volume(m, Eigen::VectorXd(traj.v.col(n))));
    gv_l2.push_back(grad_l2(m, Eigen::VectorXd(traj.v.col(n))));
    gu_l2.push_back(grad_l2(m, Eigen::VectorXd(traj.u.col(n))));
  }
  const double want =
      std::sqrt(std::pow(compose_linf(v_l2), 2) +
                std::pow(compose_lp(gv_l2, 2.0, dt), 2) +
                std::pow(compose_linf(gu_l2), 2));
  EXPECT_NEAR(triple_norm(m, traj), want, 1e-13);
}

TEST(EnergySeries, SingleElementClosedForm) {
  Mesh m = build_interval_mesh(1.0, 1, 1.0);
  Trajectory traj;
  traj.grid = TimeGrid{1.0, 1};
  traj.u.resize(2, 2);
  traj.v.resize(2, 2);
  traj.u.col(0) << 0.0, 1.0;
  traj.v.col(0) << 1.0, 1.0;
  traj.u.col(1) << 0.0, 0.0;
  traj.v.col(1) << 0.0, 0.0;
  Eigen::VectorXd E = energy_series(m, traj, 2.0);
  // (1/2) v M v = 1/2, (c2/2) u K u = 1
  EXPECT_NEAR(E(0), 1.5, 1e-14);
  EXPECT_NEAR(E(1), 0.0, 1e-14);
}

}  // namespace
