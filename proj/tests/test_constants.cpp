#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "westfem/constants.hpp"
#include "westfem/norms.hpp"

using namespace westfem;

namespace {

TEST(Young, InequalityHoldsOnSweep) {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> mag(0.01, 10.0);
  for (double s : {1.5, 2.0, 3.0, 4.0}) {
    const double sp = s / (s - 1.0);
    for (int trial = 0; trial < 2000; ++trial) {
      const double a = mag(rng), b = mag(rng), eps = mag(rng);
      const double C = young_constant(eps, s);
      EXPECT_GE(eps * std::pow(a, s) + C * std::pow(b, sp) - a * b, -1e-12)
          << "s=" << s << " eps=" << eps << " a=" << a << " b=" << b;
    }
  }
}

TEST(Young, SharpPointAttainsEquality) {
  for (double s : {1.5, 2.0, 3.0}) {
    const double sp = s / (s - 1.0);
    for (double eps : {0.05, 0.5, 2.0}) {
      const double b = 1.7;
      const double a = young_sharp_a(b, eps, s);
      const double C = young_constant(eps, s);
      const double lhs = a * b;
      const double rhs = eps * std::pow(a, s) + C * std::pow(b, sp);
      EXPECT_NEAR(lhs, rhs, 1e-10 * std::max(1.0, rhs));
    }
  }
}

TEST(Young, PrintedVariantFailsAtQuadraticCase) {
  // the sign-flipped constant gives 4 eps instead of 1/(4 eps): at
  // eps = 0.05 the inequality breaks for a concrete pair
  const double eps = 0.05, s = 2.0;
  const double C_bad = young_constant_printed(eps, s);
  EXPECT_NEAR(C_bad, 4.0 * eps, 1e-15);
  const double a = young_sharp_a(1.0, eps, s), b = 1.0;
  EXPECT_LT(eps * a * a + C_bad * b * b, a * b);  // violation witness
  // the corrected constant closes it
  EXPECT_GE(eps * a * a + young_constant(eps, s) * b * b, a * b - 1e-12);
}

TEST(Poincare, QuadraticCaseHitsOneOverPi) {
  Mesh m = build_interval_mesh(1.0, 256, 1.0);
  ConstantsTable ct = ConstantsTable::estimate(m, 1.0);
  EXPECT_NEAR(ct.C_P, 1.0 / M_PI, 0.02 / M_PI);
}

TEST(Poincare, DomainScalingIsLinear) {
  Mesh m1 = build_interval_mesh(1.0, 128, 1.0);
  Mesh m2 = build_interval_mesh(2.0, 256, 1.0);
  ConstantsTable c1 = ConstantsTable::estimate(m1, 1.0);
  ConstantsTable c2 = ConstantsTable::estimate(m2, 1.0);
  EXPECT_NEAR(c2.C_P / c1.C_P, 2.0, 0.04);
}

TEST(OmegaConstants, ClosedFormsOnScaledDomain) {
  Mesh m = build_interval_mesh(2.0, 16, 1.0);
  const double q = 3.0;
  ConstantsTable ct = ConstantsTable::estimate(m, q);
  EXPECT_NEAR(ct.C1_omega, std::pow(2.0, -q / (q + 1.0)), 1e-12);
  EXPECT_NEAR(ct.C2_omega, std::pow(2.0, -(q - 1.0) / (2.0 * (q + 1.0))),
              1e-12);
  EXPECT_NEAR(ct.C_Lq1L4, std::pow(2.0, (q - 3.0) / (4.0 * (q + 1.0))),
              1e-12);
}

TEST(HLinfEmbedding, ExactAndValidOnRandomFields) {
  Mesh m = build_interval_mesh(1.0, 64, 1.0);
  const double c = h1_linf_eig(m);
  std::mt19937_64 rng(123);
  std::normal_distribution<double> gauss;
  for (int trial = 0; trial < 50; ++trial) {
    Eigen::VectorXd v(m.n_nodes());
    for (int i = 0; i < v.size(); ++i) v(i) = gauss(rng);
    const double ratio = linf_volume(v) / h1_norm(m, v);
    EXPECT_LE(ratio, c * (1.0 + 1e-10));
  }
  // a constant field keeps the bound in the right ballpark
  Eigen::VectorXd ones = Eigen::VectorXd::Ones(m.n_nodes());
  EXPECT_GT(linf_volume(ones) / h1_norm(m, ones), 0.3 * c);
}

TEST(ConstantsTable, WitnessRatiosAreValidBounds) {
  Mesh m = build_interval_mesh(1.0, 32, 0.5);
  const double q = 3.0;
  ConstantsTable ct = ConstantsTable::estimate(m, q);
  ASSERT_GT(ct.C_P, 0.0);
  ASSERT_GT(ct.C_W, 0.0);
  ASSERT_GT(ct.C_HL4, 0.0);
  ASSERT_GT(ct.C2_tr, 0.0);

  std::mt19937_64 rng(9);
  std::normal_distribution<double> gauss;
  for (int trial = 0; trial < 40; ++trial) {
    Eigen::VectorXd v(m.n_nodes());
    for (int i = 0; i < v.size(); ++i) v(i) = gauss(rng);
    // each estimated constant majorizes the witnessed functional ratios
    EXPECT_LE(linf_volume(v),
              ct.C_W * w1p_norm(m, v, q + 1.0) * (1.0 + 1e-9));
    EXPECT_LE(lp_volume(m, v, 4.0), ct.C_HL4 * h1_norm(m, v) * (1.0 + 1e-9));
    EXPECT_LE(boundary_lp(m, v, 2.0), ct.C2_tr * h1_norm(m, v) * (1.0 + 1e-9));
    EXPECT_LE(boundary_lp(m, v, q + 1.0, BoundaryTag::GammaNeumann),
              ct.C1_tr * w1p_norm(m, v, q + 1.0) * (1.0 + 1e-9));
  }
}

TEST(ConstantsTable, HoelderInterpolationHoldsForLq1L4) {
  // |phi|_{L4} <= |Omega|^{(q-3)/(4(q+1))} |phi|_{L^{q+1}} needs q >= 3
  Mesh m = build_interval_mesh(1.0, 24, 1.0);
  const double q = 5.0;
  ConstantsTable ct = ConstantsTable::estimate(m, q);
  std::mt19937_64 rng(4);
  std::normal_distribution<double> gauss;
  for (int trial = 0; trial < 30; ++trial) {
    Eigen::VectorXd v(m.n_nodes());
    for (int i = 0; i < v.size(); ++i) v(i) = gauss(rng);
    EXPECT_LE(lp_volume(m, v, 4.0),
              ct.C_Lq1L4 * lp_volume(m, v, q + 1.0) * (1.0 + 1e-6));
  }
}

TEST(ConstantsTable, SeededEstimatesAreDeterministic) {
  Mesh m = build_interval_mesh(1.0, 32, 1.0);
  AscentOptions opts;
  opts.seed = 20240915;
  ConstantsTable a = ConstantsTable::estimate(m, 3.0, opts);
  ConstantsTable b = ConstantsTable::estimate(m, 3.0, opts);
  EXPECT_DOUBLE_EQ(a.C_P, b.C_P);
  EXPECT_DOUBLE_EQ(a.C_W, b.C_W);
  EXPECT_DOUBLE_EQ(a.C_HL4, b.C_HL4);
  EXPECT_DOUBLE_EQ(a.C1_tr, b.C1_tr);
}

TEST(ConstantsTable, OverridesReplaceAndValidate) {
  Mesh m = build_interval_mesh(1.0, 8, 1.0);
  ConstantsTable ct = ConstantsTable::estimate(m, 1.0);
  ct.apply_override("C_P", 0.123);
  EXPECT_DOUBLE_EQ(ct.C_P, 0.123);
  ct.apply_override("C_W", 9.5);
  EXPECT_DOUBLE_EQ(ct.C_W, 9.5);
  EXPECT_THROW(ct.apply_override("C_unknown", 1.0), std::invalid_argument);
}

}  // namespace
