// Acceptance criteria, one printed pass/fail line per criterion.  Tolerances
// are pinned here in code; the printed line is the contract.

#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "westfem/runner.hpp"

using namespace westfem;
namespace fs = std::filesystem;

namespace {

void report(int idx, const char* name, bool ok) {
  std::printf("[CRITERION %02d] %s: %s\n", idx, name, ok ? "PASS" : "FAIL");
  std::fflush(stdout);
}

// ---- shared battery of randomized certificate-passing runs ----

struct CertifiedRun {
  ScenarioSpec spec;
  Mesh mesh;
  TimeGrid grid;
  PicardResult pr;
  ConstantsTable ct;
  SmallnessCertificate cert;
  double m_bar = 0.0, M_bar = 0.0;
  bool ok = false;
};

ScenarioSpec draw_scenario(Formulation form, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  ScenarioSpec s;
  s.formulation = form;
  s.mesh.elements = 32 + int(uni(rng) * 32.0);
  s.mesh.gamma_fraction = 0.5;
  s.params.alpha = 0.2 + uni(rng);
  s.params.b = 0.5 + uni(rng);
  s.params.delta = 0.3 + 0.4 * uni(rng);
  s.params.c2 = 0.5 + uni(rng);
  s.time.T = 0.5 + 0.5 * uni(rng);
  s.time.steps = std::max(40, int(s.time.T * 100.0));
  const double sign = uni(rng) < 0.5 ? -1.0 : 1.0;
  switch (form) {
    case Formulation::W1:
      s.params.q = uni(rng) < 0.5 ? 2.0 : 3.0;
      s.params.k = sign * (0.5 + uni(rng));
      break;
    case Formulation::W2:
      s.params.q = 3.0;
      s.params.eps = 0.1 + 0.9 * uni(rng);
      s.params.k = sign * (0.5 + uni(rng));
      break;
    case Formulation::W3:
      s.params.q = 3.0;
      s.params.c2 = 0.05 + 0.1 * uni(rng);
      s.params.kt = sign * (0.5 + uni(rng));
      s.time.T = 0.5;
      s.time.steps = 50;
      break;
    default:
      break;
  }
  return s;
}

void set_amplitude(ScenarioSpec& s, double amp) {
  std::ostringstream u0, u1;
  u0 << amp << "*sin(pi*x)";
  u1 << 0.5 * amp << "*sin(pi*x)";
  s.data.u0 = u0.str();
  s.data.u1 = u1.str();
}

// W2 self-mapping windows scale with the radii themselves, so tiny measured
// radii can be harder to certify than moderately generous ones.
std::vector<double> radius_candidates(Formulation form, double measured) {
  std::vector<double> c = {1.2 * measured};
  if (form == Formulation::W2)
    for (double floor : {0.1, 0.15, 0.2, 0.3, 0.6})
      if (floor > 1.2 * measured) c.push_back(floor);
  return c;
}

CertifiedRun make_certified(Formulation form, std::mt19937_64& rng) {
  CertifiedRun run;
  run.spec = draw_scenario(form, rng);
  run.mesh = build_mesh(run.spec.mesh);
  run.grid = TimeGrid{run.spec.time.T, run.spec.time.steps};
  run.ct = ConstantsTable::estimate(run.mesh, run.spec.params.q);
  double amp = 0.05;
  for (int attempt = 0; attempt < 16; ++attempt, amp *= 0.5) {
    set_amplitude(run.spec, amp);
    PicardResult pr;
    try {
      pr = picard_solve(run.mesh, run.spec, run.grid);
    } catch (const DegeneracyError&) {
      continue;
    }
    if (!pr.converged) continue;
    BallReport ball = ball_membership(run.mesh, pr.traj, form,
                                      run.spec.params.q, 1.0, 1.0);
    DataNorms dn = DataNorms::compute(run.mesh, pr.traj.u.col(0),
                                      pr.traj.v.col(0), run.spec.params.q);
    GNorms gn = GNorms::compute(run.mesh, run.grid,
                                fn_from_expr(run.spec.data.g),
                                run.spec.params.q);
    for (double mb : radius_candidates(form, std::max(ball.val1, ball.val2))) {
      for (double MB : radius_candidates(form, ball.val3)) {
        SmallnessCertificate cert =
            smallness_certificate(run.mesh, run.spec, run.ct, dn, gn, mb, MB);
        if (cert.pass) {
          run.pr = std::move(pr);
          run.cert = std::move(cert);
          run.m_bar = mb;
          run.M_bar = MB;
          run.ok = true;
          return run;
        }
      }
    }
  }
  return run;
}

const std::vector<CertifiedRun>& battery(Formulation form, int count,
                                         unsigned long seed) {
  static std::map<std::pair<int, unsigned long>, std::vector<CertifiedRun>>
      cache;
  auto key = std::make_pair(int(form), seed);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  std::mt19937_64 rng(seed);
  std::vector<CertifiedRun> runs;
  for (int draw = 0; draw < 40 * count && int(runs.size()) < count; ++draw) {
    CertifiedRun run = make_certified(form, rng);
    if (run.ok) runs.push_back(std::move(run));
  }
  return cache.emplace(key, std::move(runs)).first->second;
}

// ---- criterion 1: monotonicity of the damping nonlinearity ----

TEST(Acceptance, C01FluxMonotonicity) {
  bool ok = true;
  std::mt19937_64 rng(20240915);
  std::uniform_real_distribution<double> uni(-2.0, 2.0);
  std::uniform_real_distribution<double> du(0.3, 0.7);
  double worst = 0.0;
  for (double q : {1.0, 2.0, 3.0, 5.0}) {
    for (int trial = 0; trial < 10000; ++trial) {
      const double delta = du(rng);
      Eigen::Vector2d g1(uni(rng), uni(rng)), g2(uni(rng), uni(rng));
      auto mu = [&](const Eigen::Vector2d& g) {
        const double n = g.norm();
        const double w =
            (1.0 - delta) + delta * (q == 1.0 ? 1.0 : std::pow(n, q - 1.0));
        return (w * g).eval();
      };
      const double inner = (mu(g1) - mu(g2)).dot(g1 - g2);
      worst = std::min(worst, inner);
      if (inner < -1e-12) ok = false;
    }
  }

  // the assembled damping residual inherits the monotonicity
  Mesh mesh = build_interval_mesh(1.0, 16, 1.0);
  NonlinearTerm term =
      qgrad_damping(mesh, Eigen::VectorXd::Constant(16, 1.1),
                    Eigen::VectorXd::Constant(16, 0.6), 3.0);
  std::normal_distribution<double> gauss;
  for (int trial = 0; trial < 1000; ++trial) {
    Eigen::VectorXd v1(mesh.n_nodes()), v2(mesh.n_nodes());
    for (int i = 0; i < mesh.n_nodes(); ++i) {
      v1(i) = gauss(rng);
      v2(i) = gauss(rng);
    }
    const double inner = (term.residual(v1) - term.residual(v2)).dot(v1 - v2);
    if (inner < -1e-10) ok = false;
  }
  report(1, "damping flux and residual monotonicity", ok);
  EXPECT_TRUE(ok) << "worst pointwise inner product " << worst;
}

// ---- criterion 2: weighted Young inequality ----

TEST(Acceptance, C02YoungInequality) {
  bool ok = true;
  std::mt19937_64 rng(20240916);
  std::uniform_real_distribution<double> mag(0.01, 3.0);
  std::uniform_real_distribution<double> eps_d(0.05, 5.0);
  std::uniform_real_distribution<double> s_d(1.1, 4.0);
  for (int trial = 0; trial < 10000; ++trial) {
    const double a = mag(rng), b = mag(rng);
    const double eps = eps_d(rng), s = s_d(rng);
    const double gap = eps * std::pow(a, s) +
                       young_constant(eps, s) * std::pow(b, s / (s - 1.0)) -
                       a * b;
    if (gap < -1e-12) ok = false;
  }
  // stationarity of the sharp point: s eps a*^{s-1} = b
  for (double s : {1.5, 2.0, 3.0})
    for (double eps : {0.05, 0.5, 2.0})
      for (double b : {0.3, 1.0, 2.5}) {
        const double a = young_sharp_a(b, eps, s);
        const double resid = s * eps * std::pow(a, s - 1.0) - b;
        if (std::abs(resid) > 1e-10 * std::max(1.0, b)) ok = false;
      }
  // the sign-flipped constant in circulation fails at s = 2, eps = 0.05
  {
    const double eps = 0.05, s = 2.0, b = 1.0;
    const double a = young_sharp_a(b, eps, s);
    const double bad =
        eps * a * a + young_constant_printed(eps, s) * b * b - a * b;
    if (!(bad < 0.0)) ok = false;  // the violation must be demonstrable
    const double good = eps * a * a + young_constant(eps, s) * b * b - a * b;
    if (good < -1e-12) ok = false;
  }
  report(2, "weighted Young inequality and sharp constant", ok);
  EXPECT_TRUE(ok);
}

// ---- criterion 3: damping Jacobians against finite differences ----

double jacobian_fd_error(const NonlinearTerm& term, const Eigen::VectorXd& v) {
  Eigen::MatrixXd J = Eigen::MatrixXd(term.jacobian(v));
  const double h = 1e-6;
  double worst = 0.0;
  const double scale = std::max(1.0, J.cwiseAbs().maxCoeff());
  for (int j = 0; j < v.size(); ++j) {
    Eigen::VectorXd vp = v, vm = v;
    vp(j) += h;
    vm(j) -= h;
    Eigen::VectorXd col = (term.residual(vp) - term.residual(vm)) / (2.0 * h);
    for (int i = 0; i < v.size(); ++i)
      worst = std::max(worst, std::abs(J(i, j) - col(i)) / scale);
  }
  return worst;
}

Eigen::VectorXd random_state_away_from_kinks(const Mesh& mesh,
                                             std::mt19937_64& rng) {
  std::normal_distribution<double> gauss;
  for (int tries = 0; tries < 100; ++tries) {
    Eigen::VectorXd v(mesh.n_nodes());
    for (int i = 0; i < v.size(); ++i) v(i) = gauss(rng);
    double min_grad = 1e300;
    for (int e = 0; e < mesh.n_elements(); ++e) {
      Eigen::Vector2d g = Eigen::Vector2d::Zero();
      for (int l = 0; l < mesh.nodes_per_element(); ++l)
        g += v(mesh.elements(e, l)) * mesh.grad(e, l);
      min_grad = std::min(min_grad, g.norm());
    }
    if (min_grad > 0.2) return v;
  }
  throw std::runtime_error("no state away from the gradient kink found");
}

TEST(Acceptance, C03JacobianAgainstFiniteDifferences) {
  std::mt19937_64 rng(20240917);
  double worst = 0.0;
  Mesh line = build_interval_mesh(1.0, 8, 1.0);
  Mesh square = build_rect_mesh(1.0, 1.0, 2, 2, {"left"});
  NonlinearTerm damp1 =
      qgrad_damping(line, Eigen::VectorXd::Constant(8, 1.2),
                    Eigen::VectorXd::Constant(8, 0.5), 3.0);
  NonlinearTerm damp2 =
      qgrad_damping(square, Eigen::VectorXd::Constant(8, 0.9),
                    Eigen::VectorXd::Constant(8, 0.4), 3.0);
  NonlinearTerm stiff = qstiffness(line, 1.5, 0.4, 3.0);
  for (int trial = 0; trial < 50; ++trial) {
    worst = std::max(worst, jacobian_fd_error(
                                damp1, random_state_away_from_kinks(line, rng)));
    worst = std::max(
        worst,
        jacobian_fd_error(damp2, random_state_away_from_kinks(square, rng)));
    if (trial < 25)
      worst = std::max(
          worst,
          jacobian_fd_error(stiff, random_state_away_from_kinks(line, rng)));
  }
  const bool ok = worst <= 1e-5;
  report(3, "analytic Jacobians match central differences", ok);
  EXPECT_TRUE(ok) << "worst relative deviation " << worst;
}

// ---- criterion 4: manufactured solution convergence orders ----

TEST(Acceptance, C04ManufacturedSolutionOrders) {
  MMSCase cs = mms_w1lin_1d(3.0, 1.0, 0.5, 0.5, 0.3, 0.2, 4.0);
  ConvergenceTable temporal = mms_temporal(cs, 256, {25, 50, 100, 200});
  ConvergenceTable spatial = mms_spatial(cs, {8, 16, 32, 64}, 1600);
  const bool ok = temporal.order >= 1.9 && temporal.order <= 2.1 &&
                  spatial.order >= 1.9 && spatial.order <= 2.1;
  report(4, "manufactured solution second order in time and space", ok);
  EXPECT_TRUE(ok) << "temporal " << temporal.order << " spatial "
                  << spatial.order;
}

// ---- criterion 5: certified nondegeneracy ----

TEST(Acceptance, C05CertifiedRunsStayNondegenerate) {
  const auto& runs = battery(Formulation::W1, 20, 20240915);
  bool ok = runs.size() == 20;
  for (const CertifiedRun& run : runs) {
    Eigen::VectorXd kn = nodal_k(run.mesh, run.spec);
    DegeneracyMargin dm = degeneracy_margin(run.pr.traj, Formulation::W1, kn);
    if (dm.value < 1.0 - run.cert.a0 - 1e-12) ok = false;
  }
  // forced degeneracy aborts before producing a trajectory
  ScenarioSpec bad;
  bad.formulation = Formulation::W1;
  bad.mesh.elements = 16;
  bad.params.k = 10.0;
  bad.params.q = 2.0;
  bad.data.u0 = "0.1*sin(pi*x)";
  bad.time.T = 0.5;
  bad.time.steps = 10;
  Mesh mesh = build_mesh(bad.mesh);
  bool aborted = false;
  try {
    picard_solve(mesh, bad, TimeGrid{bad.time.T, bad.time.steps});
  } catch (const DegeneracyError& e) {
    aborted = true;
    if (e.value > 1e-6) ok = false;
  }
  if (!aborted) ok = false;
  report(5, "certificate implies the nondegeneracy margin", ok);
  EXPECT_TRUE(ok);
}

// ---- criterion 6: contraction of the fixed-point iteration ----

TEST(Acceptance, C06PicardContraction) {
  const auto& runs = battery(Formulation::W1, 10, 20241001);
  bool ok = runs.size() == 10;
  for (const CertifiedRun& run : runs) {
    if (!run.pr.converged || run.pr.iterations > 20) ok = false;
    for (const auto& rec : run.pr.log)
      if (rec.iter >= 2 && rec.increment > 1e-13 && rec.ratio >= 1.0)
        ok = false;
  }
  // k = 0: the first linearized solve already is the fixed point
  ScenarioSpec lin;
  lin.formulation = Formulation::W1;
  lin.mesh.elements = 32;
  lin.params.q = 2.0;
  lin.data.u0 = "0.05*sin(pi*x)";
  lin.time.T = 0.5;
  lin.time.steps = 50;
  Mesh mesh = build_mesh(lin.mesh);
  PicardResult pr = picard_solve(mesh, lin, TimeGrid{0.5, 50});
  if (!(pr.converged && pr.iterations == 1)) ok = false;
  report(6, "fixed-point iteration contracts under the certificate", ok);
  EXPECT_TRUE(ok);
}

// ---- criterion 7: fixed point against the monolithic oracle ----

TEST(Acceptance, C07PicardMatchesMonolithic) {
  std::mt19937_64 rng(20241107);
  double worst_w1 = 0.0, worst_other = 0.0;
  auto compare = [&](Formulation form) {
    ScenarioSpec s = draw_scenario(form, rng);
    s.mesh.elements = 32;
    s.time.steps = 50;
    set_amplitude(s, 0.02);
    Mesh mesh = build_mesh(s.mesh);
    TimeGrid grid{s.time.T, s.time.steps};
    PicardResult pr = picard_solve(mesh, s, grid);
    Trajectory mono = solve_nonlinear_monolithic(mesh, s, grid);
    double diff = 0.0;
    for (int n = 0; n <= grid.steps; ++n)
      diff = std::max(
          diff, l2_volume(mesh,
                          Eigen::VectorXd(pr.traj.u.col(n) - mono.u.col(n))));
    return diff;
  };
  for (int i = 0; i < 10; ++i)
    worst_w1 = std::max(worst_w1, compare(Formulation::W1));
  for (int i = 0; i < 5; ++i) {
    worst_other = std::max(worst_other, compare(Formulation::W2));
    worst_other = std::max(worst_other, compare(Formulation::W3));
  }
  const bool ok = worst_w1 <= 1e-8;
  report(7, "fixed point agrees with the monolithic solver", ok);
  EXPECT_TRUE(ok) << "worst W1 gap " << worst_w1;
  std::printf("           (diagnostic: worst W2/W3 gap %.3e)\n", worst_other);
}

// ---- criterion 8: energy estimates certified on passing runs ----

TEST(Acceptance, C08EnergyEstimatesHold) {
  bool ok = true;
  auto check = [&](const CertifiedRun& run, const std::string& id) {
    EstimateContext ctx = make_estimate_context(
        run.mesh, run.spec, run.grid, run.pr.traj, run.pr.coef, run.ct);
    EnergyReport rep = energy_report(ctx, id);
    if (rep.status != "pass") ok = false;
    if (rep.margin < -1e-10 * std::max(1.0, std::abs(rep.rhs))) ok = false;
  };
  const auto& w1 = battery(Formulation::W1, 20, 20240915);
  const auto& w2 = battery(Formulation::W2, 5, 20240918);
  const auto& w3 = battery(Formulation::W3, 5, 20240919);
  if (w1.size() != 20 || w2.size() != 5 || w3.size() != 5) ok = false;
  for (const CertifiedRun& run : w1) check(run, "est1");
  for (const CertifiedRun& run : w2) check(run, "W2_energyest");
  for (const CertifiedRun& run : w3) check(run, "W3lin_lower");

  // a collapsed free-parameter window must not report success
  if (!w1.empty()) {
    const CertifiedRun& run = w1.front();
    EstimateContext ctx = make_estimate_context(
        run.mesh, run.spec, run.grid, run.pr.traj, run.pr.coef, run.ct);
    ctx.phys.b = 0.0;  // empties the damping-derived windows
    EnergyReport rep = energy_report(ctx, "est2");
    if (rep.status == "pass") ok = false;
  }
  report(8, "energy estimates hold on certified runs", ok);
  EXPECT_TRUE(ok);
}

// ---- criterion 9: Poincare constant recovery and scaling ----

TEST(Acceptance, C09PoincareConstant) {
  Mesh unit = build_interval_mesh(1.0, 256, 1.0);
  ConstantsTable ct1 = ConstantsTable::estimate(unit, 1.0);
  const double rel1 = std::abs(ct1.C_P - 1.0 / M_PI) / (1.0 / M_PI);
  Mesh doubled = build_interval_mesh(2.0, 512, 1.0);
  ConstantsTable ct2 = ConstantsTable::estimate(doubled, 1.0);
  const double rel2 = std::abs(ct2.C_P - 2.0 / M_PI) / (2.0 / M_PI);
  const bool ok = rel1 <= 0.02 && rel2 <= 0.02;
  report(9, "Poincare constant matches 1/pi and scales with the domain", ok);
  EXPECT_TRUE(ok) << "relative errors " << rel1 << ", " << rel2;
}

// ---- criterion 10: absorbing boundary reflection ----

TEST(Acceptance, C10AbsorbingBoundary) {
  ScenarioSpec s;
  s.formulation = Formulation::W1;
  s.mesh.elements = 400;
  s.mesh.gamma_fraction = 0.0;
  s.params.q = 1.0;
  s.params.b = 1e-4;
  s.data.u0 = "exp(-(x-0.3)^2/(2*0.05^2))";
  s.data.u1 = "(x-0.3)/0.05^2*exp(-(x-0.3)^2/(2*0.05^2))";
  s.time.T = 1.6;
  s.time.steps = 800;
  Mesh mesh = build_mesh(s.mesh);
  TimeGrid grid{s.time.T, s.time.steps};
  ReflectionProbe probe{0.3, 0.5, 1.3, 1.5};

  s.params.alpha = 1.0;  // matched to c
  ReflectionReport quiet = reflection_coefficient(
      mesh, solve_nonlinear_monolithic(mesh, s, grid), 1.0, probe);
  s.params.alpha = 1000.0;  // rigid wall limit
  ReflectionReport loud = reflection_coefficient(
      mesh, solve_nonlinear_monolithic(mesh, s, grid), 1.0, probe);

  const bool ok = !quiet.degenerate && !loud.degenerate &&
                  quiet.coefficient < 0.05 && loud.coefficient > 0.9;
  report(10, "matched absorber vs rigid wall reflection", ok);
  EXPECT_TRUE(ok) << "matched " << quiet.coefficient << " rigid "
                  << loud.coefficient;
}

// ---- criterion 11: two-material coupled interface ----

TEST(Acceptance, C11CoupledInterface) {
  bool ok = true;
  ScenarioSpec s;
  s.formulation = Formulation::Coupled;
  s.mesh.elements = 64;  // even count puts the interface x = 0.5 on a node
  s.mesh.gamma_fraction = 0.5;
  s.params.q = 2.0;
  s.params.alpha = 0.5;
  s.coefficients.lambda = "sel(x < 0.5, 1.0, 2.0)";
  s.coefficients.rho = "sel(x < 0.5, 1.0, 0.5)";
  s.coefficients.b = "sel(x < 0.5, 1.0, 1.5)";
  s.coefficients.delta = "0.5";
  s.coefficients.k = "sel(x < 0.5, 0.2, 0.1)";
  s.data.u0 = "0.01*sin(pi*x)";
  s.time.T = 0.5;
  s.time.steps = 100;
  s.solver.engine = "monolithic";
  Mesh mesh = build_mesh(s.mesh);
  TimeGrid grid{s.time.T, s.time.steps};
  RunOutput run = execute(mesh, s, grid);

  Eigen::VectorXd kn = nodal_k(mesh, s);
  DegeneracyMargin dm = degeneracy_margin(run.traj, Formulation::Coupled, kn);
  if (!(dm.value > 0.0)) ok = false;

  // Interface row balance, reconstructed from the two-material weak form:
  // the jump of the combined elastic + damping flux across x = 0.5 must
  // equal the inertia and quadratic-force moments against the interface hat
  // function.  Two-point Gauss integrates the P1 product rows exactly.
  const int iface = 32;
  const double h = 1.0 / 64.0, q = s.params.q, dt = grid.dt();
  const double lam[2] = {1.0, 2.0}, rho[2] = {1.0, 0.5};
  const double bb[2] = {1.0, 1.5}, dd[2] = {0.5, 0.5};
  double worst = 0.0;
  for (int n = 0; n < grid.steps; n += 7) {
    Eigen::VectorXd u_mid = 0.5 * (run.traj.u.col(n) + run.traj.u.col(n + 1));
    Eigen::VectorXd v_mid = 0.5 * (run.traj.v.col(n) + run.traj.v.col(n + 1));
    Eigen::VectorXd acc = (run.traj.v.col(n + 1) - run.traj.v.col(n)) / dt;
    double flux[2];
    for (int side = 0; side < 2; ++side) {
      const int left = iface - 1 + side;
      const double gu = (u_mid(left + 1) - u_mid(left)) / h;
      const double gv = (v_mid(left + 1) - v_mid(left)) / h;
      flux[side] = gu / rho[side] +
                   bb[side] *
                       ((1.0 - dd[side]) +
                        dd[side] * std::pow(std::abs(gv), q - 1.0)) *
                       gv;
    }
    double moments = 0.0;
    for (int side = 0; side < 2; ++side) {
      const int left = iface - 1 + side;
      for (double gp : {0.5 - 0.5 / std::sqrt(3.0),
                        0.5 + 0.5 / std::sqrt(3.0)}) {
        auto at = [&](const Eigen::VectorXd& w) {
          return (1.0 - gp) * w(left) + gp * w(left + 1);
        };
        const double phi_if = side == 0 ? gp : 1.0 - gp;
        const double a_gp =
            1.0 - 2.0 * ((1.0 - gp) * kn(left) * u_mid(left) +
                         gp * kn(left + 1) * u_mid(left + 1));
        const double y_gp = 2.0 * ((1.0 - gp) * kn(left) * v_mid(left) +
                                   gp * kn(left + 1) * v_mid(left + 1));
        moments += 0.5 * h / lam[side] *
                   (a_gp * at(acc) - y_gp * at(v_mid)) * phi_if;
      }
    }
    const double row = moments + flux[0] - flux[1];
    worst = std::max(worst, std::abs(row));
  }
  if (worst > 1e-9) ok = false;

  // certified lower energy bound with the heterogeneous coefficient ranges
  ConstantsTable ct = make_constants(mesh, s, 20240915);
  EstimateContext ctx =
      make_estimate_context(mesh, s, grid, run.traj, run.coef, ct);
  EnergyReport rep = energy_report(ctx, "coupled_lower");
  if (rep.status != "pass") ok = false;
  if (rep.margin < 0.0) ok = false;
  report(11, "coupled interface balance and energy bound", ok);
  EXPECT_TRUE(ok) << "worst interface row " << worst << ", estimate "
                  << rep.status;
}

// ---- criterion 12: byte-identical artifacts ----

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

TEST(Acceptance, C12Determinism) {
  bool ok = true;
  const std::string scenario =
      std::string(WESTFEM_SCENARIO_DIR) + "/w1_small.json";
  fs::path a = fs::temp_directory_path() / "westfem_acc_det_a";
  fs::path b = fs::temp_directory_path() / "westfem_acc_det_b";
  fs::remove_all(a);
  fs::remove_all(b);
  for (const fs::path& out : {a, b}) {
    const std::string cmd = std::string(WESTFEM_CLI_PATH) + " --scenario " +
                            scenario + " --out " + out.string() +
                            " > /dev/null 2>&1";
    if (WEXITSTATUS(std::system(cmd.c_str())) != 0) ok = false;
  }
  for (const char* f : {"trajectory.csv", "energy.csv", "norms.txt"})
    if (slurp(a / f) != slurp(b / f) || slurp(a / f).empty()) ok = false;
  report(12, "repeated runs produce identical bytes", ok);
  EXPECT_TRUE(ok);
}

}  // namespace
