#pragma once

// Smallness certificates: the existence theorems' hypotheses instantiated as
// a list of numeric inequalities, each one flagged.  The certificate passes
// only if every condition holds.  At k = 0 every k-dependent cap becomes
// infinite, so the certificate passes for arbitrary data.
// Also houses the sup-norm bound monitors, the degeneracy margin, and the
// absorbing-boundary reflection diagnostic.

#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "westfem/constants.hpp"
#include "westfem/evolution.hpp"
#include "westfem/norms.hpp"
#include "westfem/scenario.hpp"

namespace westfem {

struct CertificateCondition {
  std::string id;
  double lhs = 0.0, rhs = 0.0;
  bool strict = true;  // lhs < rhs, else lhs <= rhs
  bool pass = false;
  std::string note;
};

struct SmallnessCertificate {
  Formulation form = Formulation::W1;
  double a0 = 0.0;     // sup of the frozen-coefficient perturbation
  double a_lb = 1.0;   // induced lower bound on 1 - 2ku (W3: on a)
  double kappa = 0.0;  // measured data norm
  double kappa_cap = 0.0;
  double m_bar = 0.0, M_bar = 0.0;
  bool pass = true;
  std::vector<CertificateCondition> conditions;
  std::map<std::string, double> params;
  std::vector<std::string> notes;
};

namespace detail {

constexpr double kCertInf = std::numeric_limits<double>::infinity();

inline void add_condition(SmallnessCertificate& cert, const std::string& id,
                          double lhs, double rhs, bool strict,
                          const std::string& note = "") {
  CertificateCondition c;
  c.id = id;
  c.lhs = lhs;
  c.rhs = rhs;
  c.strict = strict;
  c.pass = strict ? lhs < rhs : lhs <= rhs;
  c.note = note;
  cert.conditions.push_back(c);
  cert.pass = cert.pass && c.pass;
}

// W1 and the coupled problem share the certificate shape; the coupled case
// substitutes sup|k|, sup|k/lambda| and the coefficient range bounds.
inline SmallnessCertificate certify_w1_shape(
    Formulation form, int dim, double q, double T, double c2, double abs_k,
    double abs_k_over_lambda, double bd1, const ConstantsTable& ct,
    const DataNorms& dn, const GNorms& gn, double m_bar, double M_bar) {
  SmallnessCertificate cert;
  cert.form = form;
  cert.m_bar = m_bar;
  cert.M_bar = M_bar;

  const double D2 = gn.c_gamma(q) + dn.u0_L1 * dn.u0_L1 +
                    dn.gu0_Lq1 * dn.gu0_Lq1 + dn.u1_H1 * dn.u1_H1 +
                    dn.gu0_L2 * dn.gu0_L2 +
                    std::pow(dn.u1_W1q1, q + 1.0) + dn.u1_L2Gh * dn.u1_L2Gh;
  cert.kappa = std::sqrt(D2);

  add_condition(cert, "q_embedding", double(dim) - 1.0, q, true);

  const double Tq = std::pow(T, q / (q + 1.0));
  const double ball = (1.0 + ct.C_P) * Tq * M_bar + ct.C2_omega * T * m_bar;
  add_condition(cert, "ball_smallness", 2.0 * abs_k * ct.C_W * ball, 1.0,
                true);

  const double scale = std::max(1.0 + ct.C_P, ct.C1_omega);
  cert.kappa_cap =
      abs_k > 0.0
          ? (1.0 / (2.0 * abs_k * ct.C_W) - ball) / scale
          : kCertInf;
  add_condition(cert, "kappa_window", cert.kappa, cert.kappa_cap, true);

  cert.a0 = 2.0 * abs_k * ct.C_W * (scale * cert.kappa + ball);
  cert.a_lb = 1.0 - cert.a0;
  add_condition(cert, "nondegeneracy", cert.a0, 1.0, true);

  const double C2 = ct.C_HL4 * ct.C_HL4;
  const double m_cap =
      abs_k_over_lambda > 0.0
          ? std::min(bd1 / (2.0 * C2), cert.a_lb / (4.0 * T * C2)) /
                abs_k_over_lambda
          : kCertInf;
  add_condition(cert, "m_window", m_bar, m_cap, true);
  cert.params["m_cap"] = m_cap;

  // contraction factor of the fixed-point map; informational only
  if (form == Formulation::W1) {
    const double num = abs_k * C2 * m_bar * (T + 1.0) * std::max(1.0, T);
    const double den =
        std::min(std::min(cert.a_lb / 4.0 - 3.0 * T * abs_k * C2 * m_bar,
                          bd1 / 2.0 - 3.0 * abs_k * C2 * m_bar),
                 c2 / 4.0);
    cert.params["contraction_factor"] = den > 0.0 ? num / den : kCertInf;
  }
  return cert;
}

}  // namespace detail

inline SmallnessCertificate smallness_certificate(
    const Mesh& mesh, const ScenarioSpec& spec, const ConstantsTable& ct,
    const DataNorms& dn, const GNorms& gn, double m_bar, double M_bar) {
  using detail::add_condition;
  const PhysicalParams& ph = spec.params;
  const double q = ph.q, T = spec.time.T;

  if (spec.formulation == Formulation::W1) {
    return detail::certify_w1_shape(Formulation::W1, mesh.dim, q, T, ph.c2,
                                    std::abs(ph.k), std::abs(ph.k),
                                    ph.b * (1.0 - ph.delta), ct, dn, gn,
                                    m_bar, M_bar);
  }

  if (spec.formulation == Formulation::Coupled) {
    CoefficientFields f = instantiate_coefficients(mesh, spec);
    const double abs_k = f.k.cwiseAbs().maxCoeff();
    const double abs_kl =
        f.k.cwiseQuotient(f.lambda).cwiseAbs().maxCoeff();
    const double b_lb = f.b.minCoeff();
    const double delta_ub = f.delta.maxCoeff();
    SmallnessCertificate cert = detail::certify_w1_shape(
        Formulation::Coupled, mesh.dim, q, T, 1.0 / f.rho.maxCoeff(), abs_k,
        abs_kl, b_lb * (1.0 - delta_ub), ct, dn, gn, m_bar, M_bar);
    const double field_lb =
        std::min(std::min(f.lambda.minCoeff(), f.rho.minCoeff()),
                 std::min(b_lb, f.delta.minCoeff()));
    add_condition(cert, "fields_positive", 0.0, field_lb, true);
    add_condition(cert, "delta_upper", delta_ub, 1.0, true);
    cert.params["abs_k"] = abs_k;
    cert.params["abs_k_over_lambda"] = abs_kl;
    return cert;
  }

  if (spec.formulation == Formulation::W2) {
    SmallnessCertificate cert;
    cert.form = Formulation::W2;
    cert.m_bar = m_bar;
    cert.M_bar = M_bar;
    const double abs_k = std::abs(ph.k);
    const double D2 = gn.L2L2 * gn.L2L2 + gn.L1L2 * gn.L1L2 +
                      dn.u1_L2 * dn.u1_L2 + dn.gu0_L2 * dn.gu0_L2 +
                      std::pow(dn.gu0_Lq1, q + 1.0) + dn.u0_L1 * dn.u0_L1;
    cert.kappa = std::sqrt(D2);

    add_condition(cert, "q_embedding", double(mesh.dim) - 1.0, q, true);

    const double ball =
        (1.0 + ct.C_P) * M_bar + ct.C2_omega * T * m_bar;
    add_condition(cert, "ball_smallness", 2.0 * abs_k * ct.C_W * ball, 1.0,
                  true);

    cert.kappa_cap =
        abs_k > 0.0
            ? (1.0 / (2.0 * abs_k * ct.C_W) - ball) / ct.C1_omega
            : detail::kCertInf;
    add_condition(cert, "kappa_window", cert.kappa, cert.kappa_cap, true);

    cert.a0 = 2.0 * abs_k * ct.C_W * (ct.C1_omega * cert.kappa + ball);
    cert.a_lb = 1.0 - cert.a0;
    add_condition(cert, "nondegeneracy", cert.a0, 1.0, true);

    const double C2 = ct.C_HL4 * ct.C_HL4;
    const double m_cap =
        abs_k > 0.0
            ? std::min(cert.a_lb / (4.0 * C2), ph.b / (2.0 * C2)) / abs_k
            : detail::kCertInf;
    add_condition(cert, "m_window", m_bar, m_cap, false);
    cert.params["m_cap"] = m_cap;

    // self-mapping data bound; its constant is fully explicit here
    const double bhat = abs_k * m_bar;
    const double tr2 = ct.C2_tr * ct.C2_tr;
    double tau = 1.0;
    if (tr2 > 0.0) {
      const double cap = std::min(ph.b / 2.0 - bhat * C2,
                                  cert.a_lb / 4.0 - bhat * C2 * T) / tr2;
      if (cap > 0.0)
        tau = 0.5 * cap;
      else
        cert.notes.push_back("tau window empty");
    } else {
      cert.notes.push_back("no Neumann trace constant; tau defaults to 1");
    }
    cert.params["tau"] = tau;
    const double cbar =
        std::max(std::max(1.0 / (4.0 * tau), (1.0 + cert.a0) / 2.0),
                 std::max(ph.c2 / 2.0, ph.c2 * ph.eps / (q + 1.0)));
    cert.params["cbar"] = cbar;
    const double cap1 =
        (cert.a_lb / 4.0 - T * bhat * C2 - tr2 * tau) * m_bar * m_bar / cbar;
    const double cap2 =
        (ph.b / 2.0 - bhat * C2 - tr2 * tau) * m_bar * m_bar / cbar;
    const double cap3 = ph.c2 * ph.eps / (2.0 * (q + 1.0)) *
                        std::pow(M_bar, q + 1.0) / cbar;
    add_condition(cert, "kappa_selfmap", D2,
                  std::min(cap1, std::min(cap2, cap3)), false);
    return cert;
  }

  // W3
  SmallnessCertificate cert;
  cert.form = Formulation::W3;
  cert.m_bar = m_bar;
  cert.M_bar = M_bar;
  const double abs_kt = std::abs(ph.kt);
  const double D2 = gn.c_gamma(q) + dn.gu0_L2 * dn.gu0_L2 +
                    dn.u1_H1 * dn.u1_H1 + std::pow(dn.u1_W1q1, q + 1.0) +
                    dn.u1_L2Gh * dn.u1_L2Gh;
  cert.kappa = std::sqrt(D2);
  cert.kappa_cap = detail::kCertInf;
  cert.notes.push_back(
      "no closed-form data bound; the data norm is reported as measured");

  add_condition(cert, "q_range", 3.0, q, false);

  const double s =
      2.0 * abs_kt * ct.C_W *
      ((1.0 + ct.C_P) * M_bar + ct.C2_omega * m_bar);
  cert.a0 = s;
  cert.a_lb = s < 1.0 ? ph.c2 / (1.0 + s) : 0.0;
  cert.params["a_ub"] =
      s < 1.0 ? ph.c2 / (1.0 - s) : detail::kCertInf;
  add_condition(cert, "state_bound", s, 1.0, true);

  const double denom = s < 1.0 ? (1.0 - s) * (1.0 - s) : 0.0;
  const double grad_lhs =
      denom > 0.0 ? 2.0 * abs_kt * ph.c2 / denom * ct.C_Lq1L4 *
                        std::sqrt(T) * M_bar
                  : (abs_kt > 0.0 ? detail::kCertInf : 0.0);
  add_condition(cert, "gradient_bound", grad_lhs,
                ph.c2 / (2.0 * (1.0 + s)), false);

  const double cl3 = std::pow(ct.C_Lq1L4, 3.0);
  const double time_lhs =
      denom > 0.0 ? 2.0 * abs_kt * ph.c2 * std::pow(T, 1.5) * M_bar * cl3 *
                        ct.C2_omega * ct.C2_omega / denom
                  : (abs_kt > 0.0 ? detail::kCertInf : 0.0);
  add_condition(cert, "time_bound", time_lhs, 0.25, true);
  return cert;
}

struct LinfBoundReport {
  std::string variant;
  double bound = 0.0;
  double measured = 0.0;
  double slack = 0.0;  // bound - measured
};

// Sup-norm monitors behind the degeneracy control: variant names the state
// being bounded.  on_u_W1 and on_u_W2 bound u, on_ut_W3 bounds u_t.
inline LinfBoundReport linf_bound(const Mesh& mesh, const Trajectory& traj,
                                  const std::string& variant,
                                  const ConstantsTable& ct,
                                  const TrajectoryNorms& tn,
                                  const DataNorms& dn, double q, double T) {
  if (ct.C_W <= 0.0)
    throw std::invalid_argument("constants table not populated");
  (void)mesh;
  LinfBoundReport rep;
  rep.variant = variant;
  if (variant == "on_u_W1") {
    rep.bound = ct.C_W * ((1.0 + ct.C_P) *
                              (dn.gu0_Lq1 +
                               std::pow(T, q / (q + 1.0)) * tn.gv_Lq1Lq1) +
                          ct.C1_omega * dn.u0_L1 +
                          ct.C2_omega * T * tn.v_LinfL2);
    rep.measured = traj.u.cwiseAbs().maxCoeff();
  } else if (variant == "on_u_W2") {
    rep.bound = ct.C_W * ((1.0 + ct.C_P) * tn.gu_LinfLq1 +
                          ct.C1_omega * dn.u0_L1 +
                          ct.C2_omega * T * tn.v_LinfL2);
    rep.measured = traj.u.cwiseAbs().maxCoeff();
  } else if (variant == "on_ut_W3") {
    rep.bound = ct.C_W * ((1.0 + ct.C_P) * tn.gv_LinfLq1 +
                          ct.C2_omega * tn.v_LinfL2);
    rep.measured = traj.v.cwiseAbs().maxCoeff();
  } else {
    throw std::invalid_argument("unknown sup-norm bound variant: " + variant);
  }
  rep.slack = rep.bound - rep.measured;
  return rep;
}

struct DegeneracyMargin {
  double value = 1.0;
  int step = 0;
  int node = 0;
};

// min over nodes and steps of 1 - 2k u (W3: 1 - 2k_tilde u_t)
inline DegeneracyMargin degeneracy_margin(const Trajectory& traj,
                                          Formulation form,
                                          const Eigen::VectorXd& k_nodal) {
  DegeneracyMargin m;
  m.value = std::numeric_limits<double>::max();
  const Eigen::MatrixXd& state =
      form == Formulation::W3 ? traj.v : traj.u;
  for (int n = 0; n < state.cols(); ++n)
    for (int i = 0; i < state.rows(); ++i) {
      const double a = 1.0 - 2.0 * k_nodal(i) * state(i, n);
      if (a < m.value) {
        m.value = a;
        m.step = n;
        m.node = i;
      }
    }
  return m;
}

struct ReflectionProbe {
  double before_t0 = 0.0, before_t1 = 0.0;
  double after_t0 = 0.0, after_t1 = 0.0;
};

struct ReflectionReport {
  double coefficient = 0.0;
  double incident = 0.0, reflected = 0.0;
  bool degenerate = false;  // zero incident energy
};

// Ratio of pulse energy after boundary interaction to energy before it.
inline ReflectionReport reflection_coefficient(const Mesh& mesh,
                                               const Trajectory& traj,
                                               double c2,
                                               const ReflectionProbe& probe) {
  const double T = traj.grid.T;
  auto check = [&](double t) {
    if (t < 0.0 || t > T + 1e-12)
      throw std::invalid_argument("probe window outside the time grid");
  };
  check(probe.before_t0);
  check(probe.before_t1);
  check(probe.after_t0);
  check(probe.after_t1);

  Eigen::VectorXd E = energy_series(mesh, traj, c2);
  const double dt = traj.grid.dt();
  auto window_mean = [&](double t0, double t1) {
    int i0 = int(std::ceil(t0 / dt - 1e-9));
    int i1 = int(std::floor(t1 / dt + 1e-9));
    i0 = std::max(0, i0);
    i1 = std::min(traj.steps(), i1);
    if (i1 < i0) i1 = i0;
    double s = 0.0;
    for (int i = i0; i <= i1; ++i) s += E(i);
    return s / double(i1 - i0 + 1);
  };

  ReflectionReport rep;
  rep.incident = window_mean(probe.before_t0, probe.before_t1);
  rep.reflected = window_mean(probe.after_t0, probe.after_t1);
  if (rep.incident <= 0.0) {
    rep.degenerate = true;
    rep.coefficient = 0.0;
    return rep;
  }
  rep.coefficient =
      std::min(1.0, std::max(0.0, rep.reflected / rep.incident));
  return rep;
}

}  // namespace westfem
