#pragma once

// Term-by-term evaluation of the linearized energy estimates.  Each builder
// reproduces one inequality exactly: every left-hand coefficient, every
// right-hand constant, the admissibility window of every free parameter.
// Free parameters default to the midpoint of their window; a user override
// outside the window is an error, an empty window makes the whole report
// inconclusive (the inequality is silent there, it does not fail).
// Estimates whose right-hand side carries an unspecified scalar C-bar are
// evaluated against a supplied value when one is given; otherwise the
// smallest scalar closing the inequality is reported as cbar_required.

#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "westfem/constants.hpp"
#include "westfem/norms.hpp"
#include "westfem/scenario.hpp"

namespace westfem {

struct EstimateTerm {
  std::string name;
  double coeff = 0.0;
  double value = 0.0;
  double power = 1.0;
  double contribution() const { return coeff * std::pow(value, power); }
};

struct EnergyReport {
  std::string id;
  std::string status = "pass";  // pass | fail | inconclusive
  double lhs = 0.0, rhs = 0.0, margin = 0.0;
  bool uses_cbar = false;
  double cbar = 0.0;           // scalar applied to the data sum
  double cbar_required = 0.0;  // smallest scalar closing the inequality
  std::vector<EstimateTerm> lhs_terms, rhs_terms;
  std::map<std::string, double> params;
  std::vector<std::string> notes;
};

struct EstimateContext {
  Formulation form = Formulation::W1;
  PhysicalParams phys;
  double T = 1.0;
  ConstantsTable ct;
  TrajectoryNorms tn;
  DataNorms dn;
  GNorms gn;
  CoefficientNorms cn;
  // coefficient ranges for the coupled estimate
  double b_lb = 0.0, delta_lb = 0.0, delta_ub = 0.0;
  double c2_lb = 0.0, c2_ub = 0.0, alpha_lb = 0.0;
  std::map<std::string, double> free_params;
  double tol = 1e-10;
  double cbar = 0.0;  // 0: fit per run
};

inline const std::vector<std::string>& estimate_ids() {
  static const std::vector<std::string> ids = {
      "est1",           "est2",
      "W1_beta_est1",   "W1lin_est2_beta",
      "W1_gamma_est1",  "W1lin_est2_gamma",
      "W1lin_est2_gamma2",
      "W2_energyest",   "W2_energyest_1",
      "W3lin_lower",    "W3lin_higher",
      "W3lin_lower_gamma", "W3lin_higher_gamma",
      "coupled_lower"};
  return ids;
}

namespace detail {

constexpr double kInf = std::numeric_limits<double>::infinity();

inline void mark_inconclusive(EnergyReport& rep, const std::string& why) {
  if (rep.status == "pass") rep.status = "inconclusive";
  rep.notes.push_back(why);
}

// Free parameter with admissibility window (lo, hi): override wins if legal,
// otherwise the midpoint.  An empty window poisons the report.
inline double pick_param(EnergyReport& rep, const EstimateContext& ctx,
                         const std::string& name, double lo, double hi) {
  double v;
  auto it = ctx.free_params.find(name);
  if (!(hi > lo)) {
    mark_inconclusive(rep, "empty window for " + name);
    v = it != ctx.free_params.end() ? it->second : 1.0;
  } else if (it != ctx.free_params.end()) {
    v = it->second;
    if (!(v > lo) || !(v < hi))
      throw std::invalid_argument(name + " = " + std::to_string(v) +
                                  " outside its window (" +
                                  std::to_string(lo) + ", " +
                                  (hi == kInf ? "inf" : std::to_string(hi)) +
                                  ") for " + rep.id);
  } else {
    v = hi == kInf ? std::max(1.0, 2.0 * lo) : 0.5 * (lo + hi);
  }
  rep.params[name] = v;
  return v;
}

inline void add_lhs(EnergyReport& rep, const std::string& name, double coeff,
                    double value, double power) {
  rep.lhs_terms.push_back({name, coeff, value, power});
}

inline void add_rhs(EnergyReport& rep, const std::string& name, double coeff,
                    double value, double power) {
  rep.rhs_terms.push_back({name, coeff, value, power});
}

inline void finalize(EnergyReport& rep, double tol) {
  double lhs = 0.0, rhs = 0.0;
  bool neg = false;
  for (const auto& t : rep.lhs_terms) {
    lhs += t.contribution();
    if (t.coeff < 0.0) neg = true;
  }
  for (const auto& t : rep.rhs_terms) rhs += t.contribution();
  rep.lhs = lhs;
  rep.rhs = rhs;
  rep.margin = rhs - lhs;
  if (neg) mark_inconclusive(rep, "negative left-hand coefficient");
  if (rep.status == "pass" &&
      rep.margin < -tol * std::max(1.0, std::abs(rhs)))
    rep.status = "fail";
}

// For the C-bar families: data terms carry coefficient relative weights,
// the shared scalar is applied afterwards.
inline void finalize_cbar(EnergyReport& rep, const EstimateContext& ctx) {
  rep.uses_cbar = true;
  double lhs = 0.0, data = 0.0;
  bool neg = false;
  for (const auto& t : rep.lhs_terms) {
    lhs += t.contribution();
    if (t.coeff < 0.0) neg = true;
  }
  for (const auto& t : rep.rhs_terms) data += t.contribution();
  rep.lhs = lhs;
  rep.cbar_required = data > 0.0 ? lhs / data : 0.0;
  if (ctx.cbar > 0.0) {
    rep.cbar = ctx.cbar;
  } else {
    rep.cbar = rep.cbar_required;
    rep.notes.push_back("cbar fitted to this run");
  }
  rep.rhs = rep.cbar * data;
  rep.margin = rep.rhs - rep.lhs;
  if (neg) mark_inconclusive(rep, "negative left-hand coefficient");
  if (rep.status == "pass" &&
      rep.margin < -ctx.tol * std::max(1.0, std::abs(rep.rhs)))
    rep.status = "fail";
}

// est1 shares its shape with the coupled lower estimate; bounds differ.
inline EnergyReport lower_w1_shape(const EstimateContext& ctx,
                                   const std::string& id, double a_lb,
                                   double a_ub, double c2_lhs, double c2_rhs,
                                   double bd1, double bdd, double alpha,
                                   double bhat) {
  EnergyReport rep;
  rep.id = id;
  const double q = ctx.phys.q, p = (q + 1.0) / q;
  const double C2 = ctx.ct.C_HL4 * ctx.ct.C_HL4;
  rep.params["a_lb"] = a_lb;
  rep.params["a_ub"] = a_ub;
  rep.params["bhat"] = bhat;
  rep.params["bhat_cap"] =
      std::min(bd1 / (2.0 * C2),
               ctx.T > 0.0 ? a_lb / (4.0 * ctx.T * C2) : kInf);

  const double eps0 =
      pick_param(rep, ctx, "eps0", 0.0, a_lb / 4.0 - bhat * C2 * ctx.T);
  const double eps1 = pick_param(rep, ctx, "eps1", 0.0, bdd / 2.0);

  add_lhs(rep, "v_LinfL2", a_lb / 4.0 - bhat * C2 * ctx.T - eps0,
          ctx.tn.v_LinfL2, 2.0);
  add_lhs(rep, "gu_LinfL2", c2_lhs / 4.0, ctx.tn.gu_LinfL2, 2.0);
  add_lhs(rep, "gv_L2L2", bd1 / 2.0 - bhat * C2, ctx.tn.gv_L2L2, 2.0);
  add_lhs(rep, "v_L2Gh", alpha / 2.0, ctx.tn.v_L2Gh, 2.0);
  add_lhs(rep, "gv_Lq1Lq1", bdd / 2.0 - eps1, ctx.tn.gv_Lq1Lq1, q + 1.0);

  add_rhs(rep, "u1_L2", a_ub / 2.0, ctx.dn.u1_L2, 2.0);
  add_rhs(rep, "gu0_L2", c2_rhs / 2.0, ctx.dn.gu0_L2, 2.0);
  const double ctr2 = ctx.ct.C1_tr * ctx.ct.C2_omega;
  add_rhs(rep, "g_L1L2", ctr2 * ctr2 / (4.0 * eps0), ctx.gn.L1L2, 2.0);
  add_rhs(rep, "g_LpLp",
          young_constant(eps1, q + 1.0) *
              std::pow(ctx.ct.C1_tr * (1.0 + ctx.ct.C_P), p),
          ctx.gn.LpLp, p);
  finalize(rep, ctx.tol);
  return rep;
}

inline EnergyReport build_est1(const EstimateContext& ctx) {
  return lower_w1_shape(ctx, "est1", ctx.cn.a_lb, ctx.cn.a_ub, ctx.phys.c2,
                        ctx.phys.c2, ctx.phys.b * (1.0 - ctx.phys.delta),
                        ctx.phys.b * ctx.phys.delta, ctx.phys.alpha,
                        ctx.cn.bhat);
}

inline EnergyReport build_coupled_lower(const EstimateContext& ctx) {
  return lower_w1_shape(ctx, "coupled_lower", ctx.cn.a_lb, ctx.cn.a_ub,
                        ctx.c2_lb, ctx.c2_ub,
                        ctx.b_lb * (1.0 - ctx.delta_ub),
                        ctx.b_lb * ctx.delta_lb, ctx.alpha_lb, ctx.cn.bhat);
}

inline EnergyReport build_est2(const EstimateContext& ctx) {
  EnergyReport rep;
  rep.id = "est2";
  const double q = ctx.phys.q;
  const double a_lb = ctx.cn.a_lb;
  const double b = ctx.phys.b, d = ctx.phys.delta, c2 = ctx.phys.c2;
  const double alpha = ctx.phys.alpha, T = ctx.T;
  const double C2 = ctx.ct.C_HL4 * ctx.ct.C_HL4, C4 = C2 * C2;
  const double bhat = ctx.cn.bhat, btl = ctx.cn.btilde;
  rep.params["a_lb"] = a_lb;
  rep.params["bhat"] = bhat;
  rep.params["btilde"] = btl;

  const double eps0 =
      pick_param(rep, ctx, "eps0", 0.0, a_lb / 4.0 - bhat * C2 * T);
  const double eps1 = pick_param(rep, ctx, "eps1", 0.0, b * d / 2.0);
  const double tau = pick_param(rep, ctx, "tau", 0.0, a_lb);
  const double sig = pick_param(rep, ctx, "sigma", 0.0, b * (1.0 - d) / 4.0);
  const double eta =
      pick_param(rep, ctx, "eta", 0.0, b * d / (2.0 * (q + 1.0)));

  const double mu1 = (a_lb / 4.0 - C2 * bhat * T - eps0) /
                     (eps0 + C4 * btl * btl * T / (2.0 * tau));
  const double mu2 = (b * (1.0 - d) / 2.0 - C2 * bhat) /
                     (C4 * btl * btl / (2.0 * tau) + c2);
  const double mu3 = sig / c2;
  const double mu4 = (b * d / 2.0 - eps1) / eps1;
  const double mu_cap = std::min(std::min(mu1, mu2), std::min(mu3, mu4));
  rep.params["mu_cap"] = mu_cap;
  const double mu = pick_param(rep, ctx, "mu", 0.0, mu_cap);

  add_lhs(rep, "utt_L2L2", mu * (a_lb - tau) / 2.0, ctx.tn.utt_L2L2, 2.0);
  add_lhs(rep, "gv_LinfL2", mu * (b * (1.0 - d) / 4.0 - sig),
          ctx.tn.gv_LinfL2, 2.0);
  add_lhs(rep, "v_LinfL2",
          a_lb / 4.0 - C2 * bhat * T - eps0 * (mu + 1.0) -
              mu * C4 * btl * btl * T / (2.0 * tau),
          ctx.tn.v_LinfL2, 2.0);
  add_lhs(rep, "gv_L2L2",
          b * (1.0 - d) / 2.0 - C2 * bhat -
              mu * (C4 * btl * btl / (2.0 * tau) + c2),
          ctx.tn.gv_L2L2, 2.0);
  add_lhs(rep, "gu_LinfL2", (c2 / 4.0) * (1.0 - mu * c2 / sig),
          ctx.tn.gu_LinfL2, 2.0);
  add_lhs(rep, "gv_LinfLq1", mu * (b * d / (2.0 * (q + 1.0)) - eta),
          ctx.tn.gv_LinfLq1, q + 1.0);
  add_lhs(rep, "gv_Lq1Lq1", b * d / 2.0 - eps1 * (mu + 1.0),
          ctx.tn.gv_Lq1Lq1, q + 1.0);
  add_lhs(rep, "v_L2Gh", alpha / 2.0, ctx.tn.v_L2Gh, 2.0);
  add_lhs(rep, "v_LinfGh", mu * alpha / 4.0, ctx.tn.v_LinfGh, 2.0);

  add_rhs(rep, "C_Gamma_g", 1.0, ctx.gn.c_gamma(q), 1.0);
  add_rhs(rep, "u1_H1", 1.0, ctx.dn.u1_H1, 2.0);
  add_rhs(rep, "gu0_L2", 1.0, ctx.dn.gu0_L2, 2.0);
  add_rhs(rep, "u1_W1q1", 1.0, ctx.dn.u1_W1q1, q + 1.0);
  add_rhs(rep, "u1_L2Gh", 1.0, ctx.dn.u1_L2Gh, 2.0);
  finalize_cbar(rep, ctx);
  return rep;
}

inline EnergyReport build_w1_beta_est1(const EstimateContext& ctx) {
  EnergyReport rep;
  rep.id = "W1_beta_est1";
  const double q = ctx.phys.q, p = (q + 1.0) / q;
  const double a_lb = ctx.cn.a_lb, a_ub = ctx.cn.a_ub;
  const double b = ctx.phys.b, d = ctx.phys.delta, c2 = ctx.phys.c2;
  const double beta = ctx.phys.beta, alpha = ctx.phys.alpha;
  const double C2 = ctx.ct.C_HL4 * ctx.ct.C_HL4;
  const double bhat = ctx.cn.bhat;
  rep.params["bhat"] = bhat;
  rep.params["bhat_cap"] =
      std::min(beta / (2.0 * C2), b * (1.0 - d) / (2.0 * C2));
  if (beta <= 0.0) mark_inconclusive(rep, "requires beta > 0");

  const double eps0 = pick_param(rep, ctx, "eps0", 0.0, a_lb / 4.0);
  const double eps1 = pick_param(rep, ctx, "eps1", 0.0, b * d / 2.0);

  add_lhs(rep, "v_LinfL2", a_lb / 4.0 - eps0, ctx.tn.v_LinfL2, 2.0);
  add_lhs(rep, "gv_L2L2", b * (1.0 - d) / 2.0 - bhat * C2, ctx.tn.gv_L2L2,
          2.0);
  add_lhs(rep, "gv_Lq1Lq1", b * d / 2.0 - eps1, ctx.tn.gv_Lq1Lq1, q + 1.0);
  add_lhs(rep, "v_L2L2", beta / 2.0 - bhat * C2, ctx.tn.v_L2L2, 2.0);
  add_lhs(rep, "gu_LinfL2", c2 / 4.0, ctx.tn.gu_LinfL2, 2.0);
  add_lhs(rep, "v_L2Gh", alpha / 2.0, ctx.tn.v_L2Gh, 2.0);

  add_rhs(rep, "u1_L2", a_ub / 2.0, ctx.dn.u1_L2, 2.0);
  add_rhs(rep, "gu0_L2", c2 / 2.0, ctx.dn.gu0_L2, 2.0);
  const double ctr2 = ctx.ct.C1_tr * ctx.ct.C2_omega;
  add_rhs(rep, "g_L1L2", ctr2 * ctr2 / (4.0 * eps0), ctx.gn.L1L2, 2.0);
  add_rhs(rep, "g_LpLp",
          young_constant(eps1, q + 1.0) *
              std::pow(ctx.ct.C1_tr * (1.0 + ctx.ct.C_P), p),
          ctx.gn.LpLp, p);
  finalize(rep, ctx.tol);
  return rep;
}

inline EnergyReport build_est2_beta(const EstimateContext& ctx) {
  EnergyReport rep;
  rep.id = "W1lin_est2_beta";
  const double q = ctx.phys.q;
  const double a_lb = ctx.cn.a_lb;
  const double b = ctx.phys.b, d = ctx.phys.delta, c2 = ctx.phys.c2;
  const double beta = ctx.phys.beta, alpha = ctx.phys.alpha;
  const double C2 = ctx.ct.C_HL4 * ctx.ct.C_HL4, C4 = C2 * C2;
  const double bhat = ctx.cn.bhat, btl = ctx.cn.btilde;
  rep.params["bhat"] = bhat;
  rep.params["btilde"] = btl;
  if (beta <= 0.0) mark_inconclusive(rep, "requires beta > 0");

  const double eps0 = pick_param(rep, ctx, "eps0", 0.0, a_lb / 4.0);
  const double eps1 = pick_param(rep, ctx, "eps1", 0.0, b * d / 2.0);
  const double tau = pick_param(rep, ctx, "tau", 0.0, a_lb);
  const double sig = pick_param(rep, ctx, "sigma", 0.0, b * (1.0 - d) / 4.0);
  const double eta =
      pick_param(rep, ctx, "eta", 0.0, b * d / (2.0 * (q + 1.0)));

  // each cap keeps one left-hand coefficient positive
  const double mu_a = eps0 > beta / 4.0
                          ? (a_lb / 4.0 - eps0) / (eps0 - beta / 4.0)
                          : kInf;
  const double mu_b = (b * (1.0 - d) / 2.0 - C2 * bhat) /
                      (C4 * btl * btl / (2.0 * tau) + c2);
  const double mu_c = (b * d / 2.0) / (eps1 + 1.0);
  const double mu_d =
      btl > 0.0 ? (beta / 2.0 - C2 * bhat) * 2.0 * tau / (C4 * btl * btl)
                : kInf;
  const double mu_e = sig / c2;
  const double mu_cap = std::min(std::min(mu_a, mu_b),
                                 std::min(std::min(mu_c, mu_d), mu_e));
  rep.params["mu_cap"] = mu_cap;
  const double mu = pick_param(rep, ctx, "mu", 0.0, mu_cap);

  add_lhs(rep, "utt_L2L2", mu * (a_lb - tau) / 2.0, ctx.tn.utt_L2L2, 2.0);
  add_lhs(rep, "gv_LinfL2", mu * (b * (1.0 - d) / 4.0 - sig),
          ctx.tn.gv_LinfL2, 2.0);
  add_lhs(rep, "v_LinfL2",
          mu * ((a_lb + mu * beta) / 4.0 - eps0 * (mu + 1.0)),
          ctx.tn.v_LinfL2, 2.0);
  add_lhs(rep, "gv_L2L2",
          b * (1.0 - d) / 2.0 - C2 * bhat -
              mu * (C4 * btl * btl / (2.0 * tau) + c2),
          ctx.tn.gv_L2L2, 2.0);
  add_lhs(rep, "v_LinfGh", mu * alpha / 4.0, ctx.tn.v_LinfGh, 2.0);
  add_lhs(rep, "gv_Lq1Lq1", b * d / 2.0 - mu * (eps1 + 1.0),
          ctx.tn.gv_Lq1Lq1, q + 1.0);
  add_lhs(rep, "v_L2L2",
          beta / 2.0 - C2 * bhat - mu * C4 * btl * btl / (2.0 * tau),
          ctx.tn.v_L2L2, 2.0);
  add_lhs(rep, "gu_LinfL2", (c2 / 4.0) * (1.0 - mu * c2 / sig),
          ctx.tn.gu_LinfL2, 2.0);
  add_lhs(rep, "v_L2Gh", alpha / 2.0, ctx.tn.v_L2Gh, 2.0);
  add_lhs(rep, "gv_LinfLq1", mu * (b * d / (2.0 * (q + 1.0)) - eta),
          ctx.tn.gv_LinfLq1, q + 1.0);

  add_rhs(rep, "C_Gamma_g", 1.0, ctx.gn.c_gamma(q), 1.0);
  add_rhs(rep, "u1_H1", 1.0, ctx.dn.u1_H1, 2.0);
  add_rhs(rep, "gu0_L2", 1.0, ctx.dn.gu0_L2, 2.0);
  add_rhs(rep, "u1_W1q1", 1.0, ctx.dn.u1_W1q1, q + 1.0);
  add_rhs(rep, "u1_L2Gh", 1.0, ctx.dn.u1_L2Gh, 2.0);
  finalize_cbar(rep, ctx);
  return rep;
}

inline EnergyReport build_w1_gamma_est1(const EstimateContext& ctx) {
  EnergyReport rep;
  rep.id = "W1_gamma_est1";
  const double q = ctx.phys.q, p = (q + 1.0) / q;
  const double a_lb = ctx.cn.a_lb, a_ub = ctx.cn.a_ub;
  const double b = ctx.phys.b, d = ctx.phys.delta, c2 = ctx.phys.c2;
  const double gam = ctx.phys.gamma, alpha = ctx.phys.alpha;
  if (gam <= 0.0) mark_inconclusive(rep, "requires gamma > 0");
  if (!(q > 1.0)) mark_inconclusive(rep, "requires q > 1");
  const double r = q > 1.0 ? (q + 1.0) / (q - 1.0) : 2.0;

  const double eps0 =
      pick_param(rep, ctx, "eps0", 0.0, std::min(b * d, gam / 2.0));

  add_lhs(rep, "v_LinfL2", a_lb / 4.0, ctx.tn.v_LinfL2, 2.0);
  add_lhs(rep, "gu_LinfL2", c2 / 4.0, ctx.tn.gu_LinfL2, 2.0);
  add_lhs(rep, "gv_L2L2", b * (1.0 - d) / 2.0, ctx.tn.gv_L2L2, 2.0);
  add_lhs(rep, "gv_Lq1Lq1", (b * d - eps0) / 2.0, ctx.tn.gv_Lq1Lq1, q + 1.0);
  add_lhs(rep, "v_Lq1Lq1", gam / 2.0 - eps0, ctx.tn.v_Lq1Lq1, q + 1.0);
  add_lhs(rep, "v_L2Gh", alpha / 2.0, ctx.tn.v_L2Gh, 2.0);

  add_rhs(rep, "g_LpLp",
          young_constant(eps0 / 2.0, q + 1.0) * std::pow(ctx.ct.C1_tr, p),
          ctx.gn.LpLp, p);
  add_rhs(rep, "u1_L2", a_ub / 2.0, ctx.dn.u1_L2, 2.0);
  add_rhs(rep, "src_Lr", young_constant(eps0 / 2.0, (q + 1.0) / 2.0),
          ctx.cn.src_Lr, r);
  add_rhs(rep, "gu0_L2", c2 / 2.0, ctx.dn.gu0_L2, 2.0);
  finalize(rep, ctx.tol);
  return rep;
}

inline EnergyReport build_est2_gamma(const EstimateContext& ctx) {
  EnergyReport rep;
  rep.id = "W1lin_est2_gamma";
  const double q = ctx.phys.q, p = (q + 1.0) / q;
  const double a_lb = ctx.cn.a_lb;
  const double b = ctx.phys.b, d = ctx.phys.delta, c2 = ctx.phys.c2;
  const double gam = ctx.phys.gamma, alpha = ctx.phys.alpha;
  if (gam <= 0.0) mark_inconclusive(rep, "requires gamma > 0");
  if (!(q >= 3.0)) mark_inconclusive(rep, "requires q >= 3");
  const double r = q > 1.0 ? (q + 1.0) / (q - 1.0) : 2.0;

  const double eps0 =
      pick_param(rep, ctx, "eps0", 0.0, std::min(b * d, gam / 2.0));
  const double tau = pick_param(rep, ctx, "tau", 0.0, a_lb);
  const double sig = pick_param(rep, ctx, "sigma", 0.0, b * (1.0 - d) / 4.0);
  const double eta = pick_param(rep, ctx, "eta", 0.0,
                                std::min(b * d, gam) / (2.0 * (q + 1.0)));

  const double mu_a = eps0 > 0.0 ? b * d / eps0 - 1.0 : kInf;
  const double mu_b = eps0 > 0.0 ? gam / (2.0 * eps0) - 1.0 : kInf;
  const double mu_c = sig / c2;
  const double mu_d = b * (1.0 - d) / (2.0 * c2);
  const double mu_cap =
      std::min(std::min(mu_a, mu_b), std::min(mu_c, mu_d));
  rep.params["mu_cap"] = mu_cap;
  const double mu = pick_param(rep, ctx, "mu", 0.0, mu_cap);

  add_lhs(rep, "utt_L2L2", mu * (a_lb - tau) / 2.0, ctx.tn.utt_L2L2, 2.0);
  add_lhs(rep, "gv_LinfL2", mu * (b * (1.0 - d) / 4.0 - sig),
          ctx.tn.gv_LinfL2, 2.0);
  add_lhs(rep, "v_LinfL2", a_lb / 4.0, ctx.tn.v_LinfL2, 2.0);
  add_lhs(rep, "gu_LinfL2", (c2 / 4.0) * (1.0 - mu * c2 / sig),
          ctx.tn.gu_LinfL2, 2.0);
  add_lhs(rep, "v_LinfGh", mu * alpha / 4.0, ctx.tn.v_LinfGh, 2.0);
  add_lhs(rep, "gv_Lq1Lq1", b * d / 2.0 - (eps0 / 2.0) * (mu + 1.0),
          ctx.tn.gv_Lq1Lq1, q + 1.0);
  add_lhs(rep, "gv_L2L2", b * (1.0 - d) / 2.0 - mu * c2, ctx.tn.gv_L2L2,
          2.0);
  add_lhs(rep, "v_L2Gh", alpha / 2.0, ctx.tn.v_L2Gh, 2.0);
  add_lhs(rep, "v_Lq1Lq1", gam / 2.0 - eps0 * (mu + 1.0), ctx.tn.v_Lq1Lq1,
          q + 1.0);
  add_lhs(rep, "gv_LinfLq1", mu * (b * d / (2.0 * (q + 1.0)) - eta),
          ctx.tn.gv_LinfLq1, q + 1.0);
  add_lhs(rep, "v_LinfLq1", mu * (gam / (2.0 * (q + 1.0)) - eta),
          ctx.tn.v_LinfLq1, q + 1.0);

  add_rhs(rep, "g_LpLp", 1.0, ctx.gn.LpLp, p);
  add_rhs(rep, "gt_LpLp", 1.0, ctx.gn.gt_LpLp, p);
  add_rhs(rep, "g_LinfLp", 1.0, ctx.gn.LinfLp, p);
  add_rhs(rep, "src_Lp", 1.0, ctx.cn.src_Lp, p);
  add_rhs(rep, "f_H1_L2r", 1.0, ctx.cn.f_H1_L2r, 2.0 * r);
  add_rhs(rep, "u1_H1", 1.0, ctx.dn.u1_H1, 2.0);
  add_rhs(rep, "gu0_L2", 1.0, ctx.dn.gu0_L2, 2.0);
  add_rhs(rep, "u1_W1q1", 1.0, ctx.dn.u1_W1q1, q + 1.0);
  add_rhs(rep, "u1_L2Gh", 1.0, ctx.dn.u1_L2Gh, 2.0);
  finalize_cbar(rep, ctx);
  return rep;
}

inline EnergyReport build_est2_gamma2(const EstimateContext& ctx) {
  EnergyReport rep;
  rep.id = "W1lin_est2_gamma2";
  const double q = ctx.phys.q, p = (q + 1.0) / q;
  const double a_lb = ctx.cn.a_lb;
  const double b = ctx.phys.b, d = ctx.phys.delta, c2 = ctx.phys.c2;
  const double gam = ctx.phys.gamma, alpha = ctx.phys.alpha, T = ctx.T;
  const double C2 = ctx.ct.C_HL4 * ctx.ct.C_HL4, C4 = C2 * C2;
  const double bhat = ctx.cn.bhat, btl = ctx.cn.btilde;
  rep.params["bhat"] = bhat;
  rep.params["btilde"] = btl;
  if (gam <= 0.0) mark_inconclusive(rep, "requires gamma > 0");

  const double eps0 =
      pick_param(rep, ctx, "eps0", 0.0, std::min(b * d, gam) / 2.0);
  const double tau = pick_param(rep, ctx, "tau", 0.0, a_lb);
  const double sig = pick_param(rep, ctx, "sigma", 0.0, b * (1.0 - d) / 4.0);
  const double eta = pick_param(rep, ctx, "eta", 0.0,
                                std::min(b * d, gam) / (2.0 * (q + 1.0)));

  const double mu_a =
      btl > 0.0 && T > 0.0
          ? (a_lb / 4.0 - C2 * bhat * T) / (C4 * btl * btl * T / (2.0 * tau))
          : kInf;
  const double mu_b = (b * (1.0 - d) / 2.0 - C2 * bhat) /
                      (C4 * btl * btl / (2.0 * tau) + c2);
  const double mu_c =
      eps0 > 0.0 ? std::min(b * d, gam) / (2.0 * eps0) - 1.0 : kInf;
  const double mu_d = sig / c2;
  const double mu_cap =
      std::min(std::min(mu_a, mu_b), std::min(mu_c, mu_d));
  rep.params["mu_cap"] = mu_cap;
  const double mu = pick_param(rep, ctx, "mu", 0.0, mu_cap);

  add_lhs(rep, "utt_L2L2", mu * (a_lb - tau) / 2.0, ctx.tn.utt_L2L2, 2.0);
  add_lhs(rep, "gv_LinfL2", mu * (b * (1.0 - d) / 4.0 - sig),
          ctx.tn.gv_LinfL2, 2.0);
  add_lhs(rep, "v_LinfL2",
          a_lb / 4.0 - C2 * bhat * T - mu * C4 * btl * btl * T / (2.0 * tau),
          ctx.tn.v_LinfL2, 2.0);
  add_lhs(rep, "gu_LinfL2", (c2 / 4.0) * (1.0 - mu * c2 / sig),
          ctx.tn.gu_LinfL2, 2.0);
  add_lhs(rep, "v_LinfGh", mu * alpha / 4.0, ctx.tn.v_LinfGh, 2.0);
  add_lhs(rep, "gv_L2L2",
          b * (1.0 - d) / 2.0 - C2 * bhat -
              mu * (C4 * btl * btl / (2.0 * tau) + c2),
          ctx.tn.gv_L2L2, 2.0);
  add_lhs(rep, "gv_Lq1Lq1", b * d / 2.0 - eps0 * (mu + 1.0),
          ctx.tn.gv_Lq1Lq1, q + 1.0);
  add_lhs(rep, "v_Lq1Lq1", gam / 2.0 - eps0 * (mu + 1.0), ctx.tn.v_Lq1Lq1,
          q + 1.0);
  add_lhs(rep, "v_L2Gh", alpha / 2.0, ctx.tn.v_L2Gh, 2.0);
  add_lhs(rep, "gv_LinfLq1", mu * (b * d / (2.0 * (q + 1.0)) - eta),
          ctx.tn.gv_LinfLq1, q + 1.0);
  add_lhs(rep, "v_LinfLq1", mu * (gam / (2.0 * (q + 1.0)) - eta),
          ctx.tn.v_LinfLq1, q + 1.0);

  add_rhs(rep, "g_LpLp", 1.0, ctx.gn.LpLp, p);
  add_rhs(rep, "gt_LpLp", 1.0, ctx.gn.gt_LpLp, p);
  add_rhs(rep, "g_LinfLp", 1.0, ctx.gn.LinfLp, p);
  add_rhs(rep, "u1_L2Gh", 1.0, ctx.dn.u1_L2Gh, 2.0);
  add_rhs(rep, "u1_H1", 1.0, ctx.dn.u1_H1, 2.0);
  add_rhs(rep, "gu0_L2", 1.0, ctx.dn.gu0_L2, 2.0);
  add_rhs(rep, "u1_W1q1", 1.0, ctx.dn.u1_W1q1, q + 1.0);
  finalize_cbar(rep, ctx);
  return rep;
}

inline EnergyReport build_w2_energyest(const EstimateContext& ctx) {
  EnergyReport rep;
  rep.id = "W2_energyest";
  const double q = ctx.phys.q;
  const double a_lb = ctx.cn.a_lb;
  const double b = ctx.phys.b, c2 = ctx.phys.c2, eps = ctx.phys.eps;
  const double alpha = ctx.phys.alpha, T = ctx.T;
  const double C2 = ctx.ct.C_HL4 * ctx.ct.C_HL4;
  const double tr2 = ctx.ct.C2_tr * ctx.ct.C2_tr;
  const double bhat = ctx.cn.bhat;
  rep.params["bhat"] = bhat;
  rep.params["bhat_cap"] =
      std::min(T > 0.0 ? a_lb / (4.0 * T * C2) : kInf, b / (2.0 * C2));

  const double cap_b = b / 2.0 - bhat * C2;
  const double cap_a = a_lb / 4.0 - bhat * C2 * T;
  const double tau_hi =
      tr2 > 0.0 ? std::min(cap_b / tr2, cap_a / tr2) : kInf;
  const double tau = pick_param(rep, ctx, "tau", 0.0, tau_hi);

  add_lhs(rep, "v_LinfL2", a_lb / 4.0 - tr2 * tau - T * bhat * C2,
          ctx.tn.v_LinfL2, 2.0);
  add_lhs(rep, "gu_LinfL2", c2 / 4.0, ctx.tn.gu_LinfL2, 2.0);
  add_lhs(rep, "gv_L2L2", b / 2.0 - tr2 * tau - bhat * C2, ctx.tn.gv_L2L2,
          2.0);
  add_lhs(rep, "gu_LinfLq1", c2 * eps / (2.0 * (q + 1.0)),
          ctx.tn.gu_LinfLq1, q + 1.0);
  add_lhs(rep, "v_L2Gh", alpha / 2.0, ctx.tn.v_L2Gh, 2.0);

  add_rhs(rep, "g_L1L2", 1.0 / (4.0 * tau), ctx.gn.L1L2, 2.0);
  add_rhs(rep, "g_L2L2", 1.0 / (4.0 * tau), ctx.gn.L2L2, 2.0);
  add_rhs(rep, "u1_L2", a_lb / 2.0, ctx.dn.u1_L2, 2.0);
  add_rhs(rep, "gu0_L2", c2 / 2.0, ctx.dn.gu0_L2, 2.0);
  add_rhs(rep, "gu0_Lq1", c2 * eps / (q + 1.0), ctx.dn.gu0_Lq1, q + 1.0);
  finalize(rep, ctx.tol);
  return rep;
}

inline EnergyReport build_w2_energyest_1(const EstimateContext& ctx) {
  EnergyReport rep;
  rep.id = "W2_energyest_1";
  const double q = ctx.phys.q;
  const double a_lb = ctx.cn.a_lb;
  const double b = ctx.phys.b, c2 = ctx.phys.c2, eps = ctx.phys.eps;
  const double beta = ctx.phys.beta, alpha = ctx.phys.alpha;
  const double C2 = ctx.ct.C_HL4 * ctx.ct.C_HL4;
  const double tr2 = ctx.ct.C2_tr * ctx.ct.C2_tr;
  const double bhat = ctx.cn.bhat;
  rep.params["bhat"] = bhat;
  rep.params["bhat_cap"] = std::min(b, beta) / (2.0 * C2);
  if (beta <= 0.0) mark_inconclusive(rep, "requires beta > 0");

  const double cap_b = b / 2.0 - bhat * C2;
  const double cap_beta = beta / 2.0 - bhat * C2;
  const double tau_hi =
      tr2 > 0.0 ? std::min(cap_b / tr2, cap_beta / tr2) : kInf;
  const double tau = pick_param(rep, ctx, "tau", 0.0, tau_hi);

  add_lhs(rep, "v_LinfL2", a_lb / 4.0, ctx.tn.v_LinfL2, 2.0);
  add_lhs(rep, "gv_L2L2", b / 2.0 - tr2 * tau - bhat * C2, ctx.tn.gv_L2L2,
          2.0);
  add_lhs(rep, "v_L2L2", beta / 2.0 - tr2 * tau - bhat * C2, ctx.tn.v_L2L2,
          2.0);
  add_lhs(rep, "gu_LinfL2", c2 / 4.0, ctx.tn.gu_LinfL2, 2.0);
  add_lhs(rep, "gu_LinfLq1", c2 * eps / (2.0 * (q + 1.0)),
          ctx.tn.gu_LinfLq1, q + 1.0);
  add_lhs(rep, "v_L2Gh", alpha / 2.0, ctx.tn.v_L2Gh, 2.0);

  add_rhs(rep, "g_L2L2", 1.0 / (4.0 * tau), ctx.gn.L2L2, 2.0);
  add_rhs(rep, "u1_L2", a_lb / 2.0, ctx.dn.u1_L2, 2.0);
  add_rhs(rep, "gu0_L2", c2 / 2.0, ctx.dn.gu0_L2, 2.0);
  add_rhs(rep, "gu0_Lq1", c2 * eps / (q + 1.0), ctx.dn.gu0_Lq1, q + 1.0);
  finalize(rep, ctx.tol);
  return rep;
}

inline EnergyReport build_w3_lower(const EstimateContext& ctx) {
  EnergyReport rep;
  rep.id = "W3lin_lower";
  const double q = ctx.phys.q, p = (q + 1.0) / q;
  const double b = ctx.phys.b, d = ctx.phys.delta, alpha = ctx.phys.alpha;
  const double T = ctx.T;
  const double aL2Li = ctx.cn.a_L2Linf, gaL2L2 = ctx.cn.ga_L2L2;

  if (q > 1.0) {
    const double r = (q + 1.0) / (q - 1.0);
    const double bhat = b * (1.0 - d) / 2.0 - (T / 2.0) * gaL2L2 -
                        (std::sqrt(T) + 0.5) * aL2Li;
    const double cwc2 = ctx.ct.C_W * ctx.ct.C2_omega;
    const double btl = 0.25 - 2.0 * T * cwc2 * cwc2 * gaL2L2;
    rep.params["bhat"] = bhat;
    rep.params["btilde"] = btl;
    if (bhat <= 0.0) mark_inconclusive(rep, "bhat <= 0");

    const double eps0 = pick_param(rep, ctx, "eps0", 0.0, btl);
    const double eps1 = pick_param(rep, ctx, "eps1", 0.0, b * d / 2.0);

    add_lhs(rep, "gv_L2L2", bhat, ctx.tn.gv_L2L2, 2.0);
    add_lhs(rep, "v_LinfL2", btl - eps0, ctx.tn.v_LinfL2, 2.0);
    add_lhs(rep, "gv_Lq1Lq1", b * d / 2.0 - eps1, ctx.tn.gv_Lq1Lq1, q + 1.0);
    add_lhs(rep, "v_L2Gh", alpha / 2.0, ctx.tn.v_L2Gh, 2.0);

    add_rhs(rep, "gu0_L2", (aL2Li + gaL2L2) / 2.0, ctx.dn.gu0_L2, 2.0);
    add_rhs(rep, "u1_L2", 0.5, ctx.dn.u1_L2, 2.0);
    const double cw1p = ctx.ct.C_W * (1.0 + ctx.ct.C_P);
    add_rhs(rep, "ga_L2L2", young_constant(eps1 / 2.0, (q + 1.0) / 2.0) * T,
            cw1p * cw1p * gaL2L2, r);
    add_rhs(rep, "g_LpLp",
            young_constant(eps1 / 2.0, q + 1.0) * std::pow(cw1p, p),
            ctx.gn.LpLp, p);
    const double ctr2 = ctx.ct.C1_tr * ctx.ct.C2_omega;
    add_rhs(rep, "g_L1L2", ctr2 * ctr2 / (4.0 * eps0), ctx.gn.L1L2, 2.0);
  } else {
    const double ch2 = ctx.ct.C_HLinf * ctx.ct.C_HLinf;
    const double bhat = b / 2.0 - (T / 2.0 + ch2) * gaL2L2 -
                        (std::sqrt(T) + 0.5) * aL2Li;
    const double btl = 0.25 - T * ch2 * gaL2L2;
    rep.params["bhat"] = bhat;
    rep.params["btilde"] = btl;

    const double eps0 =
        pick_param(rep, ctx, "eps0", 0.0, std::min(bhat, btl));

    add_lhs(rep, "gv_L2L2", bhat - eps0, ctx.tn.gv_L2L2, 2.0);
    add_lhs(rep, "v_LinfL2", btl - eps0, ctx.tn.v_LinfL2, 2.0);
    add_lhs(rep, "v_L2Gh", alpha / 2.0, ctx.tn.v_L2Gh, 2.0);

    add_rhs(rep, "gu0_L2", (aL2Li + gaL2L2) / 2.0, ctx.dn.gu0_L2, 2.0);
    add_rhs(rep, "u1_L2", 0.5, ctx.dn.u1_L2, 2.0);
    const double tr2 = ctx.ct.C2_tr * ctx.ct.C2_tr;
    add_rhs(rep, "g_L1L2", tr2 / (4.0 * eps0), ctx.gn.L1L2, 2.0);
    add_rhs(rep, "g_L2L2", tr2 / (4.0 * eps0), ctx.gn.L2L2, 2.0);
  }
  finalize(rep, ctx.tol);
  return rep;
}

inline EnergyReport build_w3_higher(const EstimateContext& ctx) {
  EnergyReport rep;
  rep.id = "W3lin_higher";
  const double q = ctx.phys.q;
  const double b = ctx.phys.b, d = ctx.phys.delta, alpha = ctx.phys.alpha;
  const double T = ctx.T;
  if (!(q >= 3.0)) mark_inconclusive(rep, "requires q >= 3");
  const double r = q > 1.0 ? (q + 1.0) / (q - 1.0) : 2.0;

  const double a_lb = ctx.cn.a_lb, aLiLi = ctx.cn.a_LinfLinf;
  const double gaL2L4 = ctx.cn.ga_L2L4;
  const double at43 = ctx.cn.at_L43L2, at22 = ctx.cn.at_L2L2;
  const double cl = ctx.ct.C_Lq1L4 * ctx.ct.C2_omega;
  const double atil = a_lb / 4.0 - 0.5 * gaL2L4;
  const double btl = 0.25 - gaL2L4 * T * cl * cl;
  rep.params["atilde"] = atil;
  rep.params["btilde"] = btl;
  if (atil <= 0.0) mark_inconclusive(rep, "atilde <= 0");
  if (btl <= 0.0) mark_inconclusive(rep, "btilde <= 0");

  const double tau_hi = gaL2L4 > 0.0 ? 0.5 / gaL2L4 : kInf;
  const double tau = pick_param(rep, ctx, "tau", 0.0, tau_hi);
  const double eps0 = pick_param(rep, ctx, "eps0", 0.0, btl);
  const double eps1 = pick_param(rep, ctx, "eps1", 0.0, b * d / 2.0);

  const double mu_a = eps0 > 0.0 ? btl / eps0 - 1.0 : kInf;
  const double mu_b = eps1 > 0.0 ? b * d / (2.0 * eps1) - 1.0 : kInf;
  const double mu_c = aLiLi > 0.0 ? b * (1.0 - d) / (2.0 * aLiLi) : kInf;
  const double mu_d = aLiLi > 0.0
                          ? atil * b * (1.0 - d) / (2.0 * aLiLi * aLiLi)
                          : kInf;
  const double mu_cap = std::min(std::min(mu_a, mu_b), std::min(mu_c, mu_d));
  rep.params["mu_cap"] = mu_cap;
  const double mu = pick_param(rep, ctx, "mu", 0.0, mu_cap);
  const double eta_hi = mu * b * d / (2.0 * (q + 1.0)) / (2.0 * mu + 1.0);
  const double eta = pick_param(rep, ctx, "eta", 0.0, eta_hi);

  add_lhs(rep, "utt_L2L2", mu * (0.5 - tau * gaL2L4), ctx.tn.utt_L2L2, 2.0);
  add_lhs(rep, "gv_LinfL2", mu * b * (1.0 - d) / 8.0, ctx.tn.gv_LinfL2, 2.0);
  add_lhs(rep, "v_LinfL2", btl - eps0 * (mu + 1.0), ctx.tn.v_LinfL2, 2.0);
  add_lhs(rep, "gv_L2L2", b * (1.0 - d) / 2.0 - mu * aLiLi, ctx.tn.gv_L2L2,
          2.0);
  add_lhs(rep, "gv_LinfLq1",
          mu * b * d / (2.0 * (q + 1.0)) - eta * (2.0 * mu + 1.0),
          ctx.tn.gv_LinfLq1, q + 1.0);
  add_lhs(rep, "v_LinfGh", mu * alpha / 4.0, ctx.tn.v_LinfGh, 2.0);
  add_lhs(rep, "gu_LinfL2",
          atil - mu * 2.0 / (b * (1.0 - d)) * aLiLi * aLiLi,
          ctx.tn.gu_LinfL2, 2.0);
  add_lhs(rep, "gv_Lq1Lq1", b * d / 2.0 - eps1 * (mu + 1.0),
          ctx.tn.gv_Lq1Lq1, q + 1.0);
  add_lhs(rep, "v_L2Gh", alpha / 2.0, ctx.tn.v_L2Gh, 2.0);

  add_rhs(rep, "T_ga_L2L4", 1.0, T * gaL2L4, r);
  add_rhs(rep, "a_gu0_L2", aLiLi, ctx.dn.gu0_L2, 2.0);
  add_rhs(rep, "at_ga_gu0_L4", at43 + gaL2L4, ctx.dn.gu0_L4, 2.0);
  add_rhs(rep, "a_gu0_gu1", aLiLi,
          ctx.dn.gu0_L2 * ctx.dn.gu0_L2 + ctx.dn.gu1_L2 * ctx.dn.gu0_L2,
          1.0);
  add_rhs(rep, "at_L43L2", 1.0,
          (0.5 + std::pow(T, 0.75)) * std::sqrt(T) * at43, r);
  add_rhs(rep, "T2_ga_L2L4", 1.0, T * T * gaL2L4, r);
  add_rhs(rep, "T52_at_L2L2", 1.0, std::pow(T, 2.5) * at22, r);
  add_rhs(rep, "at_gu0_L4", at22 * std::sqrt(T), ctx.dn.gu0_L4, 2.0);
  add_rhs(rep, "u1_H1", 1.0, ctx.dn.u1_H1, 2.0);
  add_rhs(rep, "u1_W1q1", 1.0, ctx.dn.u1_W1q1, q + 1.0);
  add_rhs(rep, "u1_L2Gh", 1.0, ctx.dn.u1_L2Gh, 2.0);
  add_rhs(rep, "C_Gamma_g", 1.0, ctx.gn.c_gamma(q), 1.0);
  finalize_cbar(rep, ctx);
  return rep;
}

inline EnergyReport build_w3_lower_gamma(const EstimateContext& ctx) {
  EnergyReport rep;
  rep.id = "W3lin_lower_gamma";
  const double q = ctx.phys.q, p = (q + 1.0) / q;
  const double b = ctx.phys.b, d = ctx.phys.delta, alpha = ctx.phys.alpha;
  const double gam = ctx.phys.gamma, T = ctx.T;
  const double aL2Li = ctx.cn.a_L2Linf, gaL2L2 = ctx.cn.ga_L2L2;
  if (gam <= 0.0) mark_inconclusive(rep, "requires gamma > 0");

  if (q > 1.0) {
    const double r = (q + 1.0) / (q - 1.0);
    const double bhat = b * (1.0 - d) / 2.0 - (T / 2.0) * gaL2L2 -
                        (std::sqrt(T) + 0.5) * aL2Li;
    rep.params["bhat"] = bhat;
    if (bhat <= 0.0) mark_inconclusive(rep, "bhat <= 0");

    const double eps0 =
        pick_param(rep, ctx, "eps0", 0.0, 0.5 * std::min(b * d, gam));

    add_lhs(rep, "gv_L2L2", bhat, ctx.tn.gv_L2L2, 2.0);
    add_lhs(rep, "v_LinfL2", 0.25, ctx.tn.v_LinfL2, 2.0);
    add_lhs(rep, "v_L2Gh", alpha / 2.0, ctx.tn.v_L2Gh, 2.0);
    add_lhs(rep, "gv_Lq1Lq1", b * d / 2.0 - eps0, ctx.tn.gv_Lq1Lq1, q + 1.0);
    add_lhs(rep, "v_Lq1Lq1", gam / 2.0 - eps0, ctx.tn.v_Lq1Lq1, q + 1.0);

    add_rhs(rep, "gu0_L2", (aL2Li + gaL2L2) / 2.0, ctx.dn.gu0_L2, 2.0);
    add_rhs(rep, "u1_L2", 0.5, ctx.dn.u1_L2, 2.0);
    const double cw2 = ctx.ct.C_W * ctx.ct.C_W;
    add_rhs(rep, "ga_L2L2", young_constant(eps0 / 2.0, (q + 1.0) / 2.0) * T,
            cw2 * gaL2L2, r);
    add_rhs(rep, "g_LpLp",
            young_constant(eps0 / 2.0, q + 1.0) * std::pow(ctx.ct.C1_tr, p),
            ctx.gn.LpLp, p);
  } else {
    const double ch2 = ctx.ct.C_HLinf * ctx.ct.C_HLinf;
    const double bhat = b / 2.0 - (T / 2.0 + ch2) * gaL2L2 -
                        (std::sqrt(T) + 0.5) * aL2Li;
    const double btl = gam / 2.0 - ch2 * gaL2L2;
    rep.params["bhat"] = bhat;
    rep.params["btilde"] = btl;

    const double eps0 =
        pick_param(rep, ctx, "eps0", 0.0, std::min(bhat, btl));

    add_lhs(rep, "gv_L2L2", bhat - eps0, ctx.tn.gv_L2L2, 2.0);
    add_lhs(rep, "v_LinfL2", 0.25, ctx.tn.v_LinfL2, 2.0);
    add_lhs(rep, "v_L2L2", btl - eps0, ctx.tn.v_L2L2, 2.0);
    add_lhs(rep, "v_L2Gh", alpha / 2.0, ctx.tn.v_L2Gh, 2.0);

    add_rhs(rep, "gu0_L2", (aL2Li + gaL2L2) / 2.0, ctx.dn.gu0_L2, 2.0);
    add_rhs(rep, "u1_L2", 0.5, ctx.dn.u1_L2, 2.0);
    const double tr2 = ctx.ct.C2_tr * ctx.ct.C2_tr;
    add_rhs(rep, "g_L2L2", tr2 / (4.0 * eps0), ctx.gn.L2L2, 2.0);
  }
  finalize(rep, ctx.tol);
  return rep;
}

inline EnergyReport build_w3_higher_gamma(const EstimateContext& ctx) {
  EnergyReport rep;
  rep.id = "W3lin_higher_gamma";
  const double q = ctx.phys.q, p = (q + 1.0) / q;
  const double b = ctx.phys.b, d = ctx.phys.delta, alpha = ctx.phys.alpha;
  const double gam = ctx.phys.gamma, T = ctx.T;
  if (gam <= 0.0) mark_inconclusive(rep, "requires gamma > 0");
  if (!(q >= 3.0)) mark_inconclusive(rep, "requires q >= 3");
  const double r = q > 1.0 ? (q + 1.0) / (q - 1.0) : 2.0;

  const double a_lb = ctx.cn.a_lb, aLiLi = ctx.cn.a_LinfLinf;
  const double gaL2L4 = ctx.cn.ga_L2L4;
  const double at43 = ctx.cn.at_L43L2, at22 = ctx.cn.at_L2L2;
  const double atil = a_lb / 4.0 - 0.5 * gaL2L4;
  rep.params["atilde"] = atil;
  if (atil <= 0.0) mark_inconclusive(rep, "atilde <= 0");

  const double tau_hi = gaL2L4 > 0.0 ? 0.5 / gaL2L4 : kInf;
  const double tau = pick_param(rep, ctx, "tau", 0.0, tau_hi);
  const double eps1 = pick_param(rep, ctx, "eps1", 0.0, b * d / 2.0);

  const double mu_a = eps1 > 0.0 ? b * d / (2.0 * eps1) - 1.0 : kInf;
  const double mu_b = gam / (2.0 * (eps1 + 1.0));
  const double mu_c = aLiLi > 0.0 ? b * (1.0 - d) / (2.0 * aLiLi) : kInf;
  const double mu_d = aLiLi > 0.0
                          ? atil * b * (1.0 - d) / (2.0 * aLiLi * aLiLi)
                          : kInf;
  const double mu_cap = std::min(std::min(mu_a, mu_b), std::min(mu_c, mu_d));
  rep.params["mu_cap"] = mu_cap;
  const double mu = pick_param(rep, ctx, "mu", 0.0, mu_cap);
  const double eta_hi =
      mu * std::min(b * d, gam) / (2.0 * (q + 1.0)) / (2.0 * mu + 1.0);
  const double eta = pick_param(rep, ctx, "eta", 0.0, eta_hi);

  add_lhs(rep, "utt_L2L2", mu * (0.5 - tau * gaL2L4), ctx.tn.utt_L2L2, 2.0);
  add_lhs(rep, "v_LinfL2", 0.25, ctx.tn.v_LinfL2, 2.0);
  add_lhs(rep, "gv_Lq1Lq1", b * d / 2.0 - eps1 * (mu + 1.0),
          ctx.tn.gv_Lq1Lq1, q + 1.0);
  add_lhs(rep, "gv_L2L2", b * (1.0 - d) / 2.0 - mu * aLiLi, ctx.tn.gv_L2L2,
          2.0);
  add_lhs(rep, "gv_LinfLq1",
          mu * b * d / (2.0 * (q + 1.0)) - eta * (2.0 * mu + 1.0),
          ctx.tn.gv_LinfLq1, q + 1.0);
  add_lhs(rep, "v_L2Gh", alpha / 2.0, ctx.tn.v_L2Gh, 2.0);
  add_lhs(rep, "gu_LinfL2",
          atil - mu * 2.0 / (b * (1.0 - d)) * aLiLi * aLiLi,
          ctx.tn.gu_LinfL2, 2.0);
  add_lhs(rep, "v_Lq1Lq1", gam / 2.0 - mu * (eps1 + 1.0), ctx.tn.v_Lq1Lq1,
          q + 1.0);
  add_lhs(rep, "gv_LinfL2", mu * b * (1.0 - d) / 8.0, ctx.tn.gv_LinfL2, 2.0);
  add_lhs(rep, "v_LinfLq1",
          mu * gam / (2.0 * (q + 1.0)) - eta * (2.0 * mu + 1.0),
          ctx.tn.v_LinfLq1, q + 1.0);
  add_lhs(rep, "v_LinfGh", mu * alpha / 2.0, ctx.tn.v_LinfGh, 2.0);

  add_rhs(rep, "T_ga_L2L4", 1.0, T * gaL2L4, r);
  add_rhs(rep, "a_gu0_L2", aLiLi, ctx.dn.gu0_L2, 2.0);
  add_rhs(rep, "at_ga_gu0_L4", at43 + gaL2L4, ctx.dn.gu0_L4, 2.0);
  add_rhs(rep, "a_gu0_gu1", aLiLi,
          ctx.dn.gu0_L2 * ctx.dn.gu0_L2 + ctx.dn.gu1_L2 * ctx.dn.gu0_L2,
          1.0);
  add_rhs(rep, "at_L43L2", 1.0,
          (0.5 + std::pow(T, 0.75)) * std::sqrt(T) * at43, r);
  add_rhs(rep, "u1_H1", 1.0, ctx.dn.u1_H1, 2.0);
  add_rhs(rep, "u1_W1q1", 1.0, ctx.dn.u1_W1q1, q + 1.0);
  add_rhs(rep, "T2_ga_L2L4", 1.0, T * T * gaL2L4, r);
  add_rhs(rep, "T52_at_L2L2", 1.0, std::pow(T, 2.5) * at22, r);
  add_rhs(rep, "u1_L2Gh", 1.0, ctx.dn.u1_L2Gh, 2.0);
  add_rhs(rep, "g_LpLp", 1.0, ctx.gn.LpLp, p);
  add_rhs(rep, "gt_LpLp", 1.0, ctx.gn.gt_LpLp, p);
  add_rhs(rep, "g_LinfLp", 1.0, ctx.gn.LinfLp, p);
  finalize_cbar(rep, ctx);
  return rep;
}

}  // namespace detail

inline EnergyReport energy_report(const EstimateContext& ctx,
                                  const std::string& id) {
  if (id == "est1") return detail::build_est1(ctx);
  if (id == "est2") return detail::build_est2(ctx);
  if (id == "W1_beta_est1") return detail::build_w1_beta_est1(ctx);
  if (id == "W1lin_est2_beta") return detail::build_est2_beta(ctx);
  if (id == "W1_gamma_est1") return detail::build_w1_gamma_est1(ctx);
  if (id == "W1lin_est2_gamma") return detail::build_est2_gamma(ctx);
  if (id == "W1lin_est2_gamma2") return detail::build_est2_gamma2(ctx);
  if (id == "W2_energyest") return detail::build_w2_energyest(ctx);
  if (id == "W2_energyest_1") return detail::build_w2_energyest_1(ctx);
  if (id == "W3lin_lower") return detail::build_w3_lower(ctx);
  if (id == "W3lin_higher") return detail::build_w3_higher(ctx);
  if (id == "W3lin_lower_gamma") return detail::build_w3_lower_gamma(ctx);
  if (id == "W3lin_higher_gamma") return detail::build_w3_higher_gamma(ctx);
  if (id == "coupled_lower") return detail::build_coupled_lower(ctx);
  throw std::invalid_argument("unknown estimate id: " + id);
}

// Coefficient ranges entering the coupled estimate (stiffness is 1/rho).
inline void populate_coupled_bounds(EstimateContext& ctx, const Mesh& mesh,
                                    const CoefficientFields& f,
                                    const PhysicalParams& params) {
  if (f.active) {
    ctx.b_lb = f.b.minCoeff();
    ctx.delta_lb = f.delta.minCoeff();
    ctx.delta_ub = f.delta.maxCoeff();
    ctx.c2_lb = 1.0 / f.rho.maxCoeff();
    ctx.c2_ub = 1.0 / f.rho.minCoeff();
    double alb = std::numeric_limits<double>::max();
    bool any = false;
    for (size_t i = 0; i < mesh.facets.size(); ++i)
      if (mesh.facets[i].tag == BoundaryTag::GammaHatAbsorbing) {
        alb = std::min(alb, f.alpha(Eigen::Index(i)));
        any = true;
      }
    ctx.alpha_lb = any ? alb : 0.0;
  } else {
    ctx.b_lb = params.b;
    ctx.delta_lb = ctx.delta_ub = params.delta;
    ctx.c2_lb = ctx.c2_ub = params.c2;
    ctx.alpha_lb = params.alpha;
  }
}

}  // namespace westfem
