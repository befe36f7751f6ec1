#pragma once

// Discrete functional-analytic constants over the P1 space on a given mesh.
// Quadratic cases (q = 1 and the H1 trace) are exact suprema from dense
// generalized eigenproblems; the L^{q+1} cases use projected multi-start
// gradient ascent and report the best witness ratio found, which is a
// certified lower bound on the discrete supremum.  Every evaluated ratio is
// attained by a concrete P1 function.
//
//   C_P:      |phi - mean phi|_{q+1}        <= C_P  |grad phi|_{q+1}
//   C_HL4:    |phi|_{L4}                    <= C    |phi|_{H1}
//   C_W:      |phi|_{Linf}                  <= C_W  |phi|_{W^{1,q+1}}   (q+1 > d)
//   C1_tr:    |phi|_{L^{q+1}(Gamma)}        <= C1tr |phi|_{W^{1,q+1}}
//   C2_tr:    |phi|_{L2(Gamma)}             <= C2tr |phi|_{H1}
//   C_Lq1L4:  |phi|_{L4} <= |Omega|^{(q-3)/(4(q+1))} |phi|_{L^{q+1}}    (q >= 3)

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "westfem/assembly.hpp"
#include "westfem/mesh.hpp"
#include "westfem/norms.hpp"

namespace westfem {

// Weighted Young inequality a b <= eps a^s + C(eps, s) b^{s/(s-1)}.
inline double young_constant(double eps, double s) {
  return (s - 1.0) * std::pow(s, -s / (s - 1.0)) * std::pow(eps, -1.0 / (s - 1.0));
}

// The constant as it circulates in print, with both exponent signs flipped.
// At s = 2 it reads 4 eps instead of 1/(4 eps).
inline double young_constant_printed(double eps, double s) {
  return (s - 1.0) * std::pow(s, s / (s - 1.0)) * std::pow(eps, -1.0 / (1.0 - s));
}

// Equality holds at a = (b / (s eps))^{1/(s-1)}.
inline double young_sharp_a(double b, double eps, double s) {
  return std::pow(b / (s * eps), 1.0 / (s - 1.0));
}

struct AscentOptions {
  int iters = 150;
  double step0 = 0.5;
  double fd_step = 1e-6;
  std::uint64_t seed = 20240915;
  int random_starts = 2;
};

namespace detail {

// Maximize ratio(phi) over P1 coefficient vectors by normalized gradient
// ascent with backtracking; returns the best ratio over all evaluations.
template <class RatioFn, class ProjFn>
double ascend_ratio(const std::vector<Eigen::VectorXd>& seeds, RatioFn ratio,
                    ProjFn project, const AscentOptions& opts) {
  double best = 0.0;
  for (const auto& seed : seeds) {
    Eigen::VectorXd phi = seed;
    project(phi);
    if (phi.norm() == 0.0) continue;
    phi /= phi.norm();
    double r = ratio(phi);
    if (!(r > 0.0) || !std::isfinite(r)) continue;
    best = std::max(best, r);

    double step = opts.step0;
    Eigen::VectorXd grad(phi.size());
    for (int it = 0; it < opts.iters; ++it) {
      for (int i = 0; i < phi.size(); ++i) {
        Eigen::VectorXd p = phi;
        p(i) += opts.fd_step;
        const double rp = ratio(p);
        p(i) = phi(i) - opts.fd_step;
        const double rm = ratio(p);
        grad(i) = (rp - rm) / (2.0 * opts.fd_step);
      }
      const double gn = grad.norm();
      if (gn == 0.0 || !std::isfinite(gn)) break;
      Eigen::VectorXd cand = phi + (step / gn) * grad;
      project(cand);
      if (cand.norm() == 0.0) break;
      cand /= cand.norm();
      const double rc = ratio(cand);
      if (std::isfinite(rc) && rc > r) {
        phi = cand;
        r = rc;
        best = std::max(best, r);
        step *= 1.3;
      } else {
        step *= 0.5;
        if (step < 1e-9) break;
      }
    }
  }
  return best;
}

inline std::vector<Eigen::VectorXd> standard_seeds(const Mesh& mesh,
                                                   const AscentOptions& opts,
                                                   bool include_constant,
                                                   bool include_boundary_hat) {
  std::vector<Eigen::VectorXd> seeds;
  const int n = mesh.n_nodes();
  if (include_constant) seeds.push_back(Eigen::VectorXd::Ones(n));

  // second Neumann eigenfunction: smooth, mean-zero, good generic start
  {
    Eigen::MatrixXd K = Eigen::MatrixXd(stiffness(mesh, 1.0).mat);
    Eigen::MatrixXd M = Eigen::MatrixXd(mass(mesh).mat);
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(K, M);
    if (es.info() == Eigen::Success && n >= 2)
      seeds.push_back(es.eigenvectors().col(1));
  }

  if (include_boundary_hat) {
    for (const auto& f : mesh.facets) {
      if (f.tag != BoundaryTag::GammaNeumann) continue;
      if (f.nodes[0] >= 0) {
        Eigen::VectorXd hat = Eigen::VectorXd::Zero(n);
        hat(f.nodes[0]) = 1.0;
        seeds.push_back(hat);
      }
      break;
    }
  }

  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> dist(0.0, 1.0);
  for (int s = 0; s < opts.random_starts; ++s) {
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v(i) = dist(rng);
    seeds.push_back(v);
  }
  return seeds;
}

inline double integral_mean(const Mesh& mesh, const Eigen::VectorXd& phi) {
  // exact: int phi = sum_e |E|/npe * sum_i phi_i for P1
  const int npe = mesh.nodes_per_element();
  double acc = 0.0;
  for (int e = 0; e < mesh.n_elements(); ++e) {
    double s = 0.0;
    for (int i = 0; i < npe; ++i) s += phi(mesh.elements(e, i));
    acc += mesh.volumes(e) * s / double(npe);
  }
  return acc / domain_measure(mesh);
}

}  // namespace detail

// q = 1 Poincare constant: 1/sqrt(lambda_2) of the Neumann pencil (K, M).
inline double poincare_eig(const Mesh& mesh) {
  Eigen::MatrixXd K = Eigen::MatrixXd(stiffness(mesh, 1.0).mat);
  Eigen::MatrixXd M = Eigen::MatrixXd(mass(mesh).mat);
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(K, M);
  const double lam2 = es.eigenvalues()(1);
  return 1.0 / std::sqrt(lam2);
}

inline double estimate_poincare(const Mesh& mesh, double q,
                                const AscentOptions& opts = {}) {
  if (q == 1.0) return poincare_eig(mesh);
  const double p = q + 1.0;
  auto ratio = [&](const Eigen::VectorXd& phi) {
    Eigen::VectorXd c =
        (phi.array() - detail::integral_mean(mesh, phi)).matrix();
    const double den = grad_lp(mesh, phi, p);
    if (den == 0.0) return 0.0;
    return lp_volume(mesh, c, p) / den;
  };
  auto project = [&](Eigen::VectorXd& phi) {
    phi.array() -= detail::integral_mean(mesh, phi);
  };
  return detail::ascend_ratio(detail::standard_seeds(mesh, opts, false, false),
                              ratio, project, opts);
}

inline double estimate_embedding_h1_l4(const Mesh& mesh,
                                       const AscentOptions& opts = {}) {
  auto ratio = [&](const Eigen::VectorXd& phi) {
    const double den = h1_norm(mesh, phi);
    if (den == 0.0) return 0.0;
    return lp_volume(mesh, phi, 4.0) / den;
  };
  auto project = [](Eigen::VectorXd&) {};
  return detail::ascend_ratio(detail::standard_seeds(mesh, opts, true, false),
                              ratio, project, opts);
}

// Linf embedding of W^{1,q+1}; requires q+1 > d for a mesh-robust value.
// The constant witness already gives |Omega|^{-1/(q+1)}.
inline double estimate_w_embedding(const Mesh& mesh, double q,
                                   const AscentOptions& opts = {}) {
  const double p = q + 1.0;
  auto ratio = [&](const Eigen::VectorXd& phi) {
    const double den = w1p_norm(mesh, phi, p);
    if (den == 0.0) return 0.0;
    return linf_volume(phi) / den;
  };
  auto project = [](Eigen::VectorXd&) {};
  return detail::ascend_ratio(detail::standard_seeds(mesh, opts, true, false),
                              ratio, project, opts);
}

// H1 trace constant over the Neumann part: sqrt(lambda_max) of the pencil
// (B_Gamma, M + K).  Exact discrete supremum.
inline double trace_eig(const Mesh& mesh) {
  if (!mesh.has_tag(BoundaryTag::GammaNeumann)) return 0.0;
  Eigen::MatrixXd B =
      Eigen::MatrixXd(boundary_mass(mesh, BoundaryTag::GammaNeumann).mat);
  Eigen::MatrixXd H = Eigen::MatrixXd(mass(mesh).mat) +
                      Eigen::MatrixXd(stiffness(mesh, 1.0).mat);
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(B, H);
  const double lmax = es.eigenvalues().maxCoeff();
  return lmax > 0.0 ? std::sqrt(lmax) : 0.0;
}

// H1 -> Linf embedding constant, exact over the P1 space: the sup of
// phi(x_i)/|phi|_{H1} is attained by the Riesz representer of evaluation at
// node i, giving sqrt of the largest diagonal entry of (M + K)^{-1}.
inline double h1_linf_eig(const Mesh& mesh) {
  Eigen::MatrixXd H = Eigen::MatrixXd(mass(mesh).mat) +
                      Eigen::MatrixXd(stiffness(mesh, 1.0).mat);
  Eigen::MatrixXd Hinv = H.ldlt().solve(
      Eigen::MatrixXd::Identity(H.rows(), H.cols()));
  return std::sqrt(Hinv.diagonal().maxCoeff());
}

inline double estimate_trace(const Mesh& mesh, double q,
                             const AscentOptions& opts = {}) {
  if (!mesh.has_tag(BoundaryTag::GammaNeumann)) return 0.0;
  if (q == 1.0) return trace_eig(mesh);
  const double p = q + 1.0;
  auto ratio = [&](const Eigen::VectorXd& phi) {
    const double den = w1p_norm(mesh, phi, p);
    if (den == 0.0) return 0.0;
    return boundary_lp(mesh, phi, p, BoundaryTag::GammaNeumann) / den;
  };
  auto project = [](Eigen::VectorXd&) {};
  return detail::ascend_ratio(detail::standard_seeds(mesh, opts, true, true),
                              ratio, project, opts);
}

struct ConstantsTable {
  double q = 1.0;
  double C_P = 0.0;      // Poincare, mean-free L^{q+1}
  double C_HL4 = 0.0;    // H1 -> L4, the embedding constant in the estimates
  double C_W = 0.0;      // W^{1,q+1} -> Linf
  double C1_tr = 0.0;    // W^{1,q+1} -> L^{q+1}(Gamma)
  double C2_tr = 0.0;    // H1 -> L2(Gamma)
  double C_Lq1L4 = 0.0;  // L^{q+1} -> L4, Holder closed form (q >= 3)
  double C_HLinf = 0.0;  // H1 -> Linf, exact on P1 (d = 1 continuum analogue)
  double C1_omega = 0.0, C2_omega = 0.0;
  std::string method_C_P, method_C_HL4, method_C_W, method_C1_tr,
      method_C2_tr, method_C_Lq1L4, method_C_HLinf;

  static ConstantsTable estimate(const Mesh& mesh, double q,
                                 const AscentOptions& opts = {}) {
    ConstantsTable t;
    t.q = q;
    const double measure = domain_measure(mesh);
    t.C1_omega = std::pow(measure, -q / (q + 1.0));
    t.C2_omega = std::pow(measure, -(q - 1.0) / (2.0 * (q + 1.0)));

    t.C_P = estimate_poincare(mesh, q, opts);
    t.method_C_P = q == 1.0 ? "generalized eigenproblem" : "projected ascent";
    t.C_HL4 = estimate_embedding_h1_l4(mesh, opts);
    t.method_C_HL4 = "projected ascent";
    t.C_W = estimate_w_embedding(mesh, q, opts);
    t.method_C_W = "projected ascent";
    t.C1_tr = estimate_trace(mesh, q, opts);
    t.method_C1_tr = q == 1.0 ? "generalized eigenproblem" : "projected ascent";
    t.C2_tr = trace_eig(mesh);
    t.method_C2_tr = "generalized eigenproblem";
    if (q >= 3.0) {
      t.C_Lq1L4 = std::pow(measure, (q - 3.0) / (4.0 * (q + 1.0)));
      t.method_C_Lq1L4 = "Holder closed form";
    }
    t.C_HLinf = h1_linf_eig(mesh);
    t.method_C_HLinf = "dual basis diagonal";
    return t;
  }

  // scenario files may pin individual constants by name
  void apply_override(const std::string& name, double value) {
    if (name == "C_P") { C_P = value; method_C_P = "pinned"; }
    else if (name == "C_HL4") { C_HL4 = value; method_C_HL4 = "pinned"; }
    else if (name == "C_W") { C_W = value; method_C_W = "pinned"; }
    else if (name == "C1_tr") { C1_tr = value; method_C1_tr = "pinned"; }
    else if (name == "C2_tr") { C2_tr = value; method_C2_tr = "pinned"; }
    else if (name == "C_Lq1L4") { C_Lq1L4 = value; method_C_Lq1L4 = "pinned"; }
    else if (name == "C_HLinf") { C_HLinf = value; method_C_HLinf = "pinned"; }
    else throw std::invalid_argument("unknown constant override: " + name);
  }
};

}  // namespace westfem
