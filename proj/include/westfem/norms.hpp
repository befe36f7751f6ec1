#pragma once

// Norm evaluation on P1 fields and trajectories.  Volume Lp norms use the
// degree-4 rules (exact for squares and fourth powers of P1 functions),
// gradient Lp norms are exact elementwise, boundary norms use the facet
// rules (counting measure at interval endpoints).  Time composition:
// L-infinity is the max over step samples, Lp in time is the trapezoid
// rule; quantities living at step midpoints (difference quotients) use
// plain midpoint sums.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "westfem/assembly.hpp"
#include "westfem/evolution.hpp"
#include "westfem/mesh.hpp"
#include "westfem/quadrature.hpp"

namespace westfem {

inline double lp_volume(const Mesh& mesh, const Eigen::VectorXd& w, double p,
                        const Eigen::VectorXd* cell_scale = nullptr) {
  std::vector<QuadPoint> qp;
  const int npe = mesh.nodes_per_element();
  double acc = 0.0;
  for (int e = 0; e < mesh.n_elements(); ++e) {
    const double s = cell_scale ? (*cell_scale)(e) : 1.0;
    element_rule(mesh, e, 3, qp);
    for (const auto& point : qp) {
      double val = 0.0;
      for (int i = 0; i < npe; ++i) val += point.phi[i] * w(mesh.elements(e, i));
      acc += point.w * std::pow(std::abs(s * val), p);
    }
  }
  return std::pow(acc, 1.0 / p);
}

inline double l1_volume(const Mesh& mesh, const Eigen::VectorXd& w) {
  return lp_volume(mesh, w, 1.0);
}

inline double l2_volume(const Mesh& mesh, const Eigen::VectorXd& w,
                        const Eigen::VectorXd* cell_scale = nullptr) {
  return lp_volume(mesh, w, 2.0, cell_scale);
}

inline double linf_volume(const Eigen::VectorXd& w) {
  return w.size() ? w.cwiseAbs().maxCoeff() : 0.0;
}

// |grad w| is constant per element, so these are exact.
inline double grad_lp(const Mesh& mesh, const Eigen::VectorXd& w, double p) {
  const int npe = mesh.nodes_per_element();
  double acc = 0.0;
  for (int e = 0; e < mesh.n_elements(); ++e) {
    Eigen::Vector2d g = Eigen::Vector2d::Zero();
    for (int i = 0; i < npe; ++i) g += w(mesh.elements(e, i)) * mesh.grad(e, i);
    acc += mesh.volumes(e) * std::pow(g.norm(), p);
  }
  return std::pow(acc, 1.0 / p);
}

inline double grad_l2(const Mesh& mesh, const Eigen::VectorXd& w) {
  return grad_lp(mesh, w, 2.0);
}

inline double grad_linf(const Mesh& mesh, const Eigen::VectorXd& w) {
  const int npe = mesh.nodes_per_element();
  double mx = 0.0;
  for (int e = 0; e < mesh.n_elements(); ++e) {
    Eigen::Vector2d g = Eigen::Vector2d::Zero();
    for (int i = 0; i < npe; ++i) g += w(mesh.elements(e, i)) * mesh.grad(e, i);
    mx = std::max(mx, g.norm());
  }
  return mx;
}

inline double h1_norm(const Mesh& mesh, const Eigen::VectorXd& w) {
  const double a = l2_volume(mesh, w), b = grad_l2(mesh, w);
  return std::sqrt(a * a + b * b);
}

// (|w|_p^p + |grad w|_p^p)^(1/p)
inline double w1p_norm(const Mesh& mesh, const Eigen::VectorXd& w, double p) {
  return std::pow(std::pow(lp_volume(mesh, w, p), p) +
                      std::pow(grad_lp(mesh, w, p), p),
                  1.0 / p);
}

inline double boundary_lp(const Mesh& mesh, const Eigen::VectorXd& w, double p,
                          std::optional<BoundaryTag> tag = std::nullopt) {
  std::vector<QuadPoint> qp;
  double acc = 0.0;
  for (const auto& f : mesh.facets) {
    if (tag && f.tag != *tag) continue;
    facet_rule(mesh, f, qp);
    for (const auto& point : qp) {
      double val = 0.0;
      // phi entries refer to the facet's own nodes
      for (int i = 0; i < 2; ++i)
        if (f.nodes[i] >= 0) val += point.phi[i] * w(f.nodes[i]);
      acc += point.w * std::pow(std::abs(val), p);
    }
  }
  return std::pow(acc, 1.0 / p);
}

inline double boundary_linf(const Mesh& mesh, const Eigen::VectorXd& w,
                            std::optional<BoundaryTag> tag = std::nullopt) {
  double mx = 0.0;
  for (const auto& f : mesh.facets) {
    if (tag && f.tag != *tag) continue;
    for (int i = 0; i < 2; ++i)
      if (f.nodes[i] >= 0) mx = std::max(mx, std::abs(w(f.nodes[i])));
  }
  return mx;
}

// Time composition over uniformly sampled series.
inline double compose_linf(const std::vector<double>& x) {
  double mx = 0.0;
  for (double v : x) mx = std::max(mx, std::abs(v));
  return mx;
}

// Trapezoid rule on step samples x_0..x_N.
inline double compose_lp(const std::vector<double>& x, double p, double dt) {
  if (x.size() < 2) return 0.0;
  double acc = 0.5 * (std::pow(std::abs(x.front()), p) +
                      std::pow(std::abs(x.back()), p));
  for (size_t n = 1; n + 1 < x.size(); ++n) acc += std::pow(std::abs(x[n]), p);
  return std::pow(dt * acc, 1.0 / p);
}

// Midpoint sums for quantities defined on step midpoints.
inline double compose_lp_mid(const std::vector<double>& x, double p, double dt) {
  double acc = 0.0;
  for (double v : x) acc += std::pow(std::abs(v), p);
  return std::pow(dt * acc, 1.0 / p);
}

namespace detail {
template <typename Fn>
std::vector<double> column_series(const Eigen::MatrixXd& m, Fn&& fn) {
  std::vector<double> out(size_t(m.cols()));
  for (int n = 0; n < m.cols(); ++n) out[size_t(n)] = fn(m.col(n));
  return out;
}
}  // namespace detail

// Solution norms entering the energy estimates, the iteration balls and the
// smallness certificates.  u_tt is the midpoint difference quotient of v.
struct TrajectoryNorms {
  double utt_L2L2 = 0;    // second time derivative, L2 in time and space
  double v_LinfL2 = 0;    // u_t
  double v_LinfH1 = 0;
  double v_L2L2 = 0;
  double v_Lq1Lq1 = 0;    // u_t in L^{q+1} of time and space
  double v_LinfLq1 = 0;
  double gv_L2L2 = 0;     // grad u_t
  double gv_LinfL2 = 0;
  double gv_Lq1Lq1 = 0;
  double gv_LinfLq1 = 0;
  double gu_LinfL2 = 0;   // grad u
  double gu_LinfLq1 = 0;
  double v_L2Gh = 0;      // u_t on the absorbing boundary
  double v_LinfGh = 0;

  static TrajectoryNorms compute(const Mesh& mesh, const Trajectory& traj,
                                 double q) {
    TrajectoryNorms tn;
    const double dt = traj.grid.dt();
    const double q1 = q + 1.0;
    const Eigen::MatrixXd acc = difference_quotient_accel(traj);

    tn.utt_L2L2 = compose_lp_mid(
        detail::column_series(acc, [&](const auto& c) {
          return l2_volume(mesh, c);
        }),
        2.0, dt);

    auto v_l2 = detail::column_series(traj.v, [&](const auto& c) {
      return l2_volume(mesh, c);
    });
    tn.v_LinfL2 = compose_linf(v_l2);
    tn.v_L2L2 = compose_lp(v_l2, 2.0, dt);
    tn.v_LinfH1 = compose_linf(detail::column_series(traj.v, [&](const auto& c) {
      return h1_norm(mesh, c);
    }));
    auto v_q1 = detail::column_series(traj.v, [&](const auto& c) {
      return lp_volume(mesh, c, q1);
    });
    tn.v_Lq1Lq1 = compose_lp(v_q1, q1, dt);
    tn.v_LinfLq1 = compose_linf(v_q1);

    auto gv_l2 = detail::column_series(traj.v, [&](const auto& c) {
      return grad_l2(mesh, c);
    });
    tn.gv_L2L2 = compose_lp(gv_l2, 2.0, dt);
    tn.gv_LinfL2 = compose_linf(gv_l2);
    auto gv_q1 = detail::column_series(traj.v, [&](const auto& c) {
      return grad_lp(mesh, c, q1);
    });
    tn.gv_Lq1Lq1 = compose_lp(gv_q1, q1, dt);
    tn.gv_LinfLq1 = compose_linf(gv_q1);

    tn.gu_LinfL2 = compose_linf(detail::column_series(traj.u, [&](const auto& c) {
      return grad_l2(mesh, c);
    }));
    tn.gu_LinfLq1 = compose_linf(detail::column_series(traj.u, [&](const auto& c) {
      return grad_lp(mesh, c, q1);
    }));

    auto v_gh = detail::column_series(traj.v, [&](const auto& c) {
      return boundary_lp(mesh, c, 2.0, BoundaryTag::GammaHatAbsorbing);
    });
    tn.v_L2Gh = compose_lp(v_gh, 2.0, dt);
    tn.v_LinfGh = compose_linf(v_gh);
    return tn;
  }
};

// Norms of the initial data that appear on estimate right-hand sides.
struct DataNorms {
  double u0_L1 = 0;
  double gu0_L2 = 0;
  double gu0_Lq1 = 0;
  double gu0_L4 = 0;
  double gu1_L2 = 0;
  double u1_L2 = 0;
  double u1_H1 = 0;
  double u1_W1q1 = 0;
  double u1_L2Gh = 0;

  static DataNorms compute(const Mesh& mesh, const Eigen::VectorXd& u0,
                           const Eigen::VectorXd& u1, double q) {
    DataNorms dn;
    dn.u0_L1 = l1_volume(mesh, u0);
    dn.gu0_L2 = grad_l2(mesh, u0);
    dn.gu0_Lq1 = grad_lp(mesh, u0, q + 1.0);
    dn.gu0_L4 = grad_lp(mesh, u0, 4.0);
    dn.gu1_L2 = grad_l2(mesh, u1);
    dn.u1_L2 = l2_volume(mesh, u1);
    dn.u1_H1 = h1_norm(mesh, u1);
    dn.u1_W1q1 = w1p_norm(mesh, u1, q + 1.0);
    dn.u1_L2Gh = boundary_lp(mesh, u1, 2.0, BoundaryTag::GammaHatAbsorbing);
    return dn;
  }
};

// Boundary excitation norms over the Neumann part.  The fractional trace
// norms are surrogated by Lebesgue norms on Gamma: L2 for the H^{-1/2}
// pairing, L^{(q+1)/q} for the W^{-1/q,(q+1)/q} pairing.  g_t is sampled by
// central differences (one-sided at the endpoints).
struct GNorms {
  double L1L2 = 0, L2L2 = 0, LinfL2 = 0;
  double LpLp = 0, LinfLp = 0;      // p = (q+1)/q
  double gt_L1L2 = 0, gt_LpLp = 0;  // time derivative
  bool zero = true;

  double c_gamma(double q) const {
    const double p = (q + 1.0) / q;
    return L1L2 * L1L2 + gt_L1L2 * gt_L1L2 + std::pow(LpLp, p) +
           std::pow(gt_LpLp, p) + LinfL2 * LinfL2 + std::pow(LinfLp, p);
  }

  static GNorms compute(const Mesh& mesh, const TimeGrid& grid,
                        const SpaceTimeFn& g, double q) {
    GNorms gn;
    if (!g) return gn;
    const double p = (q + 1.0) / q;
    const double dt = grid.dt();
    const int N = grid.steps;

    auto nodal_g = [&](double t) {
      Eigen::VectorXd w = Eigen::VectorXd::Zero(mesh.n_nodes());
      for (const auto& f : mesh.facets) {
        if (f.tag != BoundaryTag::GammaNeumann) continue;
        for (int i = 0; i < 2; ++i)
          if (f.nodes[i] >= 0) {
            Eigen::Vector2d xy = mesh.node_xy(f.nodes[i]);
            w(f.nodes[i]) = g(xy.x(), xy.y(), t);
          }
      }
      return w;
    };

    std::vector<Eigen::VectorXd> gs(size_t(N + 1));
    for (int n = 0; n <= N; ++n) gs[size_t(n)] = nodal_g(grid.t(n));

    std::vector<double> l2(size_t(N + 1)), lp(size_t(N + 1));
    for (int n = 0; n <= N; ++n) {
      l2[size_t(n)] =
          boundary_lp(mesh, gs[size_t(n)], 2.0, BoundaryTag::GammaNeumann);
      lp[size_t(n)] =
          boundary_lp(mesh, gs[size_t(n)], p, BoundaryTag::GammaNeumann);
      if (l2[size_t(n)] != 0.0) gn.zero = false;
    }
    gn.L1L2 = compose_lp(l2, 1.0, dt);
    gn.L2L2 = compose_lp(l2, 2.0, dt);
    gn.LinfL2 = compose_linf(l2);
    gn.LpLp = compose_lp(lp, p, dt);
    gn.LinfLp = compose_linf(lp);

    std::vector<double> dl2(size_t(N + 1)), dlp(size_t(N + 1));
    for (int n = 0; n <= N; ++n) {
      Eigen::VectorXd d;
      if (n == 0)
        d = (gs[1] - gs[0]) / dt;
      else if (n == N)
        d = (gs[size_t(N)] - gs[size_t(N - 1)]) / dt;
      else
        d = (gs[size_t(n + 1)] - gs[size_t(n - 1)]) / (2.0 * dt);
      dl2[size_t(n)] = boundary_lp(mesh, d, 2.0, BoundaryTag::GammaNeumann);
      dlp[size_t(n)] = boundary_lp(mesh, d, p, BoundaryTag::GammaNeumann);
    }
    gn.gt_L1L2 = compose_lp(dl2, 1.0, dt);
    gn.gt_LpLp = compose_lp(dlp, p, dt);
    return gn;
  }
};

// Norms of frozen coefficient fields (a, f) used by the linearized
// estimates.  a_t and the source f - a_t/2 live at step midpoints.
struct CoefficientNorms {
  double bhat = 0;        // ||f - a_t/2|| in Linf(L2)
  double btilde = 0;      // ||f|| in Linf(H1)
  double a_lb = 0;        // min over nodes and steps of a
  double a_ub = 0;        // max
  double a_L2Linf = 0;
  double a_LinfLinf = 0;
  double ga_L2L2 = 0;
  double ga_L2L4 = 0;
  double at_L2L2 = 0;
  double at_L43L2 = 0;
  double src_Lr = 0;      // ||f - a_t/2|| in L^r(L^r), r = (q+1)/(q-1), q > 1
  double src_Lp = 0;      // ||f - a_t/2|| in L^p(L^p), p = (q+1)/q
  double f_H1_L2r = 0;    // ||f|| in L^{2r}(H1)

  static CoefficientNorms compute(const Mesh& mesh, const TimeGrid& grid,
                                  const CoefficientSeries& coef, double q,
                                  const Eigen::VectorXd* cell_scale = nullptr) {
    CoefficientNorms cn;
    const double dt = grid.dt();
    const int N = grid.steps;

    cn.a_lb = coef.a_step.minCoeff();
    cn.a_ub = coef.a_step.maxCoeff();
    if (cell_scale) {
      // coupled runs: effective coefficient is a/lambda, elementwise
      double lb = std::numeric_limits<double>::max(), ub = -lb;
      const int npe = mesh.nodes_per_element();
      for (int e = 0; e < mesh.n_elements(); ++e)
        for (int i = 0; i < npe; ++i)
          for (int n = 0; n <= N; ++n) {
            const double v = coef.a_step(mesh.elements(e, i), n) * (*cell_scale)(e);
            lb = std::min(lb, v);
            ub = std::max(ub, v);
          }
      cn.a_lb = lb;
      cn.a_ub = ub;
    }

    std::vector<double> src_l2(static_cast<size_t>(N));
    std::vector<double> src_lp(static_cast<size_t>(N));
    std::vector<double> src_lr;
    const double p = (q + 1.0) / q;
    const double r = q > 1.0 ? (q + 1.0) / (q - 1.0) : 0.0;
    if (q > 1.0) src_lr.resize(size_t(N));
    for (int n = 0; n < N; ++n) {
      Eigen::VectorXd at = (coef.a_step.col(n + 1) - coef.a_step.col(n)) / dt;
      Eigen::VectorXd src = coef.f_mid.col(n) - 0.5 * at;
      src_l2[size_t(n)] = l2_volume(mesh, src, cell_scale);
      src_lp[size_t(n)] = lp_volume(mesh, src, p, cell_scale);
      if (q > 1.0) src_lr[size_t(n)] = lp_volume(mesh, src, r, cell_scale);
    }
    cn.bhat = compose_linf(src_l2);
    cn.src_Lp = compose_lp_mid(src_lp, p, dt);
    if (q > 1.0) cn.src_Lr = compose_lp_mid(src_lr, r, dt);

    cn.btilde = compose_linf(detail::column_series(coef.f_step, [&](const auto& c) {
      return h1_norm(mesh, Eigen::VectorXd(c));
    }));
    if (q > 1.0)
      cn.f_H1_L2r = compose_lp(
          detail::column_series(coef.f_step,
                                [&](const auto& c) {
                                  return h1_norm(mesh, Eigen::VectorXd(c));
                                }),
          2.0 * r, dt);

    auto a_linf = detail::column_series(coef.a_step, [&](const auto& c) {
      return linf_volume(Eigen::VectorXd(c));
    });
    cn.a_L2Linf = compose_lp(a_linf, 2.0, dt);
    cn.a_LinfLinf = compose_linf(a_linf);
    cn.ga_L2L2 = compose_lp(detail::column_series(coef.a_step, [&](const auto& c) {
                              return grad_l2(mesh, Eigen::VectorXd(c));
                            }),
                            2.0, dt);
    cn.ga_L2L4 = compose_lp(detail::column_series(coef.a_step, [&](const auto& c) {
                              return grad_lp(mesh, Eigen::VectorXd(c), 4.0);
                            }),
                            2.0, dt);

    std::vector<double> at_l2(static_cast<size_t>(N));
    for (int n = 0; n < N; ++n) {
      Eigen::VectorXd at = (coef.a_step.col(n + 1) - coef.a_step.col(n)) / dt;
      at_l2[size_t(n)] = l2_volume(mesh, at);
    }
    cn.at_L2L2 = compose_lp_mid(at_l2, 2.0, dt);
    cn.at_L43L2 = compose_lp_mid(at_l2, 4.0 / 3.0, dt);
    return cn;
  }
};

// Iteration metric: |||u|||^2 = |u_t|^2_{Linf L2} + |grad u_t|^2_{L2 L2}
//                             + |grad u|^2_{Linf L2}
inline double triple_norm(const Mesh& mesh, const Trajectory& traj) {
  const double dt = traj.grid.dt();
  std::vector<double> v_l2(size_t(traj.steps() + 1)),
      gv_l2(size_t(traj.steps() + 1)), gu_l2(size_t(traj.steps() + 1));
  for (int n = 0; n <= traj.steps(); ++n) {
    v_l2[size_t(n)] = l2_volume(mesh, traj.v.col(n));
    gv_l2[size_t(n)] = grad_l2(mesh, traj.v.col(n));
    gu_l2[size_t(n)] = grad_l2(mesh, traj.u.col(n));
  }
  const double a = compose_linf(v_l2);
  const double b = compose_lp(gv_l2, 2.0, dt);
  const double c = compose_linf(gu_l2);
  return std::sqrt(a * a + b * b + c * c);
}

// E^n = (1/2) v^T M v + (c^2/2) u^T K u, the dissipated quantity of the
// midpoint scheme when a is constant and f, g, r vanish.
inline Eigen::VectorXd energy_series(const Mesh& mesh, const Trajectory& traj,
                                     double c2) {
  SparseOperator M = mass(mesh);
  SparseOperator K = stiffness(mesh, 1.0);
  Eigen::VectorXd E(traj.steps() + 1);
  for (int n = 0; n <= traj.steps(); ++n) {
    const Eigen::VectorXd v = traj.v.col(n), u = traj.u.col(n);
    E(n) = 0.5 * v.dot(M.mat * v) + 0.5 * c2 * u.dot(K.mat * u);
  }
  return E;
}

}  // namespace westfem
