#pragma once

// P1 operator assembly: weighted mass, stiffness, the q-gradient damping
// and q-stiffness nonlinearities with their Jacobians, lower-order damping,
// absorbing boundary matrices and Neumann loads.
//
// Conventions: nodal weights are integrated exactly (the triple products
// of P1 basis functions have closed forms); gradient nonlinearities use
// the one-point (centroid) value of the elementwise-constant gradient,
// which is exact for P1; |v|^{q-1}v volume terms use the element rules
// from quadrature.hpp.  Jacobians regularize the |grad v|^{q-3} factor by
// sqrt(|g|^2 + sigma^2) with sigma = 1e-10; residuals are untouched.

#include <functional>
#include <memory>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "westfem/mesh.hpp"
#include "westfem/quadrature.hpp"

namespace westfem {

constexpr double kJacobianRegularization = 1e-10;

struct SparseOperator {
  Eigen::SparseMatrix<double> mat;
  bool symmetric = false;

  int rows() const { return int(mat.rows()); }
  int cols() const { return int(mat.cols()); }
};

struct NonlinearTerm {
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> residual;
  std::function<Eigen::SparseMatrix<double>(const Eigen::VectorXd&)> jacobian;
};

enum class FieldOn { Cells, Nodes };

namespace detail {

using Triplets = std::vector<Eigen::Triplet<double>>;

inline void add_nodal_weighted_mass_1d(const Mesh& m, int e, double a0,
                                       double a1, double scale, Triplets& out) {
  const double h = m.volumes(e) * scale;
  const int n0 = m.elements(e, 0), n1 = m.elements(e, 1);
  out.emplace_back(n0, n0, h * (3.0 * a0 + a1) / 12.0);
  out.emplace_back(n1, n1, h * (a0 + 3.0 * a1) / 12.0);
  out.emplace_back(n0, n1, h * (a0 + a1) / 12.0);
  out.emplace_back(n1, n0, h * (a0 + a1) / 12.0);
}

inline void add_nodal_weighted_mass_2d(const Mesh& m, int e, double a0,
                                       double a1, double a2, double scale,
                                       Triplets& out) {
  const double A = m.volumes(e) * scale;
  const double S = a0 + a1 + a2;
  const double aa[3] = {a0, a1, a2};
  for (int i = 0; i < 3; ++i) {
    const int ni = m.elements(e, i);
    out.emplace_back(ni, ni, (A / 30.0) * (2.0 * aa[i] + S));
    for (int j = i + 1; j < 3; ++j) {
      const int nj = m.elements(e, j);
      const double v = (A / 60.0) * (aa[i] + aa[j] + S);
      out.emplace_back(ni, nj, v);
      out.emplace_back(nj, ni, v);
    }
  }
}

inline Eigen::SparseMatrix<double> from_triplets(int n, const Triplets& t) {
  Eigen::SparseMatrix<double> M(n, n);
  M.setFromTriplets(t.begin(), t.end());
  return M;
}

}  // namespace detail

// M[i][j] = sum_E scale_E * int_E a phi_i phi_j, with a either cellwise
// constant or a nodal P1 field; exact in both cases.  cell_scale (optional)
// multiplies each element's contribution, used for 1/lambda(x) factors.
inline SparseOperator weighted_mass(const Mesh& m, const Eigen::VectorXd& a,
                                    FieldOn kind,
                                    const Eigen::VectorXd* cell_scale = nullptr) {
  if (kind == FieldOn::Cells && a.size() != m.n_elements())
    throw std::invalid_argument("weighted_mass: cell field has wrong size");
  if (kind == FieldOn::Nodes && a.size() != m.n_nodes())
    throw std::invalid_argument("weighted_mass: nodal field has wrong size");
  detail::Triplets trip;
  trip.reserve(std::size_t(m.n_elements()) * 9);
  for (int e = 0; e < m.n_elements(); ++e) {
    const double s = cell_scale ? (*cell_scale)(e) : 1.0;
    double a0, a1, a2 = 0.0;
    if (kind == FieldOn::Cells) {
      a0 = a1 = a2 = a(e);
    } else {
      a0 = a(m.elements(e, 0));
      a1 = a(m.elements(e, 1));
      a2 = m.dim == 2 ? a(m.elements(e, 2)) : 0.0;
    }
    if (m.dim == 1)
      detail::add_nodal_weighted_mass_1d(m, e, a0, a1, s, trip);
    else
      detail::add_nodal_weighted_mass_2d(m, e, a0, a1, a2, s, trip);
  }
  return {detail::from_triplets(m.n_nodes(), trip), true};
}

inline SparseOperator mass(const Mesh& m) {
  return weighted_mass(m, Eigen::VectorXd::Ones(m.n_elements()), FieldOn::Cells);
}

// K[i][j] = sum_E c_E int_E grad phi_j . grad phi_i
inline SparseOperator stiffness(const Mesh& m, const Eigen::VectorXd& c_cells) {
  if (c_cells.size() != m.n_elements())
    throw std::invalid_argument("stiffness: cell field has wrong size");
  detail::Triplets trip;
  trip.reserve(std::size_t(m.n_elements()) * 9);
  const int npe = m.nodes_per_element();
  for (int e = 0; e < m.n_elements(); ++e) {
    const double w = c_cells(e) * m.volumes(e);
    for (int i = 0; i < npe; ++i)
      for (int j = 0; j < npe; ++j)
        trip.emplace_back(m.elements(e, i), m.elements(e, j),
                          w * m.grad(e, i).dot(m.grad(e, j)));
  }
  return {detail::from_triplets(m.n_nodes(), trip), true};
}

inline SparseOperator stiffness(const Mesh& m, double c = 1.0) {
  return stiffness(m, Eigen::VectorXd::Constant(m.n_elements(), c));
}

// Weak form of -a(x) Lap u with a nodal coefficient a:
//   L[i][j] = int a grad phi_j . grad phi_i + int (grad a . grad phi_j) phi_i
// (not symmetric).  Exact for P1 a and u.
inline SparseOperator coefficient_laplacian(const Mesh& m,
                                            const Eigen::VectorXd& a_nodal) {
  if (a_nodal.size() != m.n_nodes())
    throw std::invalid_argument("coefficient_laplacian: nodal field has wrong size");
  detail::Triplets trip;
  trip.reserve(std::size_t(m.n_elements()) * 18);
  const int npe = m.nodes_per_element();
  for (int e = 0; e < m.n_elements(); ++e) {
    const double vol = m.volumes(e);
    double abar = 0.0;
    Eigen::Vector2d grad_a = Eigen::Vector2d::Zero();
    for (int l = 0; l < npe; ++l) {
      abar += a_nodal(m.elements(e, l));
      grad_a += a_nodal(m.elements(e, l)) * m.grad(e, l);
    }
    abar /= double(npe);
    for (int i = 0; i < npe; ++i) {
      const int ni = m.elements(e, i);
      for (int j = 0; j < npe; ++j) {
        const int nj = m.elements(e, j);
        double v = vol * abar * m.grad(e, i).dot(m.grad(e, j));
        v += vol / double(npe) * grad_a.dot(m.grad(e, j));
        trip.emplace_back(ni, nj, v);
      }
    }
  }
  return {detail::from_triplets(m.n_nodes(), trip), false};
}

// Derivative of coefficient_laplacian(m, a) * u with respect to the nodal
// coefficient:  G[i][p] = int phi_p grad u . grad phi_i
//                       + int (grad phi_p . grad u) phi_i.
inline SparseOperator coefficient_laplacian_wrt_a(const Mesh& m,
                                                  const Eigen::VectorXd& u) {
  if (u.size() != m.n_nodes())
    throw std::invalid_argument("coefficient_laplacian_wrt_a: bad state size");
  detail::Triplets trip;
  trip.reserve(std::size_t(m.n_elements()) * 18);
  const int npe = m.nodes_per_element();
  for (int e = 0; e < m.n_elements(); ++e) {
    const double vol = m.volumes(e);
    Eigen::Vector2d grad_u = Eigen::Vector2d::Zero();
    for (int l = 0; l < npe; ++l) grad_u += u(m.elements(e, l)) * m.grad(e, l);
    for (int i = 0; i < npe; ++i) {
      const int ni = m.elements(e, i);
      for (int p = 0; p < npe; ++p) {
        const int np = m.elements(e, p);
        // int_E phi_p = int_E phi_i = vol/npe; the gradients are constant.
        double v = vol / double(npe) * grad_u.dot(m.grad(e, i));
        v += vol / double(npe) * m.grad(e, p).dot(grad_u);
        trip.emplace_back(ni, np, v);
      }
    }
  }
  return {detail::from_triplets(m.n_nodes(), trip), false};
}

// R(v)[i] = sum_E |E| b_E ((1-delta_E) + delta_E |grad v|^{q-1}) grad v . grad phi_i
inline NonlinearTerm qgrad_damping(const Mesh& m, const Eigen::VectorXd& b_cells,
                                   const Eigen::VectorXd& delta_cells, double q) {
  if (b_cells.size() != m.n_elements() || delta_cells.size() != m.n_elements())
    throw std::invalid_argument("qgrad_damping: cell fields have wrong size");
  if (q < 1.0) throw std::invalid_argument("qgrad_damping: q must be >= 1");

  NonlinearTerm term;
  term.residual = [&m, b_cells, delta_cells, q](const Eigen::VectorXd& v) {
    Eigen::VectorXd r = Eigen::VectorXd::Zero(m.n_nodes());
    const int npe = m.nodes_per_element();
    for (int e = 0; e < m.n_elements(); ++e) {
      Eigen::Vector2d g = Eigen::Vector2d::Zero();
      for (int l = 0; l < npe; ++l) g += v(m.elements(e, l)) * m.grad(e, l);
      const double gn = g.norm();
      const double coef =
          b_cells(e) * ((1.0 - delta_cells(e)) +
                        delta_cells(e) * (q == 1.0 ? 1.0 : std::pow(gn, q - 1.0)));
      for (int i = 0; i < npe; ++i)
        r(m.elements(e, i)) += m.volumes(e) * coef * g.dot(m.grad(e, i));
    }
    return r;
  };
  term.jacobian = [&m, b_cells, delta_cells, q](const Eigen::VectorXd& v) {
    detail::Triplets trip;
    trip.reserve(std::size_t(m.n_elements()) * 9);
    const int npe = m.nodes_per_element();
    for (int e = 0; e < m.n_elements(); ++e) {
      Eigen::Vector2d g = Eigen::Vector2d::Zero();
      for (int l = 0; l < npe; ++l) g += v(m.elements(e, l)) * m.grad(e, l);
      const double gn = std::sqrt(g.squaredNorm() +
                                  kJacobianRegularization * kJacobianRegularization);
      const double coef =
          b_cells(e) * ((1.0 - delta_cells(e)) +
                        delta_cells(e) * (q == 1.0 ? 1.0 : std::pow(gn, q - 1.0)));
      const double dcoef =
          b_cells(e) * delta_cells(e) * (q - 1.0) * std::pow(gn, q - 3.0);
      for (int i = 0; i < npe; ++i)
        for (int j = 0; j < npe; ++j) {
          double val = coef * m.grad(e, i).dot(m.grad(e, j));
          if (q > 1.0)
            val += dcoef * g.dot(m.grad(e, i)) * g.dot(m.grad(e, j));
          trip.emplace_back(m.elements(e, i), m.elements(e, j),
                            m.volumes(e) * val);
        }
    }
    return detail::from_triplets(m.n_nodes(), trip);
  };
  return term;
}

// Nonlinear part of the q-stiffness: R(u)[i] = int c2 eps |grad u|^{q-1} grad u . grad phi_i
inline NonlinearTerm qstiffness(const Mesh& m, double c2, double eps, double q) {
  if (q < 1.0) throw std::invalid_argument("qstiffness: q must be >= 1");
  NonlinearTerm term;
  term.residual = [&m, c2, eps, q](const Eigen::VectorXd& u) {
    Eigen::VectorXd r = Eigen::VectorXd::Zero(m.n_nodes());
    const int npe = m.nodes_per_element();
    for (int e = 0; e < m.n_elements(); ++e) {
      Eigen::Vector2d g = Eigen::Vector2d::Zero();
      for (int l = 0; l < npe; ++l) g += u(m.elements(e, l)) * m.grad(e, l);
      const double gn = g.norm();
      const double coef = c2 * eps * (q == 1.0 ? 1.0 : std::pow(gn, q - 1.0));
      for (int i = 0; i < npe; ++i)
        r(m.elements(e, i)) += m.volumes(e) * coef * g.dot(m.grad(e, i));
    }
    return r;
  };
  term.jacobian = [&m, c2, eps, q](const Eigen::VectorXd& u) {
    detail::Triplets trip;
    trip.reserve(std::size_t(m.n_elements()) * 9);
    const int npe = m.nodes_per_element();
    for (int e = 0; e < m.n_elements(); ++e) {
      Eigen::Vector2d g = Eigen::Vector2d::Zero();
      for (int l = 0; l < npe; ++l) g += u(m.elements(e, l)) * m.grad(e, l);
      const double gn = std::sqrt(g.squaredNorm() +
                                  kJacobianRegularization * kJacobianRegularization);
      const double coef = c2 * eps * (q == 1.0 ? 1.0 : std::pow(gn, q - 1.0));
      const double dcoef = c2 * eps * (q - 1.0) * std::pow(gn, q - 3.0);
      for (int i = 0; i < npe; ++i)
        for (int j = 0; j < npe; ++j) {
          double val = coef * m.grad(e, i).dot(m.grad(e, j));
          if (q > 1.0)
            val += dcoef * g.dot(m.grad(e, i)) * g.dot(m.grad(e, j));
          trip.emplace_back(m.elements(e, i), m.elements(e, j),
                            m.volumes(e) * val);
        }
    }
    return detail::from_triplets(m.n_nodes(), trip);
  };
  return term;
}

// R(v) = beta M v + gamma int |v|^{q-1} v phi_i  (3-point rules).
inline NonlinearTerm lower_order_damping(const Mesh& m, double beta,
                                         double gamma, double q) {
  if (q < 1.0) throw std::invalid_argument("lower_order_damping: q must be >= 1");
  if (beta < 0.0 || gamma < 0.0)
    throw std::invalid_argument("lower_order_damping: beta, gamma must be >= 0");
  auto M = std::make_shared<SparseOperator>(mass(m));
  NonlinearTerm term;
  term.residual = [&m, M, beta, gamma, q](const Eigen::VectorXd& v) {
    Eigen::VectorXd r = beta * (M->mat * v);
    if (gamma != 0.0) {
      std::vector<QuadPoint> qp;
      const int npe = m.nodes_per_element();
      for (int e = 0; e < m.n_elements(); ++e) {
        element_rule(m, e, 2, qp);
        for (const auto& p : qp) {
          double vv = 0.0;
          for (int l = 0; l < npe; ++l) vv += v(m.elements(e, l)) * p.phi[l];
          const double f =
              gamma * (q == 1.0 ? vv : std::pow(std::abs(vv), q - 1.0) * vv);
          for (int i = 0; i < npe; ++i)
            r(m.elements(e, i)) += p.w * f * p.phi[i];
        }
      }
    }
    return r;
  };
  term.jacobian = [&m, M, beta, gamma, q](const Eigen::VectorXd& v) {
    Eigen::SparseMatrix<double> J = beta * M->mat;
    if (gamma != 0.0) {
      detail::Triplets trip;
      std::vector<QuadPoint> qp;
      const int npe = m.nodes_per_element();
      for (int e = 0; e < m.n_elements(); ++e) {
        element_rule(m, e, 2, qp);
        for (const auto& p : qp) {
          double vv = 0.0;
          for (int l = 0; l < npe; ++l) vv += v(m.elements(e, l)) * p.phi[l];
          const double df =
              gamma * q * (q == 1.0 ? 1.0 : std::pow(std::abs(vv), q - 1.0));
          for (int i = 0; i < npe; ++i)
            for (int j = 0; j < npe; ++j)
              trip.emplace_back(m.elements(e, i), m.elements(e, j),
                                p.w * df * p.phi[i] * p.phi[j]);
        }
      }
      J += detail::from_triplets(m.n_nodes(), trip);
    }
    return J;
  };
  return term;
}

// B[i][j] = int_{facets with tag} w phi_i phi_j, w per facet.
inline SparseOperator boundary_mass(const Mesh& m, BoundaryTag tag,
                                    const Eigen::VectorXd* facet_weight = nullptr) {
  detail::Triplets trip;
  std::vector<QuadPoint> qp;
  for (std::size_t f = 0; f < m.facets.size(); ++f) {
    const Facet& ft = m.facets[f];
    if (ft.tag != tag) continue;
    const double w = facet_weight ? (*facet_weight)(Eigen::Index(f)) : 1.0;
    facet_rule(m, ft, qp);
    const int nn = m.dim == 1 ? 1 : 2;
    for (const auto& p : qp)
      for (int i = 0; i < nn; ++i)
        for (int j = 0; j < nn; ++j)
          trip.emplace_back(ft.nodes[i], ft.nodes[j],
                            w * p.w * p.phi[i] * p.phi[j]);
  }
  return {detail::from_triplets(m.n_nodes(), trip), true};
}

inline SparseOperator absorbing_matrix(const Mesh& m, double alpha) {
  Eigen::VectorXd w = Eigen::VectorXd::Constant(Eigen::Index(m.facets.size()), alpha);
  return boundary_mass(m, BoundaryTag::GammaHatAbsorbing, &w);
}

inline SparseOperator absorbing_matrix(const Mesh& m,
                                       const Eigen::VectorXd& alpha_facets) {
  if (alpha_facets.size() != Eigen::Index(m.facets.size()))
    throw std::invalid_argument("absorbing_matrix: facet field has wrong size");
  return boundary_mass(m, BoundaryTag::GammaHatAbsorbing, &alpha_facets);
}

// F[i] = int_Gamma g(x, t) phi_i over the Neumann part.
inline Eigen::VectorXd neumann_load(
    const Mesh& m, const std::function<double(double, double, double)>& g,
    double t) {
  Eigen::VectorXd F = Eigen::VectorXd::Zero(m.n_nodes());
  std::vector<QuadPoint> qp;
  for (const auto& ft : m.facets) {
    if (ft.tag != BoundaryTag::GammaNeumann) continue;
    facet_rule(m, ft, qp);
    const int nn = m.dim == 1 ? 1 : 2;
    for (const auto& p : qp) {
      const double gv = g(p.xy.x(), p.xy.y(), t);
      for (int i = 0; i < nn; ++i) F(ft.nodes[i]) += p.w * gv * p.phi[i];
    }
  }
  return F;
}

}  // namespace westfem
