#pragma once

// Conforming simplicial P1 meshes in one and two dimensions.
//
// 1d: intervals, boundary facets are the two endpoints carrying counting
//     measure 1.  2d: structured triangulations of axis-aligned rectangles,
//     boundary facets are edges carrying their length.
//
// Every boundary facet is tagged either GammaNeumann (flux-driven part of
// the boundary) or GammaHatAbsorbing (impedance part), and knows its one
// owning element.

#include <array>
#include <cmath>
#include <ostream>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace westfem {

enum class BoundaryTag { GammaNeumann, GammaHatAbsorbing };

inline const char* to_string(BoundaryTag t) {
  return t == BoundaryTag::GammaNeumann ? "Gamma" : "GammaHat";
}

struct Facet {
  std::array<int, 2> nodes{-1, -1};  // nodes[1] unused in 1d
  int element = -1;                  // owning element
  double measure = 0.0;              // 1 in 1d, edge length in 2d
  BoundaryTag tag = BoundaryTag::GammaNeumann;
};

struct Mesh {
  int dim = 1;
  Eigen::MatrixXd nodes;     // n_nodes x dim
  Eigen::MatrixXi elements;  // n_elements x (dim+1)
  Eigen::VectorXd volumes;   // per-element length/area
  std::vector<Facet> facets; // boundary facets only

  // Constant gradients of the local P1 basis, row e holds
  // [grad phi_0 | grad phi_1 | ...] padded to 2 components each.
  Eigen::MatrixXd basis_grads;

  int n_nodes() const { return int(nodes.rows()); }
  int n_elements() const { return int(elements.rows()); }
  int nodes_per_element() const { return dim + 1; }

  Eigen::Vector2d grad(int e, int local) const {
    return basis_grads.block<1, 2>(e, 2 * local).transpose();
  }

  Eigen::Vector2d node_xy(int i) const {
    return dim == 1 ? Eigen::Vector2d(nodes(i, 0), 0.0)
                    : Eigen::Vector2d(nodes(i, 0), nodes(i, 1));
  }

  Eigen::Vector2d centroid(int e) const {
    Eigen::Vector2d c = Eigen::Vector2d::Zero();
    for (int l = 0; l < nodes_per_element(); ++l) c += node_xy(elements(e, l));
    return c / double(nodes_per_element());
  }

  bool has_tag(BoundaryTag t) const {
    for (const auto& f : facets)
      if (f.tag == t) return true;
    return false;
  }
};

inline double domain_measure(const Mesh& m) { return m.volumes.sum(); }

inline Mesh build_interval_mesh(double length, int n_elements,
                                double gamma_fraction) {
  if (!(length > 0.0))
    throw std::invalid_argument("build_interval_mesh: length must be positive");
  if (n_elements < 1)
    throw std::invalid_argument(
        "build_interval_mesh: need at least one element");
  if (gamma_fraction < 0.0 || gamma_fraction > 1.0)
    throw std::invalid_argument(
        "build_interval_mesh: gamma_fraction must lie in [0,1]");

  Mesh m;
  m.dim = 1;
  m.nodes.resize(n_elements + 1, 1);
  for (int i = 0; i <= n_elements; ++i)
    m.nodes(i, 0) = length * double(i) / double(n_elements);
  m.elements.resize(n_elements, 2);
  m.volumes.resize(n_elements);
  m.basis_grads.resize(n_elements, 4);
  for (int e = 0; e < n_elements; ++e) {
    m.elements(e, 0) = e;
    m.elements(e, 1) = e + 1;
    double h = m.nodes(e + 1, 0) - m.nodes(e, 0);
    m.volumes(e) = h;
    m.basis_grads.row(e) << -1.0 / h, 0.0, 1.0 / h, 0.0;
  }

  Facet left, right;
  left.nodes = {0, -1};
  left.element = 0;
  left.measure = 1.0;  // counting measure on endpoint facets
  left.tag = gamma_fraction > 0.0 ? BoundaryTag::GammaNeumann
                                  : BoundaryTag::GammaHatAbsorbing;
  right.nodes = {n_elements, -1};
  right.element = n_elements - 1;
  right.measure = 1.0;
  right.tag = gamma_fraction < 1.0 ? BoundaryTag::GammaHatAbsorbing
                                   : BoundaryTag::GammaNeumann;
  m.facets = {left, right};
  return m;
}

// Structured triangulation: each of the nx*ny cells is split along its
// lower-left to upper-right diagonal.  gamma_sides lists the sides
// ("left","right","bottom","top") carrying the Neumann tag; the rest
// absorb.
inline Mesh build_rect_mesh(double lx, double ly, int nx, int ny,
                            const std::set<std::string>& gamma_sides) {
  if (!(lx > 0.0) || !(ly > 0.0))
    throw std::invalid_argument("build_rect_mesh: side lengths must be positive");
  if (nx < 1 || ny < 1)
    throw std::invalid_argument("build_rect_mesh: need at least one cell per direction");
  for (const auto& s : gamma_sides)
    if (s != "left" && s != "right" && s != "bottom" && s != "top")
      throw std::invalid_argument("build_rect_mesh: unknown side '" + s + "'");

  Mesh m;
  m.dim = 2;
  const int nnx = nx + 1, nny = ny + 1;
  auto idx = [nnx](int i, int j) { return j * nnx + i; };
  m.nodes.resize(nnx * nny, 2);
  for (int j = 0; j < nny; ++j)
    for (int i = 0; i < nnx; ++i) {
      m.nodes(idx(i, j), 0) = lx * double(i) / double(nx);
      m.nodes(idx(i, j), 1) = ly * double(j) / double(ny);
    }

  m.elements.resize(2 * nx * ny, 3);
  int e = 0;
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      int v00 = idx(i, j), v10 = idx(i + 1, j);
      int v01 = idx(i, j + 1), v11 = idx(i + 1, j + 1);
      m.elements.row(e++) << v00, v10, v11;  // lower triangle
      m.elements.row(e++) << v00, v11, v01;  // upper triangle
    }

  const int ne = m.n_elements();
  m.volumes.resize(ne);
  m.basis_grads.resize(ne, 6);
  for (e = 0; e < ne; ++e) {
    Eigen::Vector2d p0(m.nodes(m.elements(e, 0), 0), m.nodes(m.elements(e, 0), 1));
    Eigen::Vector2d p1(m.nodes(m.elements(e, 1), 0), m.nodes(m.elements(e, 1), 1));
    Eigen::Vector2d p2(m.nodes(m.elements(e, 2), 0), m.nodes(m.elements(e, 2), 1));
    double det = (p1.x() - p0.x()) * (p2.y() - p0.y()) -
                 (p2.x() - p0.x()) * (p1.y() - p0.y());
    if (!(det > 0.0))
      throw std::logic_error("build_rect_mesh: degenerate or misoriented triangle");
    m.volumes(e) = 0.5 * det;
    // grad phi_i is perpendicular to the opposite edge, scaled by 1/det.
    Eigen::Vector2d g0((p1.y() - p2.y()) / det, (p2.x() - p1.x()) / det);
    Eigen::Vector2d g1((p2.y() - p0.y()) / det, (p0.x() - p2.x()) / det);
    Eigen::Vector2d g2((p0.y() - p1.y()) / det, (p1.x() - p0.x()) / det);
    m.basis_grads.row(e) << g0.x(), g0.y(), g1.x(), g1.y(), g2.x(), g2.y();
  }

  auto tag_of = [&gamma_sides](const std::string& side) {
    return gamma_sides.count(side) ? BoundaryTag::GammaNeumann
                                   : BoundaryTag::GammaHatAbsorbing;
  };
  auto edge_len = [&m](int a, int b) {
    return (m.nodes.row(a) - m.nodes.row(b)).norm();
  };
  // bottom j=0 edges live in the lower triangle of cell (i,0); top edges in
  // the upper triangle; left edges in the upper, right edges in the lower.
  auto cell_lower = [nx](int i, int j) { return 2 * (j * nx + i); };
  auto cell_upper = [nx](int i, int j) { return 2 * (j * nx + i) + 1; };
  for (int i = 0; i < nx; ++i) {
    Facet f;
    f.nodes = {idx(i, 0), idx(i + 1, 0)};
    f.element = cell_lower(i, 0);
    f.measure = edge_len(f.nodes[0], f.nodes[1]);
    f.tag = tag_of("bottom");
    m.facets.push_back(f);
    f.nodes = {idx(i, ny), idx(i + 1, ny)};
    f.element = cell_upper(i, ny - 1);
    f.measure = edge_len(f.nodes[0], f.nodes[1]);
    f.tag = tag_of("top");
    m.facets.push_back(f);
  }
  for (int j = 0; j < ny; ++j) {
    Facet f;
    f.nodes = {idx(0, j), idx(0, j + 1)};
    f.element = cell_upper(0, j);
    f.measure = edge_len(f.nodes[0], f.nodes[1]);
    f.tag = tag_of("left");
    m.facets.push_back(f);
    f.nodes = {idx(nx, j), idx(nx, j + 1)};
    f.element = cell_lower(nx - 1, j);
    f.measure = edge_len(f.nodes[0], f.nodes[1]);
    f.tag = tag_of("right");
    m.facets.push_back(f);
  }
  return m;
}

inline void dump_mesh(const Mesh& m, std::ostream& os) {
  os << "dim " << m.dim << "\n";
  os << "nodes " << m.n_nodes() << "\n";
  for (int i = 0; i < m.n_nodes(); ++i) {
    os << i;
    for (int d = 0; d < m.dim; ++d) os << " " << m.nodes(i, d);
    os << "\n";
  }
  os << "elements " << m.n_elements() << "\n";
  for (int e = 0; e < m.n_elements(); ++e) {
    os << e;
    for (int l = 0; l < m.nodes_per_element(); ++l) os << " " << m.elements(e, l);
    os << " volume " << m.volumes(e) << "\n";
  }
  os << "facets " << m.facets.size() << "\n";
  for (std::size_t f = 0; f < m.facets.size(); ++f) {
    const Facet& ft = m.facets[f];
    os << f << " " << ft.nodes[0];
    if (ft.nodes[1] >= 0) os << " " << ft.nodes[1];
    os << " element " << ft.element << " measure " << ft.measure << " tag "
       << to_string(ft.tag) << "\n";
  }
}

}  // namespace westfem
