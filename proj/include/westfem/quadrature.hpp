#pragma once

// Element and facet quadrature for P1 fields.
//
// 1d elements: 3-point Gauss-Legendre (exact through degree 5).
// Triangles: 3-point interior rule (degree 2) for assembly terms, and a
// 6-point degree-4 rule for quartic integrands in the analysis layer.
// 2d facets (edges): 3-point Gauss on the segment.  1d facets are points
// with counting measure 1.

#include <array>
#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "westfem/mesh.hpp"

namespace westfem {

struct QuadPoint {
  double w = 0.0;                      // physical weight
  std::array<double, 3> phi{0, 0, 0};  // P1 basis values at the point
  Eigen::Vector2d xy = Eigen::Vector2d::Zero();
};

// degree_hint <= 2 picks the cheap rule; >= 3 the degree-4 triangle rule.
inline void element_rule(const Mesh& m, int e, int degree_hint,
                         std::vector<QuadPoint>& out) {
  out.clear();
  if (m.dim == 1) {
    static const double xi[3] = {0.5 * (1.0 - std::sqrt(3.0 / 5.0)), 0.5,
                                 0.5 * (1.0 + std::sqrt(3.0 / 5.0))};
    static const double ww[3] = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};
    double x0 = m.nodes(m.elements(e, 0), 0);
    double x1 = m.nodes(m.elements(e, 1), 0);
    double h = x1 - x0;
    for (int k = 0; k < 3; ++k) {
      QuadPoint q;
      q.w = ww[k] * h;
      q.phi = {1.0 - xi[k], xi[k], 0.0};
      q.xy = Eigen::Vector2d(x0 + xi[k] * h, 0.0);
      out.push_back(q);
    }
    return;
  }

  const double A = m.volumes(e);
  Eigen::Vector2d p0 = m.node_xy(m.elements(e, 0));
  Eigen::Vector2d p1 = m.node_xy(m.elements(e, 1));
  Eigen::Vector2d p2 = m.node_xy(m.elements(e, 2));
  auto emit = [&](double l0, double l1, double l2, double w) {
    QuadPoint q;
    q.w = w * A;
    q.phi = {l0, l1, l2};
    q.xy = l0 * p0 + l1 * p1 + l2 * p2;
    out.push_back(q);
  };
  if (degree_hint <= 2) {
    emit(2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0, 1.0 / 3.0);
    emit(1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0, 1.0 / 3.0);
    emit(1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0, 1.0 / 3.0);
  } else {
    // Dunavant degree-4, 6 points.
    const double a1 = 0.108103018168070, b1 = 0.445948490915965;
    const double a2 = 0.816847572980459, b2 = 0.091576213509771;
    const double w1 = 0.223381589678011, w2 = 0.109951743655322;
    emit(a1, b1, b1, w1); emit(b1, a1, b1, w1); emit(b1, b1, a1, w1);
    emit(a2, b2, b2, w2); emit(b2, a2, b2, w2); emit(b2, b2, a2, w2);
  }
}

// Quadrature on a boundary facet; phi entries refer to the facet's own
// nodes (2 in 2d, 1 in 1d).
inline void facet_rule(const Mesh& m, const Facet& f,
                       std::vector<QuadPoint>& out) {
  out.clear();
  if (m.dim == 1) {
    QuadPoint q;
    q.w = f.measure;  // counting measure
    q.phi = {1.0, 0.0, 0.0};
    q.xy = m.node_xy(f.nodes[0]);
    out.push_back(q);
    return;
  }
  static const double xi[3] = {0.5 * (1.0 - std::sqrt(3.0 / 5.0)), 0.5,
                               0.5 * (1.0 + std::sqrt(3.0 / 5.0))};
  static const double ww[3] = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};
  Eigen::Vector2d a = m.node_xy(f.nodes[0]);
  Eigen::Vector2d b = m.node_xy(f.nodes[1]);
  for (int k = 0; k < 3; ++k) {
    QuadPoint q;
    q.w = ww[k] * f.measure;
    q.phi = {1.0 - xi[k], xi[k], 0.0};
    q.xy = (1.0 - xi[k]) * a + xi[k] * b;
    out.push_back(q);
  }
}

}  // namespace westfem
