#pragma once

// Problem description: formulation selector, physical parameters, mesh and
// time grid specs, closed-form data, solver and check settings.  Scenarios
// load from JSON files (nested key-value tree, schema documented in the
// README) and validate against the model assumptions before any assembly
// happens.

#include <cmath>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "westfem/expression.hpp"
#include "westfem/mesh.hpp"

#include <json.hpp>

namespace westfem {

enum class Formulation { W1, W2, W3, Coupled };

inline const char* to_string(Formulation f) {
  switch (f) {
    case Formulation::W1: return "W1";
    case Formulation::W2: return "W2";
    case Formulation::W3: return "W3";
    case Formulation::Coupled: return "Coupled";
  }
  return "?";
}

inline Formulation formulation_from_string(const std::string& s) {
  if (s == "W1") return Formulation::W1;
  if (s == "W2") return Formulation::W2;
  if (s == "W3") return Formulation::W3;
  if (s == "Coupled") return Formulation::Coupled;
  throw std::invalid_argument(
      "unknown formulation '" + s + "' (expected W1, W2, W3 or Coupled)");
}

struct PhysicalParams {
  double c2 = 1.0;     // wave speed squared
  double b = 0.1;      // strong damping coefficient, must be > 0
  double delta = 0.5;  // damping interpolation weight, in (0,1)
  double q = 1.0;      // nonlinearity exponent, >= 1
  double eps = 0.0;    // q-stiffness weight (W2), > 0 there
  double k = 0.0;      // pressure-form nonlinearity coefficient
  double kt = 0.0;     // potential-form nonlinearity coefficient (W3)
  double alpha = 0.0;  // absorbing boundary impedance, >= 0
  double beta = 0.0;   // linear lower-order damping, >= 0
  double gamma = 0.0;  // q-law lower-order damping, >= 0
};

// Spatially varying coefficients for the heterogeneous formulation,
// given as expressions of (x, y) evaluated at element centroids
// (piecewise constant) and facet midpoints for alpha.
struct CoefficientExprs {
  std::string lambda = "1";
  std::string rho = "1";
  std::string b;      // empty: use params.b everywhere
  std::string delta;  // empty: use params.delta
  std::string k;      // empty: use params.k
  std::string alpha;  // empty: use params.alpha
};

struct CoefficientFields {
  Eigen::VectorXd lambda, rho, b, delta, k;  // cellwise
  Eigen::VectorXd alpha;                     // per boundary facet
  bool active = false;
};

struct MeshSpec {
  std::string type = "interval";  // "interval" | "rect"
  double length = 1.0;
  int elements = 64;
  double gamma_fraction = 1.0;
  double lx = 1.0, ly = 1.0;
  int nx = 8, ny = 8;
  std::set<std::string> gamma_sides;
};

struct TimeSpec {
  double T = 1.0;
  int steps = 100;
};

struct DataSpec {
  std::string u0 = "0";
  std::string u1 = "0";
  std::string g = "0";
  std::string r;  // manufactured source; empty outside verification runs
};

struct SolverSpec {
  std::string engine = "picard";  // "picard" | "monolithic"
  double newton_tol = 1e-12;
  int max_newton = 25;
  double picard_tol = 1e-10;
  int max_picard = 30;
  double a_min = 1e-6;  // degeneracy margin: abort when min a <= a_min
  std::string initial_iterate = "linear";  // "linear" | "constant"
};

struct ChecksSpec {
  double m_bar = 0.0;
  double M_bar = 0.0;
  std::vector<std::string> estimates;
  std::map<std::string, double> free_params;
  std::map<std::string, double> constants;  // overrides by name
  std::map<std::string, double> tol;
};

struct ScenarioSpec {
  Formulation formulation = Formulation::W1;
  MeshSpec mesh;
  PhysicalParams params;
  CoefficientExprs coefficients;
  DataSpec data;
  TimeSpec time;
  SolverSpec solver;
  ChecksSpec checks;
  std::vector<int> probes;
  std::map<std::string, std::vector<double>> sweep;  // axis path -> values
};

struct OmegaConstants {
  double C1;  // |Omega|^{-q/(q+1)}, mean-vs-L1 constant
  double C2;  // |Omega|^{-(q-1)/(2(q+1))}, mean-vs-L2 constant
};

inline OmegaConstants omega_constants(double measure, double q) {
  if (!(measure > 0.0))
    throw std::invalid_argument("omega_constants: measure must be positive");
  if (q < 1.0) throw std::invalid_argument("omega_constants: q must be >= 1");
  return {std::pow(measure, -q / (q + 1.0)),
          std::pow(measure, -(q - 1.0) / (2.0 * (q + 1.0)))};
}

inline Mesh build_mesh(const MeshSpec& ms) {
  if (ms.type == "interval")
    return build_interval_mesh(ms.length, ms.elements, ms.gamma_fraction);
  if (ms.type == "rect")
    return build_rect_mesh(ms.lx, ms.ly, ms.nx, ms.ny, ms.gamma_sides);
  throw std::invalid_argument("mesh.type must be 'interval' or 'rect', got '" +
                              ms.type + "'");
}

inline CoefficientFields instantiate_coefficients(const Mesh& mesh,
                                                  const ScenarioSpec& spec) {
  CoefficientFields f;
  f.active = spec.formulation == Formulation::Coupled;
  const int ne = mesh.n_elements();
  const int nf = int(mesh.facets.size());
  auto cellwise = [&](const std::string& expr, double fallback) {
    Eigen::VectorXd v(ne);
    if (expr.empty()) {
      v.setConstant(fallback);
      return v;
    }
    Expr e = Expr::parse(expr);
    for (int c = 0; c < ne; ++c) {
      Eigen::Vector2d xy = mesh.centroid(c);
      v(c) = e(xy.x(), xy.y(), 0.0);
    }
    return v;
  };
  f.lambda = cellwise(f.active ? spec.coefficients.lambda : "", 1.0);
  f.rho = cellwise(f.active ? spec.coefficients.rho : "", 1.0);
  f.b = cellwise(f.active ? spec.coefficients.b : "", spec.params.b);
  f.delta = cellwise(f.active ? spec.coefficients.delta : "", spec.params.delta);
  f.k = cellwise(f.active ? spec.coefficients.k : "", spec.params.k);

  f.alpha.resize(nf);
  if (f.active && !spec.coefficients.alpha.empty()) {
    Expr e = Expr::parse(spec.coefficients.alpha);
    for (int i = 0; i < nf; ++i) {
      const Facet& ft = mesh.facets[i];
      Eigen::Vector2d xy = mesh.node_xy(ft.nodes[0]);
      if (ft.nodes[1] >= 0) xy = 0.5 * (xy + mesh.node_xy(ft.nodes[1]));
      f.alpha(i) = e(xy.x(), xy.y(), 0.0);
    }
  } else {
    f.alpha.setConstant(spec.params.alpha);
  }
  return f;
}

// Hard constraint violations throw; returns the list of advisory warnings.
inline std::vector<std::string> validate(const ScenarioSpec& spec) {
  const PhysicalParams& p = spec.params;
  if (!(p.b > 0.0))
    throw std::invalid_argument(
        "params.b = " + std::to_string(p.b) +
        ": the strong damping coefficient must be positive (b > 0); the "
        "undamped problem is outside this solver's scope");
  if (!(p.c2 > 0.0))
    throw std::invalid_argument("params.c2 must be positive");
  if (!(p.delta > 0.0 && p.delta < 1.0))
    throw std::invalid_argument(
        "params.delta must lie strictly between 0 and 1");
  if (p.q < 1.0) throw std::invalid_argument("params.q must be >= 1");
  if (p.alpha < 0.0 || p.beta < 0.0 || p.gamma < 0.0)
    throw std::invalid_argument("params.alpha/beta/gamma must be >= 0");
  if (spec.formulation == Formulation::W2 && !(p.eps > 0.0))
    throw std::invalid_argument(
        "params.epsilon must be positive for the W2 formulation");
  if (!(spec.time.T > 0.0))
    throw std::invalid_argument("time.T must be positive");
  if (spec.time.steps < 1)
    throw std::invalid_argument("time.steps must be >= 1");
  if (!(spec.solver.a_min > 0.0))
    throw std::invalid_argument("solver.a_min must be positive");
  if (spec.solver.engine != "picard" && spec.solver.engine != "monolithic")
    throw std::invalid_argument("solver.engine must be 'picard' or 'monolithic'");
  if (spec.solver.initial_iterate != "linear" &&
      spec.solver.initial_iterate != "constant")
    throw std::invalid_argument(
        "solver.initial_iterate must be 'linear' or 'constant'");

  Mesh mesh = build_mesh(spec.mesh);  // validates mesh parameters
  std::vector<std::string> warnings;
  const int d = mesh.dim;
  if (p.q + 1.0 <= double(d))
    warnings.push_back(
        "q + 1 <= dim: the W^{1,q+1} -> L^inf embedding is unavailable; "
        "sup-norm bounds and smallness certificates are not meaningful");
  if ((spec.formulation == Formulation::W2 ||
       spec.formulation == Formulation::W3) &&
      p.q < 3.0)
    warnings.push_back(
        "q < 3: the L^{q+1} -> L^4 embedding used by the higher-order "
        "analysis needs q >= 3; related reports will be inconclusive");
  if (spec.formulation == Formulation::Coupled) {
    CoefficientFields f = instantiate_coefficients(mesh, spec);
    if (f.lambda.minCoeff() <= 0.0)
      throw std::invalid_argument("coefficients.lambda must be positive everywhere");
    if (f.rho.minCoeff() <= 0.0)
      throw std::invalid_argument("coefficients.rho must be positive everywhere");
    if (f.b.minCoeff() <= 0.0)
      throw std::invalid_argument("coefficients.b must be positive everywhere");
    if (f.delta.minCoeff() <= 0.0 || f.delta.maxCoeff() >= 1.0)
      throw std::invalid_argument(
          "coefficients.delta must lie strictly between 0 and 1 everywhere");
    if (f.alpha.size() > 0 && f.alpha.minCoeff() < 0.0)
      throw std::invalid_argument("coefficients.alpha must be >= 0");
  }
  bool has_gamma = mesh.has_tag(BoundaryTag::GammaNeumann);
  if (!has_gamma && !spec.data.g.empty() && spec.data.g != "0")
    warnings.push_back(
        "boundary excitation g is set but the mesh has no Neumann facets");
  // Data expressions must parse even if never used.
  Expr::parse(spec.data.u0);
  Expr::parse(spec.data.u1);
  Expr::parse(spec.data.g);
  if (!spec.data.r.empty()) Expr::parse(spec.data.r);
  return warnings;
}

// ---- JSON loading ----

namespace detail {

inline void check_keys(const nlohmann::json& j,
                       const std::set<std::string>& allowed,
                       const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key()))
      throw std::invalid_argument("unknown key '" + it.key() + "' in " + where);
}

}  // namespace detail

inline ScenarioSpec scenario_from_json(const nlohmann::json& j) {
  detail::check_keys(j,
                     {"formulation", "mesh", "params", "coefficients", "data",
                      "time", "solver", "checks", "output", "sweep"},
                     "scenario");
  ScenarioSpec s;
  s.formulation = formulation_from_string(j.value("formulation", "W1"));
  if (j.contains("mesh")) {
    const auto& m = j.at("mesh");
    s.mesh.type = m.value("type", "interval");
    s.mesh.length = m.value("length", 1.0);
    s.mesh.elements = m.value("elements", 64);
    s.mesh.gamma_fraction = m.value("gamma_fraction", 1.0);
    s.mesh.lx = m.value("lx", 1.0);
    s.mesh.ly = m.value("ly", 1.0);
    s.mesh.nx = m.value("nx", 8);
    s.mesh.ny = m.value("ny", 8);
    if (m.contains("gamma_sides"))
      for (const auto& side : m.at("gamma_sides"))
        s.mesh.gamma_sides.insert(side.get<std::string>());
  }
  if (j.contains("params")) {
    const auto& p = j.at("params");
    s.params.c2 = p.value("c2", 1.0);
    s.params.b = p.value("b", 0.1);
    s.params.delta = p.value("delta", 0.5);
    s.params.q = p.value("q", 1.0);
    s.params.eps = p.value("epsilon", 0.0);
    s.params.k = p.value("k", 0.0);
    s.params.kt = p.value("k_tilde", 0.0);
    s.params.alpha = p.value("alpha", 0.0);
    s.params.beta = p.value("beta", 0.0);
    s.params.gamma = p.value("gamma", 0.0);
  }
  if (j.contains("coefficients")) {
    const auto& c = j.at("coefficients");
    s.coefficients.lambda = c.value("lambda", "1");
    s.coefficients.rho = c.value("rho", "1");
    s.coefficients.b = c.value("b", "");
    s.coefficients.delta = c.value("delta", "");
    s.coefficients.k = c.value("k", "");
    s.coefficients.alpha = c.value("alpha", "");
  }
  if (j.contains("data")) {
    const auto& d = j.at("data");
    s.data.u0 = d.value("u0", "0");
    s.data.u1 = d.value("u1", "0");
    s.data.g = d.value("g", "0");
    s.data.r = d.value("r", "");
  }
  if (j.contains("time")) {
    s.time.T = j.at("time").value("T", 1.0);
    s.time.steps = j.at("time").value("steps", 100);
  }
  if (j.contains("solver")) {
    const auto& so = j.at("solver");
    s.solver.engine = so.value("engine", "picard");
    s.solver.newton_tol = so.value("newton_tol", 1e-12);
    s.solver.max_newton = so.value("max_newton", 25);
    s.solver.picard_tol = so.value("picard_tol", 1e-10);
    s.solver.max_picard = so.value("max_picard", 30);
    s.solver.a_min = so.value("a_min", 1e-6);
    s.solver.initial_iterate = so.value("initial_iterate", "linear");
  }
  if (j.contains("checks")) {
    const auto& c = j.at("checks");
    s.checks.m_bar = c.value("m_bar", 0.0);
    s.checks.M_bar = c.value("M_bar", 0.0);
    if (c.contains("estimates"))
      for (const auto& e : c.at("estimates"))
        s.checks.estimates.push_back(e.get<std::string>());
    for (const char* key : {"free_params", "constants", "tol"})
      if (c.contains(key))
        for (auto it = c.at(key).begin(); it != c.at(key).end(); ++it) {
          double v = it.value().get<double>();
          if (std::string(key) == "free_params") s.checks.free_params[it.key()] = v;
          else if (std::string(key) == "constants") s.checks.constants[it.key()] = v;
          else s.checks.tol[it.key()] = v;
        }
  }
  if (j.contains("output") && j.at("output").contains("probes"))
    for (const auto& p : j.at("output").at("probes"))
      s.probes.push_back(p.get<int>());
  if (j.contains("sweep"))
    for (auto it = j.at("sweep").begin(); it != j.at("sweep").end(); ++it) {
      std::vector<double> vals;
      for (const auto& v : it.value()) vals.push_back(v.get<double>());
      s.sweep[it.key()] = vals;
    }
  return s;
}

// Numeric leaves addressable by sweep axes and CLI overrides.
inline void set_scenario_value(ScenarioSpec& s, const std::string& path,
                               double value) {
  if (path == "params.c2") s.params.c2 = value;
  else if (path == "params.b") s.params.b = value;
  else if (path == "params.delta") s.params.delta = value;
  else if (path == "params.q") s.params.q = value;
  else if (path == "params.epsilon") s.params.eps = value;
  else if (path == "params.k") s.params.k = value;
  else if (path == "params.k_tilde") s.params.kt = value;
  else if (path == "params.alpha") s.params.alpha = value;
  else if (path == "params.beta") s.params.beta = value;
  else if (path == "params.gamma") s.params.gamma = value;
  else if (path == "time.T") s.time.T = value;
  else if (path == "time.steps") s.time.steps = int(value);
  else if (path == "mesh.elements") s.mesh.elements = int(value);
  else if (path == "mesh.gamma_fraction") s.mesh.gamma_fraction = value;
  else if (path == "checks.m_bar") s.checks.m_bar = value;
  else if (path == "checks.M_bar") s.checks.M_bar = value;
  else
    throw std::invalid_argument("unknown scenario value path '" + path + "'");
}

}  // namespace westfem
