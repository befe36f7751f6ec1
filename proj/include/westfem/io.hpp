#pragma once

// Deterministic output: every floating-point value is printed with %.17g so
// repeated runs produce byte-identical files.  No timestamps, no locale.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "westfem/certificate.hpp"
#include "westfem/energy.hpp"
#include "westfem/evolution.hpp"
#include "westfem/fixedpoint.hpp"
#include "westfem/mms.hpp"
#include "westfem/norms.hpp"

namespace westfem {

inline std::string format_g(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline void ensure_dir(const std::string& path) {
  std::filesystem::create_directories(path);
}

inline std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  return out;
}

inline void write_trajectory_csv(const std::string& path, const Mesh& mesh,
                                 const Trajectory& traj,
                                 const std::vector<int>& probes) {
  std::ofstream out = open_out(path);
  std::vector<int> cols = probes;
  if (cols.empty())
    for (int i = 0; i < mesh.n_nodes(); ++i) cols.push_back(i);
  out << "t";
  for (int c : cols) out << ",u" << c;
  for (int c : cols) out << ",v" << c;
  out << "\n";
  for (int n = 0; n <= traj.steps(); ++n) {
    out << format_g(traj.grid.t(n));
    for (int c : cols) out << "," << format_g(traj.u(c, n));
    for (int c : cols) out << "," << format_g(traj.v(c, n));
    out << "\n";
  }
}

inline void write_kv(std::ofstream& out, const std::string& key, double v) {
  out << key << " = " << format_g(v) << "\n";
}

inline void write_norms_kv(const std::string& path, const TrajectoryNorms& tn,
                           const DataNorms& dn, const GNorms& gn,
                           double triple) {
  std::ofstream out = open_out(path);
  write_kv(out, "utt_L2L2", tn.utt_L2L2);
  write_kv(out, "v_LinfL2", tn.v_LinfL2);
  write_kv(out, "v_LinfH1", tn.v_LinfH1);
  write_kv(out, "v_L2L2", tn.v_L2L2);
  write_kv(out, "v_Lq1Lq1", tn.v_Lq1Lq1);
  write_kv(out, "v_LinfLq1", tn.v_LinfLq1);
  write_kv(out, "gv_L2L2", tn.gv_L2L2);
  write_kv(out, "gv_LinfL2", tn.gv_LinfL2);
  write_kv(out, "gv_Lq1Lq1", tn.gv_Lq1Lq1);
  write_kv(out, "gv_LinfLq1", tn.gv_LinfLq1);
  write_kv(out, "gu_LinfL2", tn.gu_LinfL2);
  write_kv(out, "gu_LinfLq1", tn.gu_LinfLq1);
  write_kv(out, "v_L2Gh", tn.v_L2Gh);
  write_kv(out, "v_LinfGh", tn.v_LinfGh);
  write_kv(out, "u0_L1", dn.u0_L1);
  write_kv(out, "gu0_L2", dn.gu0_L2);
  write_kv(out, "gu0_Lq1", dn.gu0_Lq1);
  write_kv(out, "gu0_L4", dn.gu0_L4);
  write_kv(out, "gu1_L2", dn.gu1_L2);
  write_kv(out, "u1_L2", dn.u1_L2);
  write_kv(out, "u1_H1", dn.u1_H1);
  write_kv(out, "u1_W1q1", dn.u1_W1q1);
  write_kv(out, "u1_L2Gh", dn.u1_L2Gh);
  write_kv(out, "g_L1L2", gn.L1L2);
  write_kv(out, "g_L2L2", gn.L2L2);
  write_kv(out, "g_LinfL2", gn.LinfL2);
  write_kv(out, "g_LpLp", gn.LpLp);
  write_kv(out, "g_LinfLp", gn.LinfLp);
  write_kv(out, "gt_L1L2", gn.gt_L1L2);
  write_kv(out, "gt_LpLp", gn.gt_LpLp);
  write_kv(out, "triple_norm", triple);
}

inline void write_energy_csv(const std::string& path, const TimeGrid& grid,
                             const Eigen::VectorXd& E) {
  std::ofstream out = open_out(path);
  out << "step,t,energy\n";
  for (int n = 0; n < E.size(); ++n)
    out << n << "," << format_g(grid.t(n)) << "," << format_g(E(n)) << "\n";
}

inline void write_iterations_csv(const std::string& path,
                                 const std::vector<IterationRecord>& log) {
  std::ofstream out = open_out(path);
  out << "iter,increment,ratio\n";
  for (const auto& rec : log)
    out << rec.iter << "," << format_g(rec.increment) << ","
        << format_g(rec.ratio) << "\n";
}

inline void write_energy_report(const std::string& path,
                                const EnergyReport& rep) {
  std::ofstream out = open_out(path);
  out << "estimate = " << rep.id << "\n";
  out << "status = " << rep.status << "\n";
  write_kv(out, "lhs", rep.lhs);
  write_kv(out, "rhs", rep.rhs);
  write_kv(out, "margin", rep.margin);
  if (rep.uses_cbar) {
    write_kv(out, "cbar", rep.cbar);
    write_kv(out, "cbar_required", rep.cbar_required);
  }
  for (const auto& t : rep.lhs_terms) {
    write_kv(out, "lhs." + t.name + ".coeff", t.coeff);
    write_kv(out, "lhs." + t.name + ".value", t.value);
    write_kv(out, "lhs." + t.name + ".contribution", t.contribution());
  }
  for (const auto& t : rep.rhs_terms) {
    write_kv(out, "rhs." + t.name + ".coeff", t.coeff);
    write_kv(out, "rhs." + t.name + ".value", t.value);
    write_kv(out, "rhs." + t.name + ".contribution", t.contribution());
  }
  for (const auto& [k, v] : rep.params) write_kv(out, "param." + k, v);
  for (const auto& n : rep.notes) out << "note = " << n << "\n";
}

inline void write_certificate(const std::string& path,
                              const SmallnessCertificate& cert) {
  std::ofstream out = open_out(path);
  out << "formulation = " << to_string(cert.form) << "\n";
  out << "pass = " << (cert.pass ? "true" : "false") << "\n";
  write_kv(out, "a0", cert.a0);
  write_kv(out, "a_lb", cert.a_lb);
  write_kv(out, "kappa", cert.kappa);
  write_kv(out, "kappa_cap", cert.kappa_cap);
  write_kv(out, "m_bar", cert.m_bar);
  write_kv(out, "M_bar", cert.M_bar);
  for (const auto& c : cert.conditions) {
    out << "condition." << c.id << " = " << (c.pass ? "pass" : "fail")
        << "\n";
    write_kv(out, "condition." + c.id + ".lhs", c.lhs);
    write_kv(out, "condition." + c.id + ".rhs", c.rhs);
    if (!c.note.empty())
      out << "condition." << c.id << ".note = " << c.note << "\n";
  }
  for (const auto& [k, v] : cert.params) write_kv(out, "param." + k, v);
  for (const auto& n : cert.notes) out << "note = " << n << "\n";
}

inline void write_constants_kv(const std::string& path,
                               const ConstantsTable& ct) {
  std::ofstream out = open_out(path);
  write_kv(out, "C_P", ct.C_P);
  out << "method.C_P = " << ct.method_C_P << "\n";
  write_kv(out, "C_HL4", ct.C_HL4);
  out << "method.C_HL4 = " << ct.method_C_HL4 << "\n";
  write_kv(out, "C_W", ct.C_W);
  out << "method.C_W = " << ct.method_C_W << "\n";
  write_kv(out, "C1_tr", ct.C1_tr);
  out << "method.C1_tr = " << ct.method_C1_tr << "\n";
  write_kv(out, "C2_tr", ct.C2_tr);
  out << "method.C2_tr = " << ct.method_C2_tr << "\n";
  write_kv(out, "C_Lq1L4", ct.C_Lq1L4);
  out << "method.C_Lq1L4 = " << ct.method_C_Lq1L4 << "\n";
  write_kv(out, "C_HLinf", ct.C_HLinf);
  out << "method.C_HLinf = " << ct.method_C_HLinf << "\n";
  write_kv(out, "C1_omega", ct.C1_omega);
  write_kv(out, "C2_omega", ct.C2_omega);
}

inline void write_convergence_csv(const std::string& path,
                                  const ConvergenceTable& tbl,
                                  const std::string& scale_name) {
  std::ofstream out = open_out(path);
  out << scale_name << ",error\n";
  for (size_t i = 0; i < tbl.scale.size(); ++i)
    out << format_g(tbl.scale[i]) << "," << format_g(tbl.error[i]) << "\n";
  out << "order," << format_g(tbl.order) << "\n";
}

}  // namespace westfem
