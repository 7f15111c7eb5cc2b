#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "hypokinetic/scenario.hpp"

namespace hypokinetic {

inline std::string num(double x) { return fmt::format("{:.17g}", x); }

inline std::ofstream open_output(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

// Output cadence roughly every 0.1 time units when output_every is left at
// its default and dt was chosen automatically.
inline int output_stride(const Scenario& s, double dt, double spacing = 0.1) {
  if (s.cfg.dt > 0.0) return s.cfg.output_every;
  return std::max(1, static_cast<int>(std::lround(spacing / dt)));
}

// high-field relaxation runs on the Kn time scale; sample it finely enough to fit
inline double output_spacing(double kn, Scaling scaling) {
  return scaling == Scaling::highfield ? 0.1 * std::min(1.0, kn) : 0.1;
}

struct SimulationResult {
  double kn = 1.0;
  Scaling scaling = Scaling::kinetic;
  Certificate cert;
  Trajectory traj;
  double fitted_rate = 0.0;
  double slowest_rate = std::numeric_limits<double>::quiet_NaN();
  int bound_violations = 0;  // ||f(t)|| > C(eps0) exp(-(lambda - 0.01) t) ||f0||
};

inline SimulationResult run_simulation(const Scenario& s, double kn, Scaling scaling,
                                       bool with_eigen = false, bool per_step_entropy = true) {
  SimulationResult r;
  r.kn = kn;
  r.scaling = scaling;
  r.cert = certify_scenario(s, s.cfg.z0, kn, scaling);
  ModelOperators ops = s.operators_at(s.cfg.z0, kn, scaling);
  double dt = s.time_step(kn);
  IntegrateOptions opt;
  opt.output_every = output_stride(s, dt, output_spacing(kn, scaling));
  opt.per_step_entropy = per_step_entropy;
  r.traj = integrate(ops, s.initial_field(), dt, s.cfg.t_end, r.cert.plan.eps0, opt);
  r.fitted_rate = fit_decay_rate_resolved(r.traj.times, r.traj.norms, s.cfg.fit_window);
  const double f0 = r.traj.norms.front();
  const RatePlan& p = r.cert.plan;
  for (size_t k = 0; k < r.traj.times.size(); ++k)
    if (r.traj.norms[k] > p.c_eps * std::exp(-(p.lambda_lower - 0.01) * r.traj.times[k]) * f0) ++r.bound_violations;
  if (with_eigen) r.slowest_rate = slowest_decay_rate(ops);
  return r;
}

inline void write_norms_csv(const std::filesystem::path& path, const Trajectory& tr) {
  auto out = open_output(path);
  out << "t,norm,entropy,dissipation,mass\n";
  for (size_t k = 0; k < tr.times.size(); ++k)
    out << num(tr.times[k]) << ',' << num(tr.norms[k]) << ',' << num(tr.entropies[k]) << ','
        << num(tr.dissipations[k]) << ',' << num(tr.masses[k]) << '\n';
}

inline std::string summary_header() {
  return "kn,scaling,alpha,beta,gamma,eps0,lambda_lower,lambda_numeric,c_eps,branch,fitted_rate,"
         "bound_violations,max_entropy_increase,max_mass_drift";
}

inline std::string summary_row(const SimulationResult& r) {
  const auto& k = r.cert.constants;
  const auto& p = r.cert.plan;
  return fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{},{}", num(r.kn), to_string(r.scaling), num(k.alpha),
                     num(k.beta), num(k.gamma), num(p.eps0), num(p.lambda_lower), num(p.lambda_numeric),
                     num(p.c_eps), to_string(p.branch), num(r.fitted_rate), r.bound_violations,
                     num(r.traj.max_entropy_increase), num(r.traj.max_mass_drift));
}

// ---- hierarchy -------------------------------------------------------------

struct BoundRow {
  double t = 0.0;
  int l = 0;
  double norm_gl = 0.0;
  double norm_gl_over_lfact = 0.0;
  double bound_gl1 = 0.0;
  double bound_gl2_poly = 0.0;
  double bound_gl2_exp = 0.0;
  double bound_kn = 0.0;
  bool violated = false;
};

struct HierarchyResult {
  double kn = 1.0;
  Scaling scaling = Scaling::kinetic;
  Certificate cert;
  BoundConstants constants;
  double lambda_uniform = 0.0;  // min over z-nodes of the certified rate
  Hierarchy hier;
  std::vector<BoundRow> rows;
  int violations = 0;
  std::vector<double> decay_rates;                 // per l
  std::vector<std::pair<int, double>> radius;      // (lmax', proxy)
};

inline double uniform_rate(const Scenario& s, double kn, Scaling scaling, int nodes = 9) {
  std::vector<CoercivityConstants> ks;
  Vec z = chebyshev_nodes(nodes, s.cfg.z_min, s.cfg.z_max);
  for (int k = 0; k < z.size(); ++k) {
    AssumptionReport rep = check_assumptions(s.T, s.collision_at(z(k)), build_projection(s.grid));
    if (!(rep.alpha_ok && rep.beta_ok && rep.gamma_ok)) throw ValidationError("assumption (bounds in z) violated");
    ks.push_back(rep.constants());
  }
  return uniform_rate_over_z(ks, kn, scaling);
}

inline std::vector<std::pair<int, double>> hierarchy_radius(const Hierarchy& h) {
  std::vector<std::pair<int, double>> out;
  for (int lm = 5; lm <= h.lmax; ++lm) {
    double r = std::numeric_limits<double>::infinity();
    for (size_t t = 0; t < h.times.size(); ++t)
      if (h.times[t] > 0.0) r = std::min(r, estimate_radius(h.norms[t], lm));
    out.emplace_back(lm, r);
  }
  return out;
}

inline HierarchyResult run_hierarchy(const Scenario& s, int lmax, double kn, Scaling scaling) {
  require(lmax >= 0 && lmax <= max_hierarchy_order, "lmax must lie in [0, 10]");
  HierarchyResult r;
  r.kn = kn;
  r.scaling = scaling;
  r.cert = certify_scenario(s, s.cfg.z0, kn, scaling);
  r.constants = bound_constants(s, r.cert.plan);
  r.lambda_uniform = uniform_rate(s, kn, scaling);

  ModelOperators ops = s.operators_at(s.cfg.z0, kn, scaling);
  double dt = s.time_step(kn);
  HierarchyOptions opt;
  opt.output_every = output_stride(s, dt, output_spacing(kn, scaling));
  auto sources = sigma_source_operators(s.L_base, s.sigma, lmax);
  r.hier = solve_hierarchy(ops, sources, s.initial_derivatives(lmax), lmax, s.cfg.z0, dt, s.cfg.t_end, opt);

  const BoundConstants& k = r.constants;
  const bool affine = k.kind == SigmaKind::affine;
  for (size_t t = 0; t < r.hier.times.size(); ++t)
    for (int l = 0; l <= lmax; ++l) {
      BoundRow row;
      row.t = r.hier.times[t];
      row.l = l;
      row.norm_gl = r.hier.norms[t][l];
      row.norm_gl_over_lfact = row.norm_gl / factorial(l);
      row.bound_gl1 = affine ? bound_gl1(row.t, l, k.H, k.c1_tilde(), k.lambda_z, k.c_z)
                             : std::numeric_limits<double>::infinity();
      Gl2Bound b2 = bound_gl2(row.t, l, k.H, k.c2_tilde(), k.lambda_z, k.eps_z);
      row.bound_gl2_poly = b2.branch_poly;
      row.bound_gl2_exp = b2.branch_exp;
      row.bound_kn = bound_kn(row.t, l, k, kn, scaling);
      double measured = affine ? row.norm_gl : row.norm_gl_over_lfact;
      row.violated = measured > row.bound_kn;
      r.violations += row.violated;
      r.rows.push_back(row);
    }
  for (int l = 0; l <= lmax; ++l) {
    std::vector<double> nl;
    for (const auto& n : r.hier.norms) nl.push_back(n[l]);
    double peak = *std::max_element(nl.begin(), nl.end());
    // identically zero derivative: nothing to decay
    r.decay_rates.push_back(peak > 0.0 ? fit_decay_rate_resolved(r.hier.times, nl, s.cfg.fit_window)
                                       : std::numeric_limits<double>::infinity());
  }
  r.radius = hierarchy_radius(r.hier);
  return r;
}

inline void write_hierarchy_csv(const std::filesystem::path& path, const HierarchyResult& r) {
  auto out = open_output(path);
  out << "t,l,norm_gl,norm_gl_over_lfact,bound_gl1,bound_gl2_poly,bound_gl2_exp,bound_kn\n";
  for (const BoundRow& b : r.rows)
    out << num(b.t) << ',' << b.l << ',' << num(b.norm_gl) << ',' << num(b.norm_gl_over_lfact) << ','
        << num(b.bound_gl1) << ',' << num(b.bound_gl2_poly) << ',' << num(b.bound_gl2_exp) << ','
        << num(b.bound_kn) << '\n';
}

inline void write_radius_csv(const std::filesystem::path& path, const HierarchyResult& r) {
  auto out = open_output(path);
  out << "lmax,radius_proxy\n";
  for (const auto& [lm, rad] : r.radius) out << lm << ',' << num(rad) << '\n';
}

}  // namespace hypokinetic
