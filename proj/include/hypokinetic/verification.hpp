#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "hypokinetic/runs.hpp"

namespace hypokinetic {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
  double limit = 0.0;  // runtime budget in seconds, 0 = none
};

inline std::string format_line(const CriterionResult& r) {
  return fmt::format("[{}] criterion {:>2} {}: {} ({:.2f}s{})", r.passed ? "PASS" : "FAIL", r.id, r.name,
                     r.detail, r.seconds, r.limit > 0 ? fmt::format(" / {:.0f}s", r.limit) : "");
}

// Runs body(detail) under a timer; the runtime budget is part of the verdict.
inline CriterionResult timed(int id, std::string name, double limit,
                             const std::function<bool(std::string&)>& body) {
  CriterionResult r;
  r.id = id;
  r.name = std::move(name);
  r.limit = limit;
  auto t0 = std::chrono::steady_clock::now();
  bool ok = false;
  try {
    ok = body(r.detail);
  } catch (const std::exception& e) {
    r.detail += std::string(r.detail.empty() ? "" : "; ") + "error: " + e.what();
    ok = false;
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (limit > 0 && r.seconds >= limit) {
    r.detail += fmt::format("; over runtime budget");
    ok = false;
  }
  r.passed = ok;
  return r;
}

// Mass drift and entropy increase collected over every run of a suite.
struct RunLedger {
  double max_mass_drift = 0.0;
  double max_entropy_increase = -std::numeric_limits<double>::infinity();
  int runs = 0;

  void add(const Trajectory& tr) {
    max_mass_drift = std::max(max_mass_drift, tr.max_mass_drift);
    max_entropy_increase = std::max(max_entropy_increase, tr.max_entropy_increase);
    ++runs;
  }
};

// ---- 1: assumptions --------------------------------------------------------

inline bool check_assumptions_for(const Scenario& s, const std::string& label, std::string& detail) {
  AssumptionReport r = check_assumptions(s.T, s.collision_at(s.cfg.z0), build_projection(s.grid));
  detail += fmt::format("{}: |T+T*|={:.1e} |L-L*|={:.1e} |PTP|={:.1e} a={:.4g} b={:.4g} g={:.4g}", label,
                        r.transport_skew, r.collision_sym, r.pi_t_pi, r.alpha, r.beta, r.gamma);
  for (const auto& f : r.failures) detail += " [" + f + "]";
  return r.passed();
}

inline CriterionResult criterion_assumptions(const std::vector<std::pair<std::string, Scenario>>& scenarios,
                                             int id = 1, double limit = 5.0) {
  return timed(id, "assumption certification", limit, [&](std::string& d) {
    bool ok = true;
    for (const auto& [label, s] : scenarios) {
      if (!d.empty()) d += "; ";
      ok = check_assumptions_for(s, label, d) && ok;
    }
    return ok;
  });
}

// ---- 2: rate bound domination ---------------------------------------------

inline CriterionResult criterion_rate_domination(int id = 2, double limit = 5.0) {
  return timed(id, "rate bound domination", limit, [](std::string& d) {
    std::mt19937_64 rng(20240601);
    auto uniform = [&](double lo, double hi) {
      return lo + (hi - lo) * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
    };
    int bad = 0;
    double worst = -1e300;
    for (int k = 0; k < 1000; ++k) {
      double a = uniform(0.1, 10), c = uniform(0.1, 10), dd = uniform(0.1, 10);
      double num_l = lambda_numeric(a, c, dd).lambda;
      double lp = lower_bound_parabolic(a, c, dd).lambda;
      double lh = lower_bound_highfield(a, c, dd).lambda;
      worst = std::max({worst, lp - num_l, lh - num_l});
      if (lp > num_l + 1e-10 || lh > num_l + 1e-10 || !(lp > 0) || !(lh > 0)) ++bad;
    }
    double s1 = lower_bound_parabolic(1, 1, 1).lambda;
    double s2 = lower_bound_highfield(1, 1, 1).lambda;
    double s3 = lower_bound_highfield(10, 1, 1).lambda;
    // spot values from hand arithmetic on the parabolic and high-field lower-bound formulas
    const double e1 = 1.0 / 15.0;
    const double e2 = (0.5 / 1.25) / (2.0 * (1.5 + std::sqrt(1.25)));
    const double e3 = (1.0 / 3.0) / (9.5 + std::sqrt(8.5 * 8.5 + 1.0));
    bool spots = std::abs(s1 - e1) <= 1e-6 && std::abs(s2 - e2) <= 1e-6 && std::abs(s3 - e3) <= 1e-6 &&
                 std::abs(s2 - 0.0764) <= 1e-4 && std::abs(s3 - 0.01846) <= 1e-5;
    d = fmt::format("1000 triples, {} dominated bounds violated, max(bound - numeric)={:.2e}; spots {:.6f} {:.6f} {:.6f}",
                    bad, worst, s1, s2, s3);
    return bad == 0 && spots;
  });
}

// ---- 3: Kn-uniformity ------------------------------------------------------

struct KnUniformity {
  double par_ratio = 0.0;  // max/min over Kn of the parabolic bound
  double hf_ratio = 0.0;   // same for the high-field branch bound
  double hf_exact_ratio = 0.0;  // same for lambda(eps0) itself, informational
  bool eps_ok = true;
  std::string detail;
};

inline KnUniformity kn_uniformity(const CoercivityConstants& k) {
  KnUniformity u;
  const double kns[] = {1.0, 1e-1, 1e-2, 1e-3};
  double pmin = 1e300, pmax = 0, hmin = 1e300, hmax = 0, emin = 1e300, emax = 0;
  std::string pv, hv;
  for (double kn : kns) {
    auto p = rescale(k, kn, Scaling::parabolic).derived;
    auto h = rescale(k, kn, Scaling::highfield).derived;
    LowerBound lp = lower_bound_parabolic(p.a, p.c, p.d);
    LowerBound lh = lower_bound_highfield(h.a, h.c, h.d);
    double ex = lambda_of_eps(h.a, h.c, h.d, lh.eps0).lambda;
    u.eps_ok = u.eps_ok && lp.eps0 < 1.0 && lh.eps0 < 1.0;
    pmin = std::min(pmin, lp.lambda);
    pmax = std::max(pmax, lp.lambda);
    hmin = std::min(hmin, lh.lambda);
    hmax = std::max(hmax, lh.lambda);
    emin = std::min(emin, ex);
    emax = std::max(emax, ex);
    pv += fmt::format("{}{:.4g}", pv.empty() ? "" : ",", lp.lambda);
    hv += fmt::format("{}{:.4g}", hv.empty() ? "" : ",", lh.lambda);
  }
  u.par_ratio = pmax / pmin;
  u.hf_ratio = hmax / hmin;
  u.hf_exact_ratio = emax / emin;
  u.detail = fmt::format("parabolic [{}] ratio {:.3f}; highfield [{}] ratio {:.3f} (lambda(eps0) ratio {:.3f})", pv,
                         u.par_ratio, hv, u.hf_ratio, u.hf_exact_ratio);
  return u;
}

// Verdict on `ks`; `info` constants are reported but do not decide the outcome.
inline CriterionResult criterion_kn_uniformity(const std::vector<CoercivityConstants>& ks, bool include_highfield,
                                               const std::vector<CoercivityConstants>& info = {}, int id = 3,
                                               double limit = 1.0) {
  return timed(id, include_highfield ? "Kn-uniformity (parabolic + high-field)" : "Kn-uniformity (parabolic)",
               limit, [&](std::string& d) {
                 bool ok = true;
                 auto describe = [&](const CoercivityConstants& k, const KnUniformity& u, const char* tag) {
                   if (!d.empty()) d += " | ";
                   d += fmt::format("{}(a,b,g)=({:.3g},{:.3g},{:.3g}) ", tag, k.alpha, k.beta, k.gamma) + u.detail;
                 };
                 for (const auto& k : ks) {
                   KnUniformity u = kn_uniformity(k);
                   describe(k, u, "");
                   ok = ok && u.eps_ok && u.par_ratio <= 3.0;
                   if (include_highfield) ok = ok && u.hf_ratio <= 3.0;
                 }
                 for (const auto& k : info) describe(k, kn_uniformity(k), "info ");
                 return ok;
               });
}

// ---- 4/5: decay -------------------------------------------------------------

inline bool decay_checks(const SimulationResult& r, std::string& d, RunLedger& ledger) {
  ledger.add(r.traj);
  const RatePlan& p = r.cert.plan;
  bool ok = r.bound_violations == 0 && r.fitted_rate >= p.lambda_lower - 0.01 &&
            r.traj.max_entropy_increase <= 1e-10;
  d += fmt::format("Kn={} {}: lambda_lower={:.4g} eps0={:.4g} C={:.4g} fitted={:.4g} violations={}", r.kn,
                   to_string(r.scaling), p.lambda_lower, p.eps0, p.c_eps, r.fitted_rate, r.bound_violations);
  if (!std::isnan(r.slowest_rate)) {
    ok = ok && p.lambda_lower <= r.slowest_rate + 1e-8;
    d += fmt::format(" slowest|Re|={:.4g}", r.slowest_rate);
  }
  return ok;
}

inline CriterionResult criterion_decay(const Scenario& s, RunLedger& ledger, int id = 4, double limit = 30.0) {
  return timed(id, "hypocoercive decay", limit, [&](std::string& d) {
    SimulationResult r = run_simulation(s, s.cfg.kn, s.cfg.scaling, true);
    return decay_checks(r, d, ledger);
  });
}

inline CriterionResult criterion_uniform_decay(const Scenario& s, RunLedger& ledger, int id = 5,
                                               double limit = 60.0) {
  return timed(id, "uniform-in-Kn decay", limit, [&](std::string& d) {
    // the step bound shrinks with Kn: take the largest admissible step
    Scenario auto_dt = s;
    auto_dt.cfg.dt = 0.0;
    bool ok = true;
    for (Scaling sc : {Scaling::parabolic, Scaling::highfield})
      for (double kn : {0.1, 0.01}) {
        SimulationResult r = run_simulation(auto_dt, kn, sc, true);
        if (!d.empty()) d += "; ";
        ok = decay_checks(r, d, ledger) && ok;
      }
    return ok;
  });
}

// ---- 6: entropy / dissipation ---------------------------------------------

inline CriterionResult criterion_entropy(const Scenario& s, RunLedger& ledger, int id = 6, double limit = 10.0) {
  return timed(id, "entropy/dissipation consistency", limit, [&](std::string& d) {
    Certificate c = certify_scenario(s, s.cfg.z0, s.cfg.kn, s.cfg.scaling);
    ModelOperators ops = s.operators_at(s.cfg.z0);
    const double dt = std::min(0.02, max_time_step(*s.grid, s.cfg.kn));
    const double t_end = 2.0;
    IntegrateOptions o;
    o.output_every = 10;
    o.per_step_residual = true;
    Trajectory a = integrate(ops, s.initial_field(), dt, t_end, c.plan.eps0, o);
    o.output_every = 20;
    Trajectory b = integrate(ops, s.initial_field(), 0.5 * dt, t_end, c.plan.eps0, o);
    ledger.add(a);
    ledger.add(b);
    double ratio = a.max_entropy_residual / b.max_entropy_residual;
    double inc = std::max(a.max_entropy_increase, b.max_entropy_increase);
    d = fmt::format("eps={:.4g} max dH/step={:.2e} residual dt={:.3g}: {:.3e}, dt/2: {:.3e}, ratio {:.3f}",
                    c.plan.eps0, inc, a.dt, a.max_entropy_residual, b.max_entropy_residual, ratio);
    return inc <= 1e-10 && ratio >= 1.8;
  });
}

// ---- 7: mass ----------------------------------------------------------------

inline CriterionResult criterion_mass(const RunLedger& ledger, int id = 7) {
  return timed(id, "mass conservation", 0.0, [&](std::string& d) {
    d = fmt::format("{} runs, max |M(t) - M(0)| = {:.2e}", ledger.runs, ledger.max_mass_drift);
    return ledger.runs > 0 && ledger.max_mass_drift <= 1e-12;
  });
}

// ---- 8: cascades ------------------------------------------------------------

// Classical RK4 on y' = F(y), fixed step count.
inline std::vector<double> rk4(std::vector<double> y, double t_end, int steps,
                               const std::function<std::vector<double>(double, const std::vector<double>&)>& F) {
  const double h = t_end / steps;
  const size_t n = y.size();
  std::vector<double> k1, k2, k3, k4, tmp(n);
  for (int s = 0; s < steps; ++s) {
    double t = s * h;
    k1 = F(t, y);
    for (size_t i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * h * k1[i];
    k2 = F(t + 0.5 * h, tmp);
    for (size_t i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * h * k2[i];
    k3 = F(t + 0.5 * h, tmp);
    for (size_t i = 0; i < n; ++i) tmp[i] = y[i] + h * k3[i];
    k4 = F(t + h, tmp);
    for (size_t i = 0; i < n; ++i) y[i] += h / 6.0 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
  }
  return y;
}

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

inline CriterionResult criterion_cascades(int id = 8, double limit = 5.0) {
  return timed(id, "cascade oracles", limit, [](std::string& d) {
    const int L = 8;
    const double c1 = 0.7, lam = 0.3, c2 = 0.6;
    std::vector<double> h0(L + 1), e0(L + 1);
    for (int l = 0; l <= L; ++l) {
      h0[l] = 1.0 / (1.0 + l);
      e0[l] = std::pow(0.8, l) / factorial(l);
    }
    double worst_h = 0.0, worst_e = 0.0;
    for (double T : {0.5, 1.0, 2.5, 5.0}) {
      auto h = rk4(h0, T, 4000, [&](double, const std::vector<double>& y) {
        std::vector<double> f(y.size());
        for (size_t l = 0; l < y.size(); ++l) f[l] = -lam * y[l] + (l ? c1 * l * y[l - 1] : 0.0);
        return f;
      });
      auto e = rk4(e0, T, 4000, [&](double, const std::vector<double>& y) {
        std::vector<double> f(y.size(), 0.0);
        double acc = 0.0;
        for (size_t l = 0; l < y.size(); ++l) {
          f[l] = c2 * acc;
          acc += y[l];
        }
        return f;
      });
      for (int l = 0; l <= L; ++l) {
        worst_h = std::max(worst_h, rel_err(h[l], cascade_hl_bound(T, l, c1, lam, h0)));
        auto ex = cascade_eta_exact(T, l, c2, e0);
        worst_e = std::max(worst_e, rel_err(e[l], ex[l]));
      }
    }
    double worst_j = 0.0;
    for (int l = 0; l <= 12; ++l) worst_j = std::max(worst_j, jordan_residual(cascade_jordan(l)));
    int order_bad = 0;
    for (double H : {0.0, 1.0})
      for (double c : {0.5, 1.0, 2.0})
        for (int l = 0; l <= 10; ++l) {
          std::vector<double> init(l + 1);
          for (int j = 0; j <= l; ++j) init[j] = std::pow(H, j) / factorial(j);
          for (int k = 0; k <= 20; ++k) {
            double t = 0.25 * k;
            double ex = cascade_eta_exact(t, l, c, init)[l];
            EtaBound b = cascade_eta_bound(t, l, c, H);
            double tol = 1e-12 * (1.0 + b.sharp);
            if (!(ex <= b.sharp + tol && b.sharp <= std::min(b.relaxed_poly, b.relaxed_exp) + tol)) ++order_bad;
          }
        }
    d = fmt::format("RK4 rel err h={:.1e} eta={:.1e}; |AS-SJ|max={:.1e}; ordering violations={}", worst_h,
                    worst_e, worst_j, order_bad);
    return worst_h <= 1e-8 && worst_e <= 1e-8 && worst_j <= 1e-9 && order_bad == 0;
  });
}

// ---- 9/10/11: hierarchy ----------------------------------------------------

inline bool hierarchy_checks(const HierarchyResult& r, const std::string& label, std::string& d) {
  bool ok = r.violations == 0;
  std::string rates;
  for (int l = 0; l <= std::min(3, r.hier.lmax); ++l) {
    rates += fmt::format("{}{:.3g}", rates.empty() ? "" : ",", r.decay_rates[l]);
    ok = ok && r.decay_rates[l] >= r.lambda_uniform - 0.02;
  }
  d += fmt::format("{} Kn={} {}: violations={} rates[{}] vs lambda_min={:.4g}", label, r.kn, to_string(r.scaling),
                   r.violations, rates, r.lambda_uniform);
  return ok;
}

struct HierarchyCase {
  std::string label;
  Scenario scenario;
  double kn;
  Scaling scaling;
};

inline CriterionResult criterion_derivative_bounds(const std::vector<HierarchyCase>& cases, int lmax,
                                                   std::vector<HierarchyResult>& results, int id = 9,
                                                   double limit = 60.0) {
  return timed(id, "derivative bounds", limit, [&](std::string& d) {
    bool ok = true;
    for (const auto& c : cases) {
      results.push_back(run_hierarchy(c.scenario, lmax, c.kn, c.scaling));
      if (!d.empty()) d += "; ";
      ok = hierarchy_checks(results.back(), c.label, d) && ok;
    }
    return ok;
  });
}

inline CriterionResult criterion_radius(const std::vector<HierarchyResult>& results, int id = 10,
                                        double limit = 5.0) {
  return timed(id, "radius proxy", limit, [&](std::string& d) {
    const double H = 1.0;
    std::vector<double> seq(21);
    for (int l = 0; l <= 20; ++l) seq[l] = std::pow(2.0, l - 1) * std::pow(1.0 + H, l + 1) * factorial(l);
    double r = estimate_radius(seq, 20);
    bool ok = std::abs(r - 0.25) <= 0.02;
    d = fmt::format("bound-implied sequence proxy={:.4f}", r);
    for (const auto& h : results) {
      if (h.radius.empty()) continue;
      double need = 1.0 / (2.0 * (1.0 + h.constants.H)) - 0.02;
      double got = h.radius.back().second;
      d += fmt::format("; Kn={} {} proxy={:.4g} (>= {:.4g})", h.kn, to_string(h.scaling), got, need);
      ok = ok && got >= need;
    }
    return ok;
  });
}

inline CriterionResult criterion_collocation(const Scenario& s, int lmax_check = 3, int id = 11,
                                             double limit = 60.0) {
  return timed(id, "hierarchy vs collocation", limit, [&](std::string& d) {
    const int lmax = std::max(lmax_check, 3);
    ModelOperators ops = s.operators_at(s.cfg.z0);
    double dt = s.time_step();
    int stride = output_stride(s, dt);
    HierarchyOptions opt;
    opt.output_every = stride;
    Hierarchy h = solve_hierarchy(ops, sigma_source_operators(s.L_base, s.sigma, lmax), s.initial_derivatives(lmax),
                                  lmax, s.cfg.z0, dt, s.cfg.t_end, opt);
    CollocationResult c = collocation_derivatives(
        [&](double z) { return s.operators_at(z); }, [&](double z) { return s.initial_at(z); },
        std::max(s.cfg.collocation_nodes, 2 * lmax + 1), s.cfg.z_min, s.cfg.z_max, s.cfg.z0, lmax, dt,
        s.cfg.t_end, stride);
    double worst = 0.0, worst_rel = 0.0;
    for (size_t t = 0; t < h.times.size(); ++t)
      for (int l = 0; l <= lmax_check; ++l) {
        double a = h.norms[t][l], b = c.norms[t][l];
        worst = std::max(worst, std::abs(a - b) / (0.01 * std::abs(a) + 1e-8));
        if (std::abs(a) > 1e-6) worst_rel = std::max(worst_rel, std::abs(a - b) / std::abs(a));
      }
    d = fmt::format("{} nodes, max relative difference {:.2e} (l <= {}), normalized {:.3f} <= 1", c.z_nodes.size(),
                    worst_rel, lmax_check, worst);
    return h.times.size() == c.times.size() && worst <= 1.0;
  });
}

}  // namespace hypokinetic
