#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "hypokinetic/config.hpp"
#include "hypokinetic/operators.hpp"
#include "hypokinetic/phase_space.hpp"
#include "hypokinetic/rates.hpp"
#include "hypokinetic/sigma.hpp"
#include "hypokinetic/solver.hpp"
#include "hypokinetic/uq.hpp"

namespace hypokinetic {

// Everything a run needs, assembled from a Config. L_base is the z-free
// collision (Pi - I for BGK, the kernel operator otherwise); the physical
// collision at z is diag(sigma(x, z)) L_base.
struct Scenario {
  Config cfg;
  GridPtr grid;
  KineticOperator T;
  KineticOperator L_base;
  SigmaModel sigma;

  explicit Scenario(const Config& c) : cfg(c) {
    cfg.validate();
    GridOptions go;
    go.vmax = cfg.vmax;
    go.velocity_shift = cfg.velocity_shift;
    grid = build_grid(cfg.nx, cfg.lx, cfg.nv, cfg.velocity_rule, go);
    T = build_transport(grid, cfg.derivative);
    if (cfg.collision == CollisionModel::bgk)
      L_base = build_bgk(grid, Vec::Ones(grid->nx));
    else
      L_base = build_anisotropic(grid, gaussian_kernel(*grid, cfg.kernel_base, cfg.kernel_amplitude,
                                                       cfg.kernel_width));
    if (cfg.sigma_kind == SigmaKind::affine)
      sigma = affine_sigma(*grid, cfg.sigma_base, cfg.sigma_slope, cfg.sigma_base_variation,
                           cfg.sigma_slope_variation);
    else
      sigma = analytic_sigma(*grid, cfg.sigma_base, cfg.sigma_amplitude, cfg.sigma_frequency,
                             cfg.sigma_base_variation, cfg.sigma_amplitude_variation);
    sigma.z0 = cfg.z0;
    sigma.z_min = cfg.z_min;
    sigma.z_max = cfg.z_max;
    sigma.validate();
  }

  KineticOperator collision_at(double z) const {
    KineticOperator L = L_base;
    Vec s = sigma.value(z);
    const int nv = grid->nv;
    for (int i = 0; i < grid->nx; ++i) {
      L.blocks[i] = s(i) * L_base.blocks[i];
      L.matrix.block(i * nv, i * nv, nv, nv) = L.blocks[i];
    }
    return L;
  }

  ModelOperators operators_at(double z, double kn, Scaling scaling) const {
    return scaled_operators(T, collision_at(z), kn, scaling);
  }
  ModelOperators operators_at(double z) const { return operators_at(z, cfg.kn, cfg.scaling); }

  // Time step actually requested: config value, or the largest admissible one.
  double time_step(double kn) const { return cfg.dt > 0.0 ? cfg.dt : max_time_step(*grid, kn); }
  double time_step() const { return time_step(cfg.kn); }

  // Unit-norm fluctuation following [initial].profile.
  Field initial_field() const {
    const PhaseGrid& g = *grid;
    Field f(grid);
    const double k = 2.0 * std::numbers::pi / g.lx;
    if (cfg.profile == InitialProfile::random) {
      std::mt19937_64 rng(cfg.seed);
      for (int n = 0; n < g.size(); ++n) {
        // top 53 bits -> [-1, 1), independent of the library's distributions
        double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        f.values(n) = (2.0 * u - 1.0) * g.maxwellian(n % g.nv);
      }
      f = remove_equilibria(f);
    } else {
      for (int i = 0; i < g.nx; ++i)
        for (int j = 0; j < g.nv; ++j) {
          double x = g.x_nodes(i), v = g.v_nodes(j), M = g.maxwellian(j);
          f(i, j) = std::sin(k * x) * M;
          if (cfg.profile == InitialProfile::standard) f(i, j) += 0.3 * std::sin(2.0 * k * x) * v * M;
        }
    }
    f.values /= norm(f);
    return f;
  }

  // Unit-norm direction used for injected z-derivatives of the initial data.
  Field derivative_pattern() const {
    const PhaseGrid& g = *grid;
    Field p(grid);
    const double k = 2.0 * std::numbers::pi / g.lx;
    for (int i = 0; i < g.nx; ++i)
      for (int j = 0; j < g.nv; ++j)
        p(i, j) = std::cos(k * g.x_nodes(i)) * g.v_nodes(j) * g.maxwellian(j);
    p = remove_equilibria(p);
    p.values /= norm(p);
    return p;
  }

  // f0(z) = f0 + (exp(H (z - z0)) - 1) p when derivatives are injected,
  // otherwise z-independent.
  Field initial_at(double z) const {
    Field f = initial_field();
    if (cfg.inject_derivatives) f.values += std::expm1(cfg.H * (z - cfg.z0)) * derivative_pattern().values;
    return f;
  }

  // g_l(0), l = 0..lmax
  std::vector<Field> initial_derivatives(int lmax) const {
    std::vector<Field> out{initial_at(cfg.z0)};
    Field p = derivative_pattern();
    for (int l = 1; l <= lmax; ++l) {
      Field g(grid);
      if (cfg.inject_derivatives) g.values = std::pow(cfg.H, l) * p.values;
      out.push_back(g);
    }
    return out;
  }
};

// Measured constants and certificate at one z.
struct Certificate {
  AssumptionReport report;
  CoercivityConstants constants;
  RatePlan plan;
  ScaledConstants scaled;
};

inline Certificate certify_scenario(const Scenario& s, double z, double kn, Scaling scaling) {
  Certificate c;
  c.report = check_assumptions(s.T, s.collision_at(z), build_projection(s.grid));
  if (!(c.report.alpha_ok && c.report.beta_ok && c.report.gamma_ok))
    throw NumericalError("coercivity constants unavailable: " + c.report.failures.front());
  c.constants = c.report.constants();
  c.scaled = rescale(c.constants, kn, scaling);
  c.plan = certify(c.scaled.derived);
  return c;
}

inline BoundConstants bound_constants(const Scenario& s, const RatePlan& plan) {
  BoundConstants k;
  k.kind = s.sigma.kind;
  k.H = s.cfg.H;
  double lnorm = weighted_norm(s.L_base);
  k.c1 = s.sigma.c1() * lnorm;
  k.c2 = s.sigma.c2() * lnorm;
  k.eps_z = plan.eps0;
  k.lambda_z = plan.lambda_lower;
  k.c_z = (1.0 + plan.eps0) / (1.0 - plan.eps0);
  return k;
}

}  // namespace hypokinetic
