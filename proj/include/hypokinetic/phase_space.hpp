#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "hypokinetic/errors.hpp"

namespace hypokinetic {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

enum class VelocityRule { gauss_hermite, uniform_symmetric };

inline double standard_maxwellian(double v) {
  return std::exp(-0.5 * v * v) / std::sqrt(2.0 * std::numbers::pi);
}

// Nodes and probability weights of the n-point Gauss rule for the standard
// normal density (probabilists' Hermite). Golub-Welsch for the nodes; weights
// from the normalized three-term recurrence, w = 1 / sum_k psi_k(x)^2, which
// keeps full relative accuracy in the tails.
struct QuadratureRule {
  Vec nodes;
  Vec weights;
};

inline QuadratureRule gauss_hermite_rule(int n) {
  require(n >= 1, "Gauss-Hermite rule needs at least one node");
  Vec diag = Vec::Zero(n);
  Vec sub(std::max(n - 1, 0));
  for (int k = 1; k < n; ++k) sub(k - 1) = std::sqrt(static_cast<double>(k));
  Eigen::SelfAdjointEigenSolver<Mat> es;
  es.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
  Vec x = es.eigenvalues();

  QuadratureRule rule{Vec(n), Vec(n)};
  for (int j = 0; j < n; ++j) {
    // enforce exact symmetry of the abscissae
    double xj = 0.5 * (x(j) - x(n - 1 - j));
    double p0 = 1.0, p1 = xj, s = 1.0;
    if (n > 1) s += p1 * p1;
    for (int k = 1; k + 1 < n; ++k) {
      double p2 = (xj * p1 - std::sqrt(static_cast<double>(k)) * p0) /
                  std::sqrt(static_cast<double>(k + 1));
      p0 = p1;
      p1 = p2;
      s += p1 * p1;
    }
    rule.nodes(j) = xj;
    rule.weights(j) = std::isfinite(s) ? 1.0 / s : 0.0;
  }
  for (int j = 0; j < n / 2; ++j) {
    double w = 0.5 * (rule.weights(j) + rule.weights(n - 1 - j));
    rule.weights(j) = w;
    rule.weights(n - 1 - j) = w;
  }
  return rule;
}

struct GridOptions {
  double vmax = 6.0;            // uniform_symmetric only
  double velocity_shift = 0.0;  // != 0 deliberately breaks the symmetry
};

struct PhaseGrid {
  int nx = 0;
  double lx = 0.0;
  double dx = 0.0;
  Vec x_nodes;
  int nv = 0;
  Vec v_nodes;
  Vec v_weights;
  Vec maxwellian;
  // weighted-measure weights per node, dx * w_j / F_ij, stored x-major
  Vec mu;
  Vec sqrt_mu;

  int size() const { return nx * nv; }
  int index(int i, int j) const { return i * nv + j; }
  double max_speed() const { return v_nodes.cwiseAbs().maxCoeff(); }
};

using GridPtr = std::shared_ptr<const PhaseGrid>;

inline GridPtr build_grid(int nx, double lx, int nv, VelocityRule rule,
                          const GridOptions& opt = {}) {
  require(nx >= 4 && nx % 2 == 0, "nx must be an even count >= 4");
  require(nv >= 4, "nv must be >= 4");
  require(nv % 2 == 0, "nv must be even (symmetric velocity nodes)");
  require(lx > 0.0 && std::isfinite(lx), "lx must be positive");

  auto g = std::make_shared<PhaseGrid>();
  g->nx = nx;
  g->lx = lx;
  g->dx = lx / nx;
  g->x_nodes = Vec::LinSpaced(nx, 0.0, lx - g->dx);
  g->nv = nv;
  g->v_nodes.resize(nv);
  g->v_weights.resize(nv);
  g->maxwellian.resize(nv);

  if (rule == VelocityRule::gauss_hermite) {
    QuadratureRule q = gauss_hermite_rule(nv);
    for (int j = 0; j < nv; ++j) {
      double v = q.nodes(j) + opt.velocity_shift;
      double m = standard_maxwellian(v);
      g->v_nodes(j) = v;
      g->maxwellian(j) = m;
      g->v_weights(j) = q.weights(j) / m;
    }
  } else {
    require(opt.vmax > 0.0, "vmax must be positive");
    double h = 2.0 * opt.vmax / nv;
    for (int j = 0; j < nv; ++j) {
      double v = -opt.vmax + (j + 0.5) * h;
      if (j >= nv / 2) v = -g->v_nodes(nv - 1 - j);
      g->v_nodes(j) = v;
      g->v_weights(j) = h;
    }
    g->v_nodes.array() += opt.velocity_shift;
    for (int j = 0; j < nv; ++j) g->maxwellian(j) = standard_maxwellian(g->v_nodes(j));
  }
  for (int j = 0; j < nv; ++j)
    require(std::isfinite(g->v_weights(j)) && g->v_weights(j) > 0.0 && g->maxwellian(j) > 0.0,
            "velocity quadrature underflows; reduce nv");

  g->maxwellian /= g->v_weights.dot(g->maxwellian);

  g->mu.resize(g->size());
  for (int i = 0; i < nx; ++i)
    for (int j = 0; j < nv; ++j)
      g->mu(g->index(i, j)) = g->dx * g->v_weights(j) * lx / g->maxwellian(j);
  g->sqrt_mu = g->mu.cwiseSqrt();
  return g;
}

inline bool same_grid(const GridPtr& a, const GridPtr& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  return a->nx == b->nx && a->nv == b->nv && a->lx == b->lx && a->v_nodes == b->v_nodes &&
         a->v_weights == b->v_weights;
}

struct Field {
  GridPtr grid;
  Vec values;

  Field() = default;
  explicit Field(GridPtr g) : grid(std::move(g)), values(Vec::Zero(grid->size())) {}
  Field(GridPtr g, Vec v) : grid(std::move(g)), values(std::move(v)) {
    require(values.size() == grid->size(), "field size does not match grid");
  }

  double& operator()(int i, int j) { return values(grid->index(i, j)); }
  double operator()(int i, int j) const { return values(grid->index(i, j)); }
  bool finite() const { return values.allFinite(); }
};

inline void check_same(const Field& f, const Field& g) {
  require(same_grid(f.grid, g.grid), "fields live on different grids");
}

inline double inner_product(const Field& f, const Field& g) {
  check_same(f, g);
  return (f.values.array() * g.values.array() * f.grid->mu.array()).sum();
}

inline double norm(const Field& f) { return std::sqrt(inner_product(f, f)); }

inline Field project_pi(const Field& f) {
  const PhaseGrid& g = *f.grid;
  Field out(f.grid);
  for (int i = 0; i < g.nx; ++i) {
    double rho = g.v_weights.dot(f.values.segment(i * g.nv, g.nv));
    out.values.segment(i * g.nv, g.nv) = rho * g.maxwellian;
  }
  return out;
}

inline double mass(const Field& f) {
  const PhaseGrid& g = *f.grid;
  double m = 0.0;
  for (int i = 0; i < g.nx; ++i) m += g.v_weights.dot(f.values.segment(i * g.nv, g.nv));
  return g.dx * m;
}

struct Equilibrium {
  Field F;
  double total = 0.0;
};

inline Equilibrium equilibrium(const GridPtr& grid) {
  Field F(grid);
  for (int i = 0; i < grid->nx; ++i)
    F.values.segment(i * grid->nv, grid->nv) = grid->maxwellian / grid->lx;
  double total = mass(F);
  return {std::move(F), total};
}

inline Field fluctuation(const Field& f) {
  Field F = equilibrium(f.grid).F;
  Field out = f;
  out.values -= mass(f) * F.values;
  return out;
}

// Discrete global equilibria: F and, because every skew periodic difference
// matrix on an even number of nodes also annihilates (-1)^i, the checkerboard
// copy of F. Both are returned normalized to unit weighted norm.
inline std::vector<Field> equilibrium_modes(const GridPtr& grid) {
  Field F = equilibrium(grid).F;
  Field C = F;
  for (int i = 1; i < grid->nx; i += 2) C.values.segment(i * grid->nv, grid->nv) *= -1.0;
  F.values /= norm(F);
  C.values /= norm(C);
  return {F, C};
}

inline Field remove_equilibria(const Field& f) {
  Field out = f;
  for (const Field& e : equilibrium_modes(f.grid)) out.values -= inner_product(out, e) * e.values;
  return out;
}

// Hat coordinates: u = sqrt(mu) * f turns the weighted inner product into the
// Euclidean one, so weighted adjoints become plain transposes.
inline Vec to_hat(const Field& f) { return f.values.cwiseProduct(f.grid->sqrt_mu); }
inline Field from_hat(const GridPtr& grid, const Vec& u) {
  return Field(grid, u.cwiseQuotient(grid->sqrt_mu));
}

}  // namespace hypokinetic
