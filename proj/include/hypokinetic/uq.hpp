#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hypokinetic/errors.hpp"
#include "hypokinetic/operators.hpp"
#include "hypokinetic/phase_space.hpp"
#include "hypokinetic/rates.hpp"
#include "hypokinetic/sigma.hpp"
#include "hypokinetic/solver.hpp"

namespace hypokinetic {

constexpr int max_hierarchy_order = 10;

// Pascal triangle of binomial coefficients as doubles, rows 0..n.
inline std::vector<std::vector<double>> pascal_table(int n) {
  std::vector<std::vector<double>> c(n + 1);
  for (int i = 0; i <= n; ++i) {
    c[i].assign(i + 1, 1.0);
    for (int k = 1; k < i; ++k) c[i][k] = c[i - 1][k - 1] + c[i - 1][k];
  }
  return c;
}

inline double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  static const auto table = pascal_table(64);
  if (n <= 64) return table[n][k];
  return std::round(std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0)));
}

inline double factorial(int n) { return std::tgamma(n + 1.0); }

// Generalized source operator L^q f = sum_k w_k [dK(v_k -> v_j) f_k M_j - dK(v_j -> v_k) f_j M_k],
// dK the q-th z-derivative of a symmetric kernel; applied at every x.
inline KineticOperator lq_operator(const GridPtr& grid, const std::vector<Mat>& kernel_derivatives,
                                   int q) {
  require(q >= 0, "derivative order must be nonnegative");
  if (q >= static_cast<int>(kernel_derivatives.size()))
    throw ValidationError("kernel derivative of order " + std::to_string(q) + " not supplied");
  const Mat& dk = kernel_derivatives[q];
  require(dk.rows() == grid->nv && dk.cols() == grid->nv, "kernel derivative must be nv x nv");
  require((dk - dk.transpose()).cwiseAbs().maxCoeff() <= 1e-14 * (1.0 + dk.cwiseAbs().maxCoeff()),
          "kernel derivative must be symmetric");
  return collision_from_block(grid, scattering_block(*grid, dk), Vec::Ones(grid->nx));
}

inline Field apply_Lq(const std::vector<Mat>& kernel_derivatives, int q, const Field& f) {
  return lq_operator(f.grid, kernel_derivatives, q).apply(f);
}

// Weighted operator norm of a collision-type operator (block diagonal in x).
inline double weighted_norm(const KineticOperator& K) {
  if (K.blocks.empty()) return spectral_norm(K.hat());
  const PhaseGrid& g = *K.grid;
  Vec s = (g.v_weights.array() / g.maxwellian.array()).sqrt();
  double best = 0.0;
  for (const Mat& B : K.blocks)
    best = std::max(best, spectral_norm(s.asDiagonal() * B * s.cwiseInverse().asDiagonal()));
  return best;
}

// Source operators for L_z = sigma(x, z) L_base: L^{(q)} = diag(d^q sigma(z0)) L_base.
inline std::vector<KineticOperator> sigma_source_operators(const KineticOperator& L_base,
                                                           const SigmaModel& sigma, int lmax) {
  require(!L_base.blocks.empty(), "base collision operator must be x-local");
  std::vector<KineticOperator> ops;
  ops.reserve(lmax + 1);
  for (int q = 0; q <= lmax; ++q) {
    Vec dq = sigma.derivative(q, sigma.z0);
    KineticOperator K = L_base;
    for (int i = 0; i < L_base.grid->nx; ++i) {
      K.blocks[i] = dq(i) * L_base.blocks[i];
      K.matrix.block(i * L_base.grid->nv, i * L_base.grid->nv, L_base.grid->nv, L_base.grid->nv) =
          K.blocks[i];
    }
    ops.push_back(std::move(K));
  }
  return ops;
}

struct Hierarchy {
  int lmax = 0;
  double z0 = 0.0;
  std::vector<double> times;
  std::vector<std::vector<double>> norms;  // norms[t][l]
  std::vector<std::vector<Field>> g;       // g[t][l], kept when requested
  double dt = 0.0;
};

struct HierarchyOptions {
  int output_every = 1;
  bool keep_fields = false;
};

// Triangular system  d/dt g_l = Q g_l + sum_{k<l} C(l,k) L^{(l-k)} g_k / Kn^p,
// backward Euler, lowest order first so every source uses the new g_k.
// `ops` holds the scaled operators at z0; `sources[q]` are unscaled.
inline Hierarchy solve_hierarchy(const ModelOperators& ops, const std::vector<KineticOperator>& sources,
                                 const std::vector<Field>& initial, int lmax, double z0, double dt,
                                 double t_end, const HierarchyOptions& opt = {}) {
  require(lmax >= 0 && lmax <= max_hierarchy_order, "lmax must lie in [0, 10]");
  require(static_cast<int>(initial.size()) >= lmax + 1, "initial derivative data missing");
  require(static_cast<int>(sources.size()) >= lmax + 1 || lmax == 0, "source operators missing");
  const GridPtr& grid = ops.grid;
  const int nv = grid->nv, nx = grid->nx;
  const long nsteps = step_count(t_end, dt);
  const double h = t_end / nsteps;
  Stepper stepper(ops, h);
  const double amp = 1.0 / std::pow(ops.kn, collision_exponent(ops.scaling));

  // hat-coordinate source blocks per order
  Vec s = (grid->v_weights.array() / grid->maxwellian.array()).sqrt();
  std::vector<std::vector<Mat>> src(lmax + 1);
  for (int q = 1; q <= lmax; ++q) {
    src[q].resize(nx);
    for (int i = 0; i < nx; ++i)
      src[q][i] = amp * (s.asDiagonal() * sources[q].blocks[i] * s.cwiseInverse().asDiagonal());
  }

  std::vector<Vec> u(lmax + 1);
  for (int l = 0; l <= lmax; ++l) u[l] = to_hat(initial[l]);

  Hierarchy out;
  out.lmax = lmax;
  out.z0 = z0;
  out.dt = h;
  auto record = [&](long n) {
    out.times.push_back(n * h);
    std::vector<double> nr(lmax + 1);
    for (int l = 0; l <= lmax; ++l) nr[l] = u[l].norm();
    out.norms.push_back(std::move(nr));
    if (opt.keep_fields) {
      std::vector<Field> fs;
      for (int l = 0; l <= lmax; ++l) fs.push_back(from_hat(grid, u[l]));
      out.g.push_back(std::move(fs));
    }
  };
  record(0);
  Vec source(grid->size());
  for (long n = 1; n <= nsteps; ++n) {
    for (int l = 0; l <= lmax; ++l) {
      if (l == 0) {
        u[0] = stepper.advance_hat(u[0]);
        continue;
      }
      source.setZero();
      for (int k = 0; k < l; ++k) {
        const double c = binomial(l, k);
        for (int i = 0; i < nx; ++i)
          source.segment(i * nv, nv).noalias() += c * (src[l - k][i] * u[k].segment(i * nv, nv));
      }
      u[l] = stepper.advance_hat(u[l], source);
    }
    for (int l = 0; l <= lmax; ++l)
      if (!u[l].allFinite()) throw NumericalError("non-finite hierarchy values");
    if (n % opt.output_every == 0 || n == nsteps) record(n);
  }
  return out;
}

// Chebyshev-Gauss-Lobatto nodes on [a, b], descending from b to a.
inline Vec chebyshev_nodes(int n, double a, double b) {
  require(n >= 2, "need at least two Chebyshev nodes");
  Vec z(n);
  for (int k = 0; k < n; ++k)
    z(k) = 0.5 * (a + b) + 0.5 * (b - a) * std::cos(std::numbers::pi * k / (n - 1));
  return z;
}

// Spectral differentiation matrix on the nodes above.
inline Mat chebyshev_diff_matrix(int n, double a, double b) {
  Vec x(n);
  for (int k = 0; k < n; ++k) x(k) = std::cos(std::numbers::pi * k / (n - 1));
  Vec c = Vec::Ones(n);
  c(0) = c(n - 1) = 2.0;
  for (int k = 1; k < n; k += 2) c(k) = -c(k);
  Mat D = Mat::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j) D(i, j) = (c(i) / c(j)) / (x(i) - x(j));
  for (int i = 0; i < n; ++i) D(i, i) = -D.row(i).sum();  // negative-sum trick
  return D * (2.0 / (b - a));
}

// Barycentric interpolation weights evaluating a polynomial on the nodes at z.
inline Vec barycentric_row(const Vec& nodes, double z) {
  const int n = static_cast<int>(nodes.size());
  Vec w(n);
  for (int k = 0; k < n; ++k) w(k) = ((k % 2) ? -1.0 : 1.0) * ((k == 0 || k == n - 1) ? 0.5 : 1.0);
  Vec row = Vec::Zero(n);
  for (int k = 0; k < n; ++k)
    if (std::abs(z - nodes(k)) < 1e-14 * (1.0 + std::abs(z))) {
      row(k) = 1.0;
      return row;
    }
  for (int k = 0; k < n; ++k) row(k) = w(k) / (z - nodes(k));
  return row / row.sum();
}

struct CollocationResult {
  Vec z_nodes;
  std::vector<double> times;
  std::vector<std::vector<double>> norms;  // norms[t][l]
};

// Runs the deterministic solver at Chebyshev nodes in z and differentiates
// spectrally. `make_ops(z)` returns the scaled operators at z, `f0(z)` the
// initial field.
inline CollocationResult collocation_derivatives(
    const std::function<ModelOperators(double)>& make_ops, const std::function<Field(double)>& f0,
    int n_nodes, double z_min, double z_max, double z0, int lmax, double dt, double t_end,
    int output_every) {
  require(n_nodes >= 2 * lmax + 1, "collocation needs at least 2 lmax + 1 nodes");
  CollocationResult out;
  out.z_nodes = chebyshev_nodes(n_nodes, z_min, z_max);
  const long nsteps = step_count(t_end, dt);
  const double h = t_end / nsteps;

  // snapshots[node][output] in hat coordinates
  std::vector<std::vector<Vec>> snaps(n_nodes);
  for (int k = 0; k < n_nodes; ++k) {
    double z = out.z_nodes(k);
    ModelOperators ops = make_ops(z);
    Stepper stepper(ops, h);
    Vec u = to_hat(f0(z));
    snaps[k].push_back(u);
    if (k == 0) out.times.push_back(0.0);
    for (long n = 1; n <= nsteps; ++n) {
      u = stepper.advance_hat(u);
      if (n % output_every == 0 || n == nsteps) {
        snaps[k].push_back(u);
        if (k == 0) out.times.push_back(n * h);
      }
    }
  }

  Mat D = chebyshev_diff_matrix(n_nodes, z_min, z_max);
  Vec row = barycentric_row(out.z_nodes, z0);
  std::vector<Vec> weights(lmax + 1);
  Mat Dl = Mat::Identity(n_nodes, n_nodes);
  for (int l = 0; l <= lmax; ++l) {
    weights[l] = (row.transpose() * Dl).transpose();
    Dl = D * Dl;
  }
  for (size_t t = 0; t < out.times.size(); ++t) {
    std::vector<double> nr(lmax + 1);
    for (int l = 0; l <= lmax; ++l) {
      Vec g = Vec::Zero(snaps[0][t].size());
      for (int k = 0; k < n_nodes; ++k) g += weights[l](k) * snaps[k][t];
      nr[l] = g.norm();
    }
    out.norms.push_back(std::move(nr));
  }
  return out;
}

// ---- theoretical bounds ----------------------------------------------------

inline double bound_gl1(double t, int l, double H, double c1_tilde, double lambda_z, double c_z) {
  return c_z * std::exp(-lambda_z * t) * std::pow(H + t * c1_tilde, l);
}

struct Gl2Bound {
  double branch_poly = 0.0;
  double branch_exp = 0.0;
  double value = 0.0;  // min of the two
};

inline Gl2Bound bound_gl2(double t, int l, double H, double c2_tilde, double lambda_z, double eps_z) {
  require(eps_z >= 0.0 && eps_z < 1.0, "eps must lie in [0, 1)");
  const double pre = std::sqrt(2.0 / (1.0 - eps_z));
  const double first = pre * std::pow(H, l) / factorial(l) * std::exp(-lambda_z * t);
  const double tail = pre * std::pow(1.0 + H, l + 1);
  Gl2Bound b;
  b.branch_poly = first + tail * std::exp(-lambda_z * t) * std::pow(1.0 + c2_tilde * t, l);
  b.branch_exp = first + tail * std::exp((c2_tilde - lambda_z) * t) * std::pow(2.0, l - 1);
  b.value = std::min(b.branch_poly, b.branch_exp);
  return b;
}

// Constants entering the derivative bounds at one z-node.
struct BoundConstants {
  SigmaKind kind = SigmaKind::affine;
  double H = 0.0;
  double c1 = 0.0, c2 = 0.0;  // sup |d sigma| ||L_base||, sup |s_n| ||L_base||
  double eps_z = 0.0;
  double lambda_z = 0.0;
  double c_z = 1.0;  // (1 + eps) / (1 - eps)

  double c1_tilde() const { return c1 * c_z * c_z; }
  double c2_tilde() const { return c2 * c_z * c_z; }
};

// Kn-amplified bound. Affine: bound on ||g_l||; analytic: bound on ||g_l|| / l!.
inline double bound_kn(double t, int l, const BoundConstants& k, double kn, Scaling scaling) {
  require(kn > 0.0 && kn <= 1.0, "Kn must lie in (0, 1]");
  const double amp = scaling == Scaling::kinetic ? 1.0 : std::pow(kn, -collision_exponent(scaling));
  if (k.kind == SigmaKind::affine) return bound_gl1(t, l, k.H, amp * k.c1_tilde(), k.lambda_z, k.c_z);
  return bound_gl2(t, l, k.H, amp * k.c2_tilde(), k.lambda_z, k.eps_z).value;
}

// ---- cascade oracles -------------------------------------------------------

inline double cascade_hl_bound(double t, int l, double c1_tilde, double lambda_z, const std::vector<double>& h0) {
  require(l >= 0 && static_cast<int>(h0.size()) >= l + 1, "h0 must hold h_0(0) .. h_l(0)");
  double sum = 0.0;
  for (int k = 0; k <= l; ++k) {
    require(h0[l - k] >= 0.0, "h0 must be nonnegative");
    sum += binomial(l, k) * std::pow(c1_tilde * t, k) * h0[l - k];
  }
  return std::exp(-lambda_z * t) * sum;
}

struct JordanData {
  Mat A, S, Sinv, J;
};

// Jordan data of the strictly upper-triangular all-ones (l+1) x (l+1) matrix,
// ordered as [eta_l, ..., eta_0].
inline JordanData cascade_jordan(int l) {
  require(l >= 0 && l <= 20, "cascade order must lie in [0, 20]");
  const int n = l + 1;
  JordanData j;
  j.A = Mat::Zero(n, n);
  j.J = Mat::Zero(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = r + 1; c < n; ++c) j.A(r, c) = 1.0;
  for (int r = 0; r + 1 < n; ++r) j.J(r, r + 1) = 1.0;
  j.S = Mat::Zero(n, n);
  j.Sinv = Mat::Zero(n, n);
  j.S(0, 0) = j.Sinv(0, 0) = 1.0;
  // 1-based m, c with c >= m >= 2
  for (int m = 2; m <= n; ++m)
    for (int c = m; c <= n; ++c) {
      double b = binomial(c - 2, c - m);
      j.S(m - 1, c - 1) = ((c - m) % 2 ? -1.0 : 1.0) * b;
      j.Sinv(m - 1, c - 1) = b;
    }
  return j;
}

inline double jordan_residual(const JordanData& j) { return max_abs(j.A * j.S - j.S * j.J); }

// Exact solution of d eta_m / dt = C2~ sum_{k<m} eta_k; eta0 and the result are
// indexed by order 0..l.
inline std::vector<double> cascade_eta_exact(double t, int l, double c2_tilde,
                                             const std::vector<double>& eta0) {
  require(static_cast<int>(eta0.size()) >= l + 1, "eta0 must hold eta_0(0) .. eta_l(0)");
  JordanData j = cascade_jordan(l);
  if (jordan_residual(j) > 1e-9) throw NumericalError("Jordan decomposition check failed");
  const int n = l + 1;
  Mat E = Mat::Zero(n, n);
  const double s = c2_tilde * t;
  for (int r = 0; r < n; ++r)
    for (int c = r; c < n; ++c) E(r, c) = std::pow(s, c - r) / factorial(c - r);
  Vec v(n);
  for (int r = 0; r < n; ++r) v(r) = eta0[l - r];
  Vec w = j.S * (E * (j.Sinv * v));
  std::vector<double> out(n);
  for (int r = 0; r < n; ++r) out[l - r] = w(r);
  return out;
}

struct EtaBound {
  double sharp = 0.0;
  double relaxed_poly = 0.0;
  double relaxed_exp = 0.0;
};

inline EtaBound cascade_eta_bound(double t, int l, double c2_tilde, double H) {
  require(H >= 0.0, "H must be nonnegative");
  require(l >= 0, "l must be nonnegative");
  const double s = c2_tilde * t;
  const double first = std::pow(H, l) / factorial(l);
  const double tail = std::pow(1.0 + H, l + 1);
  double sum = 0.0;
  for (int k = 1; k <= l; ++k)
    sum += std::pow(s, k) / (factorial(k) * factorial(k - 1)) * factorial(l - 1) / factorial(l - k);
  EtaBound b;
  b.sharp = first + sum * tail;
  b.relaxed_poly = first + tail * std::pow(1.0 + s, l);
  b.relaxed_exp = first + tail * std::exp(s) * std::pow(2.0, l - 1);
  return b;
}

// 1 / max_{l in [ceil(lmax/2), lmax]} (||g_l|| / l!)^{1/l}; +inf if the tail vanishes.
inline double estimate_radius(const std::vector<double>& norms_gl, int lmax) {
  require(lmax >= 5, "radius proxy needs lmax >= 5");
  require(static_cast<int>(norms_gl.size()) >= lmax + 1, "norm sequence shorter than lmax + 1");
  double worst = 0.0;
  bool all_tiny = true;
  for (int l = (lmax + 1) / 2; l <= lmax; ++l) {
    double g = norms_gl[l];
    require(g >= 0.0, "norms must be nonnegative");
    if (g >= 1e-300) all_tiny = false;
    double r = std::exp((std::log(std::max(g, 1e-320)) - std::lgamma(l + 1.0)) / l);
    worst = std::max(worst, r);
  }
  if (all_tiny || worst == 0.0) return std::numeric_limits<double>::infinity();
  return 1.0 / worst;
}

}  // namespace hypokinetic
