#pragma once

#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hypokinetic/errors.hpp"
#include "hypokinetic/phase_space.hpp"

namespace hypokinetic {

enum class OperatorRole { transport, collision, projection, auxiliary };
enum class DerivativeRule { spectral, central2 };

struct KineticOperator {
  Mat matrix;
  OperatorRole role = OperatorRole::auxiliary;
  GridPtr grid;
  // Collision operators act x-locally; when set, blocks[i] is the nv x nv
  // velocity matrix at x_i and the dense matrix is block diagonal.
  std::vector<Mat> blocks;

  Field apply(const Field& f) const {
    require(same_grid(f.grid, grid), "operator and field live on different grids");
    if (blocks.empty()) return Field(grid, matrix * f.values);
    Field out(grid);
    const int nv = grid->nv;
    for (int i = 0; i < grid->nx; ++i)
      out.values.segment(i * nv, nv).noalias() = blocks[i] * f.values.segment(i * nv, nv);
    return out;
  }

  // S K S^{-1} with S = diag(sqrt(mu)).
  Mat hat() const {
    const Vec& s = grid->sqrt_mu;
    return s.asDiagonal() * matrix * s.cwiseInverse().asDiagonal();
  }

  // adjoint in the weighted inner product, mu^{-1} K^T mu
  Mat adjoint() const {
    return grid->mu.cwiseInverse().asDiagonal() * matrix.transpose() * grid->mu.asDiagonal();
  }
};

inline Mat from_hat_matrix(const GridPtr& grid, const Mat& khat) {
  const Vec& s = grid->sqrt_mu;
  return s.cwiseInverse().asDiagonal() * khat * s.asDiagonal();
}

// Periodic first-derivative matrix on nx equispaced nodes.
inline Mat derivative_matrix(int nx, double lx, DerivativeRule rule) {
  Mat D = Mat::Zero(nx, nx);
  Vec d = Vec::Zero(nx);  // d(k) = entry for offset i - l = k (mod nx)
  if (rule == DerivativeRule::spectral) {
    // even nx: (pi/lx) (-1)^k cot(k pi / nx)
    for (int k = 1; k <= nx / 2; ++k) {
      double val = (k % 2 ? -1.0 : 1.0) * std::numbers::pi / lx /
                   std::tan(k * std::numbers::pi / nx);
      if (2 * k == nx) val = 0.0;
      d(k) = val;
      d(nx - k) = -val;
    }
  } else {
    double h = lx / nx;
    d(1) = -0.5 / h;
    d(nx - 1) = 0.5 / h;
  }
  for (int i = 0; i < nx; ++i)
    for (int l = 0; l < nx; ++l) D(i, l) = d(((i - l) % nx + nx) % nx);
  return D;
}

inline KineticOperator build_transport(const GridPtr& grid,
                                       DerivativeRule rule = DerivativeRule::spectral) {
  const int nx = grid->nx, nv = grid->nv;
  Mat D = derivative_matrix(nx, grid->lx, rule);
  KineticOperator T{Mat::Zero(grid->size(), grid->size()), OperatorRole::transport, grid, {}};
  for (int i = 0; i < nx; ++i)
    for (int l = 0; l < nx; ++l) {
      if (D(i, l) == 0.0) continue;
      for (int j = 0; j < nv; ++j) T.matrix(i * nv + j, l * nv + j) = grid->v_nodes(j) * D(i, l);
    }
  return T;
}

inline KineticOperator build_projection(const GridPtr& grid) {
  const int nv = grid->nv;
  KineticOperator P{Mat::Zero(grid->size(), grid->size()), OperatorRole::projection, grid, {}};
  Mat block = grid->maxwellian * grid->v_weights.transpose();
  for (int i = 0; i < grid->nx; ++i) P.matrix.block(i * nv, i * nv, nv, nv) = block;
  return P;
}

// Velocity block of the gain/loss operator with a symmetric kernel s:
// (B f)_j = sum_k w_k s_jk (f_k M_j - f_j M_k). s == 1 gives Pi - I.
inline Mat scattering_block(const PhaseGrid& grid, const Mat& s) {
  const int nv = grid.nv;
  const Vec& w = grid.v_weights;
  const Vec& M = grid.maxwellian;
  Mat B(nv, nv);
  for (int j = 0; j < nv; ++j) {
    double loss = 0.0;
    for (int k = 0; k < nv; ++k) {
      B(j, k) = w(k) * s(j, k) * M(j);
      loss += w(k) * s(j, k) * M(k);
    }
    B(j, j) -= loss;
  }
  return B;
}

// L = diag(sigma(x)) (block per x); used for BGK, anisotropic and source operators.
inline KineticOperator collision_from_block(const GridPtr& grid, const Mat& block, const Vec& sigma) {
  require(sigma.size() == grid->nx, "sigma must have one value per spatial node");
  const int nv = grid->nv;
  KineticOperator L{Mat::Zero(grid->size(), grid->size()), OperatorRole::collision, grid, {}};
  L.blocks.resize(grid->nx);
  for (int i = 0; i < grid->nx; ++i) {
    L.blocks[i] = sigma(i) * block;
    L.matrix.block(i * nv, i * nv, nv, nv) = L.blocks[i];
  }
  return L;
}

inline KineticOperator build_bgk(const GridPtr& grid, const Vec& sigma_values) {
  require(sigma_values.size() == grid->nx, "sigma must have one value per spatial node");
  require((sigma_values.array() > 0.0).all() && sigma_values.allFinite(),
          "BGK scattering rate must be positive");
  return collision_from_block(grid, scattering_block(*grid, Mat::Ones(grid->nv, grid->nv)),
                              sigma_values);
}

inline void check_kernel(const Mat& kernel, int nv) {
  require(kernel.rows() == nv && kernel.cols() == nv, "kernel must be nv x nv");
  require((kernel.array() > 0.0).all() && kernel.allFinite(), "scattering kernel must be positive");
  require((kernel - kernel.transpose()).cwiseAbs().maxCoeff() <= 1e-14 * kernel.cwiseAbs().maxCoeff(),
          "scattering kernel must be symmetric");
}

inline KineticOperator build_anisotropic(const GridPtr& grid, const Mat& kernel,
                                         std::optional<Vec> sigma_values = std::nullopt) {
  check_kernel(kernel, grid->nv);
  Vec sigma = sigma_values.value_or(Vec::Ones(grid->nx));
  require((sigma.array() > 0.0).all(), "scattering rate must be positive");
  return collision_from_block(grid, scattering_block(*grid, kernel), sigma);
}

// Default anisotropic kernel: base + amplitude * exp(-(v - v*)^2 / (2 width^2)).
inline Mat gaussian_kernel(const PhaseGrid& grid, double base, double amplitude, double width) {
  require(base > 0.0 && amplitude >= 0.0 && width > 0.0, "invalid kernel parameters");
  Mat k(grid.nv, grid.nv);
  for (int j = 0; j < grid.nv; ++j)
    for (int l = 0; l < grid.nv; ++l) {
      double dv = grid.v_nodes(j) - grid.v_nodes(l);
      k(j, l) = base + amplitude * std::exp(-dv * dv / (2.0 * width * width));
    }
  return k;
}

// A = (I + (T Pi)^† (T Pi))^{-1} (T Pi)^†, assembled in hat coordinates.
inline Mat auxiliary_hat(const Mat& That, const Mat& Phat) {
  Mat TP = That * Phat;
  Mat B = TP.transpose() * TP;
  B.diagonal().array() += 1.0;
  Mat A = B.llt().solve(TP.transpose());
  return A;
}

inline KineticOperator build_auxiliary_A(const KineticOperator& T, const GridPtr& grid) {
  require(same_grid(T.grid, grid), "transport and grid mismatch");
  Mat Ahat = auxiliary_hat(T.hat(), build_projection(grid).hat());
  return {from_hat_matrix(grid, Ahat), OperatorRole::auxiliary, grid, {}};
}

inline double spectral_norm(const Mat& X) {
  if (X.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Mat> es(X.transpose() * X, Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(es.eigenvalues().maxCoeff(), 0.0));
}

inline double estimate_alpha(const KineticOperator& L) {
  const PhaseGrid& g = *L.grid;
  double alpha;
  if (!L.blocks.empty()) {
    // per-x velocity blocks, hat-scaled by sqrt(w_j / M_j)
    Vec s = (g.v_weights.array() / g.maxwellian.array()).sqrt();
    Vec m = (g.v_weights.array() * g.maxwellian.array()).sqrt();
    Mat P = m * m.transpose();
    alpha = std::numeric_limits<double>::infinity();
    for (const Mat& B : L.blocks) {
      Mat Bh = s.asDiagonal() * B * s.cwiseInverse().asDiagonal();
      Mat S = -0.5 * (Bh + Bh.transpose());
      double shift = S.norm() + 1.0;
      Eigen::SelfAdjointEigenSolver<Mat> es(S + shift * P, Eigen::EigenvaluesOnly);
      alpha = std::min(alpha, es.eigenvalues()(0));
    }
  } else {
    Mat Lh = L.hat();
    Mat S = -0.5 * (Lh + Lh.transpose());
    Mat P = build_projection(L.grid).hat();
    double shift = S.norm() + 1.0;
    Eigen::SelfAdjointEigenSolver<Mat> es(S + shift * P, Eigen::EigenvaluesOnly);
    alpha = es.eigenvalues()(0);
  }
  if (!(alpha > 1e-12)) throw NumericalError("no spectral gap (alpha <= 1e-12)");
  return alpha;
}

// Orthonormal basis of R^nx orthogonal to the constant and checkerboard vectors.
inline Mat nonequilibrium_density_basis(int nx) {
  Mat E(nx, 2);
  for (int i = 0; i < nx; ++i) {
    E(i, 0) = 1.0;
    E(i, 1) = (i % 2) ? -1.0 : 1.0;
  }
  Eigen::HouseholderQR<Mat> qr(E);
  Mat Q = qr.householderQ() * Mat::Identity(nx, nx);
  return Q.rightCols(nx - 2);
}

inline double estimate_beta(const KineticOperator& T) {
  const PhaseGrid& g = *T.grid;
  // range(Pi) in hat coordinates: columns e_i (x) m, m_j = sqrt(w_j M_j)
  Vec m = (g.v_weights.array() * g.maxwellian.array()).sqrt();
  Mat Q = Mat::Zero(g.size(), g.nx);
  for (int i = 0; i < g.nx; ++i) Q.block(i * g.nv, i, g.nv, 1) = m;
  Mat TQ = T.hat() * Q * nonequilibrium_density_basis(g.nx);
  Eigen::SelfAdjointEigenSolver<Mat> es(TQ.transpose() * TQ, Eigen::EigenvaluesOnly);
  double beta = es.eigenvalues()(0);
  if (!(beta > 1e-12)) throw NumericalError("macroscopic coercivity fails (beta <= 1e-12)");
  return beta;
}

inline double estimate_gamma(const KineticOperator& A, const KineticOperator& T,
                             const KineticOperator& L) {
  Mat Ah = A.hat();
  Mat P = build_projection(A.grid).hat();
  Mat Iminus = -P;
  Iminus.diagonal().array() += 1.0;
  return spectral_norm(Ah * T.hat() * Iminus) + spectral_norm(Ah * L.hat() * Iminus);
}

struct CoercivityConstants {
  double alpha = 0.0, beta = 0.0, gamma = 0.0;
  double a = 0.0, c = 0.0, d = 0.0;

  static CoercivityConstants from(double alpha, double beta, double gamma) {
    require(alpha > 0.0 && beta > 0.0 && gamma > 0.0 && std::isfinite(alpha) &&
                std::isfinite(beta) && std::isfinite(gamma),
            "coercivity constants must be positive");
    return {alpha, beta, gamma, alpha, beta / (1.0 + beta), 0.5 * (1.0 + gamma)};
  }
};

struct AssumptionReport {
  double pi_t_pi = 0.0;
  double transport_skew = 0.0;
  double collision_sym = 0.0;
  double mass_rows = 0.0;
  double alpha = 0.0, beta = 0.0, gamma = 0.0;
  bool orthogonality_ok = false, skew_ok = false, symmetry_ok = false;
  bool alpha_ok = false, beta_ok = false, gamma_ok = false;
  std::vector<std::string> failures;

  bool passed() const { return failures.empty(); }
  CoercivityConstants constants() const { return CoercivityConstants::from(alpha, beta, gamma); }
};

inline double max_abs(const Mat& X) { return X.size() ? X.cwiseAbs().maxCoeff() : 0.0; }

inline AssumptionReport check_assumptions(const KineticOperator& T, const KineticOperator& L,
                                          const KineticOperator& Pi) {
  AssumptionReport r;
  Mat Th = T.hat(), Lh = L.hat(), Ph = Pi.hat();
  r.pi_t_pi = spectral_norm(Ph * Th * Ph);
  r.transport_skew = spectral_norm(Th + Th.transpose());
  r.collision_sym = spectral_norm(Lh - Lh.transpose());
  // velocity integral of L f must vanish for every f
  const PhaseGrid& g = *L.grid;
  Mat W = Mat::Zero(g.nx, g.size());
  for (int i = 0; i < g.nx; ++i) W.block(i, i * g.nv, 1, g.nv) = g.v_weights.transpose();
  r.mass_rows = max_abs(W * L.matrix);

  r.orthogonality_ok = r.pi_t_pi <= 1e-11;
  r.skew_ok = r.transport_skew <= 1e-10;
  r.symmetry_ok = r.collision_sym <= 1e-10 && r.mass_rows <= 1e-10;
  if (!r.orthogonality_ok) r.failures.push_back("ΠTΠ ≠ 0");
  if (!r.skew_ok) r.failures.push_back("T not skew-symmetric");
  if (!r.symmetry_ok) r.failures.push_back("L not symmetric / not mass conserving");

  try {
    r.alpha = estimate_alpha(L);
    r.alpha_ok = true;
  } catch (const NumericalError& e) {
    r.failures.push_back(e.what());
  }
  try {
    r.beta = estimate_beta(T);
    r.beta_ok = true;
  } catch (const NumericalError& e) {
    r.failures.push_back(e.what());
  }
  KineticOperator A = build_auxiliary_A(T, T.grid);
  r.gamma = estimate_gamma(A, T, L);
  r.gamma_ok = r.gamma > 0.0 && std::isfinite(r.gamma);
  if (!r.gamma_ok) r.failures.push_back("gamma not positive");
  return r;
}

}  // namespace hypokinetic
