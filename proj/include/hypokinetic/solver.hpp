#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <Eigen/Dense>

#include "hypokinetic/errors.hpp"
#include "hypokinetic/operators.hpp"
#include "hypokinetic/phase_space.hpp"
#include "hypokinetic/rates.hpp"

namespace hypokinetic {

// Operators of  f_t = L f / Kn^p - T f / Kn  with T, L already divided by
// their Kn powers; A is assembled from the scaled transport.
struct ModelOperators {
  GridPtr grid;
  KineticOperator T, L, Pi, A;
  double kn = 1.0;
  Scaling scaling = Scaling::kinetic;
};

inline KineticOperator scaled(const KineticOperator& K, double factor) {
  KineticOperator out = K;
  out.matrix *= factor;
  for (Mat& b : out.blocks) b *= factor;
  return out;
}

inline ModelOperators scaled_operators(const KineticOperator& T, const KineticOperator& L,
                                       double kn, Scaling scaling) {
  require(kn > 0.0 && kn <= 1.0, "Kn must lie in (0, 1]");
  require(scaling != Scaling::kinetic || kn == 1.0, "kinetic scaling requires Kn = 1");
  ModelOperators ops;
  ops.grid = T.grid;
  ops.kn = kn;
  ops.scaling = scaling;
  ops.T = scaled(T, 1.0 / kn);
  ops.L = scaled(L, 1.0 / std::pow(kn, collision_exponent(scaling)));
  ops.Pi = build_projection(T.grid);
  ops.A = build_auxiliary_A(ops.T, T.grid);
  return ops;
}

// Largest admissible step for the scaled transport, 0.5 dx Kn / max|v|.
inline double max_time_step(const PhaseGrid& g, double kn) {
  return 0.5 * g.dx * kn / g.max_speed();
}

inline void check_time_step(const PhaseGrid& g, double kn, double dt) {
  require(dt > 0.0 && std::isfinite(dt), "dt must be positive");
  double bound = max_time_step(g, kn);
  if (dt > bound * (1.0 + 1e-12))
    throw StabilityError(fmt::format("dt = {:.6g} exceeds the step bound {:.6g} (0.5 dx Kn / max|v|)", dt,
                                     bound));
}

// Backward Euler on the full scaled operator: (I - dt Q) f_{n+1} = f_n.
// The propagator is a dense inverse in hat coordinates, built once per (dt, Kn).
class Stepper {
 public:
  Stepper(const ModelOperators& ops, double dt) : grid_(ops.grid), dt_(dt), kn_(ops.kn) {
    check_time_step(*grid_, ops.kn, dt);
    Mat Q = ops.L.hat() - ops.T.hat();
    Mat M = -dt * Q;
    M.diagonal().array() += 1.0;
    P_ = M.partialPivLu().inverse();
  }

  Vec advance_hat(const Vec& u) const { return P_ * u; }
  // (I - dt Q)^{-1} (u + dt s) for a source term in hat coordinates
  Vec advance_hat(const Vec& u, const Vec& s) const { return P_ * (u + dt_ * s); }

  Field step(const Field& f) const {
    require(same_grid(f.grid, grid_), "field and stepper grids differ");
    Field out = from_hat(grid_, advance_hat(to_hat(f)));
    if (!out.finite()) throw NumericalError("non-finite values after time step");
    return out;
  }

  double dt() const { return dt_; }
  double kn() const { return kn_; }
  const Mat& propagator() const { return P_; }

 private:
  GridPtr grid_;
  double dt_;
  double kn_;
  Mat P_;
};

inline Field step(const Field& f, const ModelOperators& ops, double dt) {
  return Stepper(ops, dt).step(f);
}

inline double entropy(const Field& f, const KineticOperator& A, double eps) {
  require(eps >= 0.0 && eps < 1.0, "eps must lie in [0, 1)");
  return 0.5 * inner_product(f, f) + eps * inner_product(A.apply(f), f);
}

// The five-term dissipation, evaluated term by term.
inline double dissipation(const Field& f, const ModelOperators& ops, double eps) {
  require(eps >= 0.0 && eps < 1.0, "eps must lie in [0, 1)");
  Field Lf = ops.L.apply(f);
  Field Pf = ops.Pi.apply(f);
  Field Qf = f;
  Qf.values -= Pf.values;
  double d = -inner_product(Lf, f);
  d += eps * inner_product(ops.A.apply(ops.T.apply(Pf)), f);
  d += eps * inner_product(ops.A.apply(ops.T.apply(Qf)), f);
  d -= eps * inner_product(ops.A.apply(Lf), f);
  d -= eps * inner_product(ops.T.apply(ops.A.apply(f)), f);
  return d;
}

// Entropy and dissipation as symmetric quadratic forms in hat coordinates:
// H = u^T G u, D = u^T Dm u.
struct QuadraticForms {
  Mat G, Dm;
  double eps = 0.0;

  QuadraticForms(const ModelOperators& ops, double eps_) : eps(eps_) {
    require(eps >= 0.0 && eps < 1.0, "eps must lie in [0, 1)");
    Mat A = ops.A.hat(), T = ops.T.hat(), L = ops.L.hat();
    Mat Gs = eps * A;
    G = 0.5 * (Gs + Gs.transpose());
    G.diagonal().array() += 0.5;
    Mat D = -L + eps * (A * T - A * L - T * A);
    Dm = 0.5 * (D + D.transpose());
  }

  double entropy(const Vec& u) const { return u.dot(G * u); }
  double dissipation(const Vec& u) const { return u.dot(Dm * u); }
};

struct Trajectory {
  std::vector<double> times, norms, entropies, dissipations, masses;
  std::vector<Field> fields_saved;
  double dt = 0.0;
  long steps = 0;
  // per-step diagnostics
  double max_entropy_increase = -std::numeric_limits<double>::infinity();
  double max_mass_drift = 0.0;
  double max_entropy_residual = 0.0;  // max |dH/dt + D[f_n]| over steps
};

struct IntegrateOptions {
  int output_every = 1;
  bool per_step_entropy = true;
  bool per_step_residual = false;
  bool save_fields = false;
};

// Steps with dt' = t_end / ceil(t_end / dt) <= dt so t_end is hit exactly.
inline long step_count(double t_end, double dt) {
  require(dt > 0.0 && t_end >= dt, "need t_end >= dt > 0");
  return static_cast<long>(std::ceil(t_end / dt - 1e-9));
}

inline Trajectory integrate(const ModelOperators& ops, const Field& f0, double dt, double t_end,
                            double eps, const IntegrateOptions& opt = {}) {
  require(opt.output_every >= 1, "output_every must be >= 1");
  const long nsteps = step_count(t_end, dt);
  const double h = t_end / nsteps;
  Stepper stepper(ops, h);
  QuadraticForms q(ops, eps);

  Trajectory tr;
  tr.dt = h;
  tr.steps = nsteps;
  Vec u = to_hat(f0);
  const double mass0 = mass(f0);
  double H = q.entropy(u);
  auto record = [&](long n, const Vec& uu, double Hn) {
    Field f = from_hat(ops.grid, uu);
    tr.times.push_back(n * h);
    tr.norms.push_back(uu.norm());
    tr.entropies.push_back(Hn);
    tr.dissipations.push_back(q.dissipation(uu));
    double m = mass(f);
    tr.masses.push_back(m);
    tr.max_mass_drift = std::max(tr.max_mass_drift, std::abs(m - mass0));
    if (opt.save_fields) tr.fields_saved.push_back(std::move(f));
  };
  record(0, u, H);
  for (long n = 1; n <= nsteps; ++n) {
    Vec next = stepper.advance_hat(u);
    if (!next.allFinite()) throw NumericalError("non-finite values after time step");
    bool out = (n % opt.output_every == 0) || n == nsteps;
    if (opt.per_step_entropy || opt.per_step_residual || out) {
      double Hn = q.entropy(next);
      tr.max_entropy_increase = std::max(tr.max_entropy_increase, Hn - H);
      if (opt.per_step_residual)
        tr.max_entropy_residual =
            std::max(tr.max_entropy_residual, std::abs((Hn - H) / h + q.dissipation(u)));
      H = Hn;
    }
    u.swap(next);
    if (out) record(n, u, H);
  }
  return tr;
}

// Least-squares slope of -log norm over the trailing fraction of samples.
inline double fit_decay_rate(const std::vector<double>& times, const std::vector<double>& norms,
                             double window = 0.5) {
  require(times.size() == norms.size(), "times and norms differ in length");
  require(window > 0.0 && window <= 1.0, "window must lie in (0, 1]");
  const size_t n = times.size();
  const size_t count = static_cast<size_t>(std::ceil(window * n));
  require(count >= 4, "fewer than 4 samples in the fit window");
  double st = 0, sy = 0, stt = 0, sty = 0;
  for (size_t k = n - count; k < n; ++k) {
    require(norms[k] > 0.0, "norms must be positive for a log fit");
    double t = times[k], y = -std::log(norms[k]);
    st += t;
    sy += y;
    stt += t * t;
    sty += t * y;
  }
  double m = static_cast<double>(count);
  return (m * sty - st * sy) / (m * stt - st * st);
}

// Same fit restricted to samples above rel_floor * max norm: once a run has
// decayed into roundoff the log-norm is flat noise and says nothing about the rate.
inline double fit_decay_rate_resolved(const std::vector<double>& times, const std::vector<double>& norms,
                                      double window = 0.5, double rel_floor = 1e-10) {
  require(times.size() == norms.size(), "times and norms differ in length");
  double peak = 0.0;
  for (double n : norms) peak = std::max(peak, n);
  std::vector<double> t, y;
  for (size_t k = 0; k < norms.size(); ++k)
    if (norms[k] > rel_floor * peak) {
      t.push_back(times[k]);
      y.push_back(norms[k]);
    }
  return fit_decay_rate(t, y, window);
}

// |Re| of the slowest nonzero eigenvalue of L - T, deflating both discrete
// global equilibria.
inline double slowest_decay_rate(const ModelOperators& ops) {
  const PhaseGrid& g = *ops.grid;
  Mat E(g.size(), 2);
  auto modes = equilibrium_modes(ops.grid);
  E.col(0) = to_hat(modes[0]);
  E.col(1) = to_hat(modes[1]);
  Eigen::HouseholderQR<Mat> qr(E);
  Mat Qfull = qr.householderQ() * Mat::Identity(g.size(), g.size());
  Mat B = Qfull.rightCols(g.size() - 2);
  Mat K = B.transpose() * (ops.L.hat() - ops.T.hat()) * B;
  Eigen::EigenSolver<Mat> es(K, false);
  return es.eigenvalues().real().cwiseAbs().minCoeff();
}

}  // namespace hypokinetic
