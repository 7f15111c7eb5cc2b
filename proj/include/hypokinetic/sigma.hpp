#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "hypokinetic/errors.hpp"
#include "hypokinetic/phase_space.hpp"

namespace hypokinetic {

enum class SigmaKind { affine, analytic };

// sigma(x, z):
//   affine:   s0(x) + z s1(x)
//   analytic: base(x) + amp(x) sin(freq z)
// z0 is the expansion point of the hierarchy; [z_min, z_max] is the declared
// support of the random variable.
struct SigmaModel {
  SigmaKind kind = SigmaKind::affine;
  Vec s0, s1;       // affine
  Vec base, amp;    // analytic
  double freq = 1.0;
  double z0 = 0.0;
  double z_min = -1.0, z_max = 1.0;

  int nx() const { return static_cast<int>(kind == SigmaKind::affine ? s0.size() : base.size()); }

  Vec value(double z) const {
    if (kind == SigmaKind::affine) return s0 + z * s1;
    return base + std::sin(freq * z) * amp;
  }

  // n-th z-derivative at z
  Vec derivative(int n, double z) const {
    if (n == 0) return value(z);
    if (kind == SigmaKind::affine) return n == 1 ? Vec(s1) : Vec(Vec::Zero(s1.size()));
    double phase = freq * z + 0.5 * std::numbers::pi * n;
    return std::pow(freq, n) * std::sin(phase) * amp;
  }

  // sup_x |d sigma / dz|, meaningful for the affine kind
  double c1() const {
    if (kind == SigmaKind::affine) return s1.cwiseAbs().maxCoeff();
    return std::abs(freq) * amp.cwiseAbs().maxCoeff();
  }

  // sup over n >= 0 and x of the Taylor coefficients |d^n sigma(z0) / n!|
  double c2() const {
    double best = value(z0).cwiseAbs().maxCoeff();
    if (kind == SigmaKind::affine) return std::max(best, c1());
    double a = amp.cwiseAbs().maxCoeff();
    double term = 1.0;
    for (int n = 1; n <= 200; ++n) {
      term *= std::abs(freq) / n;
      double s = std::abs(std::sin(freq * z0 + 0.5 * std::numbers::pi * n));
      best = std::max(best, a * term * s);
      if (term < 1e-300) break;
    }
    return best;
  }

  double min_over_interval() const {
    double lo = std::numeric_limits<double>::infinity();
    const int n = 2001;
    for (int k = 0; k < n; ++k) {
      double z = z_min + (z_max - z_min) * k / (n - 1);
      lo = std::min(lo, value(z).minCoeff());
    }
    if (kind == SigmaKind::analytic) {
      // sin reaches -1 inside the interval? then base - |amp| is attained
      double zs = (1.5 * std::numbers::pi) / freq;
      double period = 2.0 * std::numbers::pi / std::abs(freq);
      double first = zs + std::ceil((z_min - zs) / period) * period;
      if (first <= z_max) lo = std::min(lo, (base - amp.cwiseAbs()).minCoeff());
    }
    return lo;
  }

  void validate() const {
    require(nx() > 0, "sigma has no spatial values");
    if (kind == SigmaKind::affine) {
      require(s0.size() == s1.size(), "sigma arrays differ in size");
    } else {
      require(base.size() == amp.size(), "sigma arrays differ in size");
      require(freq > 0.0 && std::isfinite(freq), "sigma frequency must be positive");
    }
    require(z_min < z_max, "sigma z-interval is empty");
    require(z0 >= z_min && z0 <= z_max, "z0 must lie in the sigma z-interval");
    require(min_over_interval() > 0.0, "sigma must stay positive on the z-interval");
  }
};

// sigma profile over the grid: base * (1 + variation cos(2 pi x / lx))
inline Vec sigma_profile(const PhaseGrid& g, double base, double variation) {
  Vec out(g.nx);
  for (int i = 0; i < g.nx; ++i)
    out(i) = base * (1.0 + variation * std::cos(2.0 * std::numbers::pi * g.x_nodes(i) / g.lx));
  return out;
}

inline SigmaModel affine_sigma(const PhaseGrid& g, double base, double slope, double base_var = 0.0,
                               double slope_var = 0.0) {
  SigmaModel s;
  s.kind = SigmaKind::affine;
  s.s0 = sigma_profile(g, base, base_var);
  s.s1 = sigma_profile(g, slope, slope_var);
  return s;
}

inline SigmaModel analytic_sigma(const PhaseGrid& g, double base, double amplitude, double freq,
                                 double base_var = 0.0, double amp_var = 0.0) {
  SigmaModel s;
  s.kind = SigmaKind::analytic;
  s.base = sigma_profile(g, base, base_var);
  s.amp = sigma_profile(g, amplitude, amp_var);
  s.freq = freq;
  return s;
}

}  // namespace hypokinetic
