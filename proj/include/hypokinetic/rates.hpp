#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "hypokinetic/errors.hpp"
#include "hypokinetic/operators.hpp"

namespace hypokinetic {

enum class Scaling { kinetic, parabolic, highfield };
enum class RateBranch { parabolic_bound, highfield_bound_1, highfield_bound_2 };

inline std::string to_string(Scaling s) {
  switch (s) {
    case Scaling::kinetic: return "kinetic";
    case Scaling::parabolic: return "parabolic";
    case Scaling::highfield: return "highfield";
  }
  return "?";
}

inline Scaling parse_scaling(const std::string& s) {
  if (s == "kinetic") return Scaling::kinetic;
  if (s == "parabolic") return Scaling::parabolic;
  if (s == "highfield") return Scaling::highfield;
  throw ValidationError("unknown scaling '" + s + "' (kinetic, parabolic, highfield)");
}

inline std::string to_string(RateBranch b) {
  switch (b) {
    case RateBranch::parabolic_bound: return "parabolic_bound";
    case RateBranch::highfield_bound_1: return "highfield_bound_1";
    case RateBranch::highfield_bound_2: return "highfield_bound_2";
  }
  return "?";
}

// Collision exponent p in  f_t + T f / Kn = L f / Kn^p.
inline int collision_exponent(Scaling s) { return s == Scaling::parabolic ? 2 : 1; }

struct LambdaValue {
  double lambda = 0.0;
  double delta = 0.0;  // optimizing delta, 0 at eps = 0
};

inline void check_triple(double a, double c, double d) {
  require(a > 0.0 && c > 0.0 && d > 0.0 && std::isfinite(a) && std::isfinite(c) && std::isfinite(d),
          "a, c, d must be positive");
}

// lambda(eps) = max_delta kappa(eps, delta) / (1 + eps), closed form with b = eps d.
inline LambdaValue lambda_of_eps(double a, double c, double d, double eps) {
  check_triple(a, c, d);
  require(eps >= 0.0 && eps < 1.0, "eps must lie in [0, 1)");
  double b = eps * d;
  double p = a - 2.0 * b - eps * c;
  double root = std::sqrt(p * p + 4.0 * b * d * eps);
  LambdaValue out;
  out.lambda = 0.5 * ((a - 2.0 * b + eps * c) - root) / (1.0 + eps);
  if (eps > 0.0) out.delta = (-p + root) / (2.0 * eps * d);
  return out;
}

struct NumericRate {
  double lambda = 0.0;
  double eps_star = 0.0;
};

inline NumericRate lambda_numeric(double a, double c, double d) {
  check_triple(a, c, d);
  const double hi = 1.0 - 1e-6;
  auto f = [&](double e) { return lambda_of_eps(a, c, d, e).lambda; };
  NumericRate best{f(0.0), 0.0};
  auto consider = [&](double e) {
    double v = f(e);
    if (v > best.lambda) best = {v, e};
  };
  const int n = 1000;
  for (int k = 1; k <= n; ++k) consider(hi * k / n);
  for (int k = 0; k < n; ++k) consider(hi * std::pow(10.0, -12.0 + 12.0 * k / n));

  // golden-section refinement around the best sample
  double step = hi / n;
  double lo_e = std::max(0.0, best.eps_star - step), hi_e = std::min(hi, best.eps_star + step);
  if (best.eps_star < step) {
    lo_e = 0.5 * best.eps_star;
    hi_e = std::min(hi, std::max(2.0 * best.eps_star, step));
  }
  const double r = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = hi_e - r * (hi_e - lo_e), x2 = lo_e + r * (hi_e - lo_e);
  double f1 = f(x1), f2 = f(x2);
  for (int it = 0; it < 200 && hi_e - lo_e > 1e-12; ++it) {
    if (f1 < f2) {
      lo_e = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo_e + r * (hi_e - lo_e);
      f2 = f(x2);
    } else {
      hi_e = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi_e - r * (hi_e - lo_e);
      f1 = f(x1);
    }
  }
  consider(x1);
  consider(x2);
  return best;
}

struct LowerBound {
  double lambda = 0.0;
  double eps0 = 0.0;
  RateBranch branch = RateBranch::parabolic_bound;
  double k0 = 0.0;
  double a_tilde = 0.0;
};

inline LowerBound lower_bound_parabolic(double a, double c, double d) {
  check_triple(a, c, d);
  LowerBound out;
  out.k0 = std::max(2.0, 2.0 * d * d / (a * c));
  double k0 = out.k0;
  out.a_tilde = k0 * a * a * c / (k0 * a * c + 2.0 * d * c);
  double at = out.a_tilde;
  out.lambda = at * d * d / ((k0 * a + at) * (k0 * a + c));
  // eps0 = ac / (2dc + k d^2) with k = k0 a c / d^2
  out.eps0 = a * c / (2.0 * d * c + k0 * a * c);
  out.branch = RateBranch::parabolic_bound;
  return out;
}

inline LowerBound lower_bound_highfield(double a, double c, double d) {
  check_triple(a, c, d);
  LowerBound out;
  out.a_tilde = a * d / (c + d);
  out.eps0 = std::min(0.5, a * c / (2.0 * d * (c + d)));
  double at = out.a_tilde;
  if (at * c / (d * d) <= 1.0) {
    double r = c * c / (d * d);
    out.lambda = (at / (1.0 + at * c / (2.0 * d * d))) * r /
                 (2.0 * ((1.0 + 0.5 * r) + std::sqrt(1.0 + 0.25 * r * r)));
    out.branch = RateBranch::highfield_bound_1;
  } else {
    double u = a - d + 0.5 * c, w = a - d - 0.5 * c;
    out.lambda = (1.0 / 3.0) * d * d / (u + std::sqrt(w * w + d * d));
    out.branch = RateBranch::highfield_bound_2;
  }
  return out;
}

inline double c_const(double eps) {
  require(eps >= 0.0 && eps < 1.0, "eps must lie in [0, 1)");
  return std::sqrt((1.0 + eps) / (1.0 - eps));
}

struct ScaledConstants {
  double alpha_kn = 0.0, beta_kn = 0.0, gamma_kn = 0.0;
  double kn = 1.0;
  Scaling scaling = Scaling::kinetic;
  CoercivityConstants derived;
};

inline ScaledConstants rescale(const CoercivityConstants& k, double kn, Scaling scaling) {
  require(kn > 0.0 && kn <= 1.0, "Kn must lie in (0, 1]");
  ScaledConstants s;
  s.kn = kn;
  s.scaling = scaling;
  switch (scaling) {
    case Scaling::kinetic:
      require(kn == 1.0, "kinetic scaling requires Kn = 1");
      s.alpha_kn = k.alpha;
      s.beta_kn = k.beta;
      s.gamma_kn = k.gamma;
      break;
    case Scaling::parabolic:
      s.alpha_kn = k.alpha / (kn * kn);
      s.beta_kn = k.beta / (kn * kn);
      s.gamma_kn = k.gamma / kn;
      break;
    case Scaling::highfield:
      s.alpha_kn = k.alpha / kn;
      s.beta_kn = k.beta / (kn * kn);
      s.gamma_kn = k.gamma;
      break;
  }
  s.derived = CoercivityConstants::from(s.alpha_kn, s.beta_kn, s.gamma_kn);
  return s;
}

struct RatePlan {
  double eps0 = 0.0;
  double delta = 0.0;
  double lambda_lower = 0.0;
  double lambda_numeric = 0.0;
  double c_eps = 1.0;
  RateBranch branch = RateBranch::parabolic_bound;
  double lambda_parabolic = 0.0;
  double lambda_highfield = 0.0;
  double lambda_at_eps0 = 0.0;
};

// Best certified rate for one (a, c, d): the larger of the two lower bounds,
// with the eps0 that bound was derived for.
inline RatePlan certify(const CoercivityConstants& k) {
  LowerBound par = lower_bound_parabolic(k.a, k.c, k.d);
  LowerBound hf = lower_bound_highfield(k.a, k.c, k.d);
  const LowerBound& best = par.lambda >= hf.lambda ? par : hf;
  RatePlan plan;
  plan.eps0 = best.eps0;
  plan.lambda_lower = best.lambda;
  plan.branch = best.branch;
  plan.lambda_parabolic = par.lambda;
  plan.lambda_highfield = hf.lambda;
  LambdaValue at = lambda_of_eps(k.a, k.c, k.d, best.eps0);
  plan.delta = at.delta;
  plan.lambda_at_eps0 = at.lambda;
  plan.lambda_numeric = lambda_numeric(k.a, k.c, k.d).lambda;
  plan.c_eps = c_const(plan.eps0);
  return plan;
}

inline RatePlan certify(const CoercivityConstants& k, double kn, Scaling scaling) {
  return certify(rescale(k, kn, scaling).derived);
}

inline double uniform_rate_over_z(const std::vector<CoercivityConstants>& nodes, double kn,
                                  Scaling scaling) {
  require(!nodes.empty(), "no z-nodes supplied");
  double lo = std::numeric_limits<double>::infinity();
  for (const auto& k : nodes) {
    if (!(k.alpha > 0.0 && k.beta > 0.0 && k.gamma > 0.0))
      throw ValidationError("assumption (bounds in z) violated");
    lo = std::min(lo, certify(k, kn, scaling).lambda_lower);
  }
  return lo;
}

}  // namespace hypokinetic
