#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "hypokinetic/operators.hpp"
#include "hypokinetic/phase_space.hpp"
#include "hypokinetic/rates.hpp"

using namespace hypokinetic;

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

GridPtr default_grid() { return build_grid(32, two_pi, 16, VelocityRule::gauss_hermite); }

Field random_field(const GridPtr& g, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Field f(g);
  for (int i = 0; i < g->nx; ++i)
    for (int j = 0; j < g->nv; ++j) f(i, j) = u(rng) * g->maxwellian(j);
  return f;
}

Field minus(const Field& f, const Field& g) {
  Field out = f;
  out.values -= g.values;
  return out;
}

double second_moment(const GridPtr& g) {
  return (g->v_weights.array() * g->v_nodes.array().square() * g->maxwellian.array()).sum();
}

}  // namespace

// ---- phase space -------------------------------------------------------------

TEST(PhaseSpace, SmallGridMoments) {
  auto g = build_grid(4, two_pi, 4, VelocityRule::gauss_hermite);
  EXPECT_NEAR(g->v_weights.dot(g->maxwellian), 1.0, 1e-14);
  EXPECT_NEAR((g->v_weights.array() * g->v_nodes.array() * g->maxwellian.array()).sum(), 0.0, 1e-15);
}

TEST(PhaseSpace, SecondMomentMatchesHighOrderReference) {
  auto g = default_grid();
  QuadratureRule ref = gauss_hermite_rule(200);
  double reference = (ref.weights.array() * ref.nodes.array().square()).sum();
  EXPECT_NEAR(reference, 1.0, 1e-10);
  EXPECT_NEAR(second_moment(g), reference, 1e-10);
}

TEST(PhaseSpace, OddMomentsVanish) {
  for (auto rule : {VelocityRule::gauss_hermite, VelocityRule::uniform_symmetric}) {
    auto g = build_grid(8, 1.0, 16, rule);
    for (int p = 1; p <= 15; p += 2) {
      double m = (g->v_weights.array() * g->v_nodes.array().pow(p) * g->maxwellian.array()).sum();
      double scale = (g->v_weights.array() * g->v_nodes.array().abs().pow(p) * g->maxwellian.array()).sum();
      EXPECT_LE(std::abs(m), 1e-14 * scale) << "power " << p;
    }
  }
}

TEST(PhaseSpace, RejectsInvalidGrids) {
  EXPECT_THROW(build_grid(4, 1.0, 5, VelocityRule::gauss_hermite), ValidationError);
  EXPECT_THROW(build_grid(4, 0.0, 4, VelocityRule::gauss_hermite), ValidationError);
  EXPECT_THROW(build_grid(4, -1.0, 4, VelocityRule::gauss_hermite), ValidationError);
  EXPECT_THROW(build_grid(5, 1.0, 4, VelocityRule::gauss_hermite), ValidationError);
}

TEST(PhaseSpace, EquilibriumNormalizedAndPositive) {
  for (auto g : {default_grid(), build_grid(4, 1.0, 4, VelocityRule::uniform_symmetric)}) {
    Equilibrium e = equilibrium(g);
    EXPECT_NEAR(e.total, 1.0, 1e-12);
    EXPECT_GT(e.F.values.minCoeff(), 0.0);
    EXPECT_NEAR(inner_product(e.F, e.F), 1.0, 1e-12);
    EXPECT_NEAR(mass(e.F), 1.0, 1e-12);
  }
}

TEST(PhaseSpace, InnerProductSymmetricAndCauchySchwarz) {
  auto g = default_grid();
  std::mt19937_64 rng(7);
  for (int k = 0; k < 20; ++k) {
    Field f = random_field(g, rng), h = random_field(g, rng);
    double fh = inner_product(f, h);
    EXPECT_NEAR(fh, inner_product(h, f), 1e-14 * norm(f) * norm(h));
    EXPECT_LE(std::abs(fh), norm(f) * norm(h) * (1 + 1e-14));
  }
  EXPECT_EQ(norm(Field(g)), 0.0);
  auto other = build_grid(8, two_pi, 16, VelocityRule::gauss_hermite);
  EXPECT_THROW(inner_product(Field(g), Field(other)), ValidationError);
}

TEST(PhaseSpace, ProjectionIsOrthogonal) {
  auto g = default_grid();
  std::mt19937_64 rng(11);
  Field rhoM(g);
  for (int i = 0; i < g->nx; ++i)
    for (int j = 0; j < g->nv; ++j) rhoM(i, j) = (1.0 + std::sin(g->x_nodes(i))) * g->maxwellian(j);
  EXPECT_LE((project_pi(rhoM).values - rhoM.values).cwiseAbs().maxCoeff(), 1e-14);
  for (int k = 0; k < 20; ++k) {
    Field f = random_field(g, rng), h = random_field(g, rng);
    Field pf = project_pi(f);
    EXPECT_LE((project_pi(pf).values - pf.values).cwiseAbs().maxCoeff(), 1e-13);
    EXPECT_NEAR(inner_product(pf, h), inner_product(f, project_pi(h)), 1e-13);
    EXPECT_NEAR(inner_product(pf, minus(h, project_pi(h))), 0.0, 1e-12);
  }
  // matrix-level weighted symmetry
  KineticOperator P = build_projection(g);
  EXPECT_LE(max_abs(P.matrix - P.adjoint()), 1e-13);
}

TEST(PhaseSpace, MassAndFluctuation) {
  auto g = default_grid();
  Field F = equilibrium(g).F;
  EXPECT_NEAR(mass(F), 1.0, 1e-13);
  EXPECT_EQ(mass(Field(g)), 0.0);
  EXPECT_LE(fluctuation(F).values.cwiseAbs().maxCoeff(), 1e-15);
  Field F2 = F;
  F2.values *= 2.0;
  EXPECT_LE(fluctuation(F2).values.cwiseAbs().maxCoeff(), 1e-15);
  std::mt19937_64 rng(3);
  for (int k = 0; k < 10; ++k) EXPECT_LE(std::abs(mass(fluctuation(random_field(g, rng)))), 1e-13);
}

TEST(PhaseSpace, HatCoordinatesRoundTrip) {
  auto g = default_grid();
  std::mt19937_64 rng(5);
  Field f = random_field(g, rng), h = random_field(g, rng);
  EXPECT_NEAR(to_hat(f).dot(to_hat(h)), inner_product(f, h), 1e-14);
  EXPECT_LE((from_hat(g, to_hat(f)).values - f.values).cwiseAbs().maxCoeff(), 1e-15);
}

// ---- operators ---------------------------------------------------------------

TEST(Operators, TransportOfConstantVanishes) {
  auto g = default_grid();
  KineticOperator T = build_transport(g);
  Field F = equilibrium(g).F;
  EXPECT_LE(T.apply(F).values.cwiseAbs().maxCoeff(), 1e-13);
}

TEST(Operators, TransportIsSkew) {
  auto g = default_grid();
  std::mt19937_64 rng(13);
  for (auto rule : {DerivativeRule::spectral, DerivativeRule::central2}) {
    KineticOperator T = build_transport(g, rule);
    EXPECT_LE(max_abs(T.matrix + T.adjoint()), 1e-10);
    for (int k = 0; k < 100; ++k) {
      Field f = random_field(g, rng);
      EXPECT_NEAR(inner_product(T.apply(f), f), 0.0, 1e-11);
    }
  }
}

TEST(Operators, SpectralTransportOfResolvedMode) {
  auto g = default_grid();
  const double k = two_pi / g->lx;
  Field f(g), expected(g);
  for (int i = 0; i < g->nx; ++i)
    for (int j = 0; j < g->nv; ++j) {
      f(i, j) = std::sin(k * g->x_nodes(i)) * g->maxwellian(j);
      expected(i, j) = g->v_nodes(j) * k * std::cos(k * g->x_nodes(i)) * g->maxwellian(j);
    }
  Field Tf = build_transport(g).apply(f);
  EXPECT_LE((Tf.values - expected.values).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Operators, BgkNullSpaceAndRelaxation) {
  auto g = default_grid();
  KineticOperator L = build_bgk(g, Vec::Ones(g->nx));
  Field rhoM(g);
  for (int i = 0; i < g->nx; ++i)
    for (int j = 0; j < g->nv; ++j) rhoM(i, j) = std::cos(g->x_nodes(i)) * g->maxwellian(j);
  EXPECT_LE(L.apply(rhoM).values.cwiseAbs().maxCoeff(), 1e-14);

  std::mt19937_64 rng(17);
  Field f = random_field(g, rng);
  f = minus(f, project_pi(f));
  EXPECT_LE((L.apply(f).values + f.values).cwiseAbs().maxCoeff(), 1e-13);

  for (int k = 0; k < 10; ++k) {
    Field a = random_field(g, rng), b = random_field(g, rng);
    EXPECT_NEAR(inner_product(L.apply(a), b), inner_product(a, L.apply(b)), 1e-12);
  }
  Vec bad = Vec::Ones(g->nx);
  bad(3) = 0.0;
  EXPECT_THROW(build_bgk(g, bad), ValidationError);
}

TEST(Operators, UnitKernelEqualsBgk) {
  auto g = default_grid();
  KineticOperator L1 = build_anisotropic(g, Mat::Ones(g->nv, g->nv));
  KineticOperator B = build_bgk(g, Vec::Ones(g->nx));
  EXPECT_LE(max_abs(L1.matrix - B.matrix), 1e-14);
}

TEST(Operators, AnisotropicConservesMassAndIsSymmetric) {
  auto g = default_grid();
  KineticOperator L = build_anisotropic(g, gaussian_kernel(*g, 1.0, 0.5, 1.0));
  Field F = equilibrium(g).F;
  EXPECT_LE(L.apply(F).values.cwiseAbs().maxCoeff(), 1e-12);
  std::mt19937_64 rng(19);
  for (int k = 0; k < 20; ++k) {
    Field f = random_field(g, rng);
    Field Lf = L.apply(f);
    for (int i = 0; i < g->nx; ++i)
      EXPECT_NEAR(g->v_weights.dot(Lf.values.segment(i * g->nv, g->nv)), 0.0, 1e-12);
  }
  EXPECT_LE(max_abs(L.matrix - L.adjoint()), 1e-10);
  Mat bad = gaussian_kernel(*g, 1.0, 0.5, 1.0);
  bad(0, 0) = -1.0;
  EXPECT_THROW(build_anisotropic(g, bad), ValidationError);
}

TEST(Operators, AuxiliaryInequalities) {
  auto g = default_grid();
  KineticOperator T = build_transport(g);
  KineticOperator A = build_auxiliary_A(T, g);
  Field F = equilibrium(g).F;
  EXPECT_LE(A.apply(F).values.cwiseAbs().maxCoeff(), 1e-12);
  std::mt19937_64 rng(23);
  for (int k = 0; k < 100; ++k) {
    Field f = random_field(g, rng);
    double q = norm(minus(f, project_pi(f)));
    EXPECT_LE(norm(A.apply(f)), 0.5 * q * (1 + 1e-12));
    EXPECT_LE(norm(T.apply(A.apply(f))), q * (1 + 1e-12));
  }
}

TEST(Operators, AlphaForBgk) {
  auto g = default_grid();
  EXPECT_NEAR(estimate_alpha(build_bgk(g, Vec::Ones(g->nx))), 1.0, 1e-12);
  Vec sigma(g->nx);
  for (int i = 0; i < g->nx; ++i) sigma(i) = 1.0 + 0.5 * std::sin(g->x_nodes(i));
  EXPECT_NEAR(estimate_alpha(build_bgk(g, sigma)), sigma.minCoeff(), 1e-12);
  // same answer through the dense path
  KineticOperator dense = build_bgk(g, sigma);
  dense.blocks.clear();
  EXPECT_NEAR(estimate_alpha(dense), sigma.minCoeff(), 1e-10);
  KineticOperator zero = build_bgk(g, sigma);
  zero.matrix.setZero();
  for (Mat& b : zero.blocks) b.setZero();
  EXPECT_THROW(estimate_alpha(zero), NumericalError);
}

TEST(Operators, BetaMatchesFourierMode) {
  auto g = default_grid();
  double beta = estimate_beta(build_transport(g));
  double fourier = std::pow(two_pi / g->lx, 2) * second_moment(g);
  EXPECT_NEAR(beta, fourier, 0.02 * fourier);
  EXPECT_GT(beta, 0.0);

  auto g2 = build_grid(32, 2.0 * two_pi, 16, VelocityRule::gauss_hermite);
  double beta2 = estimate_beta(build_transport(g2));
  EXPECT_NEAR(beta / beta2, 4.0, 0.08);
}

TEST(Operators, GammaMatchesSvdOracle) {
  auto g = build_grid(16, two_pi, 8, VelocityRule::gauss_hermite);
  KineticOperator T = build_transport(g);
  KineticOperator L = build_bgk(g, Vec::Ones(g->nx));
  KineticOperator A = build_auxiliary_A(T, g);
  Mat I = Mat::Identity(g->size(), g->size());
  Mat Q = I - build_projection(g).hat();
  Mat AT = A.hat() * T.hat() * Q, AL = A.hat() * L.hat() * Q;
  Eigen::JacobiSVD<Mat> s1(AT), s2(AL);
  double oracle = s1.singularValues()(0) + s2.singularValues()(0);
  double gamma = estimate_gamma(A, T, L);
  EXPECT_NEAR(gamma, oracle, 1e-10);

  // power iteration on (AT)^T AT
  Vec x = Vec::Ones(g->size());
  Mat N = AT.transpose() * AT;
  for (int it = 0; it < 2000; ++it) x = (N * x).normalized();
  EXPECT_NEAR(std::sqrt(x.dot(N * x)), s1.singularValues()(0), 1e-8);

  KineticOperator zero = L;
  zero.matrix.setZero();
  EXPECT_NEAR(estimate_gamma(A, T, zero), s1.singularValues()(0), 1e-10);
  KineticOperator twice = L;
  twice.matrix *= 2.0;
  double al = estimate_gamma(A, T, L) - s1.singularValues()(0);
  double al2 = estimate_gamma(A, T, twice) - s1.singularValues()(0);
  EXPECT_LE(al2, 2.0 * al + 1e-12);
}

TEST(Operators, AssumptionsHoldForDefaultModels) {
  auto g = default_grid();
  KineticOperator T = build_transport(g);
  KineticOperator P = build_projection(g);
  for (const KineticOperator& L :
       {build_bgk(g, Vec::Ones(g->nx)), build_anisotropic(g, gaussian_kernel(*g, 1.0, 0.5, 1.0))}) {
    AssumptionReport r = check_assumptions(T, L, P);
    EXPECT_TRUE(r.passed()) << (r.failures.empty() ? "" : r.failures.front());
    EXPECT_LE(r.pi_t_pi, 1e-11);
    EXPECT_LE(r.transport_skew, 1e-10);
    EXPECT_LE(r.collision_sym, 1e-10);
    EXPECT_GT(r.alpha, 0.0);
    EXPECT_GT(r.beta, 0.0);
    EXPECT_GT(r.gamma, 0.0);
  }
}

TEST(Operators, AsymmetricVelocityGridBreaksOrthogonality) {
  GridOptions opt;
  opt.velocity_shift = 0.3;
  auto g = build_grid(32, two_pi, 16, VelocityRule::gauss_hermite, opt);
  AssumptionReport r = check_assumptions(build_transport(g), build_bgk(g, Vec::Ones(g->nx)), build_projection(g));
  EXPECT_FALSE(r.orthogonality_ok);
  ASSERT_FALSE(r.failures.empty());
  EXPECT_NE(r.failures.front().find("ΠTΠ ≠ 0"), std::string::npos);
}

TEST(Operators, CoercivityPropertiesOnRandomFields) {
  auto g = default_grid();
  KineticOperator T = build_transport(g);
  KineticOperator L = build_anisotropic(g, gaussian_kernel(*g, 1.0, 0.5, 1.0));
  double alpha = estimate_alpha(L), beta = estimate_beta(T);
  std::mt19937_64 rng(29);
  for (int k = 0; k < 100; ++k) {
    Field f = random_field(g, rng);
    double q = norm(minus(f, project_pi(f)));
    double diss = -inner_product(L.apply(f), f);
    EXPECT_GE(diss, -1e-14);
    EXPECT_GE(diss, (alpha - 1e-9) * q * q);
    Field h = remove_equilibria(f);
    Field ph = project_pi(h);
    EXPECT_GE(std::pow(norm(T.apply(ph)), 2), (beta - 1e-9) * std::pow(norm(ph), 2));
  }
}

TEST(Operators, CoercivityConstantsDerived) {
  CoercivityConstants k = CoercivityConstants::from(2.0, 3.0, 5.0);
  EXPECT_DOUBLE_EQ(k.a, 2.0);
  EXPECT_DOUBLE_EQ(k.c, 0.75);
  EXPECT_DOUBLE_EQ(k.d, 3.0);
  EXPECT_THROW(CoercivityConstants::from(0.0, 1.0, 1.0), ValidationError);
}

// ---- rates -------------------------------------------------------------------

TEST(Rates, LambdaAtZeroEps) { EXPECT_EQ(lambda_of_eps(1.0, 0.5, 1.0, 0.0).lambda, 0.0); }

TEST(Rates, LambdaMatchesDeltaGridOracle) {
  const double a = 1.0, c = 0.5, d = 1.0, eps = 0.1;
  // brute force over delta of min{a - 2b - b / delta, eps (c - d delta)}, b = eps d
  const double b = eps * d;
  double best = -1e300;
  auto kappa = [&](double delta) { return std::min(a - 2.0 * b - b / delta, eps * c - b * delta); };
  // coarse sweep then local refinement
  double arg = 0.0;
  for (int k = 1; k <= 200000; ++k) {
    double delta = 1e-3 * k;
    double v = kappa(delta);
    if (v > best) best = v, arg = delta;
  }
  for (double h = 1e-3; h > 1e-14; h *= 0.5)
    for (double delta : {arg - h, arg + h})
      if (delta > 0 && kappa(delta) > best) best = kappa(delta), arg = delta;
  LambdaValue lv = lambda_of_eps(a, c, d, eps);
  EXPECT_NEAR(lv.lambda, best / (1.0 + eps), 1e-8);
  EXPECT_NEAR(lv.delta, arg, 1e-5);
}

TEST(Rates, LambdaBelowA) {
  for (double eps = 0.0; eps < 1.0; eps += 0.01) {
    EXPECT_LE(lambda_of_eps(2.0, 0.3, 1.5, eps).lambda, 2.0 / (1.0 + eps) + 1e-15);
  }
  EXPECT_THROW(lambda_of_eps(1, 1, 1, 1.0), ValidationError);
}

TEST(Rates, NumericMaximumDominatesBounds) {
  NumericRate n = lambda_numeric(1, 1, 1);
  EXPECT_GE(n.lambda, lower_bound_highfield(1, 1, 1).lambda - 1e-12);
  double prev = 0.0;
  for (double a : {0.5, 1.0, 2.0, 5.0, 10.0, 50.0}) {
    double l = lambda_numeric(a, 0.5, 1.0).lambda;
    EXPECT_GE(l, prev - 1e-14);
    prev = l;
  }
  EXPECT_LT(lambda_numeric(1.0, 1e-8, 1.0).lambda, 1e-7);
}

TEST(Rates, ParabolicSpotValue) {
  LowerBound lb = lower_bound_parabolic(1, 1, 1);
  EXPECT_DOUBLE_EQ(lb.k0, 2.0);
  EXPECT_DOUBLE_EQ(lb.a_tilde, 0.5);
  EXPECT_NEAR(lb.lambda, 1.0 / 15.0, 1e-15);
  EXPECT_LT(lb.eps0, 0.5 + 1e-15);
}

TEST(Rates, HighFieldSpotValues) {
  LowerBound b1 = lower_bound_highfield(1, 1, 1);
  EXPECT_EQ(b1.branch, RateBranch::highfield_bound_1);
  EXPECT_DOUBLE_EQ(b1.eps0, 0.25);
  EXPECT_NEAR(b1.lambda, (0.5 / 1.25) / (2.0 * (1.5 + std::sqrt(1.25))), 1e-15);
  EXPECT_NEAR(b1.lambda, 0.0764, 5e-5);
  LowerBound b2 = lower_bound_highfield(10, 1, 1);
  EXPECT_EQ(b2.branch, RateBranch::highfield_bound_2);
  EXPECT_DOUBLE_EQ(b2.eps0, 0.5);
  EXPECT_NEAR(b2.lambda, (1.0 / 3.0) / (9.5 + std::sqrt(8.5 * 8.5 + 1.0)), 1e-15);
  EXPECT_NEAR(b2.lambda, 0.01846, 5e-6);
}

TEST(Rates, BoundsDominatedOnGrid) {
  int checked = 0;
  for (int i = 0; i < 10; ++i)
    for (int j = 0; j < 10; ++j)
      for (int k = 0; k < 10; ++k) {
        double a = 0.1 * std::pow(100.0, i / 9.0), c = 0.1 * std::pow(100.0, j / 9.0),
               d = 0.1 * std::pow(100.0, k / 9.0);
        double num = lambda_numeric(a, c, d).lambda;
        LowerBound p = lower_bound_parabolic(a, c, d), h = lower_bound_highfield(a, c, d);
        EXPECT_LE(p.lambda, num + 1e-10);
        EXPECT_LE(h.lambda, num + 1e-10);
        EXPECT_GT(p.lambda, 0.0);
        EXPECT_GT(h.lambda, 0.0);
        EXPECT_LT(p.eps0, 1.0);
        EXPECT_LT(h.eps0, 1.0);
        ++checked;
      }
  EXPECT_EQ(checked, 1000);
}

TEST(Rates, RescaleArithmetic) {
  CoercivityConstants k = CoercivityConstants::from(1, 1, 1);
  ScaledConstants p = rescale(k, 0.1, Scaling::parabolic);
  EXPECT_NEAR(p.alpha_kn, 100, 1e-12);
  EXPECT_NEAR(p.beta_kn, 100, 1e-12);
  EXPECT_NEAR(p.gamma_kn, 10, 1e-12);
  ScaledConstants h = rescale(k, 0.1, Scaling::highfield);
  EXPECT_NEAR(h.alpha_kn, 10, 1e-12);
  EXPECT_NEAR(h.beta_kn, 100, 1e-12);
  EXPECT_NEAR(h.gamma_kn, 1, 1e-12);
  for (auto s : {Scaling::kinetic, Scaling::parabolic, Scaling::highfield}) {
    ScaledConstants id = rescale(k, 1.0, s);
    EXPECT_EQ(id.alpha_kn, 1.0);
    EXPECT_EQ(id.beta_kn, 1.0);
    EXPECT_EQ(id.gamma_kn, 1.0);
  }
  EXPECT_THROW(rescale(k, 0.0, Scaling::parabolic), ValidationError);
  EXPECT_THROW(rescale(k, 0.5, Scaling::kinetic), ValidationError);
}

TEST(Rates, ParabolicBoundUniformInKn) {
  CoercivityConstants k = CoercivityConstants::from(1, 1, 1);
  auto lb = [&](double kn) {
    ScaledConstants s = rescale(k, kn, Scaling::parabolic);
    return lower_bound_parabolic(s.derived.a, s.derived.c, s.derived.d);
  };
  double ref = lb(1.0).lambda;
  for (double kn : {1e-1, 1e-2, 1e-3}) {
    LowerBound b = lb(kn);
    EXPECT_LE(b.lambda, 3.0 * ref);
    EXPECT_GE(b.lambda, ref / 3.0);
    EXPECT_LT(b.eps0, 1.0);
  }
}

TEST(Rates, CertifyTakesLargerBound) {
  for (double a : {0.5, 1.0, 10.0}) {
    CoercivityConstants k = CoercivityConstants::from(a, 1.0, 1.0);
    RatePlan p = certify(k);
    double best = std::max(lower_bound_parabolic(k.a, k.c, k.d).lambda, lower_bound_highfield(k.a, k.c, k.d).lambda);
    EXPECT_DOUBLE_EQ(p.lambda_lower, best);
    EXPECT_LE(p.lambda_lower, p.lambda_numeric + 1e-10);
    EXPECT_NEAR(p.c_eps, c_const(p.eps0), 1e-15);
    EXPECT_LT(p.eps0, 1.0);
  }
}

TEST(Rates, UniformRateOverNodes) {
  CoercivityConstants k = CoercivityConstants::from(1, 1, 1);
  RatePlan single = certify(k);
  EXPECT_DOUBLE_EQ(uniform_rate_over_z({k}, 1.0, Scaling::kinetic), single.lambda_lower);
  EXPECT_DOUBLE_EQ(uniform_rate_over_z({k, k, k}, 1.0, Scaling::kinetic), single.lambda_lower);
  std::vector<CoercivityConstants> nodes;
  double expected = 1e300;
  for (double s : {0.5, 1.0, 1.5}) {
    nodes.push_back(CoercivityConstants::from(s, 1.0, 1.0 + s));
    ScaledConstants sc = rescale(nodes.back(), 0.1, Scaling::parabolic);
    expected = std::min(expected, certify(sc.derived).lambda_lower);
  }
  EXPECT_DOUBLE_EQ(uniform_rate_over_z(nodes, 0.1, Scaling::parabolic), expected);
  CoercivityConstants bad = k;
  bad.alpha = 0.0;
  EXPECT_THROW(uniform_rate_over_z({k, bad}, 1.0, Scaling::kinetic), ValidationError);
}

TEST(Rates, EntropyEquivalenceConstant) {
  EXPECT_EQ(c_const(0.0), 1.0);
  EXPECT_NEAR(c_const(0.6), 2.0, 1e-15);
  EXPECT_NEAR(c_const(0.25), std::sqrt(5.0 / 3.0), 1e-15);
  EXPECT_NEAR(c_const(0.25), 1.2910, 1e-4);
  EXPECT_THROW(c_const(1.0), ValidationError);
}

TEST(Rates, ScalingNames) {
  EXPECT_EQ(parse_scaling("highfield"), Scaling::highfield);
  EXPECT_EQ(to_string(Scaling::parabolic), "parabolic");
  EXPECT_THROW(parse_scaling("diffusive"), ValidationError);
}
