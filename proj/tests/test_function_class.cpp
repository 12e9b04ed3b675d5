#include "open_dgd/function_class.hpp"
#include "open_dgd/penalized_objective.hpp"
#include "open_dgd/random_instances.hpp"

#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>
#include <cmath>
#include <numbers>

namespace odgd {
namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

Matrix diag(std::initializer_list<double> v) { return vec(v).asDiagonal(); }

// 1/2 sum_i lambda_i <v_i, x - c>^2 from an independent eigendecomposition.
double eigen_form_value(const QuadraticFunction& f, const Vector& x) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(f.hessian());
  const Vector proj = es.eigenvectors().transpose() * (x - f.minimizer());
  return 0.5 * (es.eigenvalues().array() * proj.array().square()).sum();
}

TEST(FunctionClassParams, RejectsBadConstants) {
  EXPECT_THROW((FunctionClassParams{0.0, 1.0, 1}.validate()), std::invalid_argument);
  EXPECT_THROW((FunctionClassParams{2.0, 1.0, 1}.validate()), std::invalid_argument);
  EXPECT_THROW((FunctionClassParams{1.0, 1.0, 0}.validate()), std::invalid_argument);
  EXPECT_NO_THROW((FunctionClassParams{1.0, 1.0, 3}.validate()));
  EXPECT_DOUBLE_EQ((FunctionClassParams{2.0, 10.0, 1}.kappa()), 5.0);
}

TEST(Quadratic, ScalarValueAndGradient) {
  const QuadraticFunction f(diag({1.0}), vec({0.0}));
  EXPECT_DOUBLE_EQ(f.value(vec({2.0})), 2.0);
  EXPECT_DOUBLE_EQ(f.gradient(vec({2.0}))[0], 2.0);
}

TEST(Quadratic, DimensionMismatchThrows) {
  const QuadraticFunction f(diag({1.0, 2.0}), vec({0.0, 0.0}));
  EXPECT_THROW(f.value(vec({1.0})), DimensionError);
  EXPECT_THROW(f.gradient(vec({1.0, 2.0, 3.0})), DimensionError);
  EXPECT_THROW(QuadraticFunction(diag({1.0, 2.0}), vec({0.0})), DimensionError);
}

TEST(Quadratic, RejectsInvalidHessians) {
  Matrix asym(2, 2);
  asym << 1.0, 0.5, 0.0, 1.0;
  EXPECT_THROW(QuadraticFunction(asym, vec({0.0, 0.0})), std::invalid_argument);
  EXPECT_THROW(QuadraticFunction(diag({1.0, -1.0}), vec({0.0, 0.0})), std::invalid_argument);
  EXPECT_THROW(QuadraticFunction(Matrix::Ones(2, 3), vec({0.0, 0.0})), std::invalid_argument);
}

TEST(Quadratic, ZeroAtMinimizerPositiveElsewhere) {
  Rng rng = make_stream(11, 0);
  const FunctionClassParams p{1.0, 10.0, 3};
  for (int t = 0; t < 50; ++t) {
    const QuadraticFunction f = random_quadratic(p, rng);
    EXPECT_EQ(f.value(f.minimizer()), 0.0);
    EXPECT_LT(f.gradient(f.minimizer()).norm(), 1e-15);
    const Vector x = f.minimizer() + random_on_sphere(3, rng) * 1e-3;
    EXPECT_GT(f.value(x), 0.0);
  }
}

TEST(Quadratic, ValueMatchesEigendecomposition) {
  Rng rng = make_stream(12, 0);
  const FunctionClassParams p{1.0, 10.0, 4};
  for (int t = 0; t < 100; ++t) {
    const QuadraticFunction f = random_quadratic(p, rng);
    const Vector x = 3.0 * random_in_ball(4, rng);
    const double oracle = eigen_form_value(f, x);
    EXPECT_NEAR(f.value(x), oracle, 1e-12 * (1.0 + oracle));
  }
}

TEST(Quadratic, GradientMatchesCentralDifferences) {
  Rng rng = make_stream(13, 0);
  const FunctionClassParams p{1.0, 100.0, 5};
  const double h = 1e-5;
  for (int t = 0; t < 100; ++t) {
    const QuadraticFunction f = random_quadratic(p, rng);
    const Vector x = 2.0 * random_in_ball(5, rng);
    Vector fd(5);
    for (int i = 0; i < 5; ++i) {
      Vector xp = x, xm = x;
      xp[i] += h;
      xm[i] -= h;
      fd[i] = (f.value(xp) - f.value(xm)) / (2 * h);
    }
    const Vector g = f.gradient(x);
    EXPECT_LE((fd - g).norm(), 1e-6 * std::max(1.0, g.norm()));
  }
}

TEST(Quadratic, StrongConvexityAndSmoothnessOnRandomPairs) {
  Rng rng = make_stream(14, 0);
  const FunctionClassParams p{0.5, 20.0, 3};
  for (int t = 0; t < 200; ++t) {
    const QuadraticFunction f = random_quadratic(p, rng);
    const Vector x = 5.0 * random_in_ball(3, rng);
    const Vector y = 5.0 * random_in_ball(3, rng);
    const Vector dg = f.gradient(x) - f.gradient(y);
    const double dx = (x - y).norm();
    EXPECT_GE(dg.dot(x - y), p.alpha * dx * dx * (1 - 1e-9));
    EXPECT_LE(dg.norm(), p.beta * dx * (1 + 1e-9));
  }
}

TEST(Quadratic, AccumulateGradientAddsScaledGradient) {
  const QuadraticFunction f(diag({2.0, 3.0}), vec({1.0, -1.0}));
  Vector out = vec({1.0, 1.0});
  f.accumulate_gradient(vec({0.0, 0.0}), 0.5, out);
  EXPECT_DOUBLE_EQ(out[0], 1.0 + 0.5 * -2.0);
  EXPECT_DOUBLE_EQ(out[1], 1.0 + 0.5 * 3.0);
}

TEST(Quadratic, FromSpectrumMatchesGeneralConstructor) {
  Rng rng = make_stream(15, 0);
  const Matrix q = random_rotation(3, rng);
  const Vector lam = vec({1.0, 4.0, 9.0});
  const QuadraticFunction a = QuadraticFunction::from_spectrum(q, lam, vec({0.1, 0.2, 0.3}));
  const QuadraticFunction b(q * lam.asDiagonal() * q.transpose(), vec({0.1, 0.2, 0.3}));
  EXPECT_NEAR(a.min_eigenvalue(), 1.0, 1e-15);
  EXPECT_NEAR(a.max_eigenvalue(), 9.0, 1e-15);
  EXPECT_NEAR(b.min_eigenvalue(), 1.0, 1e-12);
  EXPECT_NEAR(b.max_eigenvalue(), 9.0, 1e-12);
  EXPECT_LT((a.hessian() - b.hessian()).norm(), 1e-13);
}

TEST(Rotated2D, ExpansionHasExactSpectrum) {
  Rng rng = make_stream(16, 0);
  std::uniform_real_distribution<double> angle(-3.0, 3.0);
  std::uniform_real_distribution<double> logk(0.0, std::log(1e4));
  for (int t = 0; t < 200; ++t) {
    RotatedQuadratic2D r;
    r.phi = angle(rng);
    r.sign = t % 2 ? 1 : -1;
    r.alpha = 0.5;
    r.beta = 0.5 * std::exp(logk(rng));
    r.minimizer = random_in_ball(2, rng);
    const QuadraticFunction f = r.expand();
    Eigen::SelfAdjointEigenSolver<Matrix> es(f.hessian());
    EXPECT_NEAR(es.eigenvalues()[0], r.alpha, 1e-12 * r.beta);
    EXPECT_NEAR(es.eigenvalues()[1], r.beta, 1e-12 * r.beta);
  }
}

TEST(Rotated2D, SignSelectsRotationDirection) {
  RotatedQuadratic2D r{0.3, 1, Eigen::Vector2d(0, 0), 1.0, 10.0};
  const Matrix plus = r.hessian();
  r.sign = -1;
  const Matrix minus = r.hessian();
  EXPECT_NEAR(plus(0, 1), -minus(0, 1), 1e-15);
  EXPECT_GT(std::abs(plus(0, 1)), 0.1);
  // Major axis along (cos phi, sin phi) for the positive sign.
  const Vector u = vec({std::cos(0.3), std::sin(0.3)});
  EXPECT_NEAR(u.dot(plus * u), 10.0, 1e-12);
}

TEST(ExamplePair, MinimizersAndMembership) {
  const ExamplePair ex = make_example_pair(100.0);
  EXPECT_NEAR(std::tan(ex.phi), 0.1, 1e-15);
  EXPECT_LT((ex.f1.minimizer() - vec({-1.0, 0.0})).norm(), 1e-15);
  EXPECT_LT((ex.f2.minimizer() - vec({1.0, 0.0})).norm(), 1e-15);
  const FunctionClassParams p{1.0, 100.0, 2};
  for (const auto* f : {&ex.f1, &ex.f2, &ex.fb}) EXPECT_TRUE(validate_membership(*f, p).ok());
  EXPECT_EQ(ex.f1.value(vec({-1.0, 0.0})), 0.0);
}

TEST(ExamplePair, SumMinimizersAtKappa100) {
  const ExamplePair ex = make_example_pair(100.0);
  const std::vector<QuadraticFunction> a{ex.f1, ex.f2};
  const std::vector<QuadraticFunction> b{ex.f1, ex.fb};
  const Vector xa = exact_minimizer_f(a);
  const Vector xb = exact_minimizer_f(b);
  EXPECT_NEAR(xa[0], 0.0, 1e-9);
  EXPECT_NEAR(xa[1], 4.95, 1e-9);
  EXPECT_NEAR(xb[0], 0.0, 1e-9);
  EXPECT_NEAR(xb[1], 0.0, 1e-9);
}

TEST(ExamplePair, FbIsF2RotatedAboutItsMinimizer) {
  const ExamplePair ex = make_example_pair(100.0);
  const Matrix r = rotation2d(-2.0 * ex.phi);
  EXPECT_LT((r * ex.f2.hessian() * r.transpose() - ex.fb.hessian()).norm(), 1e-12);
  EXPECT_LT((ex.fb.minimizer() - ex.f2.minimizer()).norm(), 1e-15);
}

TEST(ExamplePair, KappaOneIsIsotropic) {
  const ExamplePair ex = make_example_pair(1.0);
  EXPECT_NEAR(ex.phi, std::numbers::pi / 4, 1e-15);
  EXPECT_LT((ex.f1.hessian() - Matrix::Identity(2, 2)).norm(), 1e-15);
  const std::vector<QuadraticFunction> a{ex.f1, ex.f2};
  EXPECT_LT(exact_minimizer_f(a).norm(), 1e-15);
}

TEST(ExamplePair, GapFormulaAcrossKappa) {
  for (const double kappa : {1.0, 2.0, 10.0, 100.0, 1000.0, 1e4}) {
    const ExamplePair ex = make_example_pair(kappa);
    const std::vector<QuadraticFunction> a{ex.f1, ex.f2};
    const std::vector<QuadraticFunction> b{ex.f1, ex.fb};
    const double gap = (exact_minimizer_f(a) - exact_minimizer_f(b)).norm();
    const double expected = (kappa - 1.0) / (2.0 * std::sqrt(kappa));
    EXPECT_NEAR(gap, expected, 1e-9 * (1.0 + expected)) << "kappa " << kappa;
    EXPECT_NEAR(example_pair_offset(kappa, 1.0 / std::sqrt(kappa)), expected, 1e-12 * (1 + expected));
  }
  EXPECT_THROW(make_example_pair(0.5), std::invalid_argument);
}

TEST(Membership, DetectsEachViolation) {
  const FunctionClassParams p{1.0, 100.0, 2};
  EXPECT_TRUE(validate_membership(QuadraticFunction(diag({1.0, 100.0}), vec({0.5, 0.0})), p).ok());

  const MembershipReport weak = validate_membership(QuadraticFunction(diag({0.5, 100.0}), vec({0.5, 0.0})), p);
  EXPECT_FALSE(weak.strongly_convex);
  EXPECT_TRUE(weak.smooth);
  EXPECT_FALSE(weak.ok());

  const MembershipReport far = validate_membership(QuadraticFunction(diag({1.0, 100.0}), vec({1.5, 0.0})), p);
  EXPECT_FALSE(far.in_unit_ball);
  EXPECT_TRUE(far.spectrum_in_range());
  EXPECT_TRUE(far.zero_minimum);

  const MembershipReport steep = validate_membership(QuadraticFunction(diag({1.0, 101.0}), vec({0.0, 0.0})), p);
  EXPECT_FALSE(steep.smooth);

  const MembershipReport wrong_dim =
      validate_membership(QuadraticFunction(diag({1.0}), vec({0.0})), p);
  EXPECT_FALSE(wrong_dim.dimension_ok);
}

TEST(Membership, RelativeSlackAbsorbsRoundoff) {
  const FunctionClassParams p{1.0, 100.0, 2};
  const QuadraticFunction f(diag({1.0 - 1e-12, 100.0 * (1 + 1e-12)}), vec({1.0, 0.0}));
  EXPECT_TRUE(validate_membership(f, p).ok());
}

TEST(Membership, DeparturePlaceholderIsMember) {
  const FunctionClassParams p{2.0, 50.0, 3};
  const QuadraticFunction f = departure_placeholder(p);
  EXPECT_TRUE(validate_membership(f, p).ok());
  EXPECT_EQ(f.minimizer().norm(), 0.0);
}

}  // namespace
}  // namespace odgd
