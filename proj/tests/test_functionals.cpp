#include "dphase/error.hpp"
#include "dphase/functionals.hpp"
#include "dphase/verify.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace dphase;

namespace
{

Grid line(int n, WeightSpec w = {})
{
  return buildGrid({GeometryMode::Interval1D, 4, 1.0, n}, w);
}

GridFunction bump(const Grid &g, double scale = 1.0)
{
  std::vector<double> u(g.nodeCount());
  for (std::size_t i = 0; i < u.size(); ++i)
  {
    const double x = g.nodes()[i][0];
    u[i] = scale * (1.0 - x * x) * (1.2 + std::sin(2.0 * x));
  }
  return GridFunction::withZeroBoundary(g, u);
}

GridFunction scaled(const Grid &g, const GridFunction &u, double s)
{
  std::vector<double> v(u.values().begin(), u.values().end());
  for (double &x : v)
    x *= s;
  return GridFunction(g, v);
}

} // namespace

TEST(Regularization, ValidationRules)
{
  EXPECT_THROW(Regularization{-1.0}.validate({3.0}), DomainError);
  EXPECT_THROW(Regularization{0.0}.validate({3.0, 1.5}), DomainError);
  EXPECT_NO_THROW(Regularization{0.0}.validate({2.0, 3.0}));
  EXPECT_NO_THROW(Regularization{1e-8}.validate({1.5}));
}

TEST(Psi, MatchesDenseStiffnessQuadraticForm)
{
  const Grid g = line(64);
  const auto u = bump(g);
  const auto &cw = g.cellWeights();
  const auto mats = oracle::intervalMatrices(1.0, 64, cw.a, cw.m1);
  const auto psi = evalPsi(u, 2.0, g, Regularization{0.0});
  const std::vector<double> nodal(u.values().begin(), u.values().end());
  EXPECT_NEAR(psi.value, oracle::quadraticForm(mats.K, nodal), 1e-12 * psi.value);
  EXPECT_NEAR(psi.constraint, oracle::quadraticForm(mats.M, nodal), 1e-12 * psi.constraint);
}

TEST(Functionals, GradientsMatchCentralDifferences)
{
  WeightSpec w;
  w.a = WeightDescriptor::gaussian(1.0, 0.5);
  w.m2 = WeightDescriptor::constant(0.2);
  const Grid g = line(64, w);
  for (auto [p, q] : {std::pair{1.5, 2.5}, {3.0, 2.0}})
  {
    const Exponents e(p, q, 1.7, 4);
    for (auto kind : {FunctionalKind::J, FunctionalKind::I, FunctionalKind::Phi, FunctionalKind::Psi})
      for (double eps : {1e-4, 1e-6})
        EXPECT_LT(gradientCheck(kind, g, e, 0.8, eps, 20, 5), 1e-5)
            << toString(kind) << " p=" << p << " eps=" << eps;
  }
}

TEST(Functionals, NehariIdentityHoldsComponentwise)
{
  const Grid g = line(128, WeightSpec{WeightDescriptor::compactBump(1.0, 0.8)});
  const Exponents e(1.5, 2.5, 2.0, 3);
  std::mt19937_64 rng(3);
  for (int t = 0; t < 10; ++t)
  {
    const GridFunction u(g, randomNodalField(g, rng));
    const Regularization reg{1e-6};
    const auto J = evalJ(u, 1.3, e, g, reg);
    const auto I = evalI(u, 1.3, e, g, reg);
    const double rhs = (1.0 / 1.5 - 1.0 / 2.5) * J.components.aGradP;
    EXPECT_NEAR(J.value - I.value / 2.5, rhs, 1e-12 * std::max(1.0, std::abs(rhs)));
  }
}

TEST(Functionals, ValuesIgnoreEps)
{
  const Grid g = line(64);
  const Exponents e(1.5, 2.5, 1.5, 3);
  const auto u = bump(g);
  for (double eps : {1e-10, 1e-3, 0.5})
  {
    EXPECT_EQ(evalJ(u, 2.0, e, g, {1e-6}).value, evalJ(u, 2.0, e, g, {eps}).value);
    EXPECT_EQ(evalPhi(u, e, g, {1e-6}).value, evalPhi(u, e, g, {eps}).value);
    EXPECT_EQ(evalPsi(u, 1.5, g, {1e-6}).value, evalPsi(u, 1.5, g, {eps}).value);
  }
}

TEST(Functionals, HomogeneityDegreesOfJ)
{
  const Grid g = line(64, WeightSpec{WeightDescriptor::gaussian(0.7, 0.5)});
  const Exponents e(1.5, 2.5, 2.0, 3);
  const auto u = bump(g);
  const double lambda = 3.0;
  const auto c = evalJ(u, lambda, e, g, {1e-6}).components;
  for (double t : {0.1, 2.0, 50.0})
  {
    const double expected = std::pow(t, 1.5) * c.aGradP / 1.5 +
                            std::pow(t, 2.5) * (c.gradQ - lambda * c.mTerm) / 2.5;
    const double got = evalJ(scaled(g, u, t), lambda, e, g, {1e-6}).value;
    EXPECT_NEAR(got, expected, 1e-12 * std::abs(expected));
  }
}

TEST(Nehari, ProjectionRecoversAKnownScale)
{
  const Grid g = line(64, WeightSpec{WeightDescriptor::gaussian(0.7, 0.5)});
  const Exponents e(1.5, 2.5, 2.0, 3);
  const auto u = bump(g);
  const auto c = evalJ(u, 1.0, e, g, {1e-6}).components;
  // pick lambda so that t = 1/2: t^{q-p} = A / (lambda M - B)
  const double lambda = (c.aGradP / 0.5 + c.gradQ) / c.mTerm;
  const auto t = neharit(u, lambda, e, g);
  ASSERT_TRUE(t.has_value());
  EXPECT_NEAR(*t, 0.5, 1e-12);
  const auto I = evalI(scaled(g, u, *t), lambda, e, g, {1e-6});
  EXPECT_NEAR(I.value, 0.0, 1e-12 * c.aGradP);
  // below the ray threshold there is no projection
  EXPECT_FALSE(neharit(u, 0.5 * c.gradQ / c.mTerm, e, g).has_value());
  EXPECT_THROW(neharit(u, lambda, Exponents(3.0, 2.0, 2.0, 4), g), RegimeError);
}

TEST(Rayleigh, RejectsNonpositiveConstraint)
{
  WeightSpec w;
  w.m1 = WeightDescriptor::gaussian(1.0, 0.05, {-0.8, 0.0});
  w.m2 = WeightDescriptor::constant(1.0);
  const Grid g = line(128, w);
  const auto u = bump(g);
  EXPECT_THROW(rayleighSingle(u, 2.0, g), IndefiniteConstraint);
  EXPECT_THROW(rayleighDouble(u, Exponents(3.0, 2.0, 2.0, 4), g), IndefiniteConstraint);
}

TEST(Rayleigh, DoubleQuotientIsPhiOverConstraint)
{
  const Grid g = line(64);
  const Exponents e(3.0, 2.0, 2.0, 4);
  const auto u = bump(g);
  const auto phi = evalPhi(u, e, g, {1e-6});
  EXPECT_NEAR(rayleighDouble(u, e, g), phi.value / phi.constraint, 1e-13 * phi.value / phi.constraint);
}

TEST(Picone, SingleVanishesOnProportionalPairs)
{
  const Grid g = line(64);
  const auto u = bump(g);
  for (double r : {1.5, 2.0, 3.0})
  {
    const double scale = singlePhaseModular(u.gradNorm(), r, g);
    EXPECT_LT(std::abs(piconeSingle(u, u, r, g)), 1e-12 * scale);
    EXPECT_LT(std::abs(piconeSingle(u, scaled(g, u, 3.0), r, g)), 1e-10 * scale);
  }
}

TEST(Picone, NonnegativeOnRandomPositivePairs)
{
  const Grid g = line(64, WeightSpec{WeightDescriptor::gaussian(1.0, 0.5)});
  for (double r : {1.5, 2.0, 3.5})
    EXPECT_GE(piconeAuditSingle(g, r, 40, 3.0, 9).minScaled, -1e-10);
  EXPECT_GE(piconeAuditDouble(g, Exponents(3.0, 2.0, 2.0, 4), 40, 0.5, 9).minScaled, -1e-10);
}

TEST(Picone, DoubleOnScaledPairMatchesClosedForm)
{
  // I(u, k u) = (1 - k^q)(1 - k^{p-q}) ∫ a|grad u|^p: only v = u gives zero
  const Grid g = line(64, WeightSpec{WeightDescriptor::gaussian(1.0, 0.5)});
  const Exponents e(3.0, 2.0, 2.0, 4);
  const auto u = bump(g);
  const double A = singlePhaseModular(u.gradNorm(), 3.0, g);
  EXPECT_NEAR(piconeDouble(u, u, e, g), 0.0, 1e-12 * A);
  for (double k : {0.5, 2.0})
  {
    const double expected = (1.0 - k * k) * (1.0 - k) * A;
    EXPECT_NEAR(piconeDouble(u, scaled(g, u, k), e, g), expected, 1e-12 * A) << "k = " << k;
  }
}

TEST(Picone, PreconditionsAreEnforced)
{
  const Grid g = line(64);
  const auto u = bump(g);
  EXPECT_THROW(piconeDouble(u, u, Exponents(1.5, 2.5, 2.0, 3), g), RegimeError);
  EXPECT_THROW(piconeSingle(u, scaled(g, u, -1.0), 2.0, g), PositivityError);
}

TEST(Monotonicity, DefaultConstantHoldsAndSmallOnesFail)
{
  const Grid g = line(32);
  for (double r : {1.3, 2.0, 3.0, 4.5})
  {
    const auto sweep = monotonicitySweep(g, r, 300, 17);
    EXPECT_EQ(sweep.violations, 0) << "r = " << r;
    EXPECT_LT(sweep.worstRatio, 1.0);
  }
  EXPECT_GT(monotonicitySweep(g, 2.0, 300, 17, 0.25).violations, 0);
}

TEST(Monotonicity, EqualFieldsGiveZeroGap)
{
  const Grid g = line(16);
  const std::vector<double> z(g.cellCount(), 0.7);
  const auto gap = monotonicityGap(z, z, 2.5, g);
  EXPECT_EQ(gap.lhs, 0.0);
  EXPECT_EQ(gap.rhs, 0.0);
}
