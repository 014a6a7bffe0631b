#include "dphase/error.hpp"
#include "dphase/modular.hpp"
#include "dphase/verify.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace dphase;

namespace
{

// measure 1, a ≡ 1
Grid unitInterval(int n = 32)
{
  return buildGrid({GeometryMode::Interval1D, 4, 0.5, n}, {});
}

} // namespace

TEST(Exponents, ValidatesRanges)
{
  EXPECT_NO_THROW(Exponents(2.0, 3.0, 2.0, 4));
  EXPECT_THROW(Exponents(2.0, 2.0, 2.0, 4), DomainError);
  EXPECT_THROW(Exponents(1.0, 3.0, 2.0, 4), DomainError);
  EXPECT_THROW(Exponents(2.0, 4.0, 2.0, 4), DomainError);
  EXPECT_THROW(Exponents(2.0, 3.0, 4.5, 4), DomainError);
  EXPECT_DOUBLE_EQ(Exponents(2.0, 3.0, 2.0, 4).qStar(), 12.0);
  EXPECT_EQ(Exponents(3.0, 2.0, 2.0, 4).regime(), Regime::QLessP);
}

TEST(Xi, ValuesAndDomain)
{
  const Exponents e(2.0, 3.0, 2.0, 4);
  EXPECT_DOUBLE_EQ(xi(0.5, 2.0, e), 0.5 * 4.0 + 8.0);
  EXPECT_DOUBLE_EQ(xi(0.0, 0.0, e), 0.0);
  EXPECT_THROW(xi(1.0, -1e-3, e), DomainError);
}

TEST(Modular, ConstantFieldClosedForm)
{
  const Grid g = unitInterval();
  const Exponents e(2.0, 3.0, 2.0, 4);
  const std::vector<double> f(g.cellCount(), 2.0);
  EXPECT_NEAR(modular(f, e, g), 4.0 + 8.0, 1e-12);
  const auto parts = modularParts(f, e, g);
  EXPECT_NEAR(parts.aPart, 4.0, 1e-12);
  EXPECT_NEAR(parts.qPart, 8.0, 1e-12);
}

TEST(Luxemburg, MatchesBisectionOracle)
{
  const Grid g = unitInterval();
  const Exponents e(2.0, 3.0, 2.0, 4);
  // rho(c / lambda) = (c/lambda)^2 + (c/lambda)^3 on a unit-measure domain
  const double y = oracle::bisect([](double y) { return y * y + y * y * y - 1.0; }, 0.0, 1.0);
  EXPECT_NEAR(y, 0.754877666246693, 1e-14);
  for (double c : {1.0, 2.0, 0.01})
  {
    const std::vector<double> f(g.cellCount(), c);
    EXPECT_NEAR(luxemburgNorm(f, e, g), c / y, 1e-12 * c / y) << "c = " << c;
  }
}

TEST(Luxemburg, ZeroFieldHasZeroNorm)
{
  const Grid g = unitInterval();
  const std::vector<double> f(g.cellCount(), 0.0);
  EXPECT_EQ(luxemburgNorm(f, Exponents(2.0, 3.0, 2.0, 4), g), 0.0);
}

TEST(Luxemburg, UnitModularSignAgreementAndHomogeneity)
{
  const Grid g = buildGrid({GeometryMode::Interval1D, 4, 1.0, 64},
                           WeightSpec{WeightDescriptor::gaussian(1.0, 0.4)});
  for (auto [p, q] : {std::pair{1.5, 2.5}, {2.0, 3.0}, {3.0, 2.0}, {2.5, 1.5}})
  {
    const Exponents e(p, q, 2.0, 4);
    const auto r = normSuite(g, e, 50, 11);
    EXPECT_LE(r.maxUnitModularError, 1e-10) << p << "," << q;
    EXPECT_EQ(r.signViolations, 0);
    EXPECT_EQ(r.sandwichViolations, 0);
    EXPECT_LE(r.maxHomogeneityError, 1e-10);
    EXPECT_TRUE(r.coVanishing);
    EXPECT_EQ(r.embeddingViolations, 0);
  }
}

TEST(Sandwich, BracketsOrientWithTheNorm)
{
  const Grid g = unitInterval();
  const Exponents e(2.0, 3.0, 2.0, 4);
  const std::vector<double> small(g.cellCount(), 0.3), large(g.cellCount(), 5.0);
  const auto s = sandwichCheck(small, e, g);
  EXPECT_LT(s.luxemburg, 1.0);
  EXPECT_DOUBLE_EQ(s.lowerSandwich, std::pow(s.luxemburg, 3.0));
  EXPECT_DOUBLE_EQ(s.upperSandwich, std::pow(s.luxemburg, 2.0));
  EXPECT_LE(s.lowerSandwich, s.modular);
  EXPECT_LE(s.modular, s.upperSandwich);
  const auto l = sandwichCheck(large, e, g);
  EXPECT_GT(l.luxemburg, 1.0);
  EXPECT_LE(l.lowerSandwich, l.modular);
  EXPECT_LE(l.modular, l.upperSandwich);
  EXPECT_NEAR(l.lqNorm, 5.0, 1e-12);
}

TEST(Growth, UnbalancedGrowthBoundsHold)
{
  WeightSpec w;
  w.a = WeightDescriptor::compactBump(2.5, 0.7);
  const Grid g = buildGrid({GeometryMode::Interval1D, 4, 1.0, 64}, w);
  for (auto [p, q] : {std::pair{1.5, 2.5}, {3.0, 2.0}})
  {
    const auto r = growthCheck(g, Exponents(p, q, 2.0, 4));
    EXPECT_EQ(r.checks, 65 * 50);
    EXPECT_EQ(r.violations, 0);
    EXPECT_GE(r.minSlack, 0.0);
  }
}

TEST(ENorm, GradientPartPlusWeightedLq)
{
  const Grid g = buildGrid({GeometryMode::Interval1D, 4, 1.0, 128}, {});
  const Exponents e(2.0, 3.0, 2.0, 4);
  std::vector<double> u(g.nodeCount());
  for (std::size_t i = 0; i < u.size(); ++i)
    u[i] = 1.0 - g.nodes()[i][0] * g.nodes()[i][0];
  const GridFunction f(g, u);
  const double gradPart = luxemburgNorm(f.gradNorm(), e, g);
  double lq = 0.0;
  const auto cells = g.cellWeights();
  const auto w = g.quadWeights();
  for (std::size_t c = 0; c < g.cellCount(); ++c)
    lq += w[c] * std::pow(std::abs(f.cellValues()[c]), 3.0) * cells.envelope[c];
  EXPECT_NEAR(eNorm(f, e, g), gradPart + std::cbrt(lq), 1e-12);
}
