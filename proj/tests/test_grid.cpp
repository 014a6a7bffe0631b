#include "dphase/error.hpp"
#include "dphase/grid.hpp"
#include "dphase/verify.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

using namespace dphase;

namespace
{

Grid interval(double R, int n, WeightSpec w = {})
{
  return buildGrid({GeometryMode::Interval1D, 3, R, n}, w);
}

double sum(std::span<const double> v)
{
  double s = 0.0;
  for (double x : v)
    s += x;
  return s;
}

} // namespace

TEST(Geometry, RejectsBadRadiusAndResolution)
{
  EXPECT_THROW(interval(0.0, 16), InvalidGeometry);
  EXPECT_THROW(interval(-1.0, 16), InvalidGeometry);
  EXPECT_THROW(interval(1.0, 7), InvalidGeometry);
  EXPECT_NO_THROW(interval(1.0, 8));
  EXPECT_THROW(buildGrid({GeometryMode::RadialN, 1, 1.0, 16}, {}), InvalidGeometry);
}

TEST(Geometry, ModeNames)
{
  EXPECT_EQ(toString(GeometryMode::Interval1D), "interval");
  EXPECT_EQ(toString(GeometryMode::RadialN), "radial");
  EXPECT_EQ(toString(GeometryMode::Tensor2D), "tensor2d");
}

TEST(Weights, HypothesisViolationsAreRejected)
{
  WeightSpec zeroA;
  zeroA.a = WeightDescriptor::constant(0.0);
  EXPECT_THROW(interval(1.0, 16, zeroA), InvalidWeight);

  WeightSpec zeroM1;
  zeroM1.m1 = WeightDescriptor::constant(0.0);
  EXPECT_THROW(interval(1.0, 16, zeroM1), InvalidWeight);

  WeightSpec negative;
  negative.m2 = WeightDescriptor::constant(-0.5);
  EXPECT_THROW(interval(1.0, 16, negative), InvalidWeight);

  WeightSpec offCenter;
  offCenter.m1 = WeightDescriptor::gaussian(1.0, 0.3, {0.5, 0.0});
  EXPECT_THROW(buildGrid({GeometryMode::RadialN, 3, 1.0, 16}, offCenter), InvalidWeight);
  EXPECT_NO_THROW(interval(1.0, 16, offCenter));
}

TEST(Weights, CatalogueValues)
{
  EXPECT_DOUBLE_EQ(WeightDescriptor::constant(0.3).evaluate({5.0, 0.0}, 1), 0.3);
  EXPECT_NEAR(WeightDescriptor::gaussian(2.0, 0.5).evaluate({0.5, 0.0}, 1), 2.0 * std::exp(-0.5),
              1e-15);
  EXPECT_DOUBLE_EQ(WeightDescriptor::compactBump(1.0, 2.0).evaluate({0.0, 0.0}, 1), 1.0);
  EXPECT_DOUBLE_EQ(WeightDescriptor::compactBump(1.0, 2.0).evaluate({2.5, 0.0}, 1), 0.0);
  EXPECT_NEAR(WeightDescriptor::powerDecay(1.0, 2.0).evaluate({3.0, 4.0}, 2), 1.0 / 36.0, 1e-15);
}

TEST(Quadrature, IntervalMeasureAndSecondMoment)
{
  const Grid g = interval(1.0, 256);
  EXPECT_NEAR(sum(g.quadWeights()), 2.0, 1e-13);
  std::vector<double> x2(g.nodeCount());
  for (std::size_t i = 0; i < x2.size(); ++i)
    x2[i] = g.nodes()[i][0] * g.nodes()[i][0];
  // centroid value of the P1 interpolant: total error h^2 / 3
  EXPECT_NEAR(integrate(g, g.cellAverage(x2)), 2.0 / 3.0, 1e-4);
}

TEST(Quadrature, BallVolumeInRadialMode)
{
  for (int N : {2, 3, 4})
  {
    const Grid g = buildGrid({GeometryMode::RadialN, N, 1.5, 64}, {});
    const double exact = std::pow(std::numbers::pi, 0.5 * N) / std::tgamma(0.5 * N + 1.0) *
                         std::pow(1.5, N);
    EXPECT_NEAR(sum(g.quadWeights()), exact, 1e-12 * exact) << "N = " << N;
  }
}

TEST(Quadrature, ExactForLinearIntegrandsInEveryMode)
{
  EXPECT_LE(quadratureExactness(interval(2.0, 33)), 1e-12);
  EXPECT_LE(quadratureExactness(buildGrid({GeometryMode::RadialN, 3, 2.0, 40}, {})), 1e-12);
  EXPECT_LE(quadratureExactness(buildGrid({GeometryMode::RadialN, 5, 1.0, 17}, {})), 1e-12);
  EXPECT_LE(quadratureExactness(buildGrid({GeometryMode::Tensor2D, 2, 1.0, 16}, {})), 1e-12);
}

TEST(Quadrature, SecondOrderUnderRefinement)
{
  EXPECT_GE(refinementOrder({GeometryMode::Interval1D, 3, 1.0, 16}, {}), 1.9);
  EXPECT_GE(refinementOrder({GeometryMode::RadialN, 3, 1.0, 16}, {}), 1.9);
  EXPECT_GE(refinementOrder({GeometryMode::Tensor2D, 2, 1.0, 8}, {}), 1.9);
}

TEST(Gradient, ExactOnLinearFields)
{
  const Grid g = buildGrid({GeometryMode::Tensor2D, 2, 1.0, 10}, {});
  std::vector<double> u(g.nodeCount());
  for (std::size_t i = 0; i < u.size(); ++i)
    u[i] = 0.5 - 2.0 * g.nodes()[i][0] + 3.0 * g.nodes()[i][1];
  const auto grad = g.gradient(u);
  for (std::size_t c = 0; c < g.cellCount(); ++c)
  {
    EXPECT_NEAR(grad[2 * c], -2.0, 1e-12);
    EXPECT_NEAR(grad[2 * c + 1], 3.0, 1e-12);
  }
  const Grid line = interval(1.0, 12);
  std::vector<double> v(line.nodeCount());
  for (std::size_t i = 0; i < v.size(); ++i)
    v[i] = 4.0 * line.nodes()[i][0];
  for (double z : line.gradient(v))
    EXPECT_NEAR(z, 4.0, 1e-12);
}

TEST(Gradient, RadialUsesTheRadiusVariable)
{
  const Grid g = buildGrid({GeometryMode::RadialN, 3, 2.0, 20}, {});
  EXPECT_EQ(g.gradDim(), 1);
  std::vector<double> u(g.nodeCount());
  for (std::size_t i = 0; i < u.size(); ++i)
    u[i] = 2.0 - g.nodes()[i][0];
  for (double z : g.gradient(u))
    EXPECT_NEAR(z, -1.0, 1e-12);
  // the center is not a boundary node, the outer sphere is
  EXPECT_FALSE(g.isBoundary(0));
  EXPECT_TRUE(g.isBoundary(g.nodeCount() - 1));
}

TEST(Envelope, DominatesOmegaWhichIsPositiveAndDecreasing)
{
  WeightSpec w;
  w.m2 = WeightDescriptor::gaussian(0.2, 0.5);
  for (const Geometry &geo : {Geometry{GeometryMode::Interval1D, 3, 4.0, 64},
                              Geometry{GeometryMode::RadialN, 3, 4.0, 64},
                              Geometry{GeometryMode::Tensor2D, 2, 4.0, 16}})
  {
    const auto env = envelopeCheck(buildGrid(geo, w));
    EXPECT_GE(env.minGap, 0.0);
    EXPECT_GT(env.minOmega, 0.0);
    EXPECT_TRUE(env.omegaDecreasing);
  }
}

TEST(GridFunction, BoundaryValuesMustVanish)
{
  const Grid g = interval(1.0, 8);
  std::vector<double> u(g.nodeCount(), 1.0);
  EXPECT_THROW(GridFunction(g, u), DomainError);
  EXPECT_THROW(GridFunction(g, std::vector<double>(3, 0.0)), DimensionError);
  const auto f = GridFunction::withZeroBoundary(g, u);
  EXPECT_EQ(f.values().front(), 0.0);
  EXPECT_EQ(f.values().back(), 0.0);
  EXPECT_EQ(f.values()[4], 1.0);
}

TEST(FieldDump, HeaderAndOneLinePerNode)
{
  const Grid g = buildGrid({GeometryMode::Tensor2D, 2, 1.0, 8}, {});
  std::vector<double> u(g.nodeCount(), 0.0);
  std::ostringstream os;
  writeFieldDump(os, g, u, "zero");
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line.rfind("# zero", 0), 0u);
  EXPECT_NE(line.find("geometry=tensor2d"), std::string::npos);
  EXPECT_NE(line.find("n=8"), std::string::npos);
  std::size_t rows = 0;
  while (std::getline(is, line))
  {
    EXPECT_NE(line.find(','), std::string::npos);
    ++rows;
  }
  EXPECT_EQ(rows, g.nodeCount());
}
