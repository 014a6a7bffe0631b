#include "dphase/grid.hpp"

#include "dphase/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <sstream>

namespace dphase
{

std::string toString(GeometryMode mode)
{
  switch (mode)
  {
  case GeometryMode::Interval1D:
    return "interval";
  case GeometryMode::RadialN:
    return "radial";
  case GeometryMode::Tensor2D:
    return "tensor2d";
  }
  return "unknown";
}

void Geometry::validate() const
{
  if (!(radius > 0.0) || !std::isfinite(radius))
    throw InvalidGeometry("truncation radius must be positive, got " + std::to_string(radius));
  if (resolution < 8)
    throw InvalidGeometry("resolution must be at least 8 cells, got " +
                          std::to_string(resolution));
  if (dimension < 2)
    throw InvalidGeometry("ambient dimension N must be at least 2");
}

WeightDescriptor WeightDescriptor::constant(double value)
{
  WeightDescriptor d;
  d.kind = Kind::Constant;
  d.amplitude = value;
  return d;
}

WeightDescriptor WeightDescriptor::gaussian(double amplitude, double width,
                                            std::array<double, 2> center)
{
  WeightDescriptor d;
  d.kind = Kind::Gaussian;
  d.amplitude = amplitude;
  d.width = width;
  d.center = center;
  return d;
}

WeightDescriptor WeightDescriptor::compactBump(double amplitude, double radius,
                                               std::array<double, 2> center)
{
  WeightDescriptor d;
  d.kind = Kind::CompactBump;
  d.amplitude = amplitude;
  d.width = radius;
  d.center = center;
  return d;
}

WeightDescriptor WeightDescriptor::powerDecay(double amplitude, double exponent,
                                              std::array<double, 2> center)
{
  WeightDescriptor d;
  d.kind = Kind::PowerDecay;
  d.amplitude = amplitude;
  d.exponent = exponent;
  d.center = center;
  return d;
}

double WeightDescriptor::evaluate(std::array<double, 2> x, int gradDim) const
{
  const double dx = x[0] - center[0];
  const double dy = gradDim == 2 ? x[1] - center[1] : 0.0;
  const double dist = std::hypot(dx, dy);
  switch (kind)
  {
  case Kind::Constant:
    return amplitude;
  case Kind::Gaussian:
    return amplitude * std::exp(-dist * dist / (2.0 * width * width));
  case Kind::CompactBump:
  {
    const double s = dist / width;
    if (s >= 1.0)
      return 0.0;
    return amplitude * std::exp(1.0 - 1.0 / (1.0 - s * s));
  }
  case Kind::PowerDecay:
    return amplitude * std::pow(1.0 + dist, -exponent);
  }
  return 0.0;
}

std::string WeightDescriptor::describe() const
{
  std::ostringstream os;
  os.precision(15);
  switch (kind)
  {
  case Kind::Constant:
    os << "constant(value=" << amplitude << ")";
    return os.str();
  case Kind::Gaussian:
    os << "gaussian(amplitude=" << amplitude << ", width=" << width;
    break;
  case Kind::CompactBump:
    os << "compact_bump(amplitude=" << amplitude << ", radius=" << width;
    break;
  case Kind::PowerDecay:
    os << "power_decay(amplitude=" << amplitude << ", exponent=" << exponent;
    break;
  }
  if (center[0] != 0.0 || center[1] != 0.0)
    os << ", x=" << center[0] << ", y=" << center[1];
  os << ")";
  return os.str();
}

namespace
{

double unitSphereArea(int n)
{
  // |S^{n-1}| = 2 pi^{n/2} / Gamma(n/2)
  return 2.0 * std::pow(std::numbers::pi, 0.5 * n) / std::tgamma(0.5 * n);
}

WeightSet sample(const WeightSpec &spec, std::span<const std::array<double, 2>> points,
                 int gradDim)
{
  WeightSet w;
  const std::size_t n = points.size();
  w.a.resize(n);
  w.m1.resize(n);
  w.m2.resize(n);
  w.omega.resize(n);
  w.envelope.resize(n);
  for (std::size_t i = 0; i < n; ++i)
  {
    const auto x = points[i];
    w.a[i] = spec.a.evaluate(x, gradDim);
    w.m1[i] = spec.m1.evaluate(x, gradDim);
    w.m2[i] = spec.m2.evaluate(x, gradDim);
    const double dist = gradDim == 2 ? std::hypot(x[0], x[1]) : std::abs(x[0]);
    w.omega[i] = std::pow(1.0 + dist, -spec.omegaExponent);
    w.envelope[i] = std::max(w.m2[i], w.omega[i]);
  }
  return w;
}

void checkWeights(const WeightSet &w)
{
  auto negative = [](const std::vector<double> &v) {
    return std::any_of(v.begin(), v.end(), [](double x) { return !(x >= 0.0); });
  };
  auto allZero = [](const std::vector<double> &v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; });
  };
  if (negative(w.a))
    throw InvalidWeight("a must be nonnegative and finite at every node");
  if (negative(w.m1) || negative(w.m2))
    throw InvalidWeight("m1 and m2 must be nonnegative and finite at every node");
  if (allZero(w.a))
    throw InvalidWeight("a ≡ 0 violates a ≢ 0");
  if (allZero(w.m1))
    throw InvalidWeight("m1 ≡ 0 violates m1 ≢ 0");
}

} // namespace

double Grid::measure() const
{
  const double R = geometry_.radius;
  switch (geometry_.mode)
  {
  case GeometryMode::Interval1D:
    return 2.0 * R;
  case GeometryMode::RadialN:
  {
    const int N = geometry_.dimension;
    return unitSphereArea(N) * std::pow(R, N) / N;
  }
  case GeometryMode::Tensor2D:
    return 4.0 * R * R;
  }
  return 0.0;
}

double Grid::distance(std::array<double, 2> x) const
{
  return gradDim_ == 2 ? std::hypot(x[0], x[1]) : std::abs(x[0]);
}

std::vector<double> Grid::gradient(std::span<const double> nodal) const
{
  if (nodal.size() != nodes_.size())
    throw DimensionError("nodal field has " + std::to_string(nodal.size()) +
                         " entries, grid has " + std::to_string(nodes_.size()) + " nodes");
  std::vector<double> out(cells_.size() * gradDim_, 0.0);
  for (std::size_t c = 0; c < cells_.size(); ++c)
  {
    const Cell &cell = cells_[c];
    for (int d = 0; d < gradDim_; ++d)
    {
      double s = 0.0;
      for (int j = 0; j < cell.count; ++j)
        s += cell.gradCoef[j][d] * nodal[cell.nodes[j]];
      out[c * gradDim_ + d] = s;
    }
  }
  return out;
}

std::vector<double> Grid::cellAverage(std::span<const double> nodal) const
{
  if (nodal.size() != nodes_.size())
    throw DimensionError("nodal field size does not match the grid");
  std::vector<double> out(cells_.size());
  for (std::size_t c = 0; c < cells_.size(); ++c)
  {
    const Cell &cell = cells_[c];
    double s = 0.0;
    for (int j = 0; j < cell.count; ++j)
      s += cell.valueCoef[j] * nodal[cell.nodes[j]];
    out[c] = s;
  }
  return out;
}

std::vector<double> Grid::gradientNorm(std::span<const double> nodal) const
{
  const auto g = gradient(nodal);
  std::vector<double> out(cells_.size());
  for (std::size_t c = 0; c < cells_.size(); ++c)
    out[c] = gradDim_ == 2 ? std::hypot(g[2 * c], g[2 * c + 1]) : std::abs(g[c]);
  return out;
}

Grid buildGrid(const Geometry &geometry, const WeightSpec &weights)
{
  geometry.validate();
  Grid g;
  g.geometry_ = geometry;
  g.spec_ = weights;
  const int n = geometry.resolution;
  const double R = geometry.radius;

  switch (geometry.mode)
  {
  case GeometryMode::Interval1D:
  {
    g.gradDim_ = 1;
    const double h = 2.0 * R / n;
    for (int i = 0; i <= n; ++i)
      g.nodes_.push_back({-R + i * h, 0.0});
    g.nodes_.back()[0] = R;
    for (int i = 0; i < n; ++i)
    {
      Cell c;
      c.count = 2;
      c.nodes = {i, i + 1, 0};
      c.gradCoef[0] = {-1.0 / h, 0.0};
      c.gradCoef[1] = {1.0 / h, 0.0};
      c.valueCoef = {0.5, 0.5, 0.0};
      c.weight = h;
      c.centroid = {0.5 * (g.nodes_[i][0] + g.nodes_[i + 1][0]), 0.0};
      g.cells_.push_back(c);
    }
    g.boundary_.assign(g.nodes_.size(), 0);
    g.boundary_.front() = g.boundary_.back() = 1;
    break;
  }
  case GeometryMode::RadialN:
  {
    g.gradDim_ = 1;
    const int N = geometry.dimension;
    const double h = R / n;
    const double area = unitSphereArea(N);
    for (int i = 0; i <= n; ++i)
      g.nodes_.push_back({i * h, 0.0});
    g.nodes_.back()[0] = R;
    for (int i = 0; i < n; ++i)
    {
      const double a = g.nodes_[i][0];
      const double b = g.nodes_[i + 1][0];
      Cell c;
      c.count = 2;
      c.nodes = {i, i + 1, 0};
      c.gradCoef[0] = {-1.0 / h, 0.0};
      c.gradCoef[1] = {1.0 / h, 0.0};
      // exact shell volume and its radial centroid
      const double vol = area * (std::pow(b, N) - std::pow(a, N)) / N;
      const double rc = (static_cast<double>(N) / (N + 1)) *
                        (std::pow(b, N + 1) - std::pow(a, N + 1)) /
                        (std::pow(b, N) - std::pow(a, N));
      const double theta = (rc - a) / (b - a);
      c.valueCoef = {1.0 - theta, theta, 0.0};
      c.weight = vol;
      c.centroid = {rc, 0.0};
      g.cells_.push_back(c);
    }
    g.boundary_.assign(g.nodes_.size(), 0);
    g.boundary_.back() = 1;
    break;
  }
  case GeometryMode::Tensor2D:
  {
    g.gradDim_ = 2;
    const double h = 2.0 * R / n;
    auto id = [n](int i, int j) { return j * (n + 1) + i; };
    for (int j = 0; j <= n; ++j)
      for (int i = 0; i <= n; ++i)
        g.nodes_.push_back({i == n ? R : -R + i * h, j == n ? R : -R + j * h});
    auto addTriangle = [&g](int a, int b, int c) {
      Cell cell;
      cell.count = 3;
      cell.nodes = {a, b, c};
      const auto &pa = g.nodes_[a];
      const auto &pb = g.nodes_[b];
      const auto &pc = g.nodes_[c];
      const double det = (pb[0] - pa[0]) * (pc[1] - pa[1]) - (pc[0] - pa[0]) * (pb[1] - pa[1]);
      const std::array<std::array<double, 2>, 3> p{pa, pb, pc};
      for (int k = 0; k < 3; ++k)
      {
        const auto &p1 = p[(k + 1) % 3];
        const auto &p2 = p[(k + 2) % 3];
        cell.gradCoef[k] = {(p1[1] - p2[1]) / det, (p2[0] - p1[0]) / det};
      }
      cell.valueCoef = {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
      cell.weight = 0.5 * std::abs(det);
      cell.centroid = {(pa[0] + pb[0] + pc[0]) / 3.0, (pa[1] + pb[1] + pc[1]) / 3.0};
      g.cells_.push_back(cell);
    };
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i)
      {
        // diagonals point towards the centre so no triangle has only boundary vertices
        if ((2 * i < n) == (2 * j < n))
        {
          addTriangle(id(i, j), id(i + 1, j), id(i + 1, j + 1));
          addTriangle(id(i, j), id(i + 1, j + 1), id(i, j + 1));
        }
        else
        {
          addTriangle(id(i, j), id(i + 1, j), id(i, j + 1));
          addTriangle(id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
        }
      }
    g.boundary_.assign(g.nodes_.size(), 0);
    for (int j = 0; j <= n; ++j)
      for (int i = 0; i <= n; ++i)
        if (i == 0 || j == 0 || i == n || j == n)
          g.boundary_[id(i, j)] = 1;
    break;
  }
  }

  if (geometry.mode == GeometryMode::RadialN)
  {
    for (const auto *d : {&weights.a, &weights.m1, &weights.m2})
      if (!d->isRadial())
        throw InvalidWeight("radial geometry requires radial weights, got " + d->describe());
  }

  g.quadWeights_.reserve(g.cells_.size());
  std::vector<std::array<double, 2>> centroids;
  centroids.reserve(g.cells_.size());
  for (const Cell &c : g.cells_)
  {
    g.quadWeights_.push_back(c.weight);
    centroids.push_back(c.centroid);
  }
  g.nodal_ = sample(weights, g.nodes_, g.gradDim_);
  g.cellw_ = sample(weights, centroids, g.gradDim_);
  checkWeights(g.nodal_);
  checkWeights(g.cellw_);

  g.dof_.assign(g.nodes_.size(), -1);
  for (std::size_t i = 0; i < g.nodes_.size(); ++i)
    if (!g.boundary_[i])
    {
      g.dof_[i] = static_cast<int>(g.interior_.size());
      g.interior_.push_back(static_cast<int>(i));
    }
  return g;
}

double integrate(const Grid &g, std::span<const double> perCell)
{
  const auto w = g.quadWeights();
  if (perCell.size() != w.size())
    throw DimensionError("integrand has " + std::to_string(perCell.size()) +
                         " entries, grid has " + std::to_string(w.size()) + " cells");
  double s = 0.0;
  for (std::size_t c = 0; c < w.size(); ++c)
    s += perCell[c] * w[c];
  return s;
}

GridFunction::GridFunction(const Grid &g, std::vector<double> values)
  : values_(std::move(values)), gradDim_(g.gradDim())
{
  if (values_.size() != g.nodeCount())
    throw DimensionError("grid function has " + std::to_string(values_.size()) +
                         " values, grid has " + std::to_string(g.nodeCount()) + " nodes");
  for (std::size_t i = 0; i < values_.size(); ++i)
  {
    if (!std::isfinite(values_[i]))
      throw NumericError("grid function contains a non-finite value");
    if (g.isBoundary(i) && values_[i] != 0.0)
      throw DomainError("grid function must vanish on boundary nodes");
  }
  grad_ = g.gradient(values_);
  cellValues_ = g.cellAverage(values_);
}

GridFunction GridFunction::withZeroBoundary(const Grid &g, std::vector<double> values)
{
  if (values.size() != g.nodeCount())
    throw DimensionError("grid function size does not match the grid");
  for (std::size_t i = 0; i < values.size(); ++i)
    if (g.isBoundary(i))
      values[i] = 0.0;
  return GridFunction(g, std::move(values));
}

GridFunction GridFunction::zero(const Grid &g)
{
  return GridFunction(g, std::vector<double>(g.nodeCount(), 0.0));
}

std::vector<double> GridFunction::gradNorm() const
{
  const std::size_t cells = grad_.size() / gradDim_;
  std::vector<double> out(cells);
  for (std::size_t c = 0; c < cells; ++c)
    out[c] = gradDim_ == 2 ? std::hypot(grad_[2 * c], grad_[2 * c + 1]) : std::abs(grad_[c]);
  return out;
}

void writeFieldDump(std::ostream &os, const Grid &g, std::span<const double> nodal,
                    const std::string &label)
{
  if (nodal.size() != g.nodeCount())
    throw DimensionError("field dump size does not match the grid");
  const auto &geo = g.geometry();
  os << "# " << label << " geometry=" << toString(geo.mode) << " N=" << geo.dimension
     << " R=" << geo.radius << " n=" << geo.resolution << "\n";
  os.precision(17);
  const auto nodes = g.nodes();
  for (std::size_t i = 0; i < nodal.size(); ++i)
  {
    os << nodes[i][0];
    if (g.gradDim() == 2)
      os << "," << nodes[i][1];
    os << " " << nodal[i] << "\n";
  }
}

} // namespace dphase
