#pragma once

#include <array>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace dphase
{

enum class GeometryMode
{
  Interval1D,
  RadialN,
  Tensor2D
};

std::string toString(GeometryMode mode);

/// Truncated computational domain.
///
/// Interval1D is (-R, R), RadialN is the ball B_R in R^N reduced to the radius
/// variable, Tensor2D is the square (-R, R)^2 split into triangles.
/// `dimension` is the ambient N. For Interval1D and Tensor2D it only enters
/// exponent validation.
struct Geometry
{
  GeometryMode mode = GeometryMode::Interval1D;
  int dimension = 3;
  double radius = 1.0;
  int resolution = 64;

  void validate() const;
};

/// One entry of the built-in weight catalogue.
struct WeightDescriptor
{
  enum class Kind
  {
    Constant,
    Gaussian,    // amplitude * exp(-|x-c|^2 / (2 width^2))
    CompactBump, // amplitude * exp(1 - 1/(1 - (|x-c|/width)^2)) inside, 0 outside
    PowerDecay   // amplitude * (1 + |x-c|)^(-exponent)
  };

  Kind kind = Kind::Constant;
  double amplitude = 1.0;
  double width = 1.0;
  double exponent = 1.0;
  std::array<double, 2> center{0.0, 0.0};

  static WeightDescriptor constant(double value);
  static WeightDescriptor gaussian(double amplitude, double width, std::array<double, 2> center = {});
  static WeightDescriptor compactBump(double amplitude, double radius,
                                      std::array<double, 2> center = {});
  static WeightDescriptor powerDecay(double amplitude, double exponent,
                                     std::array<double, 2> center = {});

  double evaluate(std::array<double, 2> x, int gradDim) const;
  bool isRadial() const { return kind == Kind::Constant || (center[0] == 0.0 && center[1] == 0.0); }
  std::string describe() const;
};

/// Weights a, m1, m2 of the problem plus the exponent s of omega = (1+|x|)^-s.
struct WeightSpec
{
  WeightDescriptor a = WeightDescriptor::constant(1.0);
  WeightDescriptor m1 = WeightDescriptor::constant(1.0);
  WeightDescriptor m2 = WeightDescriptor::constant(0.0);
  double omegaExponent = 2.0;
};

/// Sampled weights. Nodal in Grid::weights(), centroid samples in
/// Grid::cellWeights().
struct WeightSet
{
  std::vector<double> a;
  std::vector<double> m1;
  std::vector<double> m2;
  std::vector<double> omega;
  std::vector<double> envelope; // max(m2, omega)

  /// m = m1 - m2 at entry i.
  double m(std::size_t i) const { return m1[i] - m2[i]; }
};

/// A cell of the mesh: an interval (2 nodes) or a triangle (3 nodes). The
/// discrete field restricted to the cell is linear, so the gradient is
/// constant and equals sum_j gradCoef[j] * u[nodes[j]]. The cell value used
/// by zero-order integrals is the field at the centroid,
/// sum_j valueCoef[j] * u[nodes[j]].
struct Cell
{
  std::array<int, 3> nodes{0, 0, 0};
  int count = 2;
  std::array<std::array<double, 2>, 3> gradCoef{};
  std::array<double, 3> valueCoef{};
  double weight = 0.0;
  std::array<double, 2> centroid{0.0, 0.0};
};

class Grid
{
public:
  const Geometry &geometry() const { return geometry_; }
  std::size_t nodeCount() const { return nodes_.size(); }
  std::size_t cellCount() const { return cells_.size(); }
  /// Components per cell gradient: 1 for Interval1D/RadialN, 2 for Tensor2D.
  int gradDim() const { return gradDim_; }

  std::span<const std::array<double, 2>> nodes() const { return nodes_; }
  std::span<const Cell> cells() const { return cells_; }
  std::span<const double> quadWeights() const { return quadWeights_; }
  const WeightSet &weights() const { return nodal_; }
  const WeightSet &cellWeights() const { return cellw_; }
  const WeightSpec &weightSpec() const { return spec_; }

  bool isBoundary(std::size_t node) const { return boundary_[node] != 0; }
  std::span<const int> interiorNodes() const { return interior_; }
  /// Position of `node` in interiorNodes(), or -1 on the boundary.
  int dofIndex(std::size_t node) const { return dof_[node]; }

  /// Exact measure of the truncated domain.
  double measure() const;

  /// Per-cell gradient (flat, gradDim() entries per cell).
  std::vector<double> gradient(std::span<const double> nodal) const;
  /// Per-cell centroid values of a nodal field.
  std::vector<double> cellAverage(std::span<const double> nodal) const;
  /// Per-cell gradient magnitude of a nodal field.
  std::vector<double> gradientNorm(std::span<const double> nodal) const;

  /// |x| of a node or a point.
  double distance(std::array<double, 2> x) const;

private:
  friend Grid buildGrid(const Geometry &, const WeightSpec &);

  Geometry geometry_;
  WeightSpec spec_;
  int gradDim_ = 1;
  std::vector<std::array<double, 2>> nodes_;
  std::vector<Cell> cells_;
  std::vector<double> quadWeights_;
  std::vector<char> boundary_;
  std::vector<int> interior_;
  std::vector<int> dof_;
  WeightSet nodal_;
  WeightSet cellw_;
};

/// Builds the mesh, quadrature and sampled weights.
///
/// Throws InvalidGeometry for R <= 0 or n < 8, InvalidWeight when a or m1
/// samples to zero everywhere, when a sampled weight is negative, or when a
/// non-radial descriptor is used in RadialN mode.
Grid buildGrid(const Geometry &geometry, const WeightSpec &weights);

/// Sum of f * quadWeights over cells.
double integrate(const Grid &g, std::span<const double> perCell);

/// A nodal field with its cached per-cell gradient and centroid values.
/// Boundary nodes must be zero.
class GridFunction
{
public:
  GridFunction() = default;
  GridFunction(const Grid &g, std::vector<double> values);

  /// Zeroes the boundary nodes of `values` before construction.
  static GridFunction withZeroBoundary(const Grid &g, std::vector<double> values);
  static GridFunction zero(const Grid &g);

  std::span<const double> values() const { return values_; }
  std::span<const double> grad() const { return grad_; }
  std::span<const double> cellValues() const { return cellValues_; }
  int gradDim() const { return gradDim_; }
  std::size_t size() const { return values_.size(); }

  /// Per-cell |grad u|.
  std::vector<double> gradNorm() const;

private:
  std::vector<double> values_;
  std::vector<double> grad_;
  std::vector<double> cellValues_;
  int gradDim_ = 1;
};

/// Writes `x[,y] value` lines with a `#` header naming geometry and resolution.
void writeFieldDump(std::ostream &os, const Grid &g, std::span<const double> nodal,
                    const std::string &label);

} // namespace dphase
