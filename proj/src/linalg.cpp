#include "dphase/detail/forms.hpp"

#include "dphase/error.hpp"
#include "dphase/modular.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace dphase::detail
{

namespace
{

struct CellState
{
  std::array<double, 2> z{0.0, 0.0};
  double zz = 0.0;
  double uc = 0.0;
};

CellState cellState(const Cell &cell, std::span<const double> u, int dim)
{
  CellState s;
  for (int j = 0; j < cell.count; ++j)
  {
    const double v = u[cell.nodes[j]];
    s.z[0] += cell.gradCoef[j][0] * v;
    s.z[1] += cell.gradCoef[j][1] * v;
    s.uc += cell.valueCoef[j] * v;
  }
  s.zz = dim == 2 ? s.z[0] * s.z[0] + s.z[1] * s.z[1] : s.z[0] * s.z[0];
  return s;
}

// d^2/dz^2 of c |z|^e, regularized: c e (|z|^2+eps^2)^{(e-2)/2} (I + (e-2) z z^T / (|z|^2+eps^2))
void addPowerHessian(std::array<std::array<double, 2>, 2> &H, const CellState &s, double c,
                     double e, double eps)
{
  const double reg = s.zz + eps * eps;
  if (reg == 0.0)
    return;
  const double k = c * e * std::pow(reg, 0.5 * (e - 2.0));
  const double t = (e - 2.0) / reg;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      H[a][b] += k * ((a == b ? 1.0 : 0.0) + t * s.z[a] * s.z[b]);
}

} // namespace

SparseMatrix energyHessian(const Grid &g, std::span<const double> u, const EnergyForm &energy,
                           double eps)
{
  const int n = static_cast<int>(g.interiorNodes().size());
  const int dim = g.gradDim();
  std::vector<Eigen::Triplet<double>> trip;
  const auto cells = g.cells();
  const auto &cw = g.cellWeights();
  trip.reserve(cells.size() * 9);
  for (std::size_t c = 0; c < cells.size(); ++c)
  {
    const Cell &cell = cells[c];
    const CellState s = cellState(cell, u, dim);
    std::array<std::array<double, 2>, 2> H{};
    if (energy.cA != 0.0 && cw.a[c] != 0.0)
      addPowerHessian(H, s, energy.cA * cw.a[c], energy.pA, eps);
    if (energy.cB != 0.0)
      addPowerHessian(H, s, energy.cB, energy.pB, eps);
    if (dim == 1)
      H[0][1] = H[1][0] = H[1][1] = 0.0;
    for (int i = 0; i < cell.count; ++i)
    {
      const int di = g.dofIndex(cell.nodes[i]);
      if (di < 0)
        continue;
      for (int j = 0; j < cell.count; ++j)
      {
        const int dj = g.dofIndex(cell.nodes[j]);
        if (dj < 0)
          continue;
        double v = 0.0;
        for (int a = 0; a < dim; ++a)
          for (int b = 0; b < dim; ++b)
            v += cell.gradCoef[i][a] * H[a][b] * cell.gradCoef[j][b];
        trip.emplace_back(di, dj, cell.weight * v);
      }
    }
  }
  SparseMatrix M(n, n);
  M.setFromTriplets(trip.begin(), trip.end());
  return M;
}

SparseMatrix massHessian(const Grid &g, std::span<const double> u, const MassForm &mass,
                         double valueEps)
{
  const int n = static_cast<int>(g.interiorNodes().size());
  const int dim = g.gradDim();
  std::vector<Eigen::Triplet<double>> trip;
  const auto cells = g.cells();
  const auto &cw = g.cellWeights();
  for (std::size_t c = 0; c < cells.size(); ++c)
  {
    const Cell &cell = cells[c];
    const CellState s = cellState(cell, u, dim);
    const double mc = cw.m1[c] - cw.m2[c];
    if (mc == 0.0)
      continue;
    double d2;
    if (mass.s >= 2.0)
      d2 = mass.s * (mass.s - 1.0) * powAbs(s.uc, mass.s - 2.0);
    else
      d2 = mass.s * (mass.s - 1.0) * std::pow(s.uc * s.uc + valueEps * valueEps, 0.5 * (mass.s - 2.0));
    if (mass.s == 2.0)
      d2 = 2.0;
    const double k = cell.weight * mass.c * mc * d2;
    for (int i = 0; i < cell.count; ++i)
    {
      const int di = g.dofIndex(cell.nodes[i]);
      if (di < 0)
        continue;
      for (int j = 0; j < cell.count; ++j)
      {
        const int dj = g.dofIndex(cell.nodes[j]);
        if (dj < 0)
          continue;
        trip.emplace_back(di, dj, k * cell.valueCoef[i] * cell.valueCoef[j]);
      }
    }
  }
  SparseMatrix M(n, n);
  M.setFromTriplets(trip.begin(), trip.end());
  return M;
}

SparseMatrix secantMatrix(const Grid &g, std::span<const double> u, const EnergyForm &energy,
                          double eps, double shift)
{
  const int n = static_cast<int>(g.interiorNodes().size());
  const int dim = g.gradDim();
  const auto cells = g.cells();
  const auto &cw = g.cellWeights();
  std::vector<double> kappa(cells.size(), 0.0);
  double kmean = 0.0;
  double wsum = 0.0;
  for (std::size_t c = 0; c < cells.size(); ++c)
  {
    const CellState s = cellState(cells[c], u, dim);
    double k = 0.0;
    if (energy.cA != 0.0 && cw.a[c] != 0.0)
      k += energy.cA * energy.pA * cw.a[c] * gradientWeight(s.zz, energy.pA, eps);
    if (energy.cB != 0.0)
      k += energy.cB * energy.pB * gradientWeight(s.zz, energy.pB, eps);
    kappa[c] = k;
    kmean += cells[c].weight * k;
    wsum += cells[c].weight;
  }
  kmean /= wsum;
  // floor keeps the matrix definite where a or |grad u| vanish
  const double floor = std::max(1e-3 * kmean, 1e-300);
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(cells.size() * 9);
  for (std::size_t c = 0; c < cells.size(); ++c)
  {
    const Cell &cell = cells[c];
    const double k = std::max(kappa[c], floor);
    const double env = cw.envelope[c];
    for (int i = 0; i < cell.count; ++i)
    {
      const int di = g.dofIndex(cell.nodes[i]);
      if (di < 0)
        continue;
      for (int j = 0; j < cell.count; ++j)
      {
        const int dj = g.dofIndex(cell.nodes[j]);
        if (dj < 0)
          continue;
        double v = 0.0;
        for (int a = 0; a < dim; ++a)
          v += cell.gradCoef[i][a] * cell.gradCoef[j][a];
        v *= k;
        v += shift * env * cell.valueCoef[i] * cell.valueCoef[j];
        trip.emplace_back(di, dj, cell.weight * v);
      }
    }
  }
  SparseMatrix M(n, n);
  M.setFromTriplets(trip.begin(), trip.end());
  return M;
}

Eigen::VectorXd toDofs(const Grid &g, std::span<const double> nodal)
{
  const auto interior = g.interiorNodes();
  Eigen::VectorXd v(interior.size());
  for (std::size_t i = 0; i < interior.size(); ++i)
    v[i] = nodal[interior[i]];
  return v;
}

std::vector<double> fromDofs(const Grid &g, const Eigen::VectorXd &dofs)
{
  std::vector<double> out(g.nodeCount(), 0.0);
  const auto interior = g.interiorNodes();
  for (std::size_t i = 0; i < interior.size(); ++i)
    out[interior[i]] = dofs[i];
  return out;
}

} // namespace dphase::detail
