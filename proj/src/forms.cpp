#include "dphase/detail/forms.hpp"

#include "dphase/error.hpp"
#include "dphase/modular.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace dphase::detail
{

double gradientWeight(double zz, double e, double eps)
{
  if (e == 2.0)
    return 1.0;
  if (e == 3.0)
    return std::sqrt(zz + eps * eps);
  if (eps == 0.0)
    return zz == 0.0 ? 0.0 : std::pow(zz, 0.5 * (e - 2.0));
  return std::pow(zz + eps * eps, 0.5 * (e - 2.0));
}

FormEval evaluateForms(const Grid &g, std::span<const double> u, const EnergyForm &energy,
                       const MassForm &mass, double eps, bool wantGradients)
{
  if (u.size() != g.nodeCount())
    throw DimensionError("field size does not match the grid");
  const int dim = g.gradDim();
  const auto cells = g.cells();
  const auto &cw = g.cellWeights();
  FormEval out;
  if (wantGradients)
  {
    out.energyGrad.assign(u.size(), 0.0);
    out.massGrad.assign(u.size(), 0.0);
  }
  const bool useA = energy.cA != 0.0;
  const bool useB = energy.cB != 0.0;
  for (std::size_t c = 0; c < cells.size(); ++c)
  {
    const Cell &cell = cells[c];
    std::array<double, 2> z{0.0, 0.0};
    double uc = 0.0;
    for (int j = 0; j < cell.count; ++j)
    {
      const double v = u[cell.nodes[j]];
      z[0] += cell.gradCoef[j][0] * v;
      z[1] += cell.gradCoef[j][1] * v;
      uc += cell.valueCoef[j] * v;
    }
    if (!std::isfinite(z[0]) || !std::isfinite(z[1]) || !std::isfinite(uc))
      throw NumericError("non-finite field value in functional evaluation");
    const double zz = dim == 2 ? z[0] * z[0] + z[1] * z[1] : z[0] * z[0];
    const double gn = std::sqrt(zz);
    const double w = cell.weight;
    const double a = cw.a[c];
    if (useA)
      out.aPart += w * a * powAbs(gn, energy.pA);
    if (useB)
      out.bPart += w * powAbs(gn, energy.pB);
    const double us = powAbs(uc, mass.s);
    out.m1Part += w * cw.m1[c] * us;
    out.m2Part += w * cw.m2[c] * us;
    out.mPart += w * (cw.m1[c] - cw.m2[c]) * us;

    if (!wantGradients)
      continue;
    double k = 0.0;
    if (useA && a != 0.0)
      k += energy.cA * energy.pA * a * gradientWeight(zz, energy.pA, eps);
    if (useB)
      k += energy.cB * energy.pB * gradientWeight(zz, energy.pB, eps);
    const double mc = cw.m1[c] - cw.m2[c];
    const double du = uc == 0.0 ? 0.0 : std::copysign(powAbs(uc, mass.s - 1.0), uc);
    const double km = mass.c * mass.s * mc * du;
    for (int j = 0; j < cell.count; ++j)
    {
      const int node = cell.nodes[j];
      if (g.isBoundary(node))
        continue;
      double zd = cell.gradCoef[j][0] * z[0];
      if (dim == 2)
        zd += cell.gradCoef[j][1] * z[1];
      out.energyGrad[node] += w * k * zd;
      out.massGrad[node] += w * km * cell.valueCoef[j];
    }
  }
  out.energy = energy.cA * out.aPart + energy.cB * out.bPart;
  out.mass = mass.c * out.mPart;
  return out;
}

double defaultEps(const Grid &g, std::span<const double> u)
{
  const auto gn = g.gradientNorm(u);
  double s = 0.0;
  for (double v : gn)
    s += v;
  const double mean = gn.empty() ? 0.0 : s / gn.size();
  return std::max(1e-6 * mean, 1e-300);
}

} // namespace dphase::detail
