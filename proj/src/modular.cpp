#include "dphase/modular.hpp"

#include "dphase/error.hpp"

#include <algorithm>
#include <cmath>

namespace dphase
{

std::string toString(Regime regime)
{
  return regime == Regime::PLessQ ? "p<q" : "q<p";
}

Exponents::Exponents(double p_, double q_, double r_, int N_) : p(p_), q(q_), r(r_), N(N_)
{
  validate();
}

void Exponents::validate() const
{
  if (N < 2)
    throw DomainError("N must be at least 2");
  auto inRange = [this](double e) { return e > 1.0 && e < N; };
  if (!inRange(p) || !inRange(q))
    throw DomainError("exponents must satisfy 1 < p, q < N");
  if (!inRange(r))
    throw DomainError("single-phase exponent must satisfy 1 < r < N");
  if (p == q)
    throw DomainError("exponents must satisfy p != q");
}

double xi(double a, double t, const Exponents &exp)
{
  if (!(t >= 0.0))
    throw DomainError("xi is defined for t >= 0 only");
  return a * powAbs(t, exp.p) + powAbs(t, exp.q);
}

double xiEval(const Grid &g, std::size_t cell, double t, const Exponents &exp)
{
  return xi(g.cellWeights().a.at(cell), t, exp);
}

ModularParts modularParts(std::span<const double> f, const Exponents &exp, const Grid &g)
{
  const auto w = g.quadWeights();
  if (f.size() != w.size())
    throw DimensionError("cell field size does not match the grid");
  const auto &a = g.cellWeights().a;
  ModularParts parts;
  for (std::size_t c = 0; c < w.size(); ++c)
  {
    if (!std::isfinite(f[c]))
      throw NumericError("cell field contains a non-finite value");
    parts.aPart += w[c] * a[c] * powAbs(f[c], exp.p);
    parts.qPart += w[c] * powAbs(f[c], exp.q);
  }
  return parts;
}

double ModularParts::value(double scale, const Exponents &exp) const
{
  // rho(f / scale)
  return aPart * std::pow(scale, -exp.p) + qPart * std::pow(scale, -exp.q);
}

double modular(std::span<const double> f, const Exponents &exp, const Grid &g)
{
  const auto parts = modularParts(f, exp, g);
  return parts.aPart + parts.qPart;
}

namespace
{

double bisectLuxemburg(const ModularParts &parts, const Exponents &exp, double absTol,
                       double relTol)
{
  const double rho = parts.aPart + parts.qPart;
  if (rho == 0.0)
    return 0.0;
  if (rho == 1.0)
    return 1.0;
  // bracket from the sandwich inequalities, widened slightly against rounding
  double lo = std::pow(rho, 1.0 / exp.maxPQ());
  double hi = std::pow(rho, 1.0 / exp.minPQ());
  if (lo > hi)
    std::swap(lo, hi);
  lo *= 1.0 - 1e-12;
  hi *= 1.0 + 1e-12;
  while (parts.value(lo, exp) < 1.0)
    lo *= 0.5;
  while (parts.value(hi, exp) > 1.0)
    hi *= 2.0;
  for (int it = 0; it < 400; ++it)
  {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi)
      break;
    if (parts.value(mid, exp) > 1.0)
      lo = mid;
    else
      hi = mid;
    const double width = hi - lo;
    if ((absTol > 0.0 && width <= absTol) || (relTol > 0.0 && width <= relTol * hi))
      break;
  }
  return 0.5 * (lo + hi);
}

} // namespace

double luxemburgNorm(std::span<const double> f, const Exponents &exp, const Grid &g, double tol)
{
  if (!(tol > 0.0))
    throw DomainError("luxemburgNorm tolerance must be positive");
  return bisectLuxemburg(modularParts(f, exp, g), exp, tol, 0.0);
}

double luxemburgNorm(std::span<const double> f, const Exponents &exp, const Grid &g)
{
  return bisectLuxemburg(modularParts(f, exp, g), exp, 0.0, 1e-12);
}

double eNorm(const GridFunction &u, const Exponents &exp, const Grid &g)
{
  const auto gn = u.gradNorm();
  const double gradPart = luxemburgNorm(gn, exp, g);
  const auto cv = u.cellValues();
  const auto &env = g.cellWeights().envelope;
  const auto w = g.quadWeights();
  double s = 0.0;
  for (std::size_t c = 0; c < w.size(); ++c)
    s += w[c] * env[c] * powAbs(cv[c], exp.q);
  return gradPart + std::pow(s, 1.0 / exp.q);
}

double singlePhaseNorm(const GridFunction &u, double r, const Grid &g)
{
  const auto gn = u.gradNorm();
  const auto cv = u.cellValues();
  const auto &cw = g.cellWeights();
  const auto w = g.quadWeights();
  double grad = 0.0;
  double zero = 0.0;
  for (std::size_t c = 0; c < w.size(); ++c)
  {
    grad += w[c] * cw.a[c] * powAbs(gn[c], r);
    const double omega = std::pow(1.0 + g.distance(g.cells()[c].centroid), -r);
    zero += w[c] * std::max(cw.m2[c], omega) * powAbs(cv[c], r);
  }
  return std::pow(grad, 1.0 / r) + std::pow(zero, 1.0 / r);
}

double singlePhaseModular(std::span<const double> f, double r, const Grid &g)
{
  const auto w = g.quadWeights();
  if (f.size() != w.size())
    throw DimensionError("cell field size does not match the grid");
  const auto &a = g.cellWeights().a;
  double s = 0.0;
  for (std::size_t c = 0; c < w.size(); ++c)
    s += w[c] * a[c] * powAbs(f[c], r);
  return s;
}

NormReport sandwichCheck(std::span<const double> f, const Exponents &exp, const Grid &g)
{
  NormReport rep;
  const auto parts = modularParts(f, exp, g);
  rep.modular = parts.aPart + parts.qPart;
  rep.luxemburg = bisectLuxemburg(parts, exp, 0.0, 1e-12);
  rep.lqNorm = std::pow(parts.qPart, 1.0 / exp.q);
  const double nrm = rep.luxemburg;
  if (nrm < 1.0)
  {
    rep.lowerSandwich = std::pow(nrm, exp.maxPQ());
    rep.upperSandwich = std::pow(nrm, exp.minPQ());
  }
  else
  {
    rep.lowerSandwich = std::pow(nrm, exp.minPQ());
    rep.upperSandwich = std::pow(nrm, exp.maxPQ());
  }
  return rep;
}

} // namespace dphase
