#include "dphase/functionals.hpp"

#include "dphase/detail/forms.hpp"
#include "dphase/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace dphase
{

using detail::EnergyForm;
using detail::MassForm;

Regularization Regularization::defaultFor(const Grid &g, const GridFunction &u)
{
  return Regularization{detail::defaultEps(g, u.values())};
}

void Regularization::validate(std::initializer_list<double> exponents) const
{
  if (!(eps >= 0.0))
    throw DomainError("regularization eps must be nonnegative");
  if (eps == 0.0)
    for (double e : exponents)
      if (e < 2.0)
        throw DomainError("eps = 0 is only allowed for exponents >= 2");
}

namespace
{

FunctionalValue assemble(const GridFunction &u, const Grid &g, const EnergyForm &energy,
                         const MassForm &mass, double eps)
{
  const auto f = detail::evaluateForms(g, u.values(), energy, mass, eps, true);
  FunctionalValue out;
  out.components.aGradP = f.aPart;
  out.components.gradQ = f.bPart;
  out.components.mTerm = f.mPart;
  out.components.m1Term = f.m1Part;
  out.components.m2Term = f.m2Part;
  out.value = f.energy - f.mass;
  out.gradient.resize(f.energyGrad.size());
  for (std::size_t i = 0; i < out.gradient.size(); ++i)
    out.gradient[i] = f.energyGrad[i] - f.massGrad[i];
  return out;
}

} // namespace

FunctionalValue evalJ(const GridFunction &u, double lambda, const Exponents &exp, const Grid &g,
                      const Regularization &reg)
{
  reg.validate({exp.p, exp.q});
  auto out = assemble(u, g, {1.0 / exp.p, exp.p, 1.0 / exp.q, exp.q}, {lambda / exp.q, exp.q},
                      reg.eps);
  const auto &c = out.components;
  out.value = c.aGradP / exp.p + c.gradQ / exp.q - lambda * c.mTerm / exp.q;
  return out;
}

FunctionalValue evalI(const GridFunction &u, double lambda, const Exponents &exp, const Grid &g,
                      const Regularization &reg)
{
  reg.validate({exp.p, exp.q});
  auto out = assemble(u, g, {1.0, exp.p, 1.0, exp.q}, {lambda, exp.q}, reg.eps);
  const auto &c = out.components;
  out.value = c.aGradP + c.gradQ - lambda * c.mTerm;
  return out;
}

FunctionalValue evalPhi(const GridFunction &u, const Exponents &exp, const Grid &g,
                        const Regularization &reg)
{
  reg.validate({exp.p, exp.q});
  auto out = assemble(u, g, {1.0 / exp.p, exp.p, 1.0 / exp.q, exp.q}, {0.0, exp.q}, reg.eps);
  const auto &c = out.components;
  out.value = c.aGradP / exp.p + c.gradQ / exp.q;
  out.constraint = c.mTerm / exp.q;
  return out;
}

FunctionalValue evalPsi(const GridFunction &u, double r, const Grid &g, const Regularization &reg)
{
  if (!(r > 1.0))
    throw DomainError("single-phase exponent must exceed 1");
  reg.validate({r});
  auto out = assemble(u, g, {1.0, r, 0.0, r}, {0.0, r}, reg.eps);
  out.value = out.components.aGradP;
  out.constraint = out.components.mTerm;
  return out;
}

std::optional<double> nehariScale(const Components &c, double lambda, const Exponents &exp)
{
  const double denom = lambda * c.mTerm - c.gradQ;
  // a denominator lost in rounding counts as nonpositive
  const double scale = std::abs(lambda * c.mTerm) + c.gradQ;
  if (!(denom > 64.0 * std::numeric_limits<double>::epsilon() * scale))
    return std::nullopt;
  if (!(c.aGradP > 0.0))
    return std::nullopt;
  return std::pow(c.aGradP / denom, 1.0 / (exp.q - exp.p));
}

std::optional<double> neharit(const GridFunction &u, double lambda, const Exponents &exp,
                              const Grid &g)
{
  if (exp.regime() != Regime::PLessQ)
    throw RegimeError("the Nehari projection exists only for p < q");
  std::vector<double> abs(u.values().begin(), u.values().end());
  for (double &v : abs)
    v = std::abs(v);
  const auto f = detail::evaluateForms(g, abs, {1.0, exp.p, 1.0, exp.q}, {1.0, exp.q}, 0.0, false);
  Components c;
  c.aGradP = f.aPart;
  c.gradQ = f.bPart;
  c.mTerm = f.mPart;
  return nehariScale(c, lambda, exp);
}

double rayleighSingle(const GridFunction &u, double r, const Grid &g)
{
  const auto f = detail::evaluateForms(g, u.values(), {1.0, r, 0.0, r}, {1.0, r}, 0.0, false);
  if (!(f.mPart > 0.0))
    throw IndefiniteConstraint("rayleighSingle needs ∫ m|u|^r > 0");
  return f.aPart / f.mPart;
}

double rayleighDouble(const GridFunction &u, const Exponents &exp, const Grid &g)
{
  const auto f = detail::evaluateForms(g, u.values(), {1.0, exp.p, 1.0, exp.q}, {1.0, exp.q}, 0.0,
                                       false);
  if (!(f.mPart > 0.0))
    throw IndefiniteConstraint("rayleighDouble needs ∫ m|u|^q > 0");
  return (f.aPart / exp.p + f.bPart / exp.q) / (f.mPart / exp.q);
}

namespace
{

void requirePositive(const GridFunction &u, const Grid &g, const char *name)
{
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (int node : g.interiorNodes())
  {
    lo = std::min(lo, u.values()[node]);
    hi = std::max(hi, u.values()[node]);
  }
  if (!(hi > 0.0) || !(lo > 1e-12 * hi))
    throw PositivityError(std::string("Picone quantity needs ") + name +
                          " > 0 at every interior node");
}

double dot(std::span<const double> a, std::span<const double> b, std::size_t c, int dim)
{
  double s = a[c * dim] * b[c * dim];
  if (dim == 2)
    s += a[c * dim + 1] * b[c * dim + 1];
  return s;
}

// One half of a Picone integrand:
//   (1 + (s-1) rho^s) |grad u|^e - s rho^{s-1} |grad u|^{e-2} grad u . grad v,  rho = v/u
double piconeHalf(double uc, double vc, double gu, double guv, double s, double e)
{
  const double rho = vc / uc;
  const double cross = gu == 0.0 ? 0.0 : std::pow(gu, e - 2.0) * guv;
  return (1.0 + (s - 1.0) * std::pow(rho, s)) * std::pow(gu, e) - s * std::pow(rho, s - 1.0) * cross;
}

// ∫ weight * [half(u, v) + half(v, u)] with ratio exponent s and gradient exponent e.
double piconeIntegral(const GridFunction &u, const GridFunction &v, const Grid &g,
                      std::span<const double> weight, double s, double e)
{
  const int dim = g.gradDim();
  const auto gu = u.gradNorm();
  const auto gv = v.gradNorm();
  const auto uc = u.cellValues();
  const auto vc = v.cellValues();
  const auto w = g.quadWeights();
  double total = 0.0;
  for (std::size_t c = 0; c < w.size(); ++c)
  {
    if (weight[c] == 0.0)
      continue;
    if (uc[c] <= 0.0 || vc[c] <= 0.0)
      throw PositivityError("Picone quantity needs positive cell values");
    const double guv = dot(u.grad(), v.grad(), c, dim);
    const double val = piconeHalf(uc[c], vc[c], gu[c], guv, s, e) +
                       piconeHalf(vc[c], uc[c], gv[c], guv, s, e);
    total += w[c] * weight[c] * val;
  }
  return total;
}

} // namespace

double piconeSingle(const GridFunction &u, const GridFunction &v, double r, const Grid &g)
{
  if (!(r > 1.0))
    throw DomainError("Picone exponent must exceed 1");
  requirePositive(u, g, "u");
  requirePositive(v, g, "v");
  return piconeIntegral(u, v, g, g.cellWeights().a, r, r);
}

double piconeDouble(const GridFunction &u, const GridFunction &v, const Exponents &exp,
                    const Grid &g)
{
  if (exp.regime() != Regime::QLessP)
    throw RegimeError("the double phase Picone inequality is only established for q < p");
  requirePositive(u, g, "u");
  requirePositive(v, g, "v");
  const std::vector<double> ones(g.cellCount(), 1.0);
  // p-part with q-power ratios, plus the plain q-Laplacian part
  return piconeIntegral(u, v, g, g.cellWeights().a, exp.q, exp.p) +
         piconeIntegral(u, v, g, ones, exp.q, exp.q);
}

MonotonicityGap monotonicityGap(std::span<const double> z1, std::span<const double> z2, double r,
                                const Grid &g, double C)
{
  if (!(r > 1.0))
    throw DomainError("monotonicity exponent must exceed 1");
  const int dim = g.gradDim();
  const auto w = g.quadWeights();
  if (z1.size() != w.size() * dim || z2.size() != w.size() * dim)
    throw DimensionError("gradient fields must carry gradDim() entries per cell");
  const double theta = r < 2.0 ? r : 2.0;
  double diff = 0.0;
  double mono = 0.0;
  double mass = 0.0;
  for (std::size_t c = 0; c < w.size(); ++c)
  {
    double n1 = 0.0, n2 = 0.0, nd = 0.0;
    for (int d = 0; d < dim; ++d)
    {
      const double a = z1[c * dim + d];
      const double b = z2[c * dim + d];
      n1 += a * a;
      n2 += b * b;
      nd += (a - b) * (a - b);
    }
    n1 = std::sqrt(n1);
    n2 = std::sqrt(n2);
    const double k1 = n1 == 0.0 ? 0.0 : std::pow(n1, r - 2.0);
    const double k2 = n2 == 0.0 ? 0.0 : std::pow(n2, r - 2.0);
    double m = 0.0;
    for (int d = 0; d < dim; ++d)
    {
      const double a = z1[c * dim + d];
      const double b = z2[c * dim + d];
      m += (k1 * a - k2 * b) * (a - b);
    }
    diff += w[c] * powAbs(std::sqrt(nd), r);
    mono += w[c] * std::max(m, 0.0);
    mass += w[c] * (powAbs(n1, r) + powAbs(n2, r));
  }
  MonotonicityGap gap;
  gap.lhs = diff;
  gap.rhs = mass == 0.0 ? 0.0 : C * std::pow(mono, 0.5 * theta) * std::pow(mass, 1.0 - 0.5 * theta);
  return gap;
}

} // namespace dphase
