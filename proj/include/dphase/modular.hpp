#pragma once

#include "dphase/grid.hpp"

#include <cmath>
#include <span>

namespace dphase
{

enum class Regime
{
  PLessQ,
  QLessP
};

std::string toString(Regime regime);

/// Exponents of the double phase integrand xi(x,t) = a(x) t^p + t^q and of the
/// single-phase problem (exponent r). All lie in (1, N) and p != q.
struct Exponents
{
  double p = 2.0;
  double q = 3.0;
  double r = 2.0;
  int N = 4;

  Exponents() = default;
  Exponents(double p, double q, double r, int N);

  /// Critical Sobolev exponent qN/(N-q).
  double qStar() const { return q * N / (N - q); }
  Regime regime() const { return p < q ? Regime::PLessQ : Regime::QLessP; }
  double minPQ() const { return p < q ? p : q; }
  double maxPQ() const { return p < q ? q : p; }

  void validate() const;
};

/// Norm diagnostics of one cell field.
struct NormReport
{
  double modular = 0.0;
  double luxemburg = 0.0;
  double lowerSandwich = 0.0;
  double upperSandwich = 0.0;
  double eNorm = 0.0;
  double lqNorm = 0.0;
};

/// |x|^e with 0^e = 0 for e > 0.
inline double powAbs(double x, double e)
{
  const double ax = x < 0.0 ? -x : x;
  if (e == 1.0)
    return ax;
  if (e == 2.0)
    return ax * ax;
  if (e == 3.0)
    return ax * ax * ax;
  return ax == 0.0 ? 0.0 : std::pow(ax, e);
}

/// xi(x, t) for a given value a(x). Throws DomainError for t < 0.
double xi(double a, double t, const Exponents &exp);

/// xi at the centroid of `cell`.
double xiEval(const Grid &g, std::size_t cell, double t, const Exponents &exp);

/// rho_xi(f) = ∫ a|f|^p + |f|^q for per-cell magnitudes f.
double modular(std::span<const double> cellField, const Exponents &exp, const Grid &g);

/// The two homogeneous parts of rho_xi(f): ∫ a|f|^p and ∫ |f|^q.
struct ModularParts
{
  double aPart = 0.0;
  double qPart = 0.0;
  double value(double scale, const Exponents &exp) const;
};
ModularParts modularParts(std::span<const double> cellField, const Exponents &exp, const Grid &g);

/// Luxemburg norm: the lambda > 0 with rho_xi(f/lambda) = 1, by bisection.
/// `tol` is an absolute tolerance on lambda. Returns 0 for f ≡ 0.
double luxemburgNorm(std::span<const double> cellField, const Exponents &exp, const Grid &g,
                     double tol);
/// Same with a relative tolerance of 1e-12.
double luxemburgNorm(std::span<const double> cellField, const Exponents &exp, const Grid &g);

/// ||grad u||_xi + (∫ |u|^q max{m2, omega})^{1/q}.
double eNorm(const GridFunction &u, const Exponents &exp, const Grid &g);

/// (∫ a|grad u|^r)^{1/r} + (∫ |u|^r max{m2, omega_r})^{1/r}, omega_r = (1+|x|)^-r.
double singlePhaseNorm(const GridFunction &u, double r, const Grid &g);

/// ∫ a |f|^r.
double singlePhaseModular(std::span<const double> cellField, double r, const Grid &g);

/// Modular, Luxemburg norm, sandwich bounds and the L^q norm of a cell field.
/// eNorm is left at zero (it needs a nodal field, see eNorm()).
NormReport sandwichCheck(std::span<const double> cellField, const Exponents &exp, const Grid &g);

} // namespace dphase
