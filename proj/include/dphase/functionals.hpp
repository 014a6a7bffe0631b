#pragma once

#include "dphase/grid.hpp"
#include "dphase/modular.hpp"

#include <optional>
#include <span>
#include <vector>

namespace dphase
{

/// Smoothing of the gradient weight |grad u|^{e-2} to (|grad u|^2 + eps^2)^{(e-2)/2}.
/// Only gradients see eps; functional values never do.
struct Regularization
{
  double eps = 0.0;

  /// 1e-6 times the mean cell gradient magnitude of u.
  static Regularization defaultFor(const Grid &g, const GridFunction &u);
  /// Throws DomainError for eps < 0, or eps = 0 with an exponent below 2.
  void validate(std::initializer_list<double> exponents) const;
};

/// Named sub-integrals. For evalPsi the p slot carries r: aGradP = ∫ a|grad u|^r
/// and the m terms use |u|^r.
struct Components
{
  double aGradP = 0.0; // ∫ a |grad u|^p
  double gradQ = 0.0;  // ∫ |grad u|^q
  double mTerm = 0.0;  // ∫ m |u|^q
  double m1Term = 0.0;
  double m2Term = 0.0;
};

struct FunctionalValue
{
  double value = 0.0;
  std::vector<double> gradient; // d value / d u_i, zero on boundary nodes
  Components components;
  /// Constraint level for Phi ((1/q)∫ m|u|^q) and Psi (∫ m|u|^r); 0 otherwise.
  double constraint = 0.0;
};

/// J(u) = (1/p)∫ a|grad u|^p + (1/q)∫ |grad u|^q - (lambda/q)∫ m|u|^q.
FunctionalValue evalJ(const GridFunction &u, double lambda, const Exponents &exp, const Grid &g,
                      const Regularization &reg);

/// I(u) = ∫ a|grad u|^p + ∫ |grad u|^q - lambda ∫ m|u|^q.
FunctionalValue evalI(const GridFunction &u, double lambda, const Exponents &exp, const Grid &g,
                      const Regularization &reg);

/// Phi(u) = (1/p)∫ a|grad u|^p + (1/q)∫ |grad u|^q.
FunctionalValue evalPhi(const GridFunction &u, const Exponents &exp, const Grid &g,
                        const Regularization &reg);

/// Psi(u) = ∫ a|grad u|^r.
FunctionalValue evalPsi(const GridFunction &u, double r, const Grid &g, const Regularization &reg);

/// Ray scaling (aGradP / (lambda mTerm - gradQ))^{1/(q-p)}; empty when the
/// denominator is not positive.
std::optional<double> nehariScale(const Components &c, double lambda, const Exponents &exp);

/// The t > 0 with I(t|u|) = 0, or empty (no Nehari projection of u).
/// Throws RegimeError unless p < q.
std::optional<double> neharit(const GridFunction &u, double lambda, const Exponents &exp,
                              const Grid &g);

/// Psi(u) / ∫ m|u|^r. Throws IndefiniteConstraint when ∫ m|u|^r <= 0.
double rayleighSingle(const GridFunction &u, double r, const Grid &g);

/// [(1/p)∫ a|grad u|^p + (1/q)∫ |grad u|^q] / [(1/q)∫ m|u|^q].
double rayleighDouble(const GridFunction &u, const Exponents &exp, const Grid &g);

/// Picone quantity of the weighted r-Laplacian in gradient form.
double piconeSingle(const GridFunction &u, const GridFunction &v, double r, const Grid &g);

/// Picone quantity of the double phase operator (q < p only).
double piconeDouble(const GridFunction &u, const GridFunction &v, const Exponents &exp,
                    const Grid &g);

struct MonotonicityGap
{
  double lhs = 0.0;
  double rhs = 0.0;
};

/// Default constant of the strong monotonicity bound, from a randomized sweep.
inline constexpr double kMonotonicityConstant = 4.0;

/// lhs = ∫ |z1 - z2|^r,
/// rhs = C (∫ (|z1|^{r-2}z1 - |z2|^{r-2}z2).(z1 - z2))^{theta/2} (∫ |z1|^r + |z2|^r)^{1-theta/2}
/// with theta = r for r < 2 and 2 otherwise. z1, z2 are per-cell gradients
/// (gradDim() entries per cell).
MonotonicityGap monotonicityGap(std::span<const double> z1, std::span<const double> z2, double r,
                                const Grid &g, double C = kMonotonicityConstant);

} // namespace dphase
