#pragma once

// Shared kernels behind the functionals and the solvers. Every functional of
// the library is a combination of
//   energy(u) = cA ∫ a |grad u|^pA + cB ∫ |grad u|^pB
//   mass(u)   = cM ∫ m |u|^s
// evaluated with the grid's cell quadrature.

#include "dphase/grid.hpp"

#include <Eigen/SparseCore>

#include <span>
#include <vector>

namespace dphase::detail
{

struct EnergyForm
{
  double cA = 0.0;
  double pA = 2.0;
  double cB = 0.0;
  double pB = 2.0;
};

struct MassForm
{
  double c = 0.0;
  double s = 2.0;
};

struct FormEval
{
  double aPart = 0.0;  // ∫ a |grad u|^pA
  double bPart = 0.0;  // ∫ |grad u|^pB
  double mPart = 0.0;  // ∫ m |u|^s
  double m1Part = 0.0; // ∫ m1 |u|^s
  double m2Part = 0.0; // ∫ m2 |u|^s
  double energy = 0.0;
  double mass = 0.0;
  std::vector<double> energyGrad; // nodal, zero on the boundary
  std::vector<double> massGrad;
};

/// Gradient weight (|z|^2 + eps^2)^{(e-2)/2}; the exact |z|^{e-2} when eps = 0
/// (0 for z = 0, where it multiplies a zero vector).
double gradientWeight(double zz, double e, double eps);

FormEval evaluateForms(const Grid &g, std::span<const double> u, const EnergyForm &energy,
                       const MassForm &mass, double eps, bool wantGradients);

/// eps default: 1e-6 times the mean cell gradient magnitude (floor 1e-300).
double defaultEps(const Grid &g, std::span<const double> u);

using SparseMatrix = Eigen::SparseMatrix<double>;

/// Regularized second derivative of energy() on interior dofs.
SparseMatrix energyHessian(const Grid &g, std::span<const double> u, const EnergyForm &energy,
                           double eps);

/// Regularized second derivative of mass() on interior dofs.
SparseMatrix massHessian(const Grid &g, std::span<const double> u, const MassForm &mass,
                         double valueEps);

/// Kacanov (secant) stiffness of energy() plus shift * ∫ envelope u v. SPD.
SparseMatrix secantMatrix(const Grid &g, std::span<const double> u, const EnergyForm &energy,
                          double eps, double shift);

/// Restriction of a nodal vector to interior dofs and back.
Eigen::VectorXd toDofs(const Grid &g, std::span<const double> nodal);
std::vector<double> fromDofs(const Grid &g, const Eigen::VectorXd &dofs);

} // namespace dphase::detail
