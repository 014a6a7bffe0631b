#pragma once

// Descent and Newton machinery shared by the eigensolvers.
//
// A constrained problem minimizes energy(u) (+ an optional deflation penalty)
// on the level set G(u) = c ∫ m|u|^s = level.

#include "dphase/detail/forms.hpp"
#include "dphase/eigensolve.hpp"

#include <functional>
#include <span>
#include <vector>

namespace dphase::detail
{

struct Constrained
{
  EnergyForm energy;
  MassForm constraint;
  double level = 1.0;
  /// Penalty sum_j strength * <w_j, u>^2 added to the energy.
  std::vector<std::vector<double>> deflate;
  double penalty = 0.0;
};

struct ConstrainedEval
{
  double F = 0.0;
  double G = 0.0;
  std::vector<double> gradF; // nodal
  std::vector<double> gradG;
  FormEval parts;
};

ConstrainedEval evaluate(const Grid &g, const Constrained &pb, std::span<const double> u,
                         double eps, bool withPenalty = true);

/// Rescales u onto G = level. Returns false (u untouched) when G(u) <= 0.
bool retract(const Grid &g, const Constrained &pb, std::vector<double> &u);

struct DescentResult
{
  std::vector<double> u;
  double value = 0.0;
  int iterations = 0;
};

/// Preconditioned projected descent. Throws IndefiniteConstraint when u0
/// cannot be brought onto the constraint. Appends to `trace` every
/// cfg.traceEvery iterations when trace is non-null.
DescentResult constrainedDescent(const Grid &g, const Constrained &pb, std::vector<double> u0,
                                 const SolverConfig &cfg,
                                 std::vector<std::vector<double>> *trace = nullptr);

/// Scaled residual of a candidate (u, multiplier).
using ResidualFn = std::function<double(std::span<const double>, double)>;

struct PolishResult
{
  std::vector<double> u;
  double multiplier = 0.0;
  double residual = 0.0;
  int iterations = 0;
};

/// Newton on grad F - mu grad G = 0, G = level (without the deflation
/// penalty), damped by the Euclidean norm of the system residual.
PolishResult polishConstrained(const Grid &g, const Constrained &pb, std::vector<double> u,
                               const ResidualFn &residual, double tol, int maxIter);

/// Newton on grad (energy - mass) = 0.
PolishResult polishFree(const Grid &g, const EnergyForm &energy, const MassForm &mass,
                        std::vector<double> u, const ResidualFn &residual, double tol, int maxIter,
                        std::vector<std::vector<double>> *trace = nullptr, int traceEvery = 0,
                        int iterationOffset = 0);

double dotDofs(const Grid &g, std::span<const double> a, std::span<const double> b);

} // namespace dphase::detail
