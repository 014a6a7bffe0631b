#pragma once

#include "dphase/functionals.hpp"
#include "dphase/grid.hpp"
#include "dphase/modular.hpp"

#include <cstdint>
#include <random>
#include <string>
#include <variant>
#include <vector>

namespace dphase
{

enum class StepRule
{
  Armijo,
  FixedDecay // step 1/(1 + iter/100), no backtracking beyond admissibility
};

struct SolverConfig
{
  int maxIters = 2000;
  StepRule stepRule = StepRule::Armijo;
  /// Residual required of a returned eigenpair.
  double tolResidual = 1e-8;
  /// Descent stops when the relative decrease over 25 iterations drops below this.
  double tolStagnation = 1e-12;
  int restarts = 4;
  std::uint64_t seed = 1;
  /// Deflation penalty, relative to the largest eigenvalue already found.
  double deflationStrength = 10.0;
  /// Record the iterate every traceEvery iterations (0 disables the trace).
  int traceEvery = 0;

  void validate() const;
};

enum class SolveRegime
{
  SinglePhase,
  NehariPLessQ,
  MinMaxQLessP
};

std::string toString(SolveRegime regime);
std::string toString(StepRule rule);

struct EigenPair
{
  double lambda = 0.0;
  GridFunction u;
  double residual = 0.0;
  int iterations = 0;
  SolveRegime regime = SolveRegime::SinglePhase;
  /// Constraint level at u: ∫ m|u|^r, (1/q)∫ m|u|^q, or I(u) for Nehari.
  double constraintValue = 0.0;
  /// Set for modes obtained by deflation or subspace search.
  bool heuristic = false;
  /// Value of the constrained functional at u: Psi, Phi or J.
  double criticalValue = 0.0;
  /// Min-max modes: the smallest sup of Phi over the sampled symmetric sets.
  double upperBound = 0.0;
  /// Smallest pairwise colinearity of the restart solutions (principal modes).
  double restartColinearity = 1.0;
  /// Iterates sampled every SolverConfig::traceEvery iterations.
  std::vector<std::vector<double>> trace;
};

/// No nontrivial Nehari minimizer: lambda is at or below the discrete
/// principal q-eigenvalue, or no start admits a Nehari projection.
struct Degenerate
{
  std::string reason;
  double muHat = 0.0;
  int admissibleStarts = 0;
};

using NehariResult = std::variant<EigenPair, Degenerate>;

/// Smooth random field with zero boundary values, built from one to three
/// Gaussian bumps centered where m1 is within half of its maximum.
/// `positive` keeps all amplitudes positive.
std::vector<double> randomBump(const Grid &g, std::mt19937_64 &rng, bool positive);

/// First k eigenpairs of -div(a|grad u|^{r-2} grad u) = mu m|u|^{r-2} u,
/// normalized to ∫ m|u|^r = 1, in nondecreasing order. Modes k >= 2 come from
/// penalized deflation and are flagged heuristic.
std::vector<EigenPair> solveSinglePhase(double r, int k, const Grid &g, const SolverConfig &cfg);

/// Principal eigenpair of the a-free quotient ∫ |grad u|^q / ∫ m|u|^q on g.
EigenPair referenceEigenvalue(const Grid &g, const Exponents &exp, const SolverConfig &cfg);

/// Ground state of the p < q problem by minimizing J over the Nehari set.
NehariResult solveNehari(double lambda, const Grid &g, const Exponents &exp,
                         const SolverConfig &cfg);
/// Same with a precomputed referenceEigenvalue().
NehariResult solveNehari(double lambda, const Grid &g, const Exponents &exp,
                         const SolverConfig &cfg, const EigenPair &reference);

/// The first K critical points of Phi on {(1/q)∫ m|u|^q = 1} for q < p:
/// the minimizer, then local min-max over span(u_1..u_{k-1}, v).
std::vector<EigenPair> solveMinMax(int K, const Grid &g, const Exponents &exp,
                                   const SolverConfig &cfg);

/// max_i |<a|grad u|^{p-2}grad u + |grad u|^{q-2}grad u, grad phi_i> - lambda <m|u|^{q-2}u, phi_i>|
/// over interior basis functions, divided by max(1, eNorm(u)). eps = 0 gives
/// the exact residual.
double pdeResidual(const GridFunction &u, double lambda, const Exponents &exp, const Grid &g,
                   const Regularization &reg);

/// Residual of the single-phase equation at eigenvalue mu, scaled by
/// max(1, singlePhaseNorm(u)).
double singlePhaseResidual(const GridFunction &u, double mu, double r, const Grid &g);

/// |<u, v>| / (|u| |v|) over nodal values.
double colinearity(std::span<const double> u, std::span<const double> v);

} // namespace dphase
