#pragma once

// Randomized property suites over the library's invariants. Each suite
// returns its measurements; callers decide pass/fail.

#include "dphase/eigensolve.hpp"
#include "dphase/functionals.hpp"
#include "dphase/grid.hpp"
#include "dphase/modular.hpp"

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace dphase
{

/// Per-cell magnitudes, lognormal around 1.
std::vector<double> randomCellField(const Grid &g, std::mt19937_64 &rng);

/// Nodal field with uniform values in [-1, 1] at interior nodes.
std::vector<double> randomNodalField(const Grid &g, std::mt19937_64 &rng);

/// Positive interior field: cutoff * (baseline + random Gaussian bumps).
std::vector<double> randomPositiveField(const Grid &g, std::mt19937_64 &rng);

struct NormSuiteResult
{
  int fields = 0;
  double maxUnitModularError = 0.0; // |rho(f / ||f||) - 1|
  int signViolations = 0; // sign(||f|| - 1) != sign(rho(f) - 1)
  int sandwichViolations = 0;
  double maxHomogeneityError = 0.0; // relative, c in {0.1, 3, 10}
  bool coVanishing = true;
  int embeddingViolations = 0; // ||f|| <= 1 but ∫ |f|^q > 1
};

/// Unit modular identity, sign agreement of norm and modular around 1, sandwich brackets at norm levels {0.25, 0.5, 2, 4},
/// homogeneity, co-vanishing of modular and norm along f/2^k, k = 1..20, and
/// the unit-ball embedding into L^q.
NormSuiteResult normSuite(const Grid &g, const Exponents &exp, int fields, std::uint64_t seed);

/// Largest relative error of the quadrature on 1 + x (+ y), or 1 + |x| in
/// RadialN mode, against the exact integral.
double quadratureExactness(const Grid &g);

/// Empirical convergence order of ∫ exp(-|x|^2 / R^2) over resolutions n, 2n, 4n.
double refinementOrder(const Geometry &geometry, const WeightSpec &weights);

/// min over nodes of envelope - omega, and min omega. Both must be >= 0 and > 0.
struct EnvelopeCheck
{
  double minGap = 0.0;
  double minOmega = 0.0;
  bool omegaDecreasing = true;
};
EnvelopeCheck envelopeCheck(const Grid &g);

struct GrowthCheck
{
  long checks = 0;
  long violations = 0;
  double minSlack = 0.0; // smallest relative slack of either side
};

/// t^q <= xi(x, t) <= C0 (t^p + t^q), C0 = max(1, max a), over all nodes and
/// `tValues` log-spaced t in [1e-3, 1e3].
GrowthCheck growthCheck(const Grid &g, const Exponents &exp, int tValues = 50);

enum class FunctionalKind
{
  J,
  I,
  Phi,
  Psi
};

std::string toString(FunctionalKind kind);

/// Largest relative error between gradient . delta and the central difference
/// (F(u + h delta) - F(u - h delta)) / 2h, h = 1e-6, over random (u, delta).
double gradientCheck(FunctionalKind kind, const Grid &g, const Exponents &exp, double lambda,
                     double eps, int trials, std::uint64_t seed);

struct PiconeAudit
{
  int pairs = 0;
  double minScaled = 0.0;       // min over pairs of I(u, v) / scale
  double proportionalMax = 0.0; // max over proportional pairs of |I| / scale
};

/// Random positive pairs and proportional pairs (v = u, v = factor u).
PiconeAudit piconeAuditSingle(const Grid &g, double r, int pairs, double factor,
                              std::uint64_t seed);
PiconeAudit piconeAuditDouble(const Grid &g, const Exponents &exp, int pairs, double factor,
                              std::uint64_t seed);

struct MonotonicitySweep
{
  int trials = 0;
  int violations = 0;
  double worstRatio = 0.0; // max lhs / rhs
};

MonotonicitySweep monotonicitySweep(const Grid &g, double r, int trials, std::uint64_t seed,
                                    double C = kMonotonicityConstant);

struct ScalingRow
{
  double t = 0.0;
  double quotient = 0.0;
};

/// rayleighDouble(t u) for the principal a-free eigenfunction u, with
/// t in {1, 10, 100, 1000} for p < q and the reciprocals for q < p.
std::vector<ScalingRow> scalingLimit(const Grid &g, const Exponents &exp,
                                     const EigenPair &reference);

struct ScanPoint
{
  double multiplier = 0.0;
  double lambda = 0.0;
  bool degenerate = false;
  std::string note;
  std::optional<EigenPair> pair;
};

/// solveNehari at lambda = multiplier * muHat for each multiplier. A failing
/// point is recorded in `note` and does not stop the scan. Points are spread
/// over `threads` workers; the result order matches `multipliers`.
std::vector<ScanPoint> nonexistenceScan(const Grid &g, const Exponents &exp,
                                        const std::vector<double> &multipliers,
                                        const SolverConfig &cfg, const EigenPair &reference,
                                        int threads = 1);

/// Same at explicit lambdas; `multiplier` is lambda / muHat.
std::vector<ScanPoint> lambdaScan(const Grid &g, const Exponents &exp,
                                  const std::vector<double> &lambdas, const SolverConfig &cfg,
                                  const EigenPair &reference, int threads = 1);

} // namespace dphase
