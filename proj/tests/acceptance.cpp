// Acceptance suite. One pass/FAIL line per criterion; `--criterion N` runs one.

#include "dphase/eigensolve.hpp"
#include "dphase/error.hpp"
#include "dphase/functionals.hpp"
#include "dphase/verify.hpp"

#include "oracles.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

using namespace dphase;

namespace
{

struct Verdict
{
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string &what)
  {
    if (!ok)
      pass = false;
    detail << (detail.tellp() > 0 ? "; " : "") << what << (ok ? "" : " [FAIL]");
  }
};

std::string num(double v)
{
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

class Stopwatch
{
public:
  double seconds() const
  {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

WeightSpec bumpWeights()
{
  WeightSpec w;
  w.a = WeightDescriptor::compactBump(1.0, 4.0);
  w.m1 = WeightDescriptor::gaussian(1.0, 1.0);
  w.m2 = WeightDescriptor::constant(0.1);
  return w;
}

Grid line(double R, int n, int N, const WeightSpec &w)
{
  return buildGrid({GeometryMode::Interval1D, N, R, n}, w);
}

const std::vector<std::pair<double, double>> kPairs{{1.5, 2.5}, {2.0, 3.0}, {3.0, 2.0}, {2.5, 1.5}};

bool allPositive(const GridFunction &u, const Grid &g)
{
  double peak = 0.0;
  for (double v : u.values())
    peak = std::abs(v) > std::abs(peak) ? v : peak;
  for (int node : g.interiorNodes())
    if (!(u.values()[node] * peak > 0.0))
      return false;
  return true;
}

bool changesSign(const GridFunction &u)
{
  double lo = 0.0, hi = 0.0;
  for (double v : u.values())
  {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  const double scale = std::max(hi, -lo);
  return std::min(hi, -lo) > 1e-3 * scale;
}

Verdict normSuiteCriterion()
{
  Verdict v;
  Stopwatch clock;
  WeightSpec w;
  w.a = WeightDescriptor::gaussian(1.0, 0.5);
  const Grid g = line(1.0, 128, 4, w);
  int fields = 0, sandwich = 0, other = 0;
  double unit = 0.0, homogeneity = 0.0;
  for (const auto &[p, q] : kPairs)
  {
    const auto s = normSuite(g, Exponents(p, q, 2.0, 4), 200, 11);
    fields += s.fields;
    sandwich += s.sandwichViolations;
    other += s.signViolations + s.embeddingViolations + (s.coVanishing ? 0 : 1);
    unit = std::max(unit, s.maxUnitModularError);
    homogeneity = std::max(homogeneity, s.maxHomogeneityError);
  }
  v.require(fields == 800, std::to_string(fields) + " fields over 4 exponent pairs");
  v.require(unit <= 1e-10, "unit modular " + num(unit));
  v.require(sandwich == 0, "sandwich violations " + std::to_string(sandwich));
  v.require(homogeneity <= 1e-10, "homogeneity " + num(homogeneity));
  v.require(other == 0, "sign/co-vanishing/embedding failures " + std::to_string(other));
  v.require(clock.seconds() < 10.0, "runtime " + num(clock.seconds()) + " s");
  return v;
}

Verdict growthCriterion()
{
  Verdict v;
  WeightSpec w;
  w.a = WeightDescriptor::compactBump(2.5, 0.6);
  const std::vector<Grid> grids{line(1.0, 256, 4, w),
                                buildGrid({GeometryMode::RadialN, 3, 1.0, 200}, w),
                                buildGrid({GeometryMode::Tensor2D, 2, 1.0, 32}, w)};
  long checks = 0, expected = 0, violations = 0;
  for (const auto &g : grids)
    for (const auto &[p, q] : kPairs)
    {
      const auto c = growthCheck(g, Exponents(p, q, 2.0, 4), 50);
      checks += c.checks;
      violations += c.violations;
      expected += 50L * static_cast<long>(g.nodeCount());
    }
  v.require(checks == expected, std::to_string(checks) + " checks on 3 geometries x 4 pairs");
  v.require(violations == 0, std::to_string(violations) + " violations");
  return v;
}

Verdict gradientCriterion()
{
  Verdict v;
  Stopwatch clock;
  const Grid g = line(2.0, 128, 4, bumpWeights());
  for (const auto &exp : {Exponents(1.5, 2.5, 1.5, 4), Exponents(3.0, 2.0, 2.5, 4)})
  {
    double worst = 0.0;
    for (auto kind : {FunctionalKind::J, FunctionalKind::Phi, FunctionalKind::Psi, FunctionalKind::I})
      worst = std::max(worst, gradientCheck(kind, g, exp, 1.0, 1e-6, 20, 5));
    v.require(worst < 1e-5, "p=" + num(exp.p) + " q=" + num(exp.q) + " worst " + num(worst));
  }
  v.require(clock.seconds() < 30.0, "runtime " + num(clock.seconds()) + " s");
  return v;
}

Verdict piconeCriterion()
{
  Verdict v;
  WeightSpec w;
  w.a = WeightDescriptor::gaussian(1.0, 0.5);
  const Grid g = line(1.0, 128, 4, w);
  for (double r : {1.5, 2.0, 3.0})
  {
    const auto s = piconeAuditSingle(g, r, 100, 3.0, 21);
    v.require(s.minScaled >= -1e-10, "single r=" + num(r) + " min " + num(s.minScaled));
    v.require(s.proportionalMax < 1e-10, "single r=" + num(r) + " proportional " + num(s.proportionalMax));
  }
  const Exponents exp(3.0, 2.0, 2.0, 4);
  const auto d = piconeAuditDouble(g, exp, 100, 0.5, 22);
  v.require(d.minScaled >= -1e-10, "double min " + num(d.minScaled));
  const auto same = piconeAuditDouble(g, exp, 100, 1.0, 22);
  v.require(same.proportionalMax < 1e-10, "double v=u " + num(same.proportionalMax));
  v.require(d.proportionalMax < 1e-10, "double v=u/2 " + num(d.proportionalMax));
  bool rejected = false;
  try
  {
    std::mt19937_64 rng(23);
    const GridFunction u(g, randomPositiveField(g, rng));
    piconeDouble(u, u, Exponents(1.5, 2.5, 2.0, 4), g);
  }
  catch (const RegimeError &)
  {
    rejected = true;
  }
  v.require(rejected, "p<q rejected with RegimeError");
  return v;
}

Verdict oracleCriterion()
{
  Verdict v;
  Stopwatch clock;
  const Grid g = line(1.0, 256, 4, WeightSpec{});
  const auto &cw = g.cellWeights();
  std::vector<double> m(cw.m1.size());
  for (std::size_t c = 0; c < m.size(); ++c)
    m[c] = cw.m1[c] - cw.m2[c];
  const auto dense = oracle::generalizedEigenvalues(oracle::intervalMatrices(1.0, 256, cw.a, m), 2);
  const auto pairs = solveSinglePhase(2.0, 2, g, SolverConfig{});
  const double rel = std::abs(pairs[0].lambda - dense[0]) / dense[0];
  v.require(rel <= 1e-6, "mu1 " + num(pairs[0].lambda) + " vs dense " + num(dense[0]) + ", rel " + num(rel));
  v.require(pairs.size() == 2 && changesSign(pairs[1].u), "second mode changes sign");
  v.require(clock.seconds() < 60.0, "runtime " + num(clock.seconds()) + " s");
  return v;
}

Verdict simplicityCriterion()
{
  Verdict v;
  SolverConfig cfg;
  cfg.restarts = 8;
  const auto single = solveSinglePhase(2.0, 1, line(1.0, 256, 4, WeightSpec{}), cfg);
  v.require(single[0].restartColinearity > 1.0 - 1e-6,
            "single-phase colinearity 1-" + num(1.0 - single[0].restartColinearity));
  const auto dbl = solveMinMax(1, line(8.0, 256, 4, bumpWeights()), Exponents(3.0, 2.0, 2.0, 4), cfg);
  v.require(dbl[0].restartColinearity > 1.0 - 1e-6,
            "p=3 q=2 colinearity 1-" + num(1.0 - dbl[0].restartColinearity));
  return v;
}

struct NonexistenceRun
{
  Grid grid;
  Exponents exp{1.5, 2.5, 2.0, 3};
  std::vector<ScanPoint> points;
  double muHat = 0.0;
};

NonexistenceRun nonexistenceRun()
{
  NonexistenceRun run{line(8.0, 512, 3, bumpWeights())};
  SolverConfig cfg;
  cfg.traceEvery = 10;
  const auto reference = referenceEigenvalue(run.grid, run.exp, cfg);
  run.muHat = reference.lambda;
  run.points = nonexistenceScan(run.grid, run.exp, {0.0, 0.25, 0.5, 0.75, 1.0, 1.1}, cfg, reference);
  return run;
}

Verdict nonexistenceCriterion()
{
  Verdict v;
  Stopwatch clock;
  const auto run = nonexistenceRun();
  v.require(run.muHat > 0.0, "muHat " + num(run.muHat));
  for (const auto &pt : run.points)
  {
    if (pt.multiplier <= 1.0)
    {
      v.require(pt.degenerate, "x" + num(pt.multiplier) + (pt.degenerate ? " Degenerate" : " not Degenerate"));
      continue;
    }
    if (!pt.pair)
    {
      v.require(false, "x" + num(pt.multiplier) + " no solution: " + pt.note);
      continue;
    }
    const auto &e = *pt.pair;
    const double J = evalJ(e.u, pt.lambda, run.exp, run.grid, Regularization{1e-6}).value;
    v.require(e.residual < 1e-6, "x" + num(pt.multiplier) + " residual " + num(e.residual));
    v.require(J > 0.0, "J " + num(J));
    v.require(allPositive(e.u, run.grid), "constant sign");
  }
  v.require(clock.seconds() < 300.0, "runtime " + num(clock.seconds()) + " s");
  return v;
}

Verdict minMaxCriterion()
{
  Verdict v;
  Stopwatch clock;
  const Grid g = line(8.0, 256, 4, bumpWeights());
  const auto pairs = solveMinMax(3, g, Exponents(3.0, 2.0, 2.0, 4), SolverConfig{});
  if (pairs.size() != 3)
  {
    v.require(false, std::to_string(pairs.size()) + " modes returned");
    return v;
  }
  v.require(pairs[0].lambda < pairs[1].lambda && pairs[1].lambda <= pairs[2].lambda,
            "lambda " + num(pairs[0].lambda) + " < " + num(pairs[1].lambda) + " <= " + num(pairs[2].lambda));
  for (std::size_t k = 0; k < 3; ++k)
  {
    const auto &e = pairs[k];
    const std::string tag = "mode " + std::to_string(k + 1) + " ";
    v.require(e.lambda > e.criticalValue, tag + "lambda - Phi " + num(e.lambda - e.criticalValue));
    v.require(e.residual < 1e-5, tag + "residual " + num(e.residual));
    v.require(e.lambda > 0.0, tag + "positive");
  }
  v.require(clock.seconds() < 600.0, "runtime " + num(clock.seconds()) + " s");
  return v;
}

Verdict scalingCriterion()
{
  Verdict v;
  const Grid g = line(8.0, 512, 4, bumpWeights());
  for (const auto &exp : {Exponents(1.5, 2.5, 2.0, 4), Exponents(3.0, 2.0, 2.0, 4)})
  {
    const auto reference = referenceEigenvalue(g, exp, SolverConfig{});
    const auto rows = scalingLimit(g, exp, reference);
    double prev = std::numeric_limits<double>::infinity();
    bool monotone = true;
    for (const auto &r : rows)
    {
      const double gap = std::abs(r.quotient / reference.lambda - 1.0);
      monotone = monotone && gap < prev;
      prev = gap;
    }
    const std::string tag = "p=" + num(exp.p) + " q=" + num(exp.q) + " ";
    v.require(prev <= 0.01, tag + "gap " + num(prev) + " at t=" + num(rows.back().t));
    v.require(monotone, tag + "monotone");
  }
  return v;
}

Verdict identityCriterion()
{
  Verdict v;
  const auto run = nonexistenceRun();
  const auto &exp = run.exp;
  for (const auto &pt : run.points)
  {
    if (!pt.pair)
      continue;
    double worst = 0.0;
    std::size_t count = 0;
    auto check = [&](const GridFunction &u) {
      const Regularization reg{1e-6};
      const auto J = evalJ(u, pt.lambda, exp, run.grid, reg);
      const auto I = evalI(u, pt.lambda, exp, run.grid, reg);
      const auto &c = J.components;
      const double lhs = J.value - I.value / exp.q;
      const double rhs = (1.0 / exp.p - 1.0 / exp.q) * c.aGradP;
      const double scale = std::max({c.aGradP, c.gradQ, std::abs(pt.lambda * c.mTerm), 1e-300});
      worst = std::max(worst, std::abs(lhs - rhs) / scale);
      ++count;
    };
    for (const auto &iterate : pt.pair->trace)
      check(GridFunction(run.grid, iterate));
    check(pt.pair->u);
    v.require(pt.pair->trace.size() > 0, std::to_string(pt.pair->trace.size()) + " sampled iterates");
    v.require(worst <= 1e-12, "worst relative error " + num(worst) + " over " + std::to_string(count));
  }
  if (v.detail.tellp() == 0)
    v.require(false, "no accepted run");
  return v;
}

} // namespace

int main(int argc, char **argv)
{
  CLI::App app{"Acceptance criteria"};
  int only = 0;
  app.add_option("--criterion", only, "Run a single criterion (1-10)")->check(CLI::Range(1, 10));
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
      {"norm-modular suite", normSuiteCriterion},
      {"unbalanced growth", growthCriterion},
      {"gradient checks", gradientCriterion},
      {"Picone suites", piconeCriterion},
      {"single-phase oracle match", oracleCriterion},
      {"simplicity", simplicityCriterion},
      {"nonexistence threshold", nonexistenceCriterion},
      {"min-max sequence", minMaxCriterion},
      {"scaling limit", scalingCriterion},
      {"Nehari identity on iterates", identityCriterion}};

  bool all = true;
  for (std::size_t i = 0; i < criteria.size(); ++i)
  {
    if (only != 0 && static_cast<int>(i) + 1 != only)
      continue;
    const auto &[name, body] = criteria[i];
    Verdict v;
    try
    {
      v = body();
    }
    catch (const std::exception &e)
    {
      v.require(false, std::string("threw: ") + e.what());
    }
    all = all && v.pass;
    std::cout << "criterion " << i + 1 << " " << (v.pass ? "pass" : "FAIL") << "  " << name << ": "
              << v.detail.str() << std::endl;
  }
  return all ? 0 : 1;
}
