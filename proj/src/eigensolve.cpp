#include "dphase/eigensolve.hpp"

#include "constrained.hpp"
#include "dphase/error.hpp"

#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <limits>

namespace dphase
{

using detail::Constrained;
using detail::EnergyForm;
using detail::MassForm;

void SolverConfig::validate() const
{
  if (maxIters < 1)
    throw ConfigError("solver.maxIters must be at least 1");
  if (!(tolResidual > 0.0) || !(tolStagnation > 0.0))
    throw ConfigError("solver tolerances must be positive");
  if (restarts < 1)
    throw ConfigError("solver.restarts must be at least 1");
  if (!(deflationStrength > 0.0))
    throw ConfigError("solver.deflationStrength must be positive");
  if (traceEvery < 0)
    throw ConfigError("solver.traceEvery must be nonnegative");
}

std::string toString(SolveRegime regime)
{
  switch (regime)
  {
  case SolveRegime::SinglePhase:
    return "SinglePhase";
  case SolveRegime::NehariPLessQ:
    return "NehariPLessQ";
  case SolveRegime::MinMaxQLessP:
    return "MinMaxQLessP";
  }
  return "unknown";
}

std::string toString(StepRule rule)
{
  return rule == StepRule::Armijo ? "Armijo" : "FixedDecay";
}

std::vector<double> randomBump(const Grid &g, std::mt19937_64 &rng, bool positive)
{
  const auto nodes = g.nodes();
  const auto &m1 = g.weights().m1;
  const double R = g.geometry().radius;
  double top = 0.0;
  for (int node : g.interiorNodes())
    top = std::max(top, m1[node]);
  std::vector<int> candidates;
  for (int node : g.interiorNodes())
    if (m1[node] >= 0.5 * top)
      candidates.push_back(node);
  if (candidates.empty())
    candidates.assign(g.interiorNodes().begin(), g.interiorNodes().end());

  // bump widths follow the size of the region where m1 is large
  std::array<double, 2> lo{R, R}, hi{-R, -R};
  for (int node : candidates)
    for (int d = 0; d < 2; ++d)
    {
      lo[d] = std::min(lo[d], nodes[node][d]);
      hi[d] = std::max(hi[d], nodes[node][d]);
    }
  double extent = g.geometry().mode == GeometryMode::RadialN
                      ? hi[0]
                      : 0.5 * std::max(hi[0] - lo[0], g.gradDim() == 2 ? hi[1] - lo[1] : 0.0);
  const double cell = (g.geometry().mode == GeometryMode::RadialN ? 1.0 : 2.0) * R /
                      g.geometry().resolution;
  extent = std::clamp(extent, 4.0 * cell, R);

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> pick(0, candidates.size() - 1);
  const int count = 1 + static_cast<int>(rng() % 3);
  struct Bump
  {
    std::array<double, 2> c;
    double w, amp;
  };
  std::vector<Bump> bumps;
  for (int b = 0; b < count; ++b)
  {
    Bump bump;
    bump.c = nodes[candidates[pick(rng)]];
    bump.w = std::min(0.4 * R, extent * (0.3 + 0.7 * unit(rng)));
    bump.amp = positive || b == 0 ? 0.5 + unit(rng) : 2.0 * unit(rng) - 1.0;
    bumps.push_back(bump);
  }

  const bool twoD = g.geometry().mode == GeometryMode::Tensor2D;
  std::vector<double> u(g.nodeCount(), 0.0);
  for (int node : g.interiorNodes())
  {
    const auto x = nodes[node];
    double cut = 1.0 - (x[0] / R) * (x[0] / R);
    if (twoD)
      cut *= 1.0 - (x[1] / R) * (x[1] / R);
    double v = 0.0;
    for (const auto &b : bumps)
    {
      double d2 = (x[0] - b.c[0]) * (x[0] - b.c[0]);
      if (twoD)
        d2 += (x[1] - b.c[1]) * (x[1] - b.c[1]);
      v += b.amp * std::exp(-d2 / (2.0 * b.w * b.w));
    }
    u[node] = std::max(cut, 0.0) * v;
  }
  return u;
}

double colinearity(std::span<const double> u, std::span<const double> v)
{
  if (u.size() != v.size())
    throw DimensionError("colinearity needs fields of equal size");
  double uv = 0.0, uu = 0.0, vv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i)
  {
    uv += u[i] * v[i];
    uu += u[i] * u[i];
    vv += v[i] * v[i];
  }
  if (uu == 0.0 || vv == 0.0)
    return 0.0;
  return std::abs(uv) / std::sqrt(uu * vv);
}

double pdeResidual(const GridFunction &u, double lambda, const Exponents &exp, const Grid &g,
                   const Regularization &reg)
{
  const auto f = detail::evaluateForms(g, u.values(), {1.0 / exp.p, exp.p, 1.0 / exp.q, exp.q},
                                       {lambda / exp.q, exp.q}, reg.eps, true);
  double worst = 0.0;
  for (int node : g.interiorNodes())
    worst = std::max(worst, std::abs(f.energyGrad[node] - f.massGrad[node]));
  if (worst == 0.0)
    return 0.0;
  return worst / std::max(1.0, eNorm(u, exp, g));
}

double singlePhaseResidual(const GridFunction &u, double mu, double r, const Grid &g)
{
  const auto f =
      detail::evaluateForms(g, u.values(), {1.0 / r, r, 0.0, r}, {mu / r, r}, 0.0, true);
  double worst = 0.0;
  for (int node : g.interiorNodes())
    worst = std::max(worst, std::abs(f.energyGrad[node] - f.massGrad[node]));
  if (worst == 0.0)
    return 0.0;
  return worst / std::max(1.0, singlePhaseNorm(u, r, g));
}

namespace
{

std::mt19937_64 restartRng(const SolverConfig &cfg, int restart, int mode)
{
  return std::mt19937_64(cfg.seed + 7919ull * static_cast<std::uint64_t>(restart) +
                         104729ull * static_cast<std::uint64_t>(mode));
}

void alignSign(std::vector<double> &u)
{
  double s = 0.0;
  for (double v : u)
    s += v;
  if (s < 0.0)
    for (double &v : u)
      v = -v;
}

double minPairwiseColinearity(const std::vector<std::vector<double>> &fields)
{
  double c = 1.0;
  for (std::size_t i = 0; i < fields.size(); ++i)
    for (std::size_t j = i + 1; j < fields.size(); ++j)
      c = std::min(c, colinearity(fields[i], fields[j]));
  return c;
}

// Residual of -div(a_E |grad u|^{e-2} grad u) = mu m|u|^{e-2} u for a problem
// whose energy is homogeneous of degree e, with the single-phase scaling.
detail::ResidualFn homogeneousResidual(const Grid &g, const Constrained &pb)
{
  return [&g, pb](std::span<const double> u, double mu) {
    const double e = pb.constraint.s;
    EnergyForm en = pb.energy;
    en.cA /= e;
    en.cB /= e;
    const auto f = detail::evaluateForms(g, u, en, {mu * pb.constraint.c / e, e}, 0.0, true);
    double worst = 0.0;
    for (int node : g.interiorNodes())
      worst = std::max(worst, std::abs(f.energyGrad[node] - f.massGrad[node]));
    const double scale = std::pow(f.aPart + f.bPart, 1.0 / e);
    return worst / std::max(1.0, scale);
  };
}

struct ModeResult
{
  std::vector<double> u;
  double mu = 0.0;
  double residual = 0.0;
  int iterations = 0;
};

// Principal mode (deflate empty) or a deflated mode of a homogeneous quotient problem.
std::vector<ModeResult> homogeneousRestarts(const Grid &g, const Constrained &pb,
                                            const SolverConfig &cfg, int mode,
                                            const std::vector<std::vector<double>> &previous)
{
  const auto residual = homogeneousResidual(g, pb);
  std::vector<ModeResult> out;
  for (int r = 0; r < cfg.restarts; ++r)
  {
    auto rng = restartRng(cfg, r, mode);
    auto u0 = randomBump(g, rng, mode == 0);
    detail::DescentResult d;
    try
    {
      d = detail::constrainedDescent(g, pb, std::move(u0), cfg);
    }
    catch (const IndefiniteConstraint &)
    {
      continue;
    }
    auto polished = detail::polishConstrained(g, pb, d.u, residual, 1e-2 * cfg.tolResidual, 50);
    bool collapsed = false;
    for (const auto &p : previous)
      collapsed = collapsed || colinearity(p, polished.u) > 0.99;
    if (collapsed)
      continue;
    alignSign(polished.u);
    ModeResult m;
    m.u = std::move(polished.u);
    m.mu = polished.multiplier;
    m.residual = polished.residual;
    m.iterations = d.iterations + polished.iterations;
    out.push_back(std::move(m));
  }
  return out;
}

EigenPair homogeneousMode(const Grid &g, const Constrained &pb, const SolverConfig &cfg, int mode,
                          const std::vector<std::vector<double>> &previous, const char *what)
{
  auto results = homogeneousRestarts(g, pb, cfg, mode, previous);
  if (results.empty())
  {
    if (mode == 0)
      throw IndefiniteConstraint(std::string(what) + ": no restart reached ∫ m|u|^s > 0");
    throw NoConvergence(std::string(what) + ": every deflated restart fell back to a known mode",
                        {}, std::numeric_limits<double>::infinity());
  }
  // restarts that did not converge to the required residual cannot win
  auto byValue = [&](const ModeResult &a, const ModeResult &b) {
    const bool oka = a.residual <= cfg.tolResidual;
    const bool okb = b.residual <= cfg.tolResidual;
    if (oka != okb)
      return oka;
    return a.mu < b.mu;
  };
  std::sort(results.begin(), results.end(), byValue);
  const ModeResult &best = results.front();
  if (!(best.residual <= cfg.tolResidual))
    throw NoConvergence(std::string(what) + ": residual " + std::to_string(best.residual) +
                            " above tolerance",
                        best.u, best.residual);

  EigenPair ep;
  ep.u = GridFunction(g, best.u);
  const auto f = detail::evaluateForms(g, best.u, pb.energy, pb.constraint, 0.0, false);
  ep.constraintValue = f.mass;
  ep.criticalValue = f.energy;
  ep.lambda = f.energy / f.mass;
  ep.residual = best.residual;
  ep.iterations = best.iterations;
  ep.regime = SolveRegime::SinglePhase;
  ep.heuristic = mode > 0;
  ep.upperBound = ep.lambda;
  if (mode == 0)
  {
    std::vector<std::vector<double>> converged;
    for (const auto &r : results)
      if (r.residual <= cfg.tolResidual)
        converged.push_back(r.u);
    ep.restartColinearity = minPairwiseColinearity(converged);
  }
  return ep;
}

} // namespace

std::vector<EigenPair> solveSinglePhase(double r, int k, const Grid &g, const SolverConfig &cfg)
{
  cfg.validate();
  if (!(r > 1.0) || !(r < g.geometry().dimension))
    throw DomainError("single-phase exponent must lie in (1, N)");
  if (k < 1)
    throw DomainError("number of modes must be at least 1");
  Constrained pb;
  pb.energy = {1.0, r, 0.0, r};
  pb.constraint = {1.0, r};
  pb.level = 1.0;

  std::vector<EigenPair> modes;
  std::vector<std::vector<double>> previous;
  for (int j = 0; j < k; ++j)
  {
    if (j > 0)
    {
      double top = 0.0;
      for (const auto &m : modes)
        top = std::max(top, m.lambda);
      pb.penalty = cfg.deflationStrength * top;
      pb.deflate.clear();
      for (const auto &p : previous)
      {
        // the functional <m|u_j|^{r-2} u_j, .>
        auto f = detail::evaluateForms(g, p, EnergyForm{}, {1.0 / r, r}, 0.0, true);
        pb.deflate.push_back(std::move(f.massGrad));
      }
    }
    modes.push_back(homogeneousMode(g, pb, cfg, j, previous, "solveSinglePhase"));
    modes.back().residual = singlePhaseResidual(modes.back().u, modes.back().lambda, r, g);
    previous.emplace_back(modes.back().u.values().begin(), modes.back().u.values().end());
  }
  std::stable_sort(modes.begin(), modes.end(),
                   [](const EigenPair &a, const EigenPair &b) { return a.lambda < b.lambda; });
  return modes;
}

EigenPair referenceEigenvalue(const Grid &g, const Exponents &exp, const SolverConfig &cfg)
{
  cfg.validate();
  Constrained pb;
  pb.energy = {0.0, exp.q, 1.0, exp.q};
  pb.constraint = {1.0, exp.q};
  pb.level = 1.0;
  return homogeneousMode(g, pb, cfg, 0, {}, "referenceEigenvalue");
}

namespace
{

struct NehariRun
{
  std::vector<double> u;
  double J = 0.0;
  int iterations = 0;
  std::vector<std::vector<double>> trace;
};

std::optional<std::vector<double>> projectNehari(const Grid &g, std::vector<double> u,
                                                 double lambda, const Exponents &exp)
{
  for (double &v : u)
    v = std::abs(v);
  const auto f = detail::evaluateForms(g, u, {1.0, exp.p, 1.0, exp.q}, {1.0, exp.q}, 0.0, false);
  Components c;
  c.aGradP = f.aPart;
  c.gradQ = f.bPart;
  c.mTerm = f.mPart;
  const auto t = nehariScale(c, lambda, exp);
  if (!t || !std::isfinite(*t))
    return std::nullopt;
  for (double &v : u)
    v *= *t;
  return u;
}

NehariRun nehariDescent(const Grid &g, std::vector<double> u, double lambda, const Exponents &exp,
                        const SolverConfig &cfg)
{
  const EnergyForm energy{1.0 / exp.p, exp.p, 1.0 / exp.q, exp.q};
  const MassForm mass{lambda / exp.q, exp.q};
  NehariRun run;
  run.u = std::move(u);
  std::vector<double> history;
  Eigen::SimplicialLDLT<detail::SparseMatrix> ldlt;
  int it = 0;
  for (; it < cfg.maxIters; ++it)
  {
    if (cfg.traceEvery > 0 && it % cfg.traceEvery == 0)
      run.trace.push_back(run.u);
    const double eps = detail::defaultEps(g, run.u);
    const auto f = detail::evaluateForms(g, run.u, energy, mass, eps, true);
    run.J = f.energy - f.mass;
    history.push_back(run.J);
    if (it >= 25)
    {
      const double old = history[history.size() - 26];
      if (old - run.J < cfg.tolStagnation * std::max(std::abs(run.J), 1e-300))
        break;
    }
    std::vector<double> grad(f.energyGrad.size());
    for (std::size_t i = 0; i < grad.size(); ++i)
      grad[i] = f.energyGrad[i] - f.massGrad[i];
    ldlt.compute(detail::secantMatrix(g, run.u, energy, eps, 0.0));
    if (ldlt.info() != Eigen::Success)
      throw NumericError("preconditioner factorization failed");
    const Eigen::VectorXd gd = detail::toDofs(g, grad);
    const Eigen::VectorXd d = -ldlt.solve(gd);
    const double slope = gd.dot(d);
    if (!(slope < 0.0))
      break;
    const auto dn = detail::fromDofs(g, d);
    double s = cfg.stepRule == StepRule::Armijo ? 1.0 : 1.0 / (1.0 + it / 100.0);
    bool accepted = false;
    for (int tries = 0; tries < 40; ++tries, s *= 0.5)
    {
      std::vector<double> trial(run.u.size());
      for (std::size_t i = 0; i < trial.size(); ++i)
        trial[i] = run.u[i] + s * dn[i];
      auto projected = projectNehari(g, std::move(trial), lambda, exp);
      if (!projected)
        continue;
      if (cfg.stepRule == StepRule::Armijo)
      {
        const auto ft = detail::evaluateForms(g, *projected, energy, mass, eps, false);
        if (!(ft.energy - ft.mass <= run.J + 1e-4 * s * slope))
          continue;
      }
      run.u = std::move(*projected);
      accepted = true;
      break;
    }
    if (!accepted)
      break;
  }
  run.iterations = it;
  const auto f = detail::evaluateForms(g, run.u, energy, mass, 0.0, false);
  run.J = f.energy - f.mass;
  return run;
}

} // namespace

NehariResult solveNehari(double lambda, const Grid &g, const Exponents &exp,
                         const SolverConfig &cfg)
{
  if (exp.regime() != Regime::PLessQ)
    throw RegimeError("Nehari minimization needs p < q");
  return solveNehari(lambda, g, exp, cfg, referenceEigenvalue(g, exp, cfg));
}

NehariResult solveNehari(double lambda, const Grid &g, const Exponents &exp,
                         const SolverConfig &cfg, const EigenPair &reference)
{
  if (exp.regime() != Regime::PLessQ)
    throw RegimeError("Nehari minimization needs p < q");
  cfg.validate();
  const double muHat = reference.lambda;
  if (!(lambda > 0.0))
    return Degenerate{"lambda <= 0 forces u = 0", muHat, 0};

  std::vector<std::vector<double>> starts;
  starts.emplace_back(reference.u.values().begin(), reference.u.values().end());
  for (int r = 0; r < cfg.restarts; ++r)
  {
    auto rng = restartRng(cfg, r, 0);
    starts.push_back(randomBump(g, rng, true));
  }
  std::vector<std::vector<double>> admissible;
  for (auto &s : starts)
    if (auto p = projectNehari(g, s, lambda, exp))
      admissible.push_back(std::move(*p));
  const int count = static_cast<int>(admissible.size());
  // lambda <= muHat gives lambda ∫ m|u|^q <= ∫ |grad u|^q for every field
  if (lambda <= muHat * (1.0 + 1e-9))
    return Degenerate{"lambda does not exceed the discrete principal q-eigenvalue", muHat, count};
  if (count == 0)
    return Degenerate{"no start admits a Nehari projection", muHat, 0};

  NehariRun best;
  best.J = std::numeric_limits<double>::infinity();
  for (auto &s : admissible)
  {
    auto run = nehariDescent(g, std::move(s), lambda, exp, cfg);
    if (run.J < best.J)
      best = std::move(run);
  }

  const EnergyForm energy{1.0 / exp.p, exp.p, 1.0 / exp.q, exp.q};
  const MassForm mass{lambda / exp.q, exp.q};
  const detail::ResidualFn residual = [&](std::span<const double> u, double) {
    return pdeResidual(GridFunction(g, std::vector<double>(u.begin(), u.end())), lambda, exp, g,
                       Regularization{0.0});
  };
  auto polished = detail::polishFree(g, energy, mass, best.u, residual, 1e-2 * cfg.tolResidual,
                                     50, &best.trace, cfg.traceEvery, best.iterations);
  auto u = polished.u;
  double size = 0.0;
  for (double v : u)
    size = std::max(size, std::abs(v));
  if (size < 1e-6)
    return Degenerate{"iterates collapsed to zero", muHat, count};
  if (!(polished.residual <= cfg.tolResidual))
    throw NoConvergence("solveNehari: residual " + std::to_string(polished.residual) +
                            " above tolerance",
                        u, polished.residual);

  EigenPair ep;
  ep.u = GridFunction(g, u);
  ep.lambda = lambda;
  ep.residual = polished.residual;
  ep.iterations = best.iterations + polished.iterations;
  ep.regime = SolveRegime::NehariPLessQ;
  const Regularization exact{exp.p >= 2.0 && exp.q >= 2.0 ? 0.0 : 1e-300};
  ep.constraintValue = evalI(ep.u, lambda, exp, g, exact).value;
  ep.criticalValue = evalJ(ep.u, lambda, exp, g, exact).value;
  ep.upperBound = ep.criticalValue;
  ep.trace = std::move(best.trace);
  return ep;
}

} // namespace dphase
