#include "constrained.hpp"

#include "dphase/error.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <limits>

namespace dphase::detail
{

namespace
{

double hessianEps(const Grid &g, std::span<const double> u) { return defaultEps(g, u); }

double valueEps(std::span<const double> u)
{
  double m = 0.0;
  for (double v : u)
    m = std::max(m, std::abs(v));
  return std::max(1e-8 * m, 1e-300);
}

bool finite(std::span<const double> v)
{
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

} // namespace

double dotDofs(const Grid &g, std::span<const double> a, std::span<const double> b)
{
  double s = 0.0;
  for (int node : g.interiorNodes())
    s += a[node] * b[node];
  return s;
}

ConstrainedEval evaluate(const Grid &g, const Constrained &pb, std::span<const double> u,
                         double eps, bool withPenalty)
{
  ConstrainedEval e;
  e.parts = evaluateForms(g, u, pb.energy, pb.constraint, eps, true);
  e.F = e.parts.energy;
  e.G = e.parts.mass;
  e.gradF = e.parts.energyGrad;
  e.gradG = e.parts.massGrad;
  if (withPenalty && pb.penalty > 0.0)
  {
    for (const auto &w : pb.deflate)
    {
      const double c = dotDofs(g, w, u);
      e.F += pb.penalty * c * c;
      for (int node : g.interiorNodes())
        e.gradF[node] += 2.0 * pb.penalty * c * w[node];
    }
  }
  return e;
}

bool retract(const Grid &g, const Constrained &pb, std::vector<double> &u)
{
  if (!finite(u))
    return false;
  const auto f = evaluateForms(g, u, EnergyForm{}, pb.constraint, 0.0, false);
  if (!(f.mass > 0.0))
    return false;
  const double c = std::pow(pb.level / f.mass, 1.0 / pb.constraint.s);
  if (!std::isfinite(c))
    return false;
  for (double &v : u)
    v *= c;
  return true;
}

DescentResult constrainedDescent(const Grid &g, const Constrained &pb, std::vector<double> u0,
                                 const SolverConfig &cfg,
                                 std::vector<std::vector<double>> *trace)
{
  DescentResult res;
  res.u = std::move(u0);
  if (!retract(g, pb, res.u))
    throw IndefiniteConstraint("start field has ∫ m|u|^s <= 0");
  std::vector<double> history;
  Eigen::SimplicialLDLT<SparseMatrix> ldlt;
  int it = 0;
  for (; it < cfg.maxIters; ++it)
  {
    if (trace && cfg.traceEvery > 0 && it % cfg.traceEvery == 0)
      trace->push_back(res.u);
    const double eps = defaultEps(g, res.u);
    const auto e = evaluate(g, pb, res.u, eps);
    res.value = e.F;
    history.push_back(e.F);
    if (it >= 25)
    {
      const double old = history[history.size() - 26];
      if (old - e.F < cfg.tolStagnation * std::max(std::abs(e.F), 1e-300))
        break;
    }

    const SparseMatrix P = secantMatrix(g, res.u, pb.energy, eps, 0.0);
    ldlt.compute(P);
    if (ldlt.info() != Eigen::Success)
      throw NumericError("preconditioner factorization failed");
    const Eigen::VectorXd gf = toDofs(g, e.gradF);
    const Eigen::VectorXd gg = toDofs(g, e.gradG);
    const Eigen::VectorXd pg = ldlt.solve(gf);
    const Eigen::VectorXd pn = ldlt.solve(gg);
    const double nn = gg.dot(pn);
    const double alpha = nn > 0.0 ? gg.dot(pg) / nn : 0.0;
    const Eigen::VectorXd d = -(pg - alpha * pn);
    const double slope = gf.dot(d);
    if (!(slope < 0.0))
      break;
    const std::vector<double> dn = fromDofs(g, d);

    double s = cfg.stepRule == StepRule::Armijo ? 1.0 : 1.0 / (1.0 + it / 100.0);
    bool accepted = false;
    for (int tries = 0; tries < 40; ++tries, s *= 0.5)
    {
      std::vector<double> trial(res.u.size());
      for (std::size_t i = 0; i < trial.size(); ++i)
        trial[i] = res.u[i] + s * dn[i];
      if (!retract(g, pb, trial))
        continue;
      if (cfg.stepRule == StepRule::Armijo)
      {
        const auto f = evaluateForms(g, trial, pb.energy, pb.constraint, eps, false);
        double F = f.energy;
        for (const auto &w : pb.deflate)
        {
          const double c = dotDofs(g, w, trial);
          F += pb.penalty * c * c;
        }
        if (!(F <= e.F + 1e-4 * s * slope))
          continue;
      }
      res.u = std::move(trial);
      accepted = true;
      break;
    }
    if (!accepted)
      break;
  }
  res.iterations = it;
  res.value = evaluate(g, pb, res.u, defaultEps(g, res.u)).F;
  return res;
}

namespace
{

SparseMatrix bordered(const SparseMatrix &H, const Eigen::VectorXd &col, const Eigen::VectorXd &row)
{
  const int n = static_cast<int>(H.rows());
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(H.nonZeros() + 2 * n);
  for (int k = 0; k < H.outerSize(); ++k)
    for (SparseMatrix::InnerIterator itr(H, k); itr; ++itr)
      trip.emplace_back(itr.row(), itr.col(), itr.value());
  for (int i = 0; i < n; ++i)
  {
    trip.emplace_back(i, n, col[i]);
    trip.emplace_back(n, i, row[i]);
  }
  SparseMatrix J(n + 1, n + 1);
  J.setFromTriplets(trip.begin(), trip.end());
  J.makeCompressed();
  return J;
}

} // namespace

PolishResult polishConstrained(const Grid &g, const Constrained &pb, std::vector<double> u,
                               const ResidualFn &residual, double tol, int maxIter)
{
  PolishResult best;
  auto systemNorm = [&](const ConstrainedEval &e, double mu) {
    double s = 0.0;
    for (int node : g.interiorNodes())
    {
      const double r = e.gradF[node] - mu * e.gradG[node];
      s += r * r;
    }
    const double c = e.G - pb.level;
    return std::sqrt(s + c * c);
  };

  auto e = evaluate(g, pb, u, 0.0, false);
  double mu = dotDofs(g, e.gradG, e.gradF) / dotDofs(g, e.gradG, e.gradG);
  best.u = u;
  best.multiplier = mu;
  best.residual = residual(u, mu);
  Eigen::SparseLU<SparseMatrix> lu;
  for (int it = 0; it < maxIter && best.residual > tol; ++it)
  {
    const double merit = systemNorm(e, mu);
    const SparseMatrix HF = energyHessian(g, u, pb.energy, hessianEps(g, u));
    const SparseMatrix HG = massHessian(g, u, pb.constraint, valueEps(u));
    const Eigen::VectorXd gg = toDofs(g, e.gradG);
    const SparseMatrix J = bordered(SparseMatrix(HF - mu * HG), -gg, gg);
    Eigen::VectorXd rhs(gg.size() + 1);
    rhs.head(gg.size()) = -(toDofs(g, e.gradF) - mu * gg);
    rhs[gg.size()] = -(e.G - pb.level);
    lu.compute(J);
    if (lu.info() != Eigen::Success)
      break;
    const Eigen::VectorXd step = lu.solve(rhs);
    if (!step.allFinite())
      break;
    const std::vector<double> du = fromDofs(g, step.head(gg.size()));
    bool accepted = false;
    for (double s = 1.0; s > 1e-3; s *= 0.5)
    {
      std::vector<double> trial(u.size());
      for (std::size_t i = 0; i < u.size(); ++i)
        trial[i] = u[i] + s * du[i];
      const double muTrial = mu + s * step[gg.size()];
      const auto et = evaluate(g, pb, trial, 0.0, false);
      if (systemNorm(et, muTrial) < merit)
      {
        u = std::move(trial);
        mu = muTrial;
        e = et;
        accepted = true;
        break;
      }
    }
    if (!accepted)
      break;
    const double r = residual(u, mu);
    best.iterations = it + 1;
    if (r < best.residual)
    {
      best.u = u;
      best.multiplier = mu;
      best.residual = r;
    }
  }
  return best;
}

PolishResult polishFree(const Grid &g, const EnergyForm &energy, const MassForm &mass,
                        std::vector<double> u, const ResidualFn &residual, double tol, int maxIter,
                        std::vector<std::vector<double>> *trace, int traceEvery,
                        int iterationOffset)
{
  PolishResult best;
  auto gradNorm = [&](const FormEval &f) {
    double s = 0.0;
    for (int node : g.interiorNodes())
    {
      const double r = f.energyGrad[node] - f.massGrad[node];
      s += r * r;
    }
    return std::sqrt(s);
  };
  auto f = evaluateForms(g, u, energy, mass, 0.0, true);
  best.u = u;
  best.residual = residual(u, 0.0);
  Eigen::SparseLU<SparseMatrix> lu;
  for (int it = 0; it < maxIter && best.residual > tol; ++it)
  {
    const int global = iterationOffset + it;
    if (trace && traceEvery > 0 && global % traceEvery == 0)
      trace->push_back(u);
    const double merit = gradNorm(f);
    const SparseMatrix H = energyHessian(g, u, energy, hessianEps(g, u)) -
                           massHessian(g, u, mass, valueEps(u));
    SparseMatrix Hc = H;
    Hc.makeCompressed();
    lu.compute(Hc);
    if (lu.info() != Eigen::Success)
      break;
    Eigen::VectorXd rhs(g.interiorNodes().size());
    for (std::size_t i = 0; i < g.interiorNodes().size(); ++i)
    {
      const int node = g.interiorNodes()[i];
      rhs[i] = -(f.energyGrad[node] - f.massGrad[node]);
    }
    const Eigen::VectorXd step = lu.solve(rhs);
    if (!step.allFinite())
      break;
    const std::vector<double> du = fromDofs(g, step);
    bool accepted = false;
    for (double s = 1.0; s > 1e-3; s *= 0.5)
    {
      std::vector<double> trial(u.size());
      for (std::size_t i = 0; i < u.size(); ++i)
        trial[i] = u[i] + s * du[i];
      const auto ft = evaluateForms(g, trial, energy, mass, 0.0, true);
      if (gradNorm(ft) < merit)
      {
        u = std::move(trial);
        f = ft;
        accepted = true;
        break;
      }
    }
    if (!accepted)
      break;
    const double r = residual(u, 0.0);
    best.iterations = it + 1;
    if (r < best.residual)
    {
      best.u = u;
      best.residual = r;
    }
  }
  return best;
}

} // namespace dphase::detail
