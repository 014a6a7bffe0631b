// Critical points of Phi on S = {(1/q)∫ m|u|^q = 1} for q < p.
//
// Mode 1 minimizes Phi on S. Mode k >= 2 runs a local min-max search: with
// L = span(u_1..u_{k-1}) fixed, the peak of v is the maximizer of Phi over
// S ∩ span(L, v); v moves along the constrained descent direction at its peak
// until the peak value stops decreasing. Every peak value is the sup of Phi
// over a symmetric set of genus k, hence an upper bound for the min-max value.
// The final peak is refined by Newton into a critical point.

#include "dphase/eigensolve.hpp"

#include "constrained.hpp"
#include "dphase/error.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>

namespace dphase
{

using detail::Constrained;

namespace
{

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Peak
{
  double value = kInf; // +inf when the span meets {∫ m|u|^q <= 0}
  std::vector<double> c;
  std::vector<double> w;
  double scale = 0.0; // w = scale * B c
};

// Phi(w(c)) for w(c) = y / G(y)^{1/s}, y = sum_j c_j B_j, with the cell
// gradients and centroid values of the basis precomputed. Phi(w) follows from
// the homogeneous parts of y, so each evaluation is one pass over the cells.
class SpanForms
{
public:
  SpanForms(const Grid &g, const Constrained &pb, const std::vector<std::vector<double>> &B)
    : g_(g), pb_(pb), B_(B), k_(B.size()), dim_(g.gradDim())
  {
    const std::size_t cells = g.cellCount();
    grad_.resize(cells * k_ * dim_);
    val_.resize(cells * k_);
    for (std::size_t j = 0; j < k_; ++j)
    {
      const auto gj = g.gradient(B[j]);
      const auto vj = g.cellAverage(B[j]);
      for (std::size_t c = 0; c < cells; ++c)
      {
        for (int d = 0; d < dim_; ++d)
          grad_[(c * k_ + j) * dim_ + d] = gj[c * dim_ + d];
        val_[c * k_ + j] = vj[c];
      }
    }
  }

  std::size_t size() const { return k_; }

  double value(const std::vector<double> &c, std::vector<double> *grad,
               double *scale = nullptr) const
  {
    const auto &e = pb_.energy;
    const auto &m = pb_.constraint;
    const auto cells = g_.cells();
    const auto &cw = g_.cellWeights();
    double A = 0.0, Bq = 0.0, M = 0.0;
    std::vector<double> dA, dB, dM;
    if (grad)
    {
      dA.assign(k_, 0.0);
      dB.assign(k_, 0.0);
      dM.assign(k_, 0.0);
    }
    for (std::size_t cell = 0; cell < cells.size(); ++cell)
    {
      std::array<double, 2> z{0.0, 0.0};
      double y = 0.0;
      for (std::size_t j = 0; j < k_; ++j)
      {
        for (int d = 0; d < dim_; ++d)
          z[d] += c[j] * grad_[(cell * k_ + j) * dim_ + d];
        y += c[j] * val_[cell * k_ + j];
      }
      const double zz = z[0] * z[0] + z[1] * z[1];
      const double gn = std::sqrt(zz);
      const double w = cells[cell].weight;
      const double a = cw.a[cell];
      const double mc = cw.m1[cell] - cw.m2[cell];
      A += w * a * powAbs(gn, e.pA);
      Bq += w * powAbs(gn, e.pB);
      M += w * mc * powAbs(y, m.s);
      if (!grad)
        continue;
      const double ka = w * a * e.pA * detail::gradientWeight(zz, e.pA, 0.0);
      const double kb = w * e.pB * detail::gradientWeight(zz, e.pB, 0.0);
      const double km = y == 0.0 ? 0.0 : w * mc * m.s * std::copysign(powAbs(y, m.s - 1.0), y);
      for (std::size_t j = 0; j < k_; ++j)
      {
        double zd = 0.0;
        for (int d = 0; d < dim_; ++d)
          zd += z[d] * grad_[(cell * k_ + j) * dim_ + d];
        dA[j] += ka * zd;
        dB[j] += kb * zd;
        dM[j] += km * val_[cell * k_ + j];
      }
    }
    const double G = m.c * M;
    if (!(G > 0.0))
      return kInf;
    const double s = std::pow(G, -1.0 / m.s);
    if (scale)
      *scale = s;
    const double sa = std::pow(s, e.pA);
    const double sb = std::pow(s, e.pB);
    if (grad)
    {
      grad->assign(k_, 0.0);
      for (std::size_t j = 0; j < k_; ++j)
      {
        const double dG = m.c * dM[j] / G;
        (*grad)[j] = e.cA * sa * (dA[j] - e.pA / m.s * A * dG) +
                     e.cB * sb * (dB[j] - e.pB / m.s * Bq * dG);
      }
    }
    return e.cA * sa * A + e.cB * sb * Bq;
  }

  std::vector<double> field(const std::vector<double> &c, double scale) const
  {
    std::vector<double> w(g_.nodeCount(), 0.0);
    for (std::size_t j = 0; j < k_; ++j)
      for (std::size_t i = 0; i < w.size(); ++i)
        w[i] += scale * c[j] * B_[j][i];
    return w;
  }

private:
  const Grid &g_;
  const Constrained &pb_;
  const std::vector<std::vector<double>> &B_;
  std::size_t k_;
  int dim_;
  std::vector<double> grad_;
  std::vector<double> val_;
};

class PeakFinder
{
public:
  PeakFinder(const Grid &g, const Constrained &pb) : g_(g), pb_(pb) {}

  Peak find(const std::vector<std::vector<double>> &B, const std::vector<double> &warm,
            bool sample, std::mt19937_64 &rng) const
  {
    const SpanForms span(g_, pb_, B);
    const std::size_t k = B.size();
    std::vector<std::vector<double>> candidates;
    if (!warm.empty())
      candidates.push_back(warm);
    if (sample || warm.empty())
    {
      std::normal_distribution<double> normal(0.0, 1.0);
      const std::size_t count = 32 * k * k;
      for (std::size_t s = 0; s < count; ++s)
      {
        std::vector<double> c(k);
        for (double &x : c)
          x = normal(rng);
        candidates.push_back(normalize(c));
      }
      for (std::size_t j = 0; j < k; ++j)
      {
        std::vector<double> e(k, 0.0);
        e[j] = 1.0;
        candidates.push_back(e);
      }
    }
    std::vector<std::pair<double, std::size_t>> scored;
    for (std::size_t i = 0; i < candidates.size(); ++i)
    {
      const double v = span.value(candidates[i], nullptr);
      if (v == kInf)
        return Peak{};
      scored.emplace_back(v, i);
    }
    std::sort(scored.begin(), scored.end(), std::greater<>());
    Peak best;
    best.value = -kInf;
    const std::size_t climbs = std::min<std::size_t>(3, scored.size());
    for (std::size_t i = 0; i < climbs; ++i)
    {
      auto c = candidates[scored[i].second];
      const double v = ascend(span, c);
      if (v == kInf)
        return Peak{};
      if (v > best.value)
      {
        best.value = v;
        best.c = c;
      }
    }
    // the v-coefficient of the peak is taken nonnegative (Phi and G are even)
    if (best.c.back() < 0.0)
      for (double &x : best.c)
        x = -x;
    best.value = span.value(best.c, nullptr, &best.scale);
    best.w = span.field(best.c, best.scale);
    return best;
  }

private:
  static std::vector<double> normalize(std::vector<double> c)
  {
    double n = 0.0;
    for (double x : c)
      n += x * x;
    n = std::sqrt(n);
    for (double &x : c)
      x /= n;
    return c;
  }

  static double ascend(const SpanForms &span, std::vector<double> &c)
  {
    std::vector<double> grad;
    double v = span.value(c, &grad);
    double eta = 0.1;
    for (int it = 0; it < 200 && v != kInf; ++it)
    {
      // tangent part of the gradient on the unit sphere of coefficients
      double cg = 0.0;
      for (std::size_t j = 0; j < c.size(); ++j)
        cg += c[j] * grad[j];
      std::vector<double> t(c.size());
      double tn = 0.0;
      for (std::size_t j = 0; j < c.size(); ++j)
      {
        t[j] = grad[j] - cg * c[j];
        tn += t[j] * t[j];
      }
      tn = std::sqrt(tn);
      if (tn <= 1e-8 * std::abs(v))
        break;
      bool moved = false;
      for (int tries = 0; tries < 30; ++tries, eta *= 0.5)
      {
        std::vector<double> trial(c.size());
        for (std::size_t j = 0; j < c.size(); ++j)
          trial[j] = c[j] + eta * t[j] / tn;
        trial = normalize(trial);
        std::vector<double> tg;
        const double tv = span.value(trial, &tg);
        if (tv == kInf)
          return kInf;
        if (tv > v)
        {
          c = std::move(trial);
          grad = std::move(tg);
          v = tv;
          moved = true;
          eta = std::min(1.0, 2.0 * eta);
          break;
        }
      }
      if (!moved)
        break;
    }
    return v;
  }

  const Grid &g_;
  const Constrained &pb_;
};

std::mt19937_64 modeRng(const SolverConfig &cfg, int restart, int mode)
{
  return std::mt19937_64(cfg.seed + 7919ull * static_cast<std::uint64_t>(restart) +
                         104729ull * static_cast<std::uint64_t>(mode));
}

// Removes from v its components along `basis` measured by `functionals`
// (<w_i, v> = 0 afterwards, span(basis, v) unchanged) and normalizes it.
bool orthonormalize(std::vector<double> &v, const std::vector<std::vector<double>> &basis,
                    const std::vector<std::vector<double>> &functionals)
{
  const std::size_t k = basis.size();
  if (k > 0)
  {
    Eigen::MatrixXd A(k, k);
    Eigen::VectorXd b(k);
    for (std::size_t i = 0; i < k; ++i)
    {
      for (std::size_t j = 0; j < k; ++j)
        A(i, j) = std::inner_product(functionals[i].begin(), functionals[i].end(),
                                     basis[j].begin(), 0.0);
      b[i] = std::inner_product(functionals[i].begin(), functionals[i].end(), v.begin(), 0.0);
    }
    const Eigen::VectorXd c = A.fullPivLu().solve(b);
    for (std::size_t j = 0; j < k; ++j)
      for (std::size_t i = 0; i < v.size(); ++i)
        v[i] -= c[j] * basis[j][i];
  }
  double n = 0.0;
  for (double x : v)
    n += x * x;
  n = std::sqrt(n);
  if (!(n > 0.0) || !std::isfinite(n))
    return false;
  for (double &x : v)
    x /= n;
  return true;
}

struct Candidate
{
  std::vector<double> u;
  double multiplier = 0.0;
  double residual = kInf;
  double phi = kInf;
  double bestSup = kInf;
  int iterations = 0;
};

struct MinMaxContext
{
  const Grid &g;
  const Exponents &exp;
  const SolverConfig &cfg;
  Constrained pb;
  detail::ResidualFn residual;
};

Candidate polishCandidate(const MinMaxContext &ctx, std::vector<double> u, int iterations)
{
  auto polished = detail::polishConstrained(ctx.g, ctx.pb, std::move(u), ctx.residual,
                                            1e-2 * ctx.cfg.tolResidual, 50);
  Candidate c;
  c.u = std::move(polished.u);
  c.multiplier = polished.multiplier;
  c.residual = polished.residual;
  c.iterations = iterations + polished.iterations;
  c.phi = detail::evaluateForms(ctx.g, c.u, ctx.pb.energy, ctx.pb.constraint, 0.0, false).energy;
  return c;
}

// Local min-max search for mode k >= 2 from one random direction.
Candidate localMinMax(const MinMaxContext &ctx, const std::vector<std::vector<double>> &previous,
                      int restart, int mode)
{
  const Grid &g = ctx.g;
  auto rng = modeRng(ctx.cfg, restart, mode);
  Candidate out;
  PeakFinder finder(g, ctx.pb);

  // constraint gradients of the known modes
  std::vector<std::vector<double>> functionals;
  for (const auto &p : previous)
    functionals.push_back(
        detail::evaluateForms(g, p, detail::EnergyForm{}, ctx.pb.constraint, 0.0, true).massGrad);
  auto basisOf = [&](const std::vector<double> &dir) {
    auto B = previous;
    B.push_back(dir);
    return B;
  };

  // start inside {m > 0}; redraw until the span keeps ∫ m|u|^q > 0
  std::vector<double> v;
  Peak peak;
  const auto &wts = g.weights();
  for (int draw = 0; draw < 20 && peak.value == kInf; ++draw)
  {
    // smooth draws first; rough draws keep content outside the known span
    if (draw % 2 == 0)
      v = randomBump(g, rng, false);
    else
    {
      std::uniform_real_distribution<double> unit(-1.0, 1.0);
      v.assign(g.nodeCount(), 0.0);
      for (int node : g.interiorNodes())
        v[node] = unit(rng);
    }
    for (std::size_t i = 0; i < v.size(); ++i)
      v[i] *= std::max(wts.m(i), 0.0);
    if (!orthonormalize(v, previous, functionals))
      continue;
    peak = finder.find(basisOf(v), {}, true, rng);
  }
  if (peak.value == kInf)
    return out;
  out.bestSup = peak.value;

  Eigen::SimplicialLDLT<detail::SparseMatrix> ldlt;
  const int maxIters = std::min(ctx.cfg.maxIters, 500);
  std::vector<double> history;
  int it = 0;
  for (; it < maxIters; ++it)
  {
    const auto &w = peak.w;
    const double eps = detail::defaultEps(g, w);
    const auto e = detail::evaluate(g, ctx.pb, w, eps, false);
    history.push_back(peak.value);
    if (it >= 25 && history[history.size() - 26] - peak.value <
                        ctx.cfg.tolStagnation * std::max(std::abs(peak.value), 1e-300))
      break;
    const double mu = detail::dotDofs(g, e.gradG, e.gradF) / detail::dotDofs(g, e.gradG, e.gradG);
    if (ctx.residual(w, mu) < 1e-4)
      break;

    ldlt.compute(detail::secantMatrix(g, w, ctx.pb.energy, eps, 0.0));
    if (ldlt.info() != Eigen::Success)
      break;
    const Eigen::VectorXd gf = detail::toDofs(g, e.gradF);
    const Eigen::VectorXd gg = detail::toDofs(g, e.gradG);
    const Eigen::VectorXd pg = ldlt.solve(gf);
    const Eigen::VectorXd pn = ldlt.solve(gg);
    const double alpha = gg.dot(pg) / gg.dot(pn);
    const Eigen::VectorXd d = -(pg - alpha * pn);
    const double slope = gf.dot(d);
    if (!(slope < 0.0))
      break;
    const auto dn = detail::fromDofs(g, d);

    // coefficient of v in w
    const double tv = peak.scale * peak.c.back();

    const bool resample = it % 10 == 9;
    bool accepted = false;
    double s = 1.0;
    for (int tries = 0; tries < 30; ++tries, s *= 0.5)
    {
      std::vector<double> trial(v.size());
      for (std::size_t i = 0; i < v.size(); ++i)
        trial[i] = tv * v[i] + s * dn[i];
      if (!orthonormalize(trial, previous, functionals))
        continue;
      Peak next = finder.find(basisOf(trial), peak.c, resample, rng);
      if (next.value == kInf)
        continue;
      out.bestSup = std::min(out.bestSup, next.value);
      if (ctx.cfg.stepRule == StepRule::Armijo && !(next.value <= peak.value + 1e-4 * s * slope))
        continue;
      v = std::move(trial);
      peak = std::move(next);
      accepted = true;
      break;
    }
    if (!accepted)
      break;
  }

  const double bestSup = out.bestSup;
  out = polishCandidate(ctx, peak.w, it);
  out.bestSup = bestSup;
  for (const auto &p : previous)
    if (colinearity(p, out.u) > 0.99)
      out.residual = kInf; // fell back onto a known mode
  return out;
}

EigenPair toEigenPair(const MinMaxContext &ctx, const Candidate &c, bool heuristic)
{
  EigenPair ep;
  ep.u = GridFunction(ctx.g, c.u);
  const auto f = detail::evaluateForms(ctx.g, c.u, {1.0, ctx.exp.p, 1.0, ctx.exp.q},
                                       {1.0 / ctx.exp.q, ctx.exp.q}, 0.0, false);
  ep.lambda = (f.aPart + f.bPart) / ctx.exp.q;
  ep.criticalValue = c.phi;
  ep.constraintValue = f.mass;
  ep.residual = pdeResidual(ep.u, ep.lambda, ctx.exp, ctx.g, Regularization{0.0});
  ep.iterations = c.iterations;
  ep.regime = SolveRegime::MinMaxQLessP;
  ep.heuristic = heuristic;
  ep.upperBound = c.bestSup;
  return ep;
}

} // namespace

std::vector<EigenPair> solveMinMax(int K, const Grid &g, const Exponents &exp,
                                   const SolverConfig &cfg)
{
  if (exp.regime() != Regime::QLessP)
    throw RegimeError("the min-max sequence is computed for q < p");
  if (K < 1)
    throw DomainError("K must be at least 1");
  cfg.validate();

  MinMaxContext ctx{g, exp, cfg, {}, {}};
  ctx.pb.energy = {1.0 / exp.p, exp.p, 1.0 / exp.q, exp.q};
  ctx.pb.constraint = {1.0 / exp.q, exp.q};
  ctx.pb.level = 1.0;
  ctx.residual = [&g, &exp](std::span<const double> u, double mu) {
    return pdeResidual(GridFunction(g, std::vector<double>(u.begin(), u.end())), mu, exp, g,
                       Regularization{0.0});
  };

  std::vector<EigenPair> modes;
  std::vector<std::vector<double>> found;

  // mode 1: minimizer of Phi on S
  {
    std::vector<Candidate> runs;
    for (int r = 0; r < cfg.restarts; ++r)
    {
      auto rng = modeRng(cfg, r, 0);
      detail::DescentResult d;
      try
      {
        d = detail::constrainedDescent(g, ctx.pb, randomBump(g, rng, true), cfg);
      }
      catch (const IndefiniteConstraint &)
      {
        continue;
      }
      auto c = polishCandidate(ctx, d.u, d.iterations);
      double s = 0.0;
      for (double x : c.u)
        s += x;
      if (s < 0.0)
        for (double &x : c.u)
          x = -x;
      c.bestSup = c.phi;
      runs.push_back(std::move(c));
    }
    if (runs.empty())
      throw IndefiniteConstraint("solveMinMax: no restart reached (1/q)∫ m|u|^q = 1");
    std::sort(runs.begin(), runs.end(), [&](const Candidate &a, const Candidate &b) {
      const bool oka = a.residual <= cfg.tolResidual;
      const bool okb = b.residual <= cfg.tolResidual;
      if (oka != okb)
        return oka;
      return a.phi < b.phi;
    });
    if (!(runs.front().residual <= cfg.tolResidual))
      throw NoConvergence("solveMinMax: principal residual above tolerance", runs.front().u,
                          runs.front().residual);
    EigenPair ep = toEigenPair(ctx, runs.front(), false);
    ep.upperBound = runs.front().phi;
    for (const auto &r : runs)
      ep.upperBound = std::min(ep.upperBound, r.phi);
    std::vector<std::vector<double>> converged;
    for (const auto &r : runs)
      if (r.residual <= cfg.tolResidual)
        converged.push_back(r.u);
    ep.restartColinearity = 1.0;
    for (std::size_t i = 0; i < converged.size(); ++i)
      for (std::size_t j = i + 1; j < converged.size(); ++j)
        ep.restartColinearity =
            std::min(ep.restartColinearity, colinearity(converged[i], converged[j]));
    modes.push_back(std::move(ep));
    found.push_back(runs.front().u);
  }

  for (int k = 2; k <= K; ++k)
  {
    Candidate best;
    double bestSup = kInf;
    for (int r = 0; r < cfg.restarts; ++r)
    {
      auto c = localMinMax(ctx, found, r, k - 1);
      bestSup = std::min(bestSup, c.bestSup);
      if (!(c.residual <= cfg.tolResidual))
        continue;
      if (c.phi < best.phi)
        best = std::move(c);
    }
    if (best.residual == kInf)
      throw NoConvergence("solveMinMax: no restart produced mode " + std::to_string(k), {},
                          kInf);
    EigenPair ep = toEigenPair(ctx, best, true);
    ep.upperBound = bestSup;
    modes.push_back(std::move(ep));
    found.push_back(best.u);
  }
  return modes;
}

} // namespace dphase
