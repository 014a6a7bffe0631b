#include "dphase/verify.hpp"

#include "dphase/error.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

namespace dphase
{

std::vector<double> randomCellField(const Grid &g, std::mt19937_64 &rng)
{
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> f(g.cellCount());
  for (double &v : f)
    v = std::exp(normal(rng));
  return f;
}

std::vector<double> randomNodalField(const Grid &g, std::mt19937_64 &rng)
{
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::vector<double> u(g.nodeCount(), 0.0);
  for (int node : g.interiorNodes())
    u[node] = unit(rng);
  return u;
}

std::vector<double> randomPositiveField(const Grid &g, std::mt19937_64 &rng)
{
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double R = g.geometry().radius;
  const bool twoD = g.geometry().mode == GeometryMode::Tensor2D;
  const double baseline = 0.2 + 0.8 * unit(rng);
  const int count = 1 + static_cast<int>(rng() % 4);
  struct Bump
  {
    double x, y, w, amp;
  };
  std::vector<Bump> bumps;
  for (int b = 0; b < count; ++b)
  {
    const double lo = g.geometry().mode == GeometryMode::RadialN ? 0.0 : -R;
    bumps.push_back({lo + (R - lo) * unit(rng), twoD ? -R + 2.0 * R * unit(rng) : 0.0,
                     R * (0.05 + 0.3 * unit(rng)), 3.0 * unit(rng)});
  }
  std::vector<double> u(g.nodeCount(), 0.0);
  const auto nodes = g.nodes();
  for (int node : g.interiorNodes())
  {
    const auto x = nodes[node];
    double cut = 1.0 - (x[0] / R) * (x[0] / R);
    if (twoD)
      cut *= 1.0 - (x[1] / R) * (x[1] / R);
    double v = baseline;
    for (const auto &b : bumps)
    {
      double d2 = (x[0] - b.x) * (x[0] - b.x);
      if (twoD)
        d2 += (x[1] - b.y) * (x[1] - b.y);
      v += b.amp * std::exp(-d2 / (2.0 * b.w * b.w));
    }
    u[node] = cut * v;
  }
  return u;
}

NormSuiteResult normSuite(const Grid &g, const Exponents &exp, int fields, std::uint64_t seed)
{
  std::mt19937_64 rng(seed);
  NormSuiteResult out;
  out.fields = fields;
  const double lo = exp.minPQ();
  const double hi = exp.maxPQ();
  const std::vector<double> ones(g.cellCount(), 1.0);
  for (int k = 0; k < fields; ++k)
  {
    auto f = randomCellField(g, rng);
    const double L = luxemburgNorm(f, exp, g);
    const auto parts = modularParts(f, exp, g);
    out.maxUnitModularError = std::max(out.maxUnitModularError, std::abs(parts.value(L, exp) - 1.0));

    for (double level : {0.5, 2.0})
    {
      const double rho = parts.value(L / level, exp);
      if ((level > 1.0) != (rho > 1.0))
        ++out.signViolations;
    }

    for (double level : {0.25, 0.5, 2.0, 4.0})
    {
      // rho(level f / L) = rho_f(L / level)
      const double rho = parts.value(L / level, exp);
      const double a = std::pow(level, lo);
      const double b = std::pow(level, hi);
      const double lower = std::min(a, b);
      const double upper = std::max(a, b);
      const double tol = 1e-12 * upper;
      if (rho < lower - tol || rho > upper + tol)
        ++out.sandwichViolations;
    }

    for (double c : {0.1, 3.0, 10.0})
    {
      std::vector<double> cf(f);
      for (double &v : cf)
        v *= c;
      const double Lc = luxemburgNorm(cf, exp, g);
      out.maxHomogeneityError = std::max(out.maxHomogeneityError, std::abs(Lc - c * L) / (c * L));
    }

    double prevRho = parts.value(1.0, exp);
    double prevNorm = L;
    for (int j = 1; j <= 20; ++j)
    {
      const double s = std::ldexp(1.0, j);
      const double rho = parts.value(s, exp);
      std::vector<double> fs(f);
      for (double &v : fs)
        v /= s;
      const double n = luxemburgNorm(fs, exp, g);
      if (!(rho < prevRho) || !(n < prevNorm))
        out.coVanishing = false;
      prevRho = rho;
      prevNorm = n;
    }
    if (!(prevRho < 1e-6 * parts.value(1.0, exp)) || !(prevNorm < 1e-5 * L))
      out.coVanishing = false;

    for (double level : {0.25, 0.5, 1.0})
    {
      double lq = 0.0;
      const auto w = g.quadWeights();
      for (std::size_t c = 0; c < f.size(); ++c)
        lq += w[c] * std::pow(level * f[c] / L, exp.q);
      if (lq > 1.0 + 1e-12)
        ++out.embeddingViolations;
    }
  }
  return out;
}

double quadratureExactness(const Grid &g)
{
  const auto nodes = g.nodes();
  std::vector<double> f(g.nodeCount());
  double exact = g.measure();
  if (g.geometry().mode == GeometryMode::RadialN)
  {
    const int N = g.geometry().dimension;
    for (std::size_t i = 0; i < f.size(); ++i)
      f[i] = 1.0 + nodes[i][0];
    exact *= 1.0 + g.geometry().radius * N / (N + 1.0);
  }
  else
  {
    for (std::size_t i = 0; i < f.size(); ++i)
      f[i] = 1.0 + 0.3 * nodes[i][0] + (g.gradDim() == 2 ? 0.7 * nodes[i][1] : 0.0);
  }
  const double measured = integrate(g, g.cellAverage(f));
  double weights = 0.0;
  for (double w : g.quadWeights())
    weights += w;
  return std::max(std::abs(measured - exact) / exact,
                  std::abs(weights - g.measure()) / g.measure());
}

double refinementOrder(const Geometry &geometry, const WeightSpec &weights)
{
  std::array<double, 3> values{};
  for (int level = 0; level < 3; ++level)
  {
    Geometry geo = geometry;
    geo.resolution = geometry.resolution << level;
    const Grid g = buildGrid(geo, weights);
    const double R = geo.radius;
    std::vector<double> f(g.nodeCount());
    const auto nodes = g.nodes();
    for (std::size_t i = 0; i < f.size(); ++i)
    {
      const double d = g.distance(nodes[i]);
      f[i] = std::exp(-d * d / (R * R));
    }
    values[level] = integrate(g, g.cellAverage(f));
  }
  const double coarse = std::abs(values[0] - values[1]);
  const double fine = std::abs(values[1] - values[2]);
  if (fine == 0.0)
    return coarse == 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
  return std::log2(coarse / fine);
}

EnvelopeCheck envelopeCheck(const Grid &g)
{
  const auto &w = g.weights();
  EnvelopeCheck out;
  out.minGap = std::numeric_limits<double>::infinity();
  out.minOmega = std::numeric_limits<double>::infinity();
  const auto nodes = g.nodes();
  std::vector<std::pair<double, double>> byDistance;
  for (std::size_t i = 0; i < w.omega.size(); ++i)
  {
    out.minGap = std::min(out.minGap, w.envelope[i] - w.omega[i]);
    out.minOmega = std::min(out.minOmega, w.omega[i]);
    byDistance.emplace_back(g.distance(nodes[i]), w.omega[i]);
  }
  std::sort(byDistance.begin(), byDistance.end());
  for (std::size_t i = 1; i < byDistance.size(); ++i)
    if (byDistance[i].first > byDistance[i - 1].first &&
        !(byDistance[i].second < byDistance[i - 1].second))
      out.omegaDecreasing = false;
  return out;
}

GrowthCheck growthCheck(const Grid &g, const Exponents &exp, int tValues)
{
  GrowthCheck out;
  const auto &a = g.weights().a;
  const double C0 = std::max(1.0, *std::max_element(a.begin(), a.end()));
  out.minSlack = 1.0;
  for (int k = 0; k < tValues; ++k)
  {
    const double t = std::pow(10.0, -3.0 + 6.0 * k / std::max(1, tValues - 1));
    // same powers as xi so that both bounds hold without a rounding allowance
    const double tp = powAbs(t, exp.p);
    const double tq = powAbs(t, exp.q);
    for (double av : a)
    {
      const double value = xi(av, t, exp);
      const double upper = C0 * tp + C0 * tq;
      ++out.checks;
      if (value < tq || value > upper)
        ++out.violations;
      out.minSlack = std::min({out.minSlack, (value - tq) / value, (upper - value) / upper});
    }
  }
  return out;
}

std::string toString(FunctionalKind kind)
{
  switch (kind)
  {
  case FunctionalKind::J:
    return "J";
  case FunctionalKind::I:
    return "I";
  case FunctionalKind::Phi:
    return "Phi";
  case FunctionalKind::Psi:
    return "Psi";
  }
  return "unknown";
}

double gradientCheck(FunctionalKind kind, const Grid &g, const Exponents &exp, double lambda,
                     double eps, int trials, std::uint64_t seed)
{
  std::mt19937_64 rng(seed);
  const Regularization reg{eps};
  auto eval = [&](const GridFunction &u) {
    switch (kind)
    {
    case FunctionalKind::J:
      return evalJ(u, lambda, exp, g, reg);
    case FunctionalKind::I:
      return evalI(u, lambda, exp, g, reg);
    case FunctionalKind::Phi:
      return evalPhi(u, exp, g, reg);
    case FunctionalKind::Psi:
      return evalPsi(u, exp.r, g, reg);
    }
    throw DomainError("unknown functional");
  };
  const double h = 1e-6;
  double worst = 0.0;
  for (int t = 0; t < trials; ++t)
  {
    const auto u = randomNodalField(g, rng);
    const auto d = randomNodalField(g, rng);
    std::vector<double> up(u), um(u);
    for (std::size_t i = 0; i < u.size(); ++i)
    {
      up[i] += h * d[i];
      um[i] -= h * d[i];
    }
    const auto fu = eval(GridFunction(g, u));
    const double fd =
        (eval(GridFunction(g, up)).value - eval(GridFunction(g, um)).value) / (2.0 * h);
    double an = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i)
      an += fu.gradient[i] * d[i];
    worst = std::max(worst, std::abs(fd - an) / std::max(std::abs(an), 1e-300));
  }
  return worst;
}

namespace
{

double singleScale(const GridFunction &u, const GridFunction &v, double r, const Grid &g)
{
  return singlePhaseModular(u.gradNorm(), r, g) + singlePhaseModular(v.gradNorm(), r, g);
}

double doubleScale(const GridFunction &u, const GridFunction &v, const Exponents &exp,
                   const Grid &g)
{
  return modular(u.gradNorm(), exp, g) + modular(v.gradNorm(), exp, g);
}

template <class Picone, class Scale>
PiconeAudit audit(const Grid &g, int pairs, double factor, std::uint64_t seed, Picone picone,
                  Scale scale)
{
  std::mt19937_64 rng(seed);
  PiconeAudit out;
  out.pairs = pairs;
  out.minScaled = std::numeric_limits<double>::infinity();
  for (int k = 0; k < pairs; ++k)
  {
    const GridFunction u(g, randomPositiveField(g, rng));
    const GridFunction v(g, randomPositiveField(g, rng));
    out.minScaled = std::min(out.minScaled, picone(u, v) / scale(u, v));

    std::vector<double> ku(u.values().begin(), u.values().end());
    for (double &x : ku)
      x *= factor;
    const GridFunction kf(g, ku);
    out.proportionalMax = std::max({out.proportionalMax, std::abs(picone(u, u)) / scale(u, u),
                                    std::abs(picone(u, kf)) / scale(u, kf)});
  }
  return out;
}

} // namespace

PiconeAudit piconeAuditSingle(const Grid &g, double r, int pairs, double factor,
                              std::uint64_t seed)
{
  return audit(
      g, pairs, factor, seed,
      [&](const GridFunction &u, const GridFunction &v) { return piconeSingle(u, v, r, g); },
      [&](const GridFunction &u, const GridFunction &v) { return singleScale(u, v, r, g); });
}

PiconeAudit piconeAuditDouble(const Grid &g, const Exponents &exp, int pairs, double factor,
                              std::uint64_t seed)
{
  return audit(
      g, pairs, factor, seed,
      [&](const GridFunction &u, const GridFunction &v) { return piconeDouble(u, v, exp, g); },
      [&](const GridFunction &u, const GridFunction &v) { return doubleScale(u, v, exp, g); });
}

MonotonicitySweep monotonicitySweep(const Grid &g, double r, int trials, std::uint64_t seed,
                                    double C)
{
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  MonotonicitySweep out;
  out.trials = trials;
  const std::size_t size = g.cellCount() * static_cast<std::size_t>(g.gradDim());
  for (int t = 0; t < trials; ++t)
  {
    std::vector<double> z1(size), z2(size);
    const double s1 = std::pow(10.0, 4.0 * unit(rng) - 2.0);
    const double s2 = std::pow(10.0, 4.0 * unit(rng) - 2.0);
    const double mix = unit(rng);
    for (std::size_t i = 0; i < size; ++i)
    {
      z1[i] = s1 * normal(rng);
      // mix part of z1 into z2 so that nearby pairs are sampled too
      z2[i] = mix * z1[i] + (1.0 - mix) * s2 * normal(rng);
    }
    const auto gap = monotonicityGap(z1, z2, r, g, C);
    if (gap.lhs > gap.rhs)
      ++out.violations;
    if (gap.rhs > 0.0)
      out.worstRatio = std::max(out.worstRatio, gap.lhs / gap.rhs);
  }
  return out;
}

std::vector<ScalingRow> scalingLimit(const Grid &g, const Exponents &exp,
                                     const EigenPair &reference)
{
  std::vector<ScalingRow> rows;
  for (double t : {1.0, 10.0, 100.0, 1000.0})
  {
    const double s = exp.regime() == Regime::PLessQ ? t : 1.0 / t;
    std::vector<double> u(reference.u.values().begin(), reference.u.values().end());
    for (double &v : u)
      v *= s;
    rows.push_back({s, rayleighDouble(GridFunction(g, std::move(u)), exp, g)});
  }
  return rows;
}

namespace
{

ScanPoint scanPoint(double lambda, double multiplier, const Grid &g, const Exponents &exp,
                    const SolverConfig &cfg, const EigenPair &reference)
{
  ScanPoint pt;
  pt.multiplier = multiplier;
  pt.lambda = lambda;
  try
  {
    auto res = solveNehari(pt.lambda, g, exp, cfg, reference);
    if (auto *d = std::get_if<Degenerate>(&res))
    {
      pt.degenerate = true;
      pt.note = d->reason;
    }
    else
    {
      pt.pair = std::get<EigenPair>(std::move(res));
    }
  }
  catch (const Error &e)
  {
    pt.note = e.what();
  }
  return pt;
}

std::vector<ScanPoint> scan(const std::vector<std::pair<double, double>> &points, const Grid &g,
                            const Exponents &exp, const SolverConfig &cfg,
                            const EigenPair &reference, int threads)
{
  std::vector<ScanPoint> out(points.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < points.size(); i = next++)
      out[i] = scanPoint(points[i].first, points[i].second, g, exp, cfg, reference);
  };
  const int extra = std::clamp(threads, 1, static_cast<int>(std::max<std::size_t>(1, points.size()))) - 1;
  std::vector<std::thread> pool;
  for (int t = 0; t < extra; ++t)
    pool.emplace_back(worker);
  worker();
  for (auto &t : pool)
    t.join();
  return out;
}

} // namespace

std::vector<ScanPoint> nonexistenceScan(const Grid &g, const Exponents &exp,
                                        const std::vector<double> &multipliers,
                                        const SolverConfig &cfg, const EigenPair &reference,
                                        int threads)
{
  std::vector<std::pair<double, double>> points;
  for (double m : multipliers)
    points.emplace_back(m * reference.lambda, m);
  return scan(points, g, exp, cfg, reference, threads);
}

std::vector<ScanPoint> lambdaScan(const Grid &g, const Exponents &exp,
                                  const std::vector<double> &lambdas, const SolverConfig &cfg,
                                  const EigenPair &reference, int threads)
{
  std::vector<std::pair<double, double>> points;
  for (double l : lambdas)
    points.emplace_back(l, l / reference.lambda);
  return scan(points, g, exp, cfg, reference, threads);
}

} // namespace dphase
