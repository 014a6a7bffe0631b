#include "dphase/run.hpp"

#include "dphase/error.hpp"
#include "dphase/serialize.hpp"
#include "dphase/verify.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace dphase
{

namespace fs = std::filesystem;
using nlohmann::json;

const std::vector<std::string> &invariantNames()
{
  static const std::vector<std::string> names{
      "grid.quadrature_exactness",
      "grid.refinement_order",
      "grid.envelope_positive",
      "modular.unit_modular",
      "modular.sign_agreement",
      "modular.sandwich",
      "modular.co_vanishing",
      "modular.unbalanced_growth",
      "modular.embedding",
      "modular.homogeneity",
      "functionals.identity_J_minus_I_over_q",
      "functionals.gradient_consistency",
      "functionals.picone_nonnegativity",
      "functionals.picone_equality",
      "functionals.homogeneity_degrees",
      "functionals.eps_independence",
      "functionals.monotonicity_bound",
      "eigensolve.eigenvalue_positivity",
      "eigensolve.eigenvalue_ordering",
      "eigensolve.simplicity",
      "eigensolve.constant_sign_principal",
      "eigensolve.sign_change_higher",
      "eigensolve.nonexistence_band",
      "eigensolve.nehari_level_positive",
      "eigensolve.minmax_ordering",
      "eigensolve.minmax_multiplier",
      "eigensolve.minmax_restart_monotone",
      "eigensolve.residual_tolerance",
      "eigensolve.constraint_level",
      "scaling.limit_within_1pct",
      "scaling.monotone_approach",
      "scaling.t1_above_muhat",
      "cli.scan_robustness",
      "cli.determinism",
  };
  return names;
}

const InvariantResult &RunReport::invariant(const std::string &name) const
{
  for (const auto &inv : invariants)
    if (inv.name == name)
      return inv;
  throw std::out_of_range("unknown invariant " + name);
}

bool RunReport::hardInvariantsPass() const
{
  return std::all_of(invariants.begin(), invariants.end(),
                     [](const InvariantResult &i) { return !i.evaluated || !i.hard || i.pass; });
}

json RunReport::toJson() const
{
  json inv = json::object();
  for (const auto &i : invariants)
    inv[i.name] = {{"evaluated", i.evaluated},
                   {"pass", i.pass},
                   {"slack", std::isfinite(i.slack) ? json(i.slack) : json(nullptr)},
                   {"hard", i.hard},
                   {"detail", i.detail}};
  return {{"schema", "dphase-eig v1"},
          {"task", toString(config.task)},
          {"config", config},
          {"summary", summary},
          {"results", results},
          {"invariants", inv},
          {"allHardInvariantsPass", hardInvariantsPass()},
          {"warnings", warnings},
          {"timing", {{"seconds", seconds}}}};
}

namespace
{

std::string formatNumber(double v)
{
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csvCell(const json &v)
{
  if (v.is_null())
    return "";
  if (v.is_boolean())
    return v.get<bool>() ? "true" : "false";
  if (v.is_number_float())
    return formatNumber(v.get<double>());
  if (v.is_number())
    return v.dump();
  std::string s = v.is_string() ? v.get<std::string>() : v.dump();
  if (s.find_first_of(",\"\n") == std::string::npos)
    return s;
  std::string quoted = "\"";
  for (char c : s)
  {
    if (c == '"')
      quoted += '"';
    quoted += c;
  }
  return quoted + "\"";
}

void writeAtomic(const fs::path &path, const std::string &content)
{
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os)
      throw Error("cannot write " + tmp.string());
    os << content;
    if (!os.flush())
      throw Error("cannot write " + tmp.string());
  }
  fs::rename(tmp, path);
}

/// Minimum over interior nodes of u * sign(sum u) relative to max |u|.
double signMargin(const GridFunction &u, const Grid &g)
{
  double sum = 0.0, peak = 0.0;
  for (int n : g.interiorNodes())
  {
    sum += u.values()[n];
    peak = std::max(peak, std::abs(u.values()[n]));
  }
  if (peak == 0.0)
    return -1.0;
  const double sign = sum < 0.0 ? -1.0 : 1.0;
  double lo = std::numeric_limits<double>::infinity();
  for (int n : g.interiorNodes())
    lo = std::min(lo, sign * u.values()[n] / peak);
  return lo;
}

/// min(largest positive, largest negative) nodal value relative to max |u|.
double signChange(const GridFunction &u)
{
  double hi = 0.0, lo = 0.0, peak = 0.0;
  for (double v : u.values())
  {
    hi = std::max(hi, v);
    lo = std::min(lo, v);
    peak = std::max(peak, std::abs(v));
  }
  return peak == 0.0 ? 0.0 : std::min(hi, -lo) / peak;
}

template <class F>
void parallelFor(std::size_t count, int threads, F body)
{
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++)
      body(i);
  };
  const int extra =
      std::clamp(threads, 1, static_cast<int>(std::max<std::size_t>(1, count))) - 1;
  std::vector<std::thread> pool;
  for (int t = 0; t < extra; ++t)
    pool.emplace_back(worker);
  worker();
  for (auto &t : pool)
    t.join();
}

class Runner
{
public:
  Runner(const ExperimentConfig &cfg, RunReport &report) : cfg_(cfg), rep_(report)
  {
    for (const auto &name : invariantNames())
      rep_.invariants.push_back({name, false, true, 0.0, true, ""});
  }

  void execute()
  {
    const Grid g = buildGrid(cfg_.geometry, cfg_.weights);
    gridChecks(g);
    switch (cfg_.task)
    {
    case Task::Norms:
      norms(g);
      break;
    case Task::SinglePhase:
      singlePhase(g);
      break;
    case Task::NehariScan:
    case Task::Nonexistence:
      nehariScan(g);
      break;
    case Task::MinMax:
      minMax(g);
      break;
    case Task::PiconeAudit:
      piconeAudit(g);
      break;
    case Task::ScalingLimit:
      scaling(g);
      break;
    case Task::RSweep:
      rSweep();
      break;
    }
    setDetail("cli.determinism", "checked by comparing results.csv of repeated runs");
  }

  void writeOutputs() const
  {
    const fs::path dir(cfg_.output);
    fs::create_directories(dir);
    std::ostringstream csv;
    csv << "# dphase-eig v1\n# task=" << toString(cfg_.task) << "\n";
    for (std::size_t c = 0; c < columns_.size(); ++c)
      csv << (c ? "," : "") << columns_[c];
    csv << "\n";
    for (const auto &row : rep_.results)
    {
      for (std::size_t c = 0; c < columns_.size(); ++c)
        csv << (c ? "," : "") << csvCell(row.contains(columns_[c]) ? row[columns_[c]] : json());
      csv << "\n";
    }
    writeAtomic(dir / "results.csv", csv.str());
    for (const auto &[name, text] : fields_)
      writeAtomic(dir / (name + ".field"), text);
    writeAtomic(dir / "report.json", rep_.toJson().dump(2) + "\n");
  }

private:
  const ExperimentConfig &cfg_;
  RunReport &rep_;
  std::vector<std::string> columns_;
  std::map<std::string, std::string> fields_;

  InvariantResult &slot(const std::string &name)
  {
    for (auto &inv : rep_.invariants)
      if (inv.name == name)
        return inv;
    throw std::out_of_range("unknown invariant " + name);
  }

  /// Repeated records of one name are combined: all must pass, slack is the minimum.
  void record(const std::string &name, bool pass, double slack, const std::string &detail,
              bool hard = true)
  {
    auto &inv = slot(name);
    if (!inv.evaluated)
    {
      inv.evaluated = true;
      inv.pass = pass;
      inv.slack = slack;
      inv.detail = detail;
    }
    else
    {
      inv.pass = inv.pass && pass;
      inv.slack = std::min(inv.slack, slack);
      if (!detail.empty())
        inv.detail += "; " + detail;
    }
    inv.hard = hard;
  }

  void setDetail(const std::string &name, const std::string &detail)
  {
    slot(name).detail = detail;
  }

  void dump(const std::string &name, const Grid &g, const GridFunction &u, const std::string &label)
  {
    std::ostringstream os;
    writeFieldDump(os, g, u.values(), label);
    fields_[name] = os.str();
  }

  std::uint64_t seed() const { return cfg_.solver.seed; }

  void gridChecks(const Grid &g)
  {
    const double quad = quadratureExactness(g);
    record("grid.quadrature_exactness", quad <= 1e-12, 1e-12 - quad,
           "relative error " + formatNumber(quad));

    Geometry coarse = cfg_.geometry;
    coarse.resolution = std::clamp(cfg_.geometry.resolution, 8, 64);
    const double order = refinementOrder(coarse, cfg_.weights);
    record("grid.refinement_order", order >= 1.9, order - 1.9,
           "order " + formatNumber(order) + " over n = " + std::to_string(coarse.resolution) +
               ", 2n, 4n");

    const auto env = envelopeCheck(g);
    record("grid.envelope_positive", env.minGap >= 0.0 && env.minOmega > 0.0 && env.omegaDecreasing,
           std::min(env.minGap, env.minOmega),
           env.omegaDecreasing ? "" : "omega is not decreasing in |x|");

    // tail share of m1 over the outer tenth of the domain
    const auto cells = g.cells();
    const auto w = g.quadWeights();
    const auto &m1 = g.cellWeights().m1;
    const double R = cfg_.geometry.radius;
    double total = 0.0, tail = 0.0;
    for (std::size_t c = 0; c < cells.size(); ++c)
    {
      const auto x = cells[c].centroid;
      const double d = g.gradDim() == 2 ? std::max(std::abs(x[0]), std::abs(x[1])) : std::abs(x[0]);
      total += w[c] * m1[c];
      if (d > 0.9 * R)
        tail += w[c] * m1[c];
    }
    rep_.summary["m1TailShare"] = total > 0.0 ? tail / total : 0.0;
    if (total > 0.0 && tail > 0.2 * total)
      rep_.warnings.push_back("m1 has " + formatNumber(100.0 * tail / total) +
                              "% of its integral in the outer 10% of the domain; the truncation "
                              "radius may be too small");
  }

  void norms(const Grid &g)
  {
    const auto &exp = cfg_.exponents;
    columns_ = {"index", "modular", "luxemburg", "lowerSandwich", "upperSandwich",
                "eNorm", "lqNorm", "sandwich_ok"};
    std::mt19937_64 rng(seed());
    std::uniform_real_distribution<double> decade(-2.0, 1.0);
    int violations = 0;
    double slack = std::numeric_limits<double>::infinity();
    for (int i = 0; i < cfg_.samples; ++i)
    {
      auto values = randomNodalField(g, rng);
      const double scale = std::pow(10.0, decade(rng));
      for (double &v : values)
        v *= scale;
      const GridFunction u(g, std::move(values));
      auto nr = sandwichCheck(u.gradNorm(), exp, g);
      nr.eNorm = eNorm(u, exp, g);
      const double tol = 1e-12 * nr.upperSandwich;
      const double margin = std::min(nr.modular - nr.lowerSandwich, nr.upperSandwich - nr.modular);
      const bool ok = margin >= -tol;
      if (!ok)
        ++violations;
      slack = std::min(slack, margin / std::max(nr.upperSandwich, 1e-300));
      json row = nr;
      row["index"] = i;
      row["sandwich_ok"] = ok;
      rep_.results.push_back(row);
    }

    const auto suite = normSuite(g, exp, cfg_.samples, seed());
    record("modular.unit_modular", suite.maxUnitModularError <= 1e-10,
           1e-10 - suite.maxUnitModularError,
           "max |rho(f/||f||) - 1| = " + formatNumber(suite.maxUnitModularError));
    record("modular.sign_agreement", suite.signViolations == 0, -suite.signViolations,
           std::to_string(suite.signViolations) + " disagreements");
    record("modular.sandwich", suite.sandwichViolations == 0 && violations == 0, slack,
           std::to_string(suite.sandwichViolations + violations) + " violations");
    record("modular.co_vanishing", suite.coVanishing, suite.coVanishing ? 0.0 : -1.0,
           "f / 2^k, k = 1..20");
    record("modular.embedding", suite.embeddingViolations == 0, -suite.embeddingViolations,
           std::to_string(suite.embeddingViolations) + " violations");
    record("modular.homogeneity", suite.maxHomogeneityError <= 1e-10,
           1e-10 - suite.maxHomogeneityError,
           "max relative error " + formatNumber(suite.maxHomogeneityError));
    const auto growth = growthCheck(g, exp);
    record("modular.unbalanced_growth", growth.violations == 0, growth.minSlack,
           std::to_string(growth.checks) + " checks");
    rep_.summary["fields"] = suite.fields;
  }

  void pairChecks(const std::vector<EigenPair> &pairs, const Grid &g, double level)
  {
    if (pairs.empty())
      return;
    double minLambda = std::numeric_limits<double>::infinity();
    double maxResidual = 0.0, levelError = 0.0;
    for (const auto &e : pairs)
    {
      minLambda = std::min(minLambda, e.lambda);
      maxResidual = std::max(maxResidual, e.residual);
      levelError = std::max(levelError, std::abs(e.constraintValue - level));
    }
    record("eigensolve.eigenvalue_positivity", minLambda > 0.0, minLambda,
           "smallest eigenvalue " + formatNumber(minLambda));
    const double tol = cfg_.solver.tolResidual;
    record("eigensolve.residual_tolerance", maxResidual <= tol, tol - maxResidual,
           "largest residual " + formatNumber(maxResidual));
    record("eigensolve.constraint_level", levelError <= 1e-8, 1e-8 - levelError,
           "largest constraint deviation " + formatNumber(levelError));

    const auto &principal = pairs.front();
    if (cfg_.solver.restarts >= 2)
    {
      const double c = principal.restartColinearity;
      record("eigensolve.simplicity", c > 1.0 - 1e-6, c - (1.0 - 1e-6),
             "smallest restart colinearity " + formatNumber(c));
    }
    const double margin = signMargin(principal.u, g);
    record("eigensolve.constant_sign_principal", margin > 0.0, margin,
           "min interior value / max |u| = " + formatNumber(margin));
    for (std::size_t k = 1; k < pairs.size(); ++k)
    {
      const double s = signChange(pairs[k].u);
      record("eigensolve.sign_change_higher", s > 1e-8, s,
             "mode " + std::to_string(k + 1) + ": " + formatNumber(s));
    }
  }

  void singlePhase(const Grid &g)
  {
    const double r = cfg_.exponents.r;
    columns_ = {"mode", "lambda", "value", "residual", "iterations", "constraint", "heuristic"};
    const auto pairs = solveSinglePhase(r, cfg_.modes, g, cfg_.solver);
    double worstOrder = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < pairs.size(); ++k)
    {
      const auto &e = pairs[k];
      rep_.results.push_back({{"mode", k + 1},
                              {"lambda", e.lambda},
                              {"value", e.criticalValue},
                              {"residual", e.residual},
                              {"iterations", e.iterations},
                              {"constraint", e.constraintValue},
                              {"heuristic", e.heuristic}});
      dump("single_mode_" + std::to_string(k + 1), g, e.u,
           "single-phase mode " + std::to_string(k + 1) + " mu=" + formatNumber(e.lambda));
      if (k > 0)
        worstOrder = std::min(worstOrder, e.lambda - pairs[k - 1].lambda);
    }
    pairChecks(pairs, g, 1.0);
    if (pairs.size() > 1)
      record("eigensolve.eigenvalue_ordering", worstOrder >= 0.0, worstOrder,
             "eigenvalues nondecreasing");
  }

  void nehariScan(const Grid &g)
  {
    const auto &exp = cfg_.exponents;
    const auto reference = referenceEigenvalue(g, exp, cfg_.solver);
    rep_.summary["muHat"] = reference.lambda;
    rep_.summary["muHatResidual"] = reference.residual;
    dump("reference", g, reference.u, "a-free principal q-eigenfunction mu=" + formatNumber(reference.lambda));

    auto points = lambdaScan(g, exp, cfg_.lambdas, cfg_.solver, reference, cfg_.threads);
    auto byMultiplier = nonexistenceScan(g, exp, cfg_.multipliers, cfg_.solver, reference, cfg_.threads);
    const std::size_t lambdaCount = points.size();
    for (auto &p : byMultiplier)
      points.push_back(std::move(p));
    const std::size_t requested = cfg_.lambdas.size() + cfg_.multipliers.size();
    record("cli.scan_robustness", points.size() == requested,
           static_cast<double>(points.size()) - static_cast<double>(requested),
           std::to_string(points.size()) + " of " + std::to_string(requested) + " points recorded");

    columns_ = {"index", "multiplier", "lambda", "status", "value", "constraint", "residual",
                "iterations", "note"};
    const double qp = 1.0 / exp.p - 1.0 / exp.q;
    for (std::size_t i = 0; i < points.size(); ++i)
    {
      const auto &pt = points[i];
      json row{{"index", i}, {"multiplier", pt.multiplier}, {"lambda", pt.lambda}, {"note", pt.note}};
      if (pt.pair)
      {
        const auto &e = *pt.pair;
        row["status"] = "solution";
        row["value"] = e.criticalValue;
        row["constraint"] = e.constraintValue;
        row["residual"] = e.residual;
        row["iterations"] = e.iterations;
        dump("nehari_" + std::to_string(i), g, e.u, "Nehari ground state lambda=" + formatNumber(pt.lambda));

        const auto reg = Regularization::defaultFor(g, e.u);
        const auto J = evalJ(e.u, pt.lambda, exp, g, reg);
        const double level = qp * J.components.aGradP;
        record("eigensolve.nehari_level_positive", J.value > 0.0 && level > 0.0,
               std::min(J.value, level), "J = " + formatNumber(J.value) + " at lambda " + formatNumber(pt.lambda));
        const double scale = std::max({J.components.aGradP, J.components.gradQ, 1e-300});
        const double iRel = std::abs(e.constraintValue) / scale;
        record("eigensolve.constraint_level", iRel <= 1e-8, 1e-8 - iRel, "");
        record("eigensolve.residual_tolerance", e.residual <= cfg_.solver.tolResidual,
               cfg_.solver.tolResidual - e.residual, "");
        const double margin = signMargin(e.u, g);
        record("eigensolve.constant_sign_principal", margin > 0.0, margin, "");
        identityOnTrace(g, e, pt.lambda);
      }
      else
      {
        row["status"] = pt.degenerate ? "degenerate" : "failed";
      }
      rep_.results.push_back(row);
    }

    if (!cfg_.multipliers.empty())
    {
      bool ok = true;
      double slack = std::numeric_limits<double>::infinity();
      for (std::size_t i = lambdaCount; i < points.size(); ++i)
      {
        const auto &pt = points[i];
        const bool expectSolution = pt.multiplier > 1.0;
        const bool good = expectSolution ? pt.pair.has_value() : pt.degenerate;
        ok = ok && good;
        slack = std::min(slack, std::abs(pt.multiplier - 1.0) * (good ? 1.0 : -1.0));
      }
      record("eigensolve.nonexistence_band", ok, slack,
             "Degenerate for multipliers <= 1, solutions above");
    }
  }

  void identityOnTrace(const Grid &g, const EigenPair &e, double lambda)
  {
    const auto &exp = cfg_.exponents;
    double worst = 0.0;
    auto check = [&](const GridFunction &u) {
      const auto reg = Regularization{1e-6};
      const auto J = evalJ(u, lambda, exp, g, reg);
      const auto I = evalI(u, lambda, exp, g, reg);
      const double lhs = J.value - I.value / exp.q;
      const double rhs = (1.0 / exp.p - 1.0 / exp.q) * J.components.aGradP;
      const double scale = std::max({J.components.aGradP, J.components.gradQ,
                                     std::abs(lambda * J.components.mTerm), 1e-300});
      worst = std::max(worst, std::abs(lhs - rhs) / scale);
    };
    check(e.u);
    for (const auto &v : e.trace)
      check(GridFunction(g, v));
    record("functionals.identity_J_minus_I_over_q", worst <= 1e-12, 1e-12 - worst,
           std::to_string(e.trace.size() + 1) + " iterates, worst " + formatNumber(worst));
  }

  void minMax(const Grid &g)
  {
    const auto &exp = cfg_.exponents;
    columns_ = {"mode", "lambda", "value", "upper_bound", "residual", "iterations", "constraint",
                "heuristic"};
    const auto pairs = solveMinMax(cfg_.modes, g, exp, cfg_.solver);
    double ordering = std::numeric_limits<double>::infinity();
    double growth = std::numeric_limits<double>::infinity();
    double multiplierError = 0.0;
    for (std::size_t k = 0; k < pairs.size(); ++k)
    {
      const auto &e = pairs[k];
      rep_.results.push_back({{"mode", k + 1},
                              {"lambda", e.lambda},
                              {"value", e.criticalValue},
                              {"upper_bound", e.upperBound},
                              {"residual", e.residual},
                              {"iterations", e.iterations},
                              {"constraint", e.constraintValue},
                              {"heuristic", e.heuristic}});
      dump("minmax_mode_" + std::to_string(k + 1), g, e.u,
           "min-max mode " + std::to_string(k + 1) + " lambda=" + formatNumber(e.lambda));
      ordering = std::min(ordering, e.lambda - e.criticalValue);
      if (k > 0)
        growth = std::min(growth, e.criticalValue - pairs[k - 1].criticalValue);
      const auto phi = evalPhi(e.u, exp, g, Regularization::defaultFor(g, e.u));
      const double fromComponents = (phi.components.aGradP + phi.components.gradQ) / exp.q;
      multiplierError = std::max(multiplierError, std::abs(e.lambda - fromComponents) / e.lambda);
    }
    pairChecks(pairs, g, 1.0);
    record("eigensolve.minmax_ordering", ordering > 0.0, ordering, "min over modes of lambda_k - Phi(u_k)");
    record("eigensolve.minmax_multiplier", multiplierError <= 1e-10, 1e-10 - multiplierError,
           "lambda_k against (1/q)(∫ a|grad u|^p + ∫ |grad u|^q)");
    if (pairs.size() > 1)
      record("eigensolve.eigenvalue_ordering", growth >= 0.0, growth,
             "critical values nondecreasing in k");

    if (cfg_.modes <= 3)
    {
      SolverConfig larger = cfg_.solver;
      larger.restarts += 2;
      const auto more = solveMinMax(cfg_.modes, g, exp, larger);
      double worst = std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < std::min(more.size(), pairs.size()); ++k)
      {
        const double tol = 1e-8 * pairs[k].criticalValue;
        worst = std::min(worst, pairs[k].criticalValue + tol - more[k].criticalValue);
      }
      record("eigensolve.minmax_restart_monotone", worst >= 0.0, worst,
             "restarts " + std::to_string(cfg_.solver.restarts) + " -> " +
                 std::to_string(larger.restarts),
             false);
    }
    else
    {
      setDetail("eigensolve.minmax_restart_monotone", "skipped for more than 3 modes");
    }
  }

  void piconeAudit(const Grid &g)
  {
    const auto &exp = cfg_.exponents;
    columns_ = {"check", "measured", "threshold", "pass"};
    auto row = [&](const std::string &check, double measured, double threshold, bool pass) {
      rep_.results.push_back(
          {{"check", check}, {"measured", measured}, {"threshold", threshold}, {"pass", pass}});
    };

    const int pairs = cfg_.samples;
    const auto single = piconeAuditSingle(g, exp.r, pairs, 3.0, seed());
    row("picone_single_min", single.minScaled, -1e-10, single.minScaled >= -1e-10);
    row("picone_single_proportional", single.proportionalMax, 1e-10, single.proportionalMax <= 1e-10);
    record("functionals.picone_nonnegativity", single.minScaled >= -1e-10, single.minScaled + 1e-10,
           "single-phase min " + formatNumber(single.minScaled));
    record("functionals.picone_equality", single.proportionalMax <= 1e-10,
           1e-10 - single.proportionalMax, "single-phase v = u, 3u");
    if (exp.regime() == Regime::QLessP)
    {
      const auto dbl = piconeAuditDouble(g, exp, pairs, 0.5, seed() + 1);
      row("picone_double_min", dbl.minScaled, -1e-10, dbl.minScaled >= -1e-10);
      row("picone_double_proportional", dbl.proportionalMax, 1e-10, dbl.proportionalMax <= 1e-10);
      record("functionals.picone_nonnegativity", dbl.minScaled >= -1e-10, dbl.minScaled + 1e-10,
             "double phase min " + formatNumber(dbl.minScaled));
      // I(u, k u) = (1 - k^q)(1 - k^{p-q}) ∫ a|grad u|^p does not vanish for k != 1
      record("functionals.picone_equality", dbl.proportionalMax <= 1e-10,
             1e-10 - dbl.proportionalMax,
             "double phase v = u, u/2: " + formatNumber(dbl.proportionalMax) +
                 " (the a-weighted part is not 0-homogeneous in v)",
             false);
    }

    const double lambda = 1.0;
    double worstGradient = 0.0;
    for (auto kind : {FunctionalKind::J, FunctionalKind::Phi, FunctionalKind::Psi, FunctionalKind::I})
      for (double eps : {1e-4, 1e-6})
      {
        const double err = gradientCheck(kind, g, exp, lambda, eps, 20, seed() + 2);
        row("gradient_" + toString(kind) + (eps == 1e-4 ? "_eps1e-4" : "_eps1e-6"), err, 1e-5, err <= 1e-5);
        worstGradient = std::max(worstGradient, err);
      }
    record("functionals.gradient_consistency", worstGradient <= 1e-5, 1e-5 - worstGradient,
           "worst relative error " + formatNumber(worstGradient));

    std::mt19937_64 rng(seed() + 3);
    double identity = 0.0, degrees = 0.0;
    bool epsFree = true;
    for (int t = 0; t < 20; ++t)
    {
      const GridFunction u(g, randomNodalField(g, rng));
      const Regularization reg{1e-6};
      const auto J = evalJ(u, lambda, exp, g, reg);
      const auto I = evalI(u, lambda, exp, g, reg);
      const auto &c = J.components;
      const double scale = std::max({c.aGradP, c.gradQ, std::abs(lambda * c.mTerm)});
      identity = std::max(identity,
                          std::abs(J.value - I.value / exp.q - (1.0 / exp.p - 1.0 / exp.q) * c.aGradP) / scale);
      for (double s : {0.5, 2.0, 10.0})
      {
        std::vector<double> su(u.values().begin(), u.values().end());
        for (double &v : su)
          v *= s;
        const double Js = evalJ(GridFunction(g, std::move(su)), lambda, exp, g, reg).value;
        const double predicted = std::pow(s, exp.p) * c.aGradP / exp.p +
                                 std::pow(s, exp.q) * (c.gradQ - lambda * c.mTerm) / exp.q;
        const double sc = std::pow(s, exp.p) * c.aGradP / exp.p +
                          std::pow(s, exp.q) * (c.gradQ + std::abs(lambda * c.mTerm)) / exp.q;
        degrees = std::max(degrees, std::abs(Js - predicted) / sc);
      }
      const Regularization other{1e-2};
      epsFree = epsFree && evalJ(u, lambda, exp, g, reg).value == evalJ(u, lambda, exp, g, other).value &&
                evalPhi(u, exp, g, reg).value == evalPhi(u, exp, g, other).value &&
                evalPsi(u, exp.r, g, reg).value == evalPsi(u, exp.r, g, other).value;
    }
    row("identity_J_minus_I_over_q", identity, 1e-12, identity <= 1e-12);
    row("homogeneity_degrees", degrees, 1e-12, degrees <= 1e-12);
    row("eps_independence", epsFree ? 0.0 : 1.0, 0.0, epsFree);
    record("functionals.identity_J_minus_I_over_q", identity <= 1e-12, 1e-12 - identity,
           "20 random fields, worst " + formatNumber(identity));
    record("functionals.homogeneity_degrees", degrees <= 1e-12, 1e-12 - degrees,
           "J(su) for s in {0.5, 2, 10}, worst " + formatNumber(degrees));
    record("functionals.eps_independence", epsFree, epsFree ? 0.0 : -1.0,
           "J, Phi, Psi at eps 1e-6 and 1e-2, bitwise");

    const auto mono = monotonicitySweep(g, exp.r, pairs, seed() + 4);
    row("monotonicity_worst_ratio", mono.worstRatio, 1.0, mono.violations == 0);
    record("functionals.monotonicity_bound", mono.violations == 0, 1.0 - mono.worstRatio,
           "C = " + formatNumber(kMonotonicityConstant) + ", worst lhs/rhs " + formatNumber(mono.worstRatio));
  }

  void scaling(const Grid &g)
  {
    const auto &exp = cfg_.exponents;
    const auto reference = referenceEigenvalue(g, exp, cfg_.solver);
    const double mu = reference.lambda;
    rep_.summary["muHat"] = mu;
    rep_.summary["muHatResidual"] = reference.residual;
    dump("reference", g, reference.u, "a-free principal q-eigenfunction mu=" + formatNumber(mu));
    columns_ = {"t", "quotient", "relative_gap"};
    const auto rows = scalingLimit(g, exp, reference);
    double prevGap = std::numeric_limits<double>::infinity();
    double monotone = std::numeric_limits<double>::infinity();
    for (const auto &r : rows)
    {
      const double gap = r.quotient / mu - 1.0;
      rep_.results.push_back({{"t", r.t}, {"quotient", r.quotient}, {"relative_gap", gap}});
      monotone = std::min(monotone, prevGap - std::abs(gap));
      prevGap = std::abs(gap);
    }
    const double last = std::abs(rows.back().quotient / mu - 1.0);
    record("scaling.limit_within_1pct", last <= 0.01, 0.01 - last,
           "relative gap " + formatNumber(last) + " at t = " + formatNumber(rows.back().t));
    record("scaling.monotone_approach", monotone > 0.0, monotone, "gap to muHat shrinks with t");
    const double first = rows.front().quotient - mu;
    record("scaling.t1_above_muhat", first >= -1e-12 * mu, first, "quotient(u) - muHat at t = 1");
    record("eigensolve.residual_tolerance", reference.residual <= cfg_.solver.tolResidual,
           cfg_.solver.tolResidual - reference.residual, "reference eigenpair");
  }

  void rSweep()
  {
    const auto &exp = cfg_.exponents;
    columns_ = {"radius", "resolution", "muHat", "residual", "iterations", "status"};
    const double cellSize = cfg_.geometry.radius / cfg_.geometry.resolution;
    std::vector<json> rows(cfg_.radii.size());
    std::vector<std::optional<EigenPair>> found(cfg_.radii.size());
    parallelFor(cfg_.radii.size(), cfg_.threads, [&](std::size_t i) {
      Geometry geo = cfg_.geometry;
      geo.radius = cfg_.radii[i];
      geo.resolution = std::max(8, static_cast<int>(std::lround(geo.radius / cellSize)));
      json row{{"radius", geo.radius}, {"resolution", geo.resolution}};
      try
      {
        const Grid g = buildGrid(geo, cfg_.weights);
        auto e = referenceEigenvalue(g, exp, cfg_.solver);
        row["muHat"] = e.lambda;
        row["residual"] = e.residual;
        row["iterations"] = e.iterations;
        row["status"] = "ok";
        found[i] = std::move(e);
      }
      catch (const Error &err)
      {
        row["status"] = std::string("failed: ") + err.what();
      }
      rows[i] = std::move(row);
    });
    std::size_t done = 0;
    double minLambda = std::numeric_limits<double>::infinity(), maxResidual = 0.0;
    for (std::size_t i = 0; i < rows.size(); ++i)
    {
      rep_.results.push_back(rows[i]);
      if (found[i])
      {
        ++done;
        minLambda = std::min(minLambda, found[i]->lambda);
        maxResidual = std::max(maxResidual, found[i]->residual);
      }
    }
    record("cli.scan_robustness", rows.size() == cfg_.radii.size(), 0.0,
           std::to_string(done) + " of " + std::to_string(rows.size()) + " radii solved");
    if (done > 0)
    {
      record("eigensolve.eigenvalue_positivity", minLambda > 0.0, minLambda, "");
      record("eigensolve.residual_tolerance", maxResidual <= cfg_.solver.tolResidual,
             cfg_.solver.tolResidual - maxResidual, "");
    }
  }
};

} // namespace

RunReport run(const ExperimentConfig &config)
{
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  RunReport report;
  report.config = config;
  Runner runner(config, report);
  runner.execute();
  report.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  runner.writeOutputs();
  return report;
}

} // namespace dphase
