#include "dphase/serialize.hpp"

namespace dphase
{

void to_json(nlohmann::json &j, const NormReport &r)
{
  j = {{"modular", r.modular},           {"luxemburg", r.luxemburg},
       {"lowerSandwich", r.lowerSandwich}, {"upperSandwich", r.upperSandwich},
       {"eNorm", r.eNorm},               {"lqNorm", r.lqNorm}};
}

void to_json(nlohmann::json &j, const EigenPair &e)
{
  j = {{"lambda", e.lambda},
       {"residual", e.residual},
       {"iterations", e.iterations},
       {"regime", toString(e.regime)},
       {"constraintValue", e.constraintValue},
       {"heuristic", e.heuristic},
       {"criticalValue", e.criticalValue},
       {"restartColinearity", e.restartColinearity},
       {"traceSnapshots", e.trace.size()}};
  if (e.regime == SolveRegime::MinMaxQLessP && e.upperBound > 0.0)
    j["upperBound"] = e.upperBound;
}

void to_json(nlohmann::json &j, const Degenerate &d)
{
  j = {{"reason", d.reason}, {"muHat", d.muHat}, {"admissibleStarts", d.admissibleStarts}};
}

void to_json(nlohmann::json &j, const ExperimentConfig &c)
{
  const auto &s = c.solver;
  j = {{"geometry",
        {{"mode", toString(c.geometry.mode)},
         {"dimension", c.geometry.dimension},
         {"radius", c.geometry.radius},
         {"resolution", c.geometry.resolution}}},
       {"exponents", {{"p", c.exponents.p}, {"q", c.exponents.q}, {"r", c.exponents.r}, {"N", c.exponents.N}}},
       {"weights",
        {{"a", c.weights.a.describe()},
         {"m1", c.weights.m1.describe()},
         {"m2", c.weights.m2.describe()},
         {"omega_exponent", c.weights.omegaExponent}}},
       {"task",
        {{"name", toString(c.task)},
         {"modes", c.modes},
         {"lambdas", c.lambdas},
         {"multipliers", c.multipliers},
         {"radii", c.radii},
         {"samples", c.samples}}},
       {"solver",
        {{"max_iters", s.maxIters},
         {"step_rule", toString(s.stepRule)},
         {"tol_residual", s.tolResidual},
         {"tol_stagnation", s.tolStagnation},
         {"restarts", s.restarts},
         {"seed", s.seed},
         {"deflation_strength", s.deflationStrength},
         {"trace_every", s.traceEvery},
         {"threads", c.threads},
         {"monotonicity_constant", kMonotonicityConstant}}},
       {"output", {{"dir", c.output}}}};
}

} // namespace dphase
