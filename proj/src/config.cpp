#include "dphase/config.hpp"

#include "dphase/error.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <regex>
#include <set>
#include <sstream>

namespace dphase
{

namespace pt = boost::property_tree;

namespace
{

const std::map<std::string, Task> &taskNames()
{
  static const std::map<std::string, Task> names{
      {"norms", Task::Norms},
      {"singlephase", Task::SinglePhase},
      {"nehariscan", Task::NehariScan},
      {"minmax", Task::MinMax},
      {"piconeaudit", Task::PiconeAudit},
      {"scalinglimit", Task::ScalingLimit},
      {"nonexistence", Task::Nonexistence},
      {"rsweep", Task::RSweep}};
  return names;
}

std::string lower(std::string s)
{
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::string trim(const std::string &s)
{
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos)
    return "";
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

double toDouble(const std::string &field, const std::string &text)
{
  try
  {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (trim(text.substr(used)).empty())
      return v;
  }
  catch (const std::exception &)
  {
  }
  throw ConfigError(field + ": expected a number, got '" + text + "'");
}

long toInteger(const std::string &field, const std::string &text)
{
  try
  {
    std::size_t used = 0;
    const long v = std::stol(text, &used);
    if (trim(text.substr(used)).empty())
      return v;
  }
  catch (const std::exception &)
  {
  }
  throw ConfigError(field + ": expected an integer, got '" + text + "'");
}

std::vector<double> toList(const std::string &field, const std::string &text)
{
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!trim(item).empty())
      out.push_back(toDouble(field, trim(item)));
  return out;
}

GeometryMode parseMode(const std::string &text)
{
  const std::string m = lower(trim(text));
  if (m == "interval")
    return GeometryMode::Interval1D;
  if (m == "radial")
    return GeometryMode::RadialN;
  if (m == "tensor2d")
    return GeometryMode::Tensor2D;
  throw ConfigError("geometry.mode: expected interval, radial or tensor2d, got '" + text + "'");
}

StepRule parseStepRule(const std::string &text)
{
  const std::string m = lower(trim(text));
  if (m == "armijo")
    return StepRule::Armijo;
  if (m == "fixed_decay" || m == "fixeddecay")
    return StepRule::FixedDecay;
  throw ConfigError("solver.step_rule: expected armijo or fixed_decay, got '" + text + "'");
}

} // namespace

std::string toString(Task task)
{
  switch (task)
  {
  case Task::Norms:
    return "Norms";
  case Task::SinglePhase:
    return "SinglePhase";
  case Task::NehariScan:
    return "NehariScan";
  case Task::MinMax:
    return "MinMax";
  case Task::PiconeAudit:
    return "PiconeAudit";
  case Task::ScalingLimit:
    return "ScalingLimit";
  case Task::Nonexistence:
    return "Nonexistence";
  case Task::RSweep:
    return "RSweep";
  }
  return "unknown";
}

Task parseTask(const std::string &name)
{
  const auto it = taskNames().find(lower(trim(name)));
  if (it == taskNames().end())
    throw ConfigError("task.name: unknown task '" + name + "'");
  return it->second;
}

WeightDescriptor parseWeight(const std::string &text)
{
  static const std::regex call(R"(^\s*([A-Za-z_]+)\s*\((.*)\)\s*$)");
  std::smatch m;
  if (!std::regex_match(text, m, call))
  {
    // a bare number is a constant weight
    return WeightDescriptor::constant(toDouble("weight", text));
  }
  const std::string kind = lower(m[1].str());
  if (kind == "constant" && trim(m[2].str()).find('=') == std::string::npos)
    return WeightDescriptor::constant(toDouble("weight constant", trim(m[2].str())));
  std::map<std::string, double> args;
  std::stringstream ss(m[2].str());
  std::string item;
  while (std::getline(ss, item, ','))
  {
    if (trim(item).empty())
      continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos)
      throw ConfigError("weight '" + text + "': expected key=value, got '" + trim(item) + "'");
    const std::string key = lower(trim(item.substr(0, eq)));
    args[key] = toDouble("weight " + kind + "." + key, trim(item.substr(eq + 1)));
  }

  std::set<std::string> allowed;
  WeightDescriptor d;
  auto get = [&](const std::string &key, double fallback) {
    allowed.insert(key);
    const auto it = args.find(key);
    return it == args.end() ? fallback : it->second;
  };
  if (kind == "constant")
    d = WeightDescriptor::constant(get("value", 1.0));
  else
  {
    const std::array<double, 2> center{get("x", 0.0), get("y", 0.0)};
    if (kind == "gaussian")
      d = WeightDescriptor::gaussian(get("amplitude", 1.0), get("width", 1.0), center);
    else if (kind == "compact_bump")
      d = WeightDescriptor::compactBump(get("amplitude", 1.0), get("radius", 1.0), center);
    else if (kind == "power_decay")
      d = WeightDescriptor::powerDecay(get("amplitude", 1.0), get("exponent", 1.0), center);
    else
      throw ConfigError("weight '" + text +
                        "': unknown kind (constant, gaussian, compact_bump, power_decay)");
  }
  for (const auto &[key, value] : args)
    if (!allowed.count(key))
      throw ConfigError("weight '" + text + "': unknown parameter '" + key + "'");
  return d;
}

void ExperimentConfig::validate() const
{
  try
  {
    geometry.validate();
  }
  catch (const Error &e)
  {
    throw ConfigError(std::string("geometry: ") + e.what());
  }
  try
  {
    exponents.validate();
  }
  catch (const Error &e)
  {
    throw ConfigError(std::string("exponents: ") + e.what());
  }
  if (exponents.N != geometry.dimension)
    throw ConfigError("exponents: N must equal geometry.dimension");
  try
  {
    solver.validate();
  }
  catch (const Error &e)
  {
    throw ConfigError(std::string(e.what()));
  }
  if (samples < 1)
    throw ConfigError("task.samples must be at least 1");
  if (threads < 1)
    throw ConfigError("solver.threads must be at least 1");
  if (!(weights.omegaExponent > 0.0))
    throw ConfigError("weights.omega_exponent must be positive");

  const bool pLessQ = exponents.regime() == Regime::PLessQ;
  switch (task)
  {
  case Task::SinglePhase:
  case Task::MinMax:
    if (modes < 1)
      throw ConfigError("task.modes must be at least 1");
    if (task == Task::MinMax && pLessQ)
      throw ConfigError("exponents: task MinMax needs q < p");
    break;
  case Task::NehariScan:
    if (!pLessQ)
      throw ConfigError("exponents: task NehariScan needs p < q");
    if (lambdas.empty() && multipliers.empty())
      throw ConfigError("task: NehariScan needs task.lambdas or task.multipliers");
    break;
  case Task::Nonexistence:
    if (!pLessQ)
      throw ConfigError("exponents: task Nonexistence needs p < q");
    if (multipliers.empty())
      throw ConfigError("task: Nonexistence needs task.multipliers");
    break;
  case Task::RSweep:
    if (radii.empty())
      throw ConfigError("task: RSweep needs task.radii");
    for (double r : radii)
      if (!(r > 0.0))
        throw ConfigError("task.radii: radii must be positive");
    break;
  case Task::Norms:
  case Task::PiconeAudit:
  case Task::ScalingLimit:
    break;
  }
}

ExperimentConfig parseConfig(std::istream &in)
{
  pt::ptree tree;
  try
  {
    pt::ini_parser::read_ini(in, tree);
  }
  catch (const pt::ini_parser_error &e)
  {
    throw ConfigError(std::string("config syntax: ") + e.what());
  }

  ExperimentConfig cfg;
  double p = cfg.exponents.p, q = cfg.exponents.q, r = cfg.exponents.r;

  for (const auto &[section, body] : tree)
  {
    if (body.empty() && !body.data().empty())
      throw ConfigError("config: key '" + section + "' must sit inside a section");
    for (const auto &[key, node] : body)
    {
      const std::string field = section + "." + key;
      const std::string value = trim(node.data());
      if (section == "geometry")
      {
        if (key == "mode")
          cfg.geometry.mode = parseMode(value);
        else if (key == "dimension")
          cfg.geometry.dimension = static_cast<int>(toInteger(field, value));
        else if (key == "radius")
          cfg.geometry.radius = toDouble(field, value);
        else if (key == "resolution")
          cfg.geometry.resolution = static_cast<int>(toInteger(field, value));
        else
          throw ConfigError(field + ": unknown key");
      }
      else if (section == "exponents")
      {
        if (key == "p")
          p = toDouble(field, value);
        else if (key == "q")
          q = toDouble(field, value);
        else if (key == "r")
          r = toDouble(field, value);
        else
          throw ConfigError(field + ": unknown key");
      }
      else if (section == "weights")
      {
        try
        {
          if (key == "a")
            cfg.weights.a = parseWeight(value);
          else if (key == "m1")
            cfg.weights.m1 = parseWeight(value);
          else if (key == "m2")
            cfg.weights.m2 = parseWeight(value);
          else if (key == "omega_exponent")
            cfg.weights.omegaExponent = toDouble(field, value);
          else
            throw ConfigError("unknown key");
        }
        catch (const ConfigError &e)
        {
          throw ConfigError(field + ": " + e.what());
        }
      }
      else if (section == "task")
      {
        if (key == "name")
          cfg.task = parseTask(value);
        else if (key == "modes")
          cfg.modes = static_cast<int>(toInteger(field, value));
        else if (key == "lambdas")
          cfg.lambdas = toList(field, value);
        else if (key == "multipliers")
          cfg.multipliers = toList(field, value);
        else if (key == "radii")
          cfg.radii = toList(field, value);
        else if (key == "samples")
          cfg.samples = static_cast<int>(toInteger(field, value));
        else
          throw ConfigError(field + ": unknown key");
      }
      else if (section == "solver")
      {
        auto &s = cfg.solver;
        if (key == "max_iters")
          s.maxIters = static_cast<int>(toInteger(field, value));
        else if (key == "step_rule")
          s.stepRule = parseStepRule(value);
        else if (key == "tol_residual")
          s.tolResidual = toDouble(field, value);
        else if (key == "tol_stagnation")
          s.tolStagnation = toDouble(field, value);
        else if (key == "restarts")
          s.restarts = static_cast<int>(toInteger(field, value));
        else if (key == "seed")
          s.seed = static_cast<std::uint64_t>(toInteger(field, value));
        else if (key == "deflation_strength")
          s.deflationStrength = toDouble(field, value);
        else if (key == "trace_every")
          s.traceEvery = static_cast<int>(toInteger(field, value));
        else if (key == "threads")
          cfg.threads = static_cast<int>(toInteger(field, value));
        else
          throw ConfigError(field + ": unknown key");
      }
      else if (section == "output")
      {
        if (key == "dir")
          cfg.output = value;
        else
          throw ConfigError(field + ": unknown key");
      }
      else
        throw ConfigError("config: unknown section [" + section + "]");
    }
  }
  cfg.exponents.p = p;
  cfg.exponents.q = q;
  cfg.exponents.r = r;
  cfg.exponents.N = cfg.geometry.dimension;
  return cfg;
}

ExperimentConfig loadConfig(const std::string &path)
{
  std::ifstream in(path);
  if (!in)
    throw ConfigError("cannot open config file '" + path + "'");
  return parseConfig(in);
}

} // namespace dphase
