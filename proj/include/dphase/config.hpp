#pragma once

#include "dphase/eigensolve.hpp"
#include "dphase/grid.hpp"
#include "dphase/modular.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace dphase
{

enum class Task
{
  Norms,
  SinglePhase,
  NehariScan,
  MinMax,
  PiconeAudit,
  ScalingLimit,
  Nonexistence,
  RSweep
};

std::string toString(Task task);
/// Accepts the enumerator name in any letter case. Throws ConfigError.
Task parseTask(const std::string &name);

/// Parses `kind(key=value, ...)`, e.g. `gaussian(amplitude=1, width=0.5)`.
/// Kinds: constant(value), gaussian(amplitude, width, x, y),
/// compact_bump(amplitude, radius, x, y), power_decay(amplitude, exponent, x, y).
WeightDescriptor parseWeight(const std::string &text);

struct ExperimentConfig
{
  Geometry geometry;
  Exponents exponents{2.0, 3.0, 2.0, 4};
  WeightSpec weights;
  Task task = Task::Norms;
  SolverConfig solver;
  std::string output = "out";

  /// Modes for SinglePhase (k) and MinMax (K).
  int modes = 1;
  /// NehariScan: explicit lambdas, or multipliers of the reference eigenvalue.
  std::vector<double> lambdas;
  std::vector<double> multipliers;
  /// RSweep radii; the cell size of `geometry` is kept fixed.
  std::vector<double> radii;
  /// Random fields or pairs per audit.
  int samples = 200;
  int threads = 1;

  /// Task-specific checks. Throws ConfigError naming the offending field.
  void validate() const;
};

/// Sectioned key=value text ([geometry], [exponents], [weights], [task],
/// [solver], [output]). Unknown sections or keys are errors.
ExperimentConfig parseConfig(std::istream &in);
ExperimentConfig loadConfig(const std::string &path);

} // namespace dphase
