#pragma once

#include "dphase/config.hpp"

#include <nlohmann/json.hpp>

#include <string>
#include <vector>

namespace dphase
{

/// Outcome of one named invariant. `slack` is the signed distance to the
/// threshold in the check's own units, negative on failure. Invariants the
/// task does not exercise stay unevaluated and count as passing.
struct InvariantResult
{
  std::string name;
  bool evaluated = false;
  bool pass = true;
  double slack = 0.0;
  bool hard = true;
  std::string detail;
};

/// Every invariant name a report carries, in report order.
const std::vector<std::string> &invariantNames();

struct RunReport
{
  ExperimentConfig config;
  /// One object per CSV row.
  nlohmann::json results = nlohmann::json::array();
  /// Task-level scalars such as the reference eigenvalue.
  nlohmann::json summary = nlohmann::json::object();
  std::vector<InvariantResult> invariants;
  std::vector<std::string> warnings;
  double seconds = 0.0;

  /// Throws std::out_of_range for an unknown name.
  const InvariantResult &invariant(const std::string &name) const;
  bool hardInvariantsPass() const;
  nlohmann::json toJson() const;
};

/// Runs the configured task and writes report.json, results.csv and *.field
/// dumps into config.output. Throws ConfigError for an invalid config and
/// InvalidGeometry / InvalidWeight when the grid cannot be built.
RunReport run(const ExperimentConfig &config);

} // namespace dphase
