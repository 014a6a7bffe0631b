#pragma once

#include "dphase/config.hpp"
#include "dphase/eigensolve.hpp"
#include "dphase/modular.hpp"

#include <nlohmann/json.hpp>

namespace dphase
{

/// Keys: modular, luxemburg, lowerSandwich, upperSandwich, eNorm, lqNorm.
void to_json(nlohmann::json &j, const NormReport &r);

/// Scalar metadata only; the eigenfunction goes to a field dump.
void to_json(nlohmann::json &j, const EigenPair &e);
void to_json(nlohmann::json &j, const Degenerate &d);

/// Every field, defaults included.
void to_json(nlohmann::json &j, const ExperimentConfig &c);

} // namespace dphase
