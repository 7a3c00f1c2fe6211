#pragma once

// Restart files.
//
// Moment form:   {"t": ..., "c": [...], "cdot": [...], "w": [...], "m": [...]}
// Sampled form:  {"t": ..., "c": [...], "cdot": [...], "ds": ..., "eta": [[...], ...]}

#include <iosfwd>

#include <json.hpp>

#include "beam/dynamics.hpp"

namespace beam {

nlohmann::json snapshot_to_json(const StateSnapshot& snap);
/// Throws std::invalid_argument on missing or malformed fields.
StateSnapshot snapshot_from_json(const nlohmann::json& j);

}  // namespace beam
