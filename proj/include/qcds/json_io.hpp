#pragma once

#include "qcds/model.hpp"

#include <json.hpp>

namespace qcds {

nlohmann::json to_json(const ModelConfig& cfg);
// Missing keys keep their defaults; unknown keys are ignored.
ModelConfig config_from_json(const nlohmann::json& j);

// FNV-1a 64-bit over the canonical serialized config.
std::string config_digest(const ModelConfig& cfg);

} // namespace qcds
