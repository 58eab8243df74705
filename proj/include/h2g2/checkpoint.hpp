#pragma once

#include <filesystem>

#include "json.hpp"

#include "h2g2/graph.hpp"
#include "h2g2/model.hpp"

namespace h2g2 {

struct Checkpoint {
    ModelParams params;
    DatasetSchema schema;
    nlohmann::json config_echo;  // whatever the producing run wants to record
};

nlohmann::json checkpoint_to_json(const ModelParams& params, const DatasetSchema& schema,
                                  const nlohmann::json& config_echo = nlohmann::json::object());

/// Refuses to load if the embedded schema hash does not match the schema,
/// if the version is unknown, or if any weight is malformed.
Checkpoint checkpoint_from_json(const nlohmann::json& j);

void save_checkpoint(const std::filesystem::path& path, const ModelParams& params,
                     const DatasetSchema& schema,
                     const nlohmann::json& config_echo = nlohmann::json::object());

Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace h2g2
