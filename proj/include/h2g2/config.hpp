#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "h2g2/data.hpp"
#include "h2g2/graph.hpp"
#include "h2g2/model.hpp"
#include "h2g2/train.hpp"

namespace h2g2 {

/// Raised for unusable configs; the CLI maps it to exit status 2.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A full experiment description: schema, model and training settings, and
/// exactly one data source (a manifest on disk or an in-process generator).
struct RunConfig {
    DatasetSchema schema = DatasetSchema::cogpilot();
    ModelHyper model;
    TrainConfig train;
    std::optional<std::filesystem::path> manifest_path;
    std::optional<SynthConfig> synth;
    std::vector<std::string> keep_modalities;  // empty = keep all
    bool normalize = true;                     // z-score on manifest ingestion
    std::optional<std::filesystem::path> out_dir;
    unsigned jobs = 1;
    nlohmann::json echo;  // the parsed document, for embedding in outputs
};

/// Parses and validates; referenced paths must resolve now, not at run time.
RunConfig parse_run_config(const nlohmann::json& j,
                           const std::filesystem::path& base_dir = ".");
RunConfig load_run_config(const std::filesystem::path& path);

SynthConfig load_synth_config(const std::filesystem::path& path);

/// Materializes the configured data source, applying the modality filter.
/// Returns the dataset with the (possibly filtered) schema.
std::pair<std::vector<HierarchicalSample>, DatasetSchema> load_dataset(const RunConfig& cfg);

}  // namespace h2g2
