#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "h2g2/graph.hpp"

namespace h2g2 {

/// Window-mean resampling to target_len points. Signals shorter than the
/// target are linearly interpolated up first.
std::vector<double> downsample(std::span<const double> signal, std::size_t target_len);

struct ManifestEntry {
    std::string subject;
    std::string sample;
    std::size_t label = 0;
    std::map<std::string, std::string> files;  // modality name -> path
};

struct RecordingManifest {
    std::filesystem::path root;
    std::vector<ManifestEntry> entries;
};

/// Parses the manifest JSON. A relative root resolves against the manifest's
/// own directory; entry paths resolve against the root.
RecordingManifest load_manifest(const std::filesystem::path& path);

nlohmann::json manifest_to_json(const RecordingManifest& manifest);

struct LoadOptions {
    bool zscore = true;  // per-channel standardization after downsampling
};

struct SubjectExclusion {
    std::string subject;
    std::string reason;
};

struct LoadResult {
    std::vector<HierarchicalSample> samples;
    std::vector<SubjectExclusion> exclusions;
};

/// Reads every entry's modality CSVs, downsamples channels to the schema
/// feature length and assembles samples. Subjects with any missing or
/// unreadable modality are dropped whole and reported; zero usable subjects
/// is a hard error.
LoadResult load_recordings(const RecordingManifest& manifest, const DatasetSchema& schema,
                           const LoadOptions& options = {});

/// Projects the schema and every sample onto the kept modalities,
/// preserving schema order.
std::pair<std::vector<HierarchicalSample>, DatasetSchema> filter_modalities(
    const std::vector<HierarchicalSample>& dataset, const DatasetSchema& schema,
    const std::vector<std::string>& keep);

/// Names of the three eye-tracking modalities in the CogPilot layout.
std::vector<std::string> etk_modalities();
/// Everything except the eye-tracking modalities.
std::vector<std::string> no_etk_modalities(const DatasetSchema& schema);

struct SynthConfig {
    std::size_t subject_count = 8;
    std::size_t samples_per_subject = 20;
    DatasetSchema schema = DatasetSchema::cogpilot();
    std::string planted_source = "EO";
    std::string planted_target = "PPG";
    double coupling_strength = 1.0;
    double noise_sigma = 0.3;
    std::uint64_t seed = 7;
};

void validate_synth_config(const SynthConfig& cfg);

nlohmann::json synth_config_to_json(const SynthConfig& cfg);
SynthConfig synth_config_from_json(const nlohmann::json& j);

/// Seeded generator with a planted cross-modal dependency: the source
/// modality carries a waveform whose amplitude is (1 + coupling * label) and
/// the target carries the same waveform delayed and scaled by
/// coupling * label, on top of per-subject offsets and Gaussian noise.
std::vector<HierarchicalSample> generate_synthetic(const SynthConfig& cfg);

/// Writes dataset as manifest.json plus one CSV per modality per sample
/// under out_dir; the layout load_recordings reads back bit-exactly.
void export_dataset(const std::vector<HierarchicalSample>& dataset, const DatasetSchema& schema,
                    const std::filesystem::path& out_dir);

}  // namespace h2g2
