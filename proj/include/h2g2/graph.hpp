#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "h2g2/matrix.hpp"

namespace h2g2 {

/// One physiological sensing stream; a channel subgraph at the lower level
/// and a single node at the upper level.
struct ModalitySchema {
    std::string name;
    std::size_t channel_count = 1;
    std::string unit;
};

/// Ordered modality list. The order is canonical: it fixes the row order of
/// the modality representation matrix throughout the model.
struct DatasetSchema {
    std::vector<ModalitySchema> modalities;
    std::size_t feature_len = 100;
    std::size_t class_count = 2;

    std::size_t modality_count() const { return modalities.size(); }
    std::optional<std::size_t> index_of(const std::string& name) const;
    std::vector<std::string> modality_names() const;

    /// The 9-modality CogPilot channel layout.
    static DatasetSchema cogpilot();
};

void validate_schema(const DatasetSchema& schema);

nlohmann::json schema_to_json(const DatasetSchema& schema);
DatasetSchema schema_from_json(const nlohmann::json& j);

/// FNV-1a over the canonical schema serialization, as a 16-hex-digit string.
std::string schema_hash(const DatasetSchema& schema);

/// One labeled multi-modal recording: a channel_count x feature_len matrix
/// per schema modality, in schema order. A missing modality is an empty slot.
struct HierarchicalSample {
    std::string subject_id;
    std::string sample_id;
    std::size_t label = 0;
    std::vector<Matrix> features;
};

/// D^{-1/2} (A + I) D^{-1/2} for a binary symmetric adjacency; constant per
/// schema, computed once and cached.
class NormalizedAdjacency {
public:
    explicit NormalizedAdjacency(Matrix normalized) : matrix_(std::move(normalized)) {}
    const Matrix& matrix() const { return matrix_; }
    std::size_t nodes() const { return matrix_.rows(); }

private:
    Matrix matrix_;
};

/// Binary adjacency of the complete graph on n nodes (zero diagonal).
Matrix build_complete_subgraph(std::size_t n);

NormalizedAdjacency normalize_adjacency(const Matrix& a);

/// Cached per-modality normalized adjacencies, in schema order.
std::vector<NormalizedAdjacency> build_modality_adjacencies(const DatasetSchema& schema);

/// Collects every violation (shape, presence, finiteness, label range);
/// empty result means the sample conforms.
std::vector<std::string> validate_sample(const HierarchicalSample& s, const DatasetSchema& schema);

}  // namespace h2g2
