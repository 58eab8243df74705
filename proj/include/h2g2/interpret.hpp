#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "h2g2/graph.hpp"
#include "h2g2/model.hpp"

namespace h2g2 {

/// The learned dynamic graph structures: one row-stochastic m x m matrix per
/// stacked generative layer. Orientation convention, fixed everywhere:
/// entry A[i][j] is the weight of the flow FROM column modality j INTO row
/// modality i, because row i of the update aggregates over columns.
struct AdjacencySequence {
    std::vector<std::string> modality_names;
    std::vector<Matrix> matrices;
};

/// Pure function of the parameters; no forward pass involved.
AdjacencySequence extract_adjacency_sequence(const ModelParams& params,
                                             const DatasetSchema& schema);

struct Flow {
    std::string source;
    std::string target;
    double weight = 0.0;
};

/// All m^2 ordered flows of one layer, heaviest first; ties break by
/// (source, target) name order.
struct FlowRanking {
    std::size_t layer = 0;
    std::vector<Flow> flows;
};

FlowRanking rank_flows(const AdjacencySequence& seq, std::size_t layer);

/// Total outgoing weight per source modality (column sums), descending.
std::vector<std::pair<std::string, double>> outgoing_weight_ranking(const AdjacencySequence& seq,
                                                                    std::size_t layer);

/// An ordered modality walk traversing one learned edge per layer; its score
/// is the product of the traversed weights.
struct MetaPath {
    std::vector<std::string> nodes;  // length = layer count + 1
    double score = 0.0;
};

/// Exhaustive enumeration over all m^(L+1) walks (m <= 16 enforced);
/// returns the k best, ties by lexicographic node-name sequence.
std::vector<MetaPath> top_meta_paths(const AdjacencySequence& seq, std::size_t k);

nlohmann::json interpret_to_json(const AdjacencySequence& seq, std::size_t top_k);

/// Color heatmap of one layer as a binary PPM, modality names on both axes.
/// Cell shade is normalized to the layer's maximum entry.
void write_heatmap_ppm(const std::filesystem::path& path, const Matrix& matrix,
                       const std::vector<std::string>& names,
                       const std::string& header_comment = {});

}  // namespace h2g2
