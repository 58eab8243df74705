#include "h2g2/interpret.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>

#include "h2g2/contracts.hpp"

namespace h2g2 {

namespace {

constexpr std::size_t kMaxEnumeratedModalities = 16;

// 5x7 glyphs for axis labels, one byte per row, low 5 bits used.
const std::map<char, std::array<std::uint8_t, 7>>& glyphs() {
    static const std::map<char, std::array<std::uint8_t, 7>> table = {
        {'A', {0x0E, 0x11, 0x11, 0x1F, 0x11, 0x11, 0x11}},
        {'B', {0x1E, 0x11, 0x11, 0x1E, 0x11, 0x11, 0x1E}},
        {'C', {0x0E, 0x11, 0x10, 0x10, 0x10, 0x11, 0x0E}},
        {'D', {0x1E, 0x11, 0x11, 0x11, 0x11, 0x11, 0x1E}},
        {'E', {0x1F, 0x10, 0x10, 0x1E, 0x10, 0x10, 0x1F}},
        {'F', {0x1F, 0x10, 0x10, 0x1E, 0x10, 0x10, 0x10}},
        {'G', {0x0E, 0x11, 0x10, 0x17, 0x11, 0x11, 0x0E}},
        {'H', {0x11, 0x11, 0x11, 0x1F, 0x11, 0x11, 0x11}},
        {'I', {0x0E, 0x04, 0x04, 0x04, 0x04, 0x04, 0x0E}},
        {'J', {0x07, 0x02, 0x02, 0x02, 0x02, 0x12, 0x0C}},
        {'K', {0x11, 0x12, 0x14, 0x18, 0x14, 0x12, 0x11}},
        {'L', {0x10, 0x10, 0x10, 0x10, 0x10, 0x10, 0x1F}},
        {'M', {0x11, 0x1B, 0x15, 0x15, 0x11, 0x11, 0x11}},
        {'N', {0x11, 0x19, 0x15, 0x13, 0x11, 0x11, 0x11}},
        {'O', {0x0E, 0x11, 0x11, 0x11, 0x11, 0x11, 0x0E}},
        {'P', {0x1E, 0x11, 0x11, 0x1E, 0x10, 0x10, 0x10}},
        {'Q', {0x0E, 0x11, 0x11, 0x11, 0x15, 0x12, 0x0D}},
        {'R', {0x1E, 0x11, 0x11, 0x1E, 0x14, 0x12, 0x11}},
        {'S', {0x0F, 0x10, 0x10, 0x0E, 0x01, 0x01, 0x1E}},
        {'T', {0x1F, 0x04, 0x04, 0x04, 0x04, 0x04, 0x04}},
        {'U', {0x11, 0x11, 0x11, 0x11, 0x11, 0x11, 0x0E}},
        {'V', {0x11, 0x11, 0x11, 0x11, 0x11, 0x0A, 0x04}},
        {'W', {0x11, 0x11, 0x11, 0x15, 0x15, 0x1B, 0x11}},
        {'X', {0x11, 0x11, 0x0A, 0x04, 0x0A, 0x11, 0x11}},
        {'Y', {0x11, 0x11, 0x0A, 0x04, 0x04, 0x04, 0x04}},
        {'Z', {0x1F, 0x01, 0x02, 0x04, 0x08, 0x10, 0x1F}},
        {'0', {0x0E, 0x11, 0x13, 0x15, 0x19, 0x11, 0x0E}},
        {'1', {0x04, 0x0C, 0x04, 0x04, 0x04, 0x04, 0x0E}},
        {'2', {0x0E, 0x11, 0x01, 0x02, 0x04, 0x08, 0x1F}},
        {'3', {0x0E, 0x11, 0x01, 0x06, 0x01, 0x11, 0x0E}},
        {'4', {0x02, 0x06, 0x0A, 0x12, 0x1F, 0x02, 0x02}},
        {'5', {0x1F, 0x10, 0x1E, 0x01, 0x01, 0x11, 0x0E}},
        {'6', {0x06, 0x08, 0x10, 0x1E, 0x11, 0x11, 0x0E}},
        {'7', {0x1F, 0x01, 0x02, 0x04, 0x08, 0x08, 0x08}},
        {'8', {0x0E, 0x11, 0x11, 0x0E, 0x11, 0x11, 0x0E}},
        {'9', {0x0E, 0x11, 0x11, 0x0F, 0x01, 0x02, 0x0C}},
        {'_', {0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x1F}},
        {'-', {0x00, 0x00, 0x00, 0x1F, 0x00, 0x00, 0x00}},
    };
    return table;
}

struct Image {
    std::size_t width, height;
    std::vector<std::uint8_t> rgb;  // 3 bytes per pixel

    Image(std::size_t w, std::size_t h) : width(w), height(h), rgb(w * h * 3, 255) {}

    void set(std::size_t x, std::size_t y, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
        if (x >= width || y >= height) return;
        const std::size_t idx = (y * width + x) * 3;
        rgb[idx] = r;
        rgb[idx + 1] = g;
        rgb[idx + 2] = b;
    }
};

void draw_text(Image& img, std::size_t x, std::size_t y, const std::string& text) {
    const auto& table = glyphs();
    for (char raw : text) {
        const char c = static_cast<char>(std::toupper(static_cast<unsigned char>(raw)));
        auto it = table.find(c);
        if (it != table.end()) {
            for (std::size_t row = 0; row < 7; ++row) {
                for (std::size_t col = 0; col < 5; ++col) {
                    if (it->second[row] & (1u << (4 - col))) {
                        img.set(x + col, y + row, 0, 0, 0);
                    }
                }
            }
        }
        x += 6;
    }
}

// dark blue -> warm yellow ramp
void heat_color(double t, std::uint8_t& r, std::uint8_t& g, std::uint8_t& b) {
    t = std::clamp(t, 0.0, 1.0);
    r = static_cast<std::uint8_t>(20 + 235 * t);
    g = static_cast<std::uint8_t>(25 + 195 * t);
    b = static_cast<std::uint8_t>(90 * (1.0 - t) + 40 * t);
}

}  // namespace

AdjacencySequence extract_adjacency_sequence(const ModelParams& params,
                                             const DatasetSchema& schema) {
    require(params.h2g2.phi.empty() || params.h2g2.phi[0].rows() == schema.modality_count(),
            "extract_adjacency_sequence: params do not match schema");
    AdjacencySequence seq;
    seq.modality_names = schema.modality_names();
    seq.matrices.reserve(params.h2g2.phi.size());
    for (const Matrix& phi : params.h2g2.phi) {
        seq.matrices.push_back(row_softmax(phi));
    }
    return seq;
}

FlowRanking rank_flows(const AdjacencySequence& seq, std::size_t layer) {
    require(layer < seq.matrices.size(), "rank_flows: layer " + std::to_string(layer) +
                                             " out of range [0, " +
                                             std::to_string(seq.matrices.size()) + ")");
    const Matrix& a = seq.matrices[layer];
    FlowRanking ranking;
    ranking.layer = layer;
    ranking.flows.reserve(a.rows() * a.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < a.cols(); ++j) {
            // A[i][j]: column modality j feeds row modality i
            ranking.flows.push_back({seq.modality_names[j], seq.modality_names[i], a(i, j)});
        }
    }
    std::sort(ranking.flows.begin(), ranking.flows.end(), [](const Flow& x, const Flow& y) {
        if (x.weight != y.weight) return x.weight > y.weight;
        return std::tie(x.source, x.target) < std::tie(y.source, y.target);
    });
    return ranking;
}

std::vector<std::pair<std::string, double>> outgoing_weight_ranking(const AdjacencySequence& seq,
                                                                    std::size_t layer) {
    require(layer < seq.matrices.size(), "outgoing_weight_ranking: layer out of range");
    const Matrix& a = seq.matrices[layer];
    std::vector<std::pair<std::string, double>> totals;
    for (std::size_t j = 0; j < a.cols(); ++j) {
        double sum = 0.0;
        for (std::size_t i = 0; i < a.rows(); ++i) {
            sum += a(i, j);
        }
        totals.emplace_back(seq.modality_names[j], sum);
    }
    std::sort(totals.begin(), totals.end(), [](const auto& x, const auto& y) {
        if (x.second != y.second) return x.second > y.second;
        return x.first < y.first;
    });
    return totals;
}

std::vector<MetaPath> top_meta_paths(const AdjacencySequence& seq, std::size_t k) {
    require(k >= 1, "top_meta_paths: k must be positive");
    const std::size_t m = seq.modality_names.size();
    require(m <= kMaxEnumeratedModalities,
            "top_meta_paths: " + std::to_string(m) + " modalities exceed the exhaustive " +
                "enumeration limit of " + std::to_string(kMaxEnumeratedModalities) +
                " (m^(L+1) walks)");
    const std::size_t layers = seq.matrices.size();

    std::vector<MetaPath> all;
    std::vector<std::size_t> walk(layers + 1, 0);
    while (true) {
        double score = 1.0;
        for (std::size_t l = 0; l < layers; ++l) {
            score *= seq.matrices[l](walk[l + 1], walk[l]);  // step l flows walk[l] -> walk[l+1]
        }
        MetaPath path;
        path.score = score;
        for (std::size_t idx : walk) {
            path.nodes.push_back(seq.modality_names[idx]);
        }
        all.push_back(std::move(path));

        std::size_t pos = walk.size();
        while (pos > 0 && ++walk[pos - 1] == m) {
            walk[--pos] = 0;
        }
        if (pos == 0) break;
    }

    std::sort(all.begin(), all.end(), [](const MetaPath& x, const MetaPath& y) {
        if (x.score != y.score) return x.score > y.score;
        return x.nodes < y.nodes;
    });
    if (all.size() > k) {
        all.resize(k);
    }
    return all;
}

nlohmann::json interpret_to_json(const AdjacencySequence& seq, std::size_t top_k) {
    nlohmann::json layers = nlohmann::json::array();
    nlohmann::json flows = nlohmann::json::array();
    for (std::size_t l = 0; l < seq.matrices.size(); ++l) {
        const Matrix& a = seq.matrices[l];
        layers.push_back(std::vector<double>(a.data().begin(), a.data().end()));

        nlohmann::json layer_flows = nlohmann::json::array();
        for (const Flow& f : rank_flows(seq, l).flows) {
            layer_flows.push_back(
                {{"source", f.source}, {"target", f.target}, {"weight", f.weight}});
        }
        flows.push_back({{"layer", l}, {"flows", layer_flows}});
    }
    nlohmann::json paths = nlohmann::json::array();
    for (const MetaPath& p : top_meta_paths(seq, top_k)) {
        paths.push_back({{"path", p.nodes}, {"score", p.score}});
    }
    return {{"modalities", seq.modality_names},
            {"orientation", "A[i][j] = j->i"},
            {"layers", layers},
            {"top_flows", flows},
            {"top_meta_paths", paths}};
}

void write_heatmap_ppm(const std::filesystem::path& path, const Matrix& matrix,
                       const std::vector<std::string>& names,
                       const std::string& header_comment) {
    require(matrix.rows() == names.size() && matrix.cols() == names.size(),
            "write_heatmap_ppm: name count does not match matrix");

    std::size_t longest = 0;
    for (const auto& n : names) {
        longest = std::max(longest, n.size());
    }
    const std::size_t cell = 32;
    const std::size_t margin = std::max<std::size_t>(6 * longest + 8, 24);
    const std::size_t w = margin + cell * matrix.cols();
    const std::size_t h = margin + cell * matrix.rows();
    Image img(w, h);

    double max_entry = 0.0;
    for (double v : matrix.data()) {
        max_entry = std::max(max_entry, v);
    }
    if (max_entry <= 0.0) max_entry = 1.0;

    for (std::size_t i = 0; i < matrix.rows(); ++i) {
        for (std::size_t j = 0; j < matrix.cols(); ++j) {
            std::uint8_t r, g, b;
            heat_color(matrix(i, j) / max_entry, r, g, b);
            for (std::size_t y = 0; y < cell - 1; ++y) {
                for (std::size_t x = 0; x < cell - 1; ++x) {
                    img.set(margin + j * cell + x, margin + i * cell + y, r, g, b);
                }
            }
        }
    }
    for (std::size_t i = 0; i < names.size(); ++i) {
        draw_text(img, 2, margin + i * cell + (cell - 7) / 2, names[i]);
        draw_text(img, margin + i * cell + 2, (margin - 7) / 2, names[i]);
    }

    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("write_heatmap_ppm: cannot open " + path.string());
    }
    out << "P6\n";
    if (!header_comment.empty()) {
        out << "# " << header_comment << "\n";
    }
    out << "# rows: aggregating modality, cols: contributing modality, shade: weight / "
        << "layer max\n";
    out << w << " " << h << "\n255\n";
    out.write(reinterpret_cast<const char*>(img.rgb.data()),
              static_cast<std::streamsize>(img.rgb.size()));
    if (!out) {
        throw std::runtime_error("write_heatmap_ppm: write to " + path.string() + " failed");
    }
}

}  // namespace h2g2
