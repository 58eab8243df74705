#include "h2g2/graph.hpp"

#include <cmath>
#include <set>

#include "h2g2/contracts.hpp"

namespace h2g2 {

std::optional<std::size_t> DatasetSchema::index_of(const std::string& name) const {
    for (std::size_t i = 0; i < modalities.size(); ++i) {
        if (modalities[i].name == name) return i;
    }
    return std::nullopt;
}

std::vector<std::string> DatasetSchema::modality_names() const {
    std::vector<std::string> names;
    names.reserve(modalities.size());
    for (const auto& m : modalities) {
        names.push_back(m.name);
    }
    return names;
}

DatasetSchema DatasetSchema::cogpilot() {
    DatasetSchema s;
    s.feature_len = 100;
    s.class_count = 2;
    s.modalities = {
        {"EMG", 2, "mV"},    {"PPG", 1, "mV"},     {"EDA", 1, "kOhms"},
        {"ECG", 1, "mV"},    {"RES", 1, "mV"},     {"ACC", 6, "m/s^2"},
        {"GD", 6, "ratio"},  {"PD", 2, "mm"},      {"EO", 2, "ratio"},
    };
    return s;
}

void validate_schema(const DatasetSchema& schema) {
    require(!schema.modalities.empty(), "schema: at least one modality required");
    require(schema.feature_len >= 1, "schema: feature_len must be positive");
    require(schema.class_count >= 1, "schema: class_count must be positive");
    std::set<std::string> seen;
    for (const auto& m : schema.modalities) {
        require(!m.name.empty(), "schema: modality name must be nonempty");
        require(m.channel_count >= 1, "schema: modality " + m.name + " has zero channels");
        require(seen.insert(m.name).second, "schema: duplicate modality name " + m.name);
    }
}

nlohmann::json schema_to_json(const DatasetSchema& schema) {
    nlohmann::json mods = nlohmann::json::array();
    for (const auto& m : schema.modalities) {
        mods.push_back({{"name", m.name}, {"channels", m.channel_count}, {"unit", m.unit}});
    }
    return {{"feature_len", schema.feature_len},
            {"class_count", schema.class_count},
            {"modalities", mods}};
}

DatasetSchema schema_from_json(const nlohmann::json& j) {
    DatasetSchema s;
    s.feature_len = j.at("feature_len").get<std::size_t>();
    s.class_count = j.at("class_count").get<std::size_t>();
    for (const auto& m : j.at("modalities")) {
        s.modalities.push_back({m.at("name").get<std::string>(),
                                m.at("channels").get<std::size_t>(),
                                m.value("unit", std::string{})});
    }
    validate_schema(s);
    return s;
}

std::string schema_hash(const DatasetSchema& schema) {
    std::string canonical;
    for (const auto& m : schema.modalities) {
        canonical += m.name + ":" + std::to_string(m.channel_count) + ":" + m.unit + ";";
    }
    canonical += "|" + std::to_string(schema.feature_len) + "|" +
                 std::to_string(schema.class_count);

    std::uint64_t h = 1469598103934665603ull;  // FNV-1a 64
    for (unsigned char c : canonical) {
        h ^= c;
        h *= 1099511628211ull;
    }
    static const char* hex = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[i] = hex[h & 0xf];
        h >>= 4;
    }
    return out;
}

Matrix build_complete_subgraph(std::size_t n) {
    require(n >= 1, "build_complete_subgraph: n must be positive");
    Matrix a(n, n, 1.0);
    for (std::size_t i = 0; i < n; ++i) {
        a(i, i) = 0.0;
    }
    return a;
}

NormalizedAdjacency normalize_adjacency(const Matrix& a) {
    require(!a.empty() && a.rows() == a.cols(),
            "normalize_adjacency: expected a square matrix, got " + a.shape());
    const std::size_t n = a.rows();
    for (std::size_t i = 0; i < n; ++i) {
        require(a(i, i) == 0.0, "normalize_adjacency: nonzero diagonal at " + std::to_string(i));
        for (std::size_t j = 0; j < n; ++j) {
            require(a(i, j) == 0.0 || a(i, j) == 1.0,
                    "normalize_adjacency: entries must be 0 or 1");
            require(a(i, j) == a(j, i), "normalize_adjacency: matrix is not symmetric");
        }
    }

    // deg_i = row sum of (A + I); result = D^{-1/2} (A + I) D^{-1/2}
    std::vector<double> inv_sqrt_deg(n);
    for (std::size_t i = 0; i < n; ++i) {
        double deg = 1.0;
        for (std::size_t j = 0; j < n; ++j) {
            deg += a(i, j);
        }
        inv_sqrt_deg[i] = 1.0 / std::sqrt(deg);
    }
    Matrix out(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const double with_loops = a(i, j) + (i == j ? 1.0 : 0.0);
            out(i, j) = inv_sqrt_deg[i] * with_loops * inv_sqrt_deg[j];
        }
    }
    return NormalizedAdjacency(std::move(out));
}

std::vector<NormalizedAdjacency> build_modality_adjacencies(const DatasetSchema& schema) {
    std::vector<NormalizedAdjacency> norms;
    norms.reserve(schema.modalities.size());
    for (const auto& m : schema.modalities) {
        norms.push_back(normalize_adjacency(build_complete_subgraph(m.channel_count)));
    }
    return norms;
}

std::vector<std::string> validate_sample(const HierarchicalSample& s,
                                         const DatasetSchema& schema) {
    std::vector<std::string> violations;
    if (s.label >= schema.class_count) {
        violations.push_back("label " + std::to_string(s.label) + " outside [0, " +
                             std::to_string(schema.class_count) + ")");
    }
    for (std::size_t i = 0; i < schema.modalities.size(); ++i) {
        const auto& mod = schema.modalities[i];
        if (i >= s.features.size() || s.features[i].empty()) {
            violations.push_back("missing modality " + mod.name);
            continue;
        }
        const Matrix& x = s.features[i];
        if (x.rows() != mod.channel_count || x.cols() != schema.feature_len) {
            violations.push_back("modality " + mod.name + " has shape " + x.shape() +
                                 ", expected " + std::to_string(mod.channel_count) + "x" +
                                 std::to_string(schema.feature_len));
            continue;
        }
        if (!x.all_finite()) {
            violations.push_back("modality " + mod.name + " contains non-finite values");
        }
    }
    if (s.features.size() > schema.modalities.size()) {
        violations.push_back("sample has " + std::to_string(s.features.size()) +
                             " feature matrices for " +
                             std::to_string(schema.modalities.size()) + " modalities");
    }
    return violations;
}

}  // namespace h2g2
