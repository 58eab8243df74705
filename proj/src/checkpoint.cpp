#include "h2g2/checkpoint.hpp"

#include <fstream>
#include <map>

#include "h2g2/contracts.hpp"

namespace h2g2 {

namespace {
constexpr int kCheckpointVersion = 1;
constexpr const char* kFormatTag = "h2g2-checkpoint";
}  // namespace

nlohmann::json checkpoint_to_json(const ModelParams& params, const DatasetSchema& schema,
                                  const nlohmann::json& config_echo) {
    nlohmann::json weights = nlohmann::json::array();
    for_each_param(params, schema, [&](const std::string& name, const Matrix& m) {
        weights.push_back({{"name", name},
                           {"rows", m.rows()},
                           {"cols", m.cols()},
                           {"data", std::vector<double>(m.data().begin(), m.data().end())}});
    });
    const auto& h = params.hyper;
    return {{"format", kFormatTag},
            {"version", kCheckpointVersion},
            {"schema_hash", schema_hash(schema)},
            {"schema", schema_to_json(schema)},
            {"hyper",
             {{"sub_layers", h.sub_layers},
              {"mod_layers", h.mod_layers},
              {"d_hidden", h.d_hidden},
              {"d_fc", h.d_fc},
              {"seed", h.seed},
              {"init_scale", h.init_scale}}},
            {"weights", weights},
            {"config_echo", config_echo}};
}

Checkpoint checkpoint_from_json(const nlohmann::json& j) {
    if (j.value("format", std::string{}) != kFormatTag) {
        throw std::runtime_error("checkpoint: not a " + std::string(kFormatTag) + " document");
    }
    if (j.at("version").get<int>() != kCheckpointVersion) {
        throw std::runtime_error("checkpoint: unsupported version " +
                                 j.at("version").dump());
    }

    Checkpoint cp;
    cp.schema = schema_from_json(j.at("schema"));
    const std::string stored_hash = j.at("schema_hash").get<std::string>();
    const std::string actual_hash = schema_hash(cp.schema);
    if (stored_hash != actual_hash) {
        throw std::runtime_error("checkpoint: schema hash mismatch (stored " + stored_hash +
                                 ", schema hashes to " + actual_hash + ")");
    }

    const auto& h = j.at("hyper");
    ModelHyper hyper;
    hyper.sub_layers = h.at("sub_layers").get<std::size_t>();
    hyper.mod_layers = h.at("mod_layers").get<std::size_t>();
    hyper.d_hidden = h.at("d_hidden").get<std::size_t>();
    hyper.d_fc = h.at("d_fc").get<std::size_t>();
    hyper.seed = h.at("seed").get<std::uint64_t>();
    hyper.init_scale = h.value("init_scale", 1.0);

    std::map<std::string, Matrix> by_name;
    for (const auto& w : j.at("weights")) {
        const auto rows = w.at("rows").get<std::size_t>();
        const auto cols = w.at("cols").get<std::size_t>();
        const auto data = w.at("data").get<std::vector<double>>();
        if (data.size() != rows * cols) {
            throw std::runtime_error("checkpoint: weight " + w.at("name").get<std::string>() +
                                     " has " + std::to_string(data.size()) + " values for shape " +
                                     std::to_string(rows) + "x" + std::to_string(cols));
        }
        Matrix m(rows, cols);
        std::copy(data.begin(), data.end(), m.data().begin());
        if (!m.all_finite()) {
            throw std::runtime_error("checkpoint: weight " + w.at("name").get<std::string>() +
                                     " contains non-finite values");
        }
        by_name.emplace(w.at("name").get<std::string>(), std::move(m));
    }

    // Shape the parameter containers from hyper+schema, then fill by name.
    cp.params = init_params(cp.schema, hyper);
    for_each_param(cp.params, cp.schema, [&](const std::string& name, Matrix& m) {
        auto it = by_name.find(name);
        if (it == by_name.end()) {
            throw std::runtime_error("checkpoint: missing weight " + name);
        }
        if (!it->second.same_shape(m)) {
            throw std::runtime_error("checkpoint: weight " + name + " has shape " +
                                     it->second.shape() + ", expected " + m.shape());
        }
        m = std::move(it->second);
        by_name.erase(it);
    });
    if (!by_name.empty()) {
        throw std::runtime_error("checkpoint: unexpected weight " + by_name.begin()->first);
    }
    if (j.contains("config_echo")) {
        cp.config_echo = j.at("config_echo");
    }
    return cp;
}

void save_checkpoint(const std::filesystem::path& path, const ModelParams& params,
                     const DatasetSchema& schema, const nlohmann::json& config_echo) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("checkpoint: cannot open " + path.string() + " for writing");
    }
    out << checkpoint_to_json(params, schema, config_echo).dump(2) << "\n";
    if (!out) {
        throw std::runtime_error("checkpoint: write to " + path.string() + " failed");
    }
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("checkpoint: cannot open " + path.string());
    }
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw std::runtime_error("checkpoint: " + path.string() + ": " + e.what());
    }
    return checkpoint_from_json(j);
}

}  // namespace h2g2
