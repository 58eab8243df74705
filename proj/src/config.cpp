#include "h2g2/config.hpp"

#include <fstream>

#include "h2g2/contracts.hpp"

namespace h2g2 {

namespace {

nlohmann::json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("config: cannot open " + path.string());
    }
    try {
        nlohmann::json j;
        in >> j;
        return j;
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("config: " + path.string() + ": " + e.what());
    }
}

}  // namespace

RunConfig parse_run_config(const nlohmann::json& j, const std::filesystem::path& base_dir) {
    RunConfig cfg;
    cfg.echo = j;
    try {
        if (j.contains("schema")) {
            cfg.schema = schema_from_json(j.at("schema"));
        }
        if (j.contains("model")) {
            const auto& m = j.at("model");
            cfg.model.sub_layers = m.value("sub_layers", cfg.model.sub_layers);
            cfg.model.mod_layers = m.value("mod_layers", cfg.model.mod_layers);
            cfg.model.d_hidden = m.value("d_hidden", cfg.model.d_hidden);
            cfg.model.d_fc = m.value("d_fc", cfg.model.d_fc);
            cfg.model.seed = m.value("seed", cfg.model.seed);
            cfg.model.init_scale = m.value("init_scale", cfg.model.init_scale);
        }
        if (j.contains("train")) {
            const auto& t = j.at("train");
            cfg.train.epochs = t.value("epochs", cfg.train.epochs);
            cfg.train.learning_rate = t.value("learning_rate", cfg.train.learning_rate);
            if (t.contains("optimizer")) {
                const std::string name = t.at("optimizer").get<std::string>();
                if (name == "adam") {
                    cfg.train.optimizer = OptimizerKind::Adam;
                } else if (name == "sgd") {
                    cfg.train.optimizer = OptimizerKind::Sgd;
                } else {
                    throw ConfigError("config: unknown optimizer '" + name + "'");
                }
            }
            cfg.train.beta1 = t.value("beta1", cfg.train.beta1);
            cfg.train.beta2 = t.value("beta2", cfg.train.beta2);
            cfg.train.epsilon = t.value("epsilon", cfg.train.epsilon);
            cfg.train.batch_size = t.value("batch_size", cfg.train.batch_size);
            cfg.train.seed = t.value("seed", cfg.train.seed);
            cfg.train.weight_decay = t.value("weight_decay", cfg.train.weight_decay);
        }

        const bool has_manifest = j.contains("data") && j.at("data").contains("manifest");
        const bool has_synth = j.contains("data") && j.at("data").contains("synth");
        if (has_manifest == has_synth) {
            throw ConfigError(
                "config: data must name exactly one source, either {\"manifest\": path} or "
                "{\"synth\": {...}}");
        }
        if (has_manifest) {
            std::filesystem::path p = j.at("data").at("manifest").get<std::string>();
            if (p.is_relative()) {
                p = base_dir / p;
            }
            if (!std::filesystem::exists(p)) {
                throw ConfigError("config: manifest path does not exist: " + p.string());
            }
            cfg.manifest_path = p;
        } else {
            nlohmann::json synth = j.at("data").at("synth");
            if (!synth.contains("schema")) {
                synth["schema"] = schema_to_json(cfg.schema);
            }
            cfg.synth = synth_config_from_json(synth);
            cfg.schema = cfg.synth->schema;
        }

        if (j.contains("keep_modalities")) {
            cfg.keep_modalities = j.at("keep_modalities").get<std::vector<std::string>>();
            for (const auto& name : cfg.keep_modalities) {
                if (!cfg.schema.index_of(name)) {
                    throw ConfigError("config: keep_modalities names unknown modality " + name);
                }
            }
        }
        cfg.normalize = j.value("normalize", cfg.normalize);
        cfg.jobs = j.value("jobs", cfg.jobs);
        if (j.contains("out_dir")) {
            std::filesystem::path p = j.at("out_dir").get<std::string>();
            cfg.out_dir = p.is_relative() ? base_dir / p : p;
        }

        validate_train_config(cfg.train);
        validate_schema(cfg.schema);
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    return parse_run_config(read_json_file(path), path.parent_path());
}

SynthConfig load_synth_config(const std::filesystem::path& path) {
    try {
        return synth_config_from_json(read_json_file(path));
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config: ") + path.string() + ": " + e.what());
    }
}

std::pair<std::vector<HierarchicalSample>, DatasetSchema> load_dataset(const RunConfig& cfg) {
    std::vector<HierarchicalSample> dataset;
    DatasetSchema schema = cfg.schema;
    if (cfg.manifest_path) {
        RecordingManifest manifest = load_manifest(*cfg.manifest_path);
        LoadOptions options;
        options.zscore = cfg.normalize;
        LoadResult loaded = load_recordings(manifest, schema, options);
        dataset = std::move(loaded.samples);
    } else {
        dataset = generate_synthetic(*cfg.synth);
    }
    if (!cfg.keep_modalities.empty()) {
        auto filtered = filter_modalities(dataset, schema, cfg.keep_modalities);
        dataset = std::move(filtered.first);
        schema = std::move(filtered.second);
    }
    return {std::move(dataset), std::move(schema)};
}

}  // namespace h2g2
