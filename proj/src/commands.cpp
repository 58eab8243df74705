#include "h2g2/commands.hpp"

#include <fstream>

#include "h2g2/checkpoint.hpp"
#include "h2g2/interpret.hpp"

namespace h2g2 {

namespace {

void ensure_dir(const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) {
        throw std::runtime_error("cannot create output directory " + dir.string() + ": " +
                                 ec.message());
    }
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
    out << j.dump(2) << "\n";
    if (!out) {
        throw std::runtime_error("write to " + path.string() + " failed");
    }
}

void write_loss_csv(const std::filesystem::path& path, const std::vector<double>& losses,
                    const nlohmann::json& echo) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
    out << "# config " << echo.dump() << "\n";
    out << "epoch,mean_loss\n";
    out.precision(17);
    for (std::size_t i = 0; i < losses.size(); ++i) {
        out << i << "," << losses[i] << "\n";
    }
}

}  // namespace

void cmd_synth(const SynthConfig& cfg, const std::filesystem::path& out_dir) {
    ensure_dir(out_dir);
    auto dataset = generate_synthetic(cfg);
    export_dataset(dataset, cfg.schema, out_dir);
    write_json(out_dir / "provenance.json",
               {{"generator", "h2g2 synth"},
                {"config", synth_config_to_json(cfg)},
                {"seed", cfg.seed},
                {"sample_count", dataset.size()}});
}

void cmd_train(const RunConfig& cfg, const std::filesystem::path& out_dir) {
    ensure_dir(out_dir);
    auto [dataset, schema] = load_dataset(cfg);
    TrainResult result = train(dataset, schema, cfg.model, cfg.train);
    save_checkpoint(out_dir / "checkpoint.json", result.params, schema, cfg.echo);
    write_loss_csv(out_dir / "loss_history.csv", result.loss_history, cfg.echo);
}

void cmd_loso(const RunConfig& cfg, const std::filesystem::path& out_dir, unsigned jobs) {
    ensure_dir(out_dir);
    auto [dataset, schema] = load_dataset(cfg);

    nlohmann::json echo = cfg.echo;
    echo["resolved_modalities"] = schema.modality_names();

    std::vector<TrainResult> fold_results;
    LosoReport report = loso_evaluate(dataset, schema, cfg.model, cfg.train, jobs, &fold_results);

    write_json(out_dir / "report.json", loso_report_to_json(report, echo));
    for (std::size_t i = 0; i < report.folds.size(); ++i) {
        const std::string subject = report.folds[i].held_out_subject;
        save_checkpoint(out_dir / ("fold_" + subject + ".checkpoint.json"),
                        fold_results[i].params, schema, echo);
        write_loss_csv(out_dir / ("fold_" + subject + "_loss.csv"),
                       fold_results[i].loss_history, echo);
    }
}

void cmd_explain(const std::filesystem::path& checkpoint_path,
                 const std::filesystem::path& out_dir, std::size_t top_k) {
    Checkpoint cp = load_checkpoint(checkpoint_path);
    ensure_dir(out_dir);

    AdjacencySequence seq = extract_adjacency_sequence(cp.params, cp.schema);
    nlohmann::json j = interpret_to_json(seq, top_k);
    j["config_echo"] = {{"checkpoint", checkpoint_path.string()}, {"top_k", top_k}};
    write_json(out_dir / "interpret.json", j);

    for (std::size_t l = 0; l < seq.matrices.size(); ++l) {
        write_heatmap_ppm(out_dir / ("heatmap_layer" + std::to_string(l) + ".ppm"),
                          seq.matrices[l], seq.modality_names,
                          "checkpoint " + checkpoint_path.string() + " layer " +
                              std::to_string(l));
    }
}

}  // namespace h2g2
