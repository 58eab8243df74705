#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "h2g2/commands.hpp"
#include "h2g2/config.hpp"
#include "h2g2/contracts.hpp"

namespace {

std::vector<std::string> split_csv(const std::string& s) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= s.size()) {
        const std::size_t comma = s.find(',', start);
        const std::size_t end = comma == std::string::npos ? s.size() : comma;
        if (end > start) {
            out.push_back(s.substr(start, end - start));
        }
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

std::filesystem::path resolve_out(const h2g2::RunConfig& cfg, const std::string& flag_out) {
    if (!flag_out.empty()) return flag_out;
    if (cfg.out_dir) return *cfg.out_dir;
    throw h2g2::ConfigError("no output directory: pass --out or set out_dir in the config");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"H2G2-Net: hierarchical heterogeneous graph generative network"};
    app.require_subcommand(1);

    std::string config_path, out_dir, keep_csv, checkpoint_path;
    unsigned jobs = 0;
    std::size_t top_k = 10;

    auto* synth = app.add_subcommand("synth", "generate a synthetic dataset on disk");
    synth->add_option("--config", config_path, "synth config JSON")->required();
    synth->add_option("--out", out_dir, "output directory")->required();

    auto* train = app.add_subcommand("train", "train on the full configured dataset");
    train->add_option("--config", config_path, "run config JSON")->required();
    train->add_option("--out", out_dir, "output directory");

    auto* loso = app.add_subcommand("loso", "leave-one-subject-out evaluation");
    loso->add_option("--config", config_path, "run config JSON")->required();
    loso->add_option("--out", out_dir, "output directory");
    loso->add_option("--keep-modalities", keep_csv, "comma-separated modality names to keep");
    loso->add_option("--jobs", jobs, "parallel folds (default from config)");

    auto* explain = app.add_subcommand("explain", "export learned graph structures");
    explain->add_option("--checkpoint", checkpoint_path, "checkpoint JSON")->required();
    explain->add_option("--out", out_dir, "output directory")->required();
    explain->add_option("--top-k", top_k, "meta-paths to report (default 10)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (synth->parsed()) {
            h2g2::cmd_synth(h2g2::load_synth_config(config_path), out_dir);
        } else if (train->parsed()) {
            h2g2::RunConfig cfg = h2g2::load_run_config(config_path);
            h2g2::cmd_train(cfg, resolve_out(cfg, out_dir));
        } else if (loso->parsed()) {
            h2g2::RunConfig cfg = h2g2::load_run_config(config_path);
            if (!keep_csv.empty()) {
                cfg.keep_modalities = split_csv(keep_csv);
                cfg.echo["keep_modalities"] = cfg.keep_modalities;
                for (const auto& name : cfg.keep_modalities) {
                    if (!cfg.schema.index_of(name)) {
                        throw h2g2::ConfigError("--keep-modalities names unknown modality " +
                                                name);
                    }
                }
            }
            h2g2::cmd_loso(cfg, resolve_out(cfg, out_dir), jobs > 0 ? jobs : cfg.jobs);
        } else if (explain->parsed()) {
            h2g2::cmd_explain(checkpoint_path, out_dir, top_k);
        }
    } catch (const h2g2::ConfigError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const h2g2::ContractError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
