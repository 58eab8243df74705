#pragma once

#include <filesystem>

#include "h2g2/config.hpp"

namespace h2g2 {

/// Writes a synthetic dataset as a manifest + CSV tree plus a provenance
/// file echoing the generating config.
void cmd_synth(const SynthConfig& cfg, const std::filesystem::path& out_dir);

/// Trains on the whole configured dataset; writes checkpoint.json and
/// loss_history.csv.
void cmd_train(const RunConfig& cfg, const std::filesystem::path& out_dir);

/// Runs leave-one-subject-out evaluation; writes report.json plus a
/// checkpoint and loss CSV per fold.
void cmd_loso(const RunConfig& cfg, const std::filesystem::path& out_dir, unsigned jobs);

/// Reads a checkpoint and writes the interpretability JSON and one heatmap
/// per layer.
void cmd_explain(const std::filesystem::path& checkpoint_path,
                 const std::filesystem::path& out_dir, std::size_t top_k);

}  // namespace h2g2
