#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "h2g2/autodiff.hpp"
#include "h2g2/graph.hpp"
#include "h2g2/model.hpp"

namespace h2g2 {

enum class OptimizerKind { Sgd, Adam };

struct TrainConfig {
    std::size_t epochs = 150;
    double learning_rate = 1e-3;
    OptimizerKind optimizer = OptimizerKind::Adam;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    std::size_t batch_size = 8;       // gradients averaged over the batch
    std::uint64_t seed = 1;
    double weight_decay = 1e-4;       // decoupled, applied before the step
};

void validate_train_config(const TrainConfig& cfg);

/// Raised when a loss or gradient goes non-finite; no silent clamping.
class TrainError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// -ln(max(probs[label], 1e-12)), differentiable through the tape.
NodeId cross_entropy_loss(Tape& tape, NodeId probs, std::size_t label);

/// Moment buffers for Adam; step counts the performed updates.
struct OptimState {
    std::vector<Matrix> m, v;
    long step = 0;
};

OptimState init_optim_state(const std::vector<Matrix>& grads_like);

/// One update over a flattened parameter view. Decay first, then the
/// SGD or bias-corrected Adam step.
void optimizer_step(std::vector<Matrix*>& params, const std::vector<Matrix>& grads,
                    OptimState& state, const TrainConfig& cfg);

struct TrainResult {
    ModelParams params;
    std::vector<double> loss_history;  // mean loss per epoch
};

TrainResult train(const std::vector<HierarchicalSample>& dataset, const DatasetSchema& schema,
                  const ModelHyper& hyper, const TrainConfig& cfg);

/// Fraction of argmax-correct predictions; ties resolve to the lowest class.
double evaluate(const std::vector<HierarchicalSample>& dataset, const ModelParams& params,
                const DatasetSchema& schema);

struct LosoFold {
    std::string held_out_subject;
    std::vector<HierarchicalSample> train;
    std::vector<HierarchicalSample> test;
};

/// One fold per distinct subject, ordered by subject id.
std::vector<LosoFold> loso_split(const std::vector<HierarchicalSample>& dataset);

struct FoldReport {
    std::string held_out_subject;
    std::vector<std::string> train_subjects;
    double test_accuracy = 0.0;
    std::size_t test_sample_count = 0;
    double final_train_loss = 0.0;
};

struct LosoReport {
    std::vector<FoldReport> folds;
    double mean_accuracy = 0.0;
    double std_accuracy = 0.0;  // population std over fold accuracies
};

/// Trains a fresh model per fold with fold-derived seeds (base seed XOR fold
/// index). Folds may run in parallel; the report is identical either way.
/// fold_results, when given, receives the trained params and loss history
/// per fold, in fold order.
LosoReport loso_evaluate(const std::vector<HierarchicalSample>& dataset,
                         const DatasetSchema& schema, const ModelHyper& hyper,
                         const TrainConfig& cfg, unsigned jobs = 1,
                         std::vector<TrainResult>* fold_results = nullptr);

nlohmann::json loso_report_to_json(const LosoReport& report,
                                   const nlohmann::json& config_echo = nlohmann::json::object());

}  // namespace h2g2
