#include "h2g2/train.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <set>
#include <thread>

#include "h2g2/contracts.hpp"
#include "h2g2/rng.hpp"

namespace h2g2 {

void validate_train_config(const TrainConfig& cfg) {
    require(cfg.epochs >= 1, "train config: epochs must be positive");
    require(cfg.learning_rate >= 0.0, "train config: learning rate must be nonnegative");
    require(cfg.beta1 >= 0.0 && cfg.beta1 < 1.0, "train config: beta1 must be in [0,1)");
    require(cfg.beta2 >= 0.0 && cfg.beta2 < 1.0, "train config: beta2 must be in [0,1)");
    require(cfg.epsilon > 0.0, "train config: epsilon must be positive");
    require(cfg.batch_size >= 1, "train config: batch size must be positive");
    require(cfg.weight_decay >= 0.0, "train config: weight decay must be nonnegative");
}

NodeId cross_entropy_loss(Tape& tape, NodeId probs, std::size_t label) {
    const Matrix& p = tape.value(probs);
    require(p.rows() == 1, "cross_entropy_loss: probs must be a single row, got " + p.shape());
    require(label < p.cols(), "cross_entropy_loss: label " + std::to_string(label) +
                                  " outside [0, " + std::to_string(p.cols()) + ")");
    return tape.neg_log_entry(probs, 0, label);
}

OptimState init_optim_state(const std::vector<Matrix>& grads_like) {
    OptimState state;
    state.m.reserve(grads_like.size());
    state.v.reserve(grads_like.size());
    for (const Matrix& g : grads_like) {
        state.m.emplace_back(g.rows(), g.cols(), 0.0);
        state.v.emplace_back(g.rows(), g.cols(), 0.0);
    }
    return state;
}

void optimizer_step(std::vector<Matrix*>& params, const std::vector<Matrix>& grads,
                    OptimState& state, const TrainConfig& cfg) {
    require(params.size() == grads.size(), "optimizer_step: params/grads size mismatch");
    require(state.m.size() == params.size() && state.v.size() == params.size(),
            "optimizer_step: state does not match params");
    require(state.step >= 0, "optimizer_step: negative step counter");

    const double lr = cfg.learning_rate;
    if (cfg.weight_decay > 0.0) {
        for (Matrix* p : params) {
            for (double& v : p->data()) {
                v -= lr * cfg.weight_decay * v;
            }
        }
    }

    if (cfg.optimizer == OptimizerKind::Sgd) {
        for (std::size_t i = 0; i < params.size(); ++i) {
            require(params[i]->same_shape(grads[i]), "optimizer_step: gradient shape mismatch");
            auto pd = params[i]->data();
            auto gd = grads[i].data();
            for (std::size_t k = 0; k < pd.size(); ++k) {
                pd[k] -= lr * gd[k];
            }
        }
        ++state.step;
        return;
    }

    ++state.step;
    const double t = static_cast<double>(state.step);
    const double bc1 = 1.0 - std::pow(cfg.beta1, t);
    const double bc2 = 1.0 - std::pow(cfg.beta2, t);
    for (std::size_t i = 0; i < params.size(); ++i) {
        require(params[i]->same_shape(grads[i]), "optimizer_step: gradient shape mismatch");
        auto pd = params[i]->data();
        auto gd = grads[i].data();
        auto md = state.m[i].data();
        auto vd = state.v[i].data();
        for (std::size_t k = 0; k < pd.size(); ++k) {
            md[k] = cfg.beta1 * md[k] + (1.0 - cfg.beta1) * gd[k];
            vd[k] = cfg.beta2 * vd[k] + (1.0 - cfg.beta2) * gd[k] * gd[k];
            const double m_hat = md[k] / bc1;
            const double v_hat = vd[k] / bc2;
            pd[k] -= lr * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
        }
    }
}

TrainResult train(const std::vector<HierarchicalSample>& dataset, const DatasetSchema& schema,
                  const ModelHyper& hyper, const TrainConfig& cfg) {
    require(!dataset.empty(), "train: empty dataset");
    validate_train_config(cfg);
    for (const auto& s : dataset) {
        auto violations = validate_sample(s, schema);
        require(violations.empty(), "train: sample " + s.subject_id + "/" + s.sample_id +
                                        " invalid: " + violations.front());
    }

    TrainResult result;
    result.params = init_params(schema, hyper);
    const auto norms = build_modality_adjacencies(schema);

    std::vector<Matrix*> param_refs;
    std::vector<std::string> param_names;
    for_each_param(result.params, schema, [&](const std::string& name, Matrix& m) {
        param_names.push_back(name);
        param_refs.push_back(&m);
    });

    std::vector<Matrix> grads;
    grads.reserve(param_refs.size());
    for (Matrix* p : param_refs) {
        grads.emplace_back(p->rows(), p->cols(), 0.0);
    }
    OptimState state = init_optim_state(grads);

    Rng shuffle_rng(cfg.seed);
    std::vector<std::size_t> order(dataset.size());
    std::vector<double> sample_losses(dataset.size(), 0.0);

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        for (std::size_t i = 0; i < order.size(); ++i) {
            order[i] = i;
        }
        // Fisher-Yates on our own stream so the order is seed-stable.
        for (std::size_t i = order.size(); i > 1; --i) {
            std::swap(order[i - 1], order[shuffle_rng.below(i)]);
        }

        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const std::size_t end = std::min(order.size(), start + cfg.batch_size);
            for (Matrix& g : grads) {
                for (double& v : g.data()) v = 0.0;
            }
            for (std::size_t k = start; k < end; ++k) {
                const auto& sample = dataset[order[k]];
                Tape tape;
                ModelNodes nodes = stage_params(tape, result.params, schema);
                ForwardTrace trace =
                    model_forward(tape, sample, nodes, hyper, schema, norms);
                NodeId loss = cross_entropy_loss(tape, trace.prob_node, sample.label);
                const double loss_value = tape.value(loss)(0, 0);
                if (!std::isfinite(loss_value)) {
                    throw TrainError("train: non-finite loss at epoch " +
                                     std::to_string(epoch) + ", sample " + sample.subject_id +
                                     "/" + sample.sample_id);
                }
                sample_losses[order[k]] = loss_value;
                tape.backward(loss);
                for (std::size_t pi = 0; pi < param_refs.size(); ++pi) {
                    grads[pi] = h2g2::add(grads[pi], tape.grad(nodes.all[pi]));
                }
            }
            const double inv_count = 1.0 / static_cast<double>(end - start);
            for (std::size_t pi = 0; pi < grads.size(); ++pi) {
                for (double& v : grads[pi].data()) v *= inv_count;
                if (!grads[pi].all_finite()) {
                    throw TrainError("train: non-finite gradient at epoch " +
                                     std::to_string(epoch) + ", parameter group " +
                                     param_names[pi]);
                }
            }
            optimizer_step(param_refs, grads, state, cfg);
        }

        // Summing in dataset order keeps the epoch mean independent of the
        // shuffle, so loss histories compare bit-for-bit across runs.
        double total = 0.0;
        for (double l : sample_losses) total += l;
        result.loss_history.push_back(total / static_cast<double>(dataset.size()));
    }
    return result;
}

double evaluate(const std::vector<HierarchicalSample>& dataset, const ModelParams& params,
                const DatasetSchema& schema) {
    require(!dataset.empty(), "evaluate: empty dataset");
    const auto norms = build_modality_adjacencies(schema);
    std::size_t correct = 0;
    for (const auto& sample : dataset) {
        Tape t;
        ModelNodes nodes = stage_params(t, params, schema);
        ForwardTrace trace = model_forward(t, sample, nodes, params.hyper, schema, norms);
        const Matrix& p = trace.probabilities;
        std::size_t best = 0;
        for (std::size_t c = 1; c < p.cols(); ++c) {
            if (p(0, c) > p(0, best)) best = c;  // ties keep the lowest index
        }
        if (best == sample.label) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(dataset.size());
}

std::vector<LosoFold> loso_split(const std::vector<HierarchicalSample>& dataset) {
    std::set<std::string> subjects;
    for (const auto& s : dataset) {
        subjects.insert(s.subject_id);
    }
    require(subjects.size() >= 2, "loso_split: need at least 2 distinct subjects, got " +
                                      std::to_string(subjects.size()));
    std::vector<LosoFold> folds;
    for (const std::string& subject : subjects) {
        LosoFold fold;
        fold.held_out_subject = subject;
        for (const auto& s : dataset) {
            (s.subject_id == subject ? fold.test : fold.train).push_back(s);
        }
        folds.push_back(std::move(fold));
    }
    return folds;
}

LosoReport loso_evaluate(const std::vector<HierarchicalSample>& dataset,
                         const DatasetSchema& schema, const ModelHyper& hyper,
                         const TrainConfig& cfg, unsigned jobs,
                         std::vector<TrainResult>* fold_results) {
    std::vector<LosoFold> folds = loso_split(dataset);
    LosoReport report;
    report.folds.resize(folds.size());
    if (fold_results) {
        fold_results->clear();
        fold_results->resize(folds.size());
    }

    auto run_fold = [&](std::size_t i) {
        ModelHyper fold_hyper = hyper;
        fold_hyper.seed = hyper.seed ^ static_cast<std::uint64_t>(i);
        TrainConfig fold_cfg = cfg;
        fold_cfg.seed = cfg.seed ^ static_cast<std::uint64_t>(i);

        TrainResult trained = train(folds[i].train, schema, fold_hyper, fold_cfg);

        FoldReport fr;
        fr.held_out_subject = folds[i].held_out_subject;
        std::set<std::string> train_subjects;
        for (const auto& s : folds[i].train) {
            train_subjects.insert(s.subject_id);
        }
        fr.train_subjects.assign(train_subjects.begin(), train_subjects.end());
        fr.test_accuracy = evaluate(folds[i].test, trained.params, schema);
        fr.test_sample_count = folds[i].test.size();
        fr.final_train_loss = trained.loss_history.back();
        report.folds[i] = std::move(fr);
        if (fold_results) {
            (*fold_results)[i] = std::move(trained);
        }
    };

    if (jobs <= 1 || folds.size() <= 1) {
        for (std::size_t i = 0; i < folds.size(); ++i) {
            run_fold(i);
        }
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> workers;
        const unsigned n = std::min<unsigned>(jobs, folds.size());
        std::vector<std::exception_ptr> errors(n);
        for (unsigned w = 0; w < n; ++w) {
            workers.emplace_back([&, w] {
                try {
                    for (std::size_t i = next.fetch_add(1); i < folds.size();
                         i = next.fetch_add(1)) {
                        run_fold(i);
                    }
                } catch (...) {
                    errors[w] = std::current_exception();
                }
            });
        }
        for (auto& t : workers) t.join();
        for (auto& e : errors) {
            if (e) std::rethrow_exception(e);
        }
    }

    double mean = 0.0;
    for (const auto& f : report.folds) mean += f.test_accuracy;
    mean /= static_cast<double>(report.folds.size());
    double var = 0.0;
    for (const auto& f : report.folds) {
        const double d = f.test_accuracy - mean;
        var += d * d;
    }
    var /= static_cast<double>(report.folds.size());
    report.mean_accuracy = mean;
    report.std_accuracy = std::sqrt(var);
    return report;
}

nlohmann::json loso_report_to_json(const LosoReport& report, const nlohmann::json& config_echo) {
    nlohmann::json folds = nlohmann::json::array();
    for (const auto& f : report.folds) {
        folds.push_back({{"subject", f.held_out_subject},
                         {"accuracy", f.test_accuracy},
                         {"n_test", f.test_sample_count},
                         {"final_train_loss", f.final_train_loss}});
    }
    return {{"folds", folds},
            {"mean_accuracy", report.mean_accuracy},
            {"std_accuracy", report.std_accuracy},
            {"config_echo", config_echo}};
}

}  // namespace h2g2
