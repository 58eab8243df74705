#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "h2g2/autodiff.hpp"
#include "h2g2/graph.hpp"
#include "h2g2/matrix.hpp"

namespace h2g2 {

/// Per-modality GCN weight stacks: thetas[modality][layer].
/// Layer 0 maps feature_len -> d_hidden, later layers are square.
struct GcnParams {
    std::vector<std::vector<Matrix>> thetas;
};

/// Per-layer generative weights: phi (m x m, unconstrained; row-softmax
/// yields the learned adjacency) and theta (d_hidden square).
struct H2g2Params {
    std::vector<Matrix> phi;
    std::vector<Matrix> theta;
};

struct ClassifierParams {
    Matrix w1, b1, w2, b2;
};

struct ModelHyper {
    std::size_t sub_layers = 2;    // GCN layers per modality subgraph
    std::size_t mod_layers = 2;    // stacked generative layers
    std::size_t d_hidden = 100;
    std::size_t d_fc = 32;
    std::uint64_t seed = 1;
    double init_scale = 1.0;       // multiplies the Glorot bound; 0 gives zero init
};

struct ModelParams {
    GcnParams gcn;
    H2g2Params h2g2;
    ClassifierParams clf;
    ModelHyper hyper;
};

/// Glorot-uniform thetas and classifier weights, zero phi and biases.
ModelParams init_params(const DatasetSchema& schema, const ModelHyper& hyper);

/// Canonical parameter traversal; the single source of parameter order and
/// naming for staging, optimizers and checkpoints.
template <class Params, class Fn>
void for_each_param(Params& p, const DatasetSchema& schema, Fn&& fn) {
    for (std::size_t m = 0; m < p.gcn.thetas.size(); ++m) {
        for (std::size_t l = 0; l < p.gcn.thetas[m].size(); ++l) {
            fn("gcn." + schema.modalities[m].name + ".l" + std::to_string(l),
               p.gcn.thetas[m][l]);
        }
    }
    for (std::size_t l = 0; l < p.h2g2.phi.size(); ++l) {
        fn("h2g2.l" + std::to_string(l) + ".phi", p.h2g2.phi[l]);
        fn("h2g2.l" + std::to_string(l) + ".theta", p.h2g2.theta[l]);
    }
    fn("clf.w1", p.clf.w1);
    fn("clf.b1", p.clf.b1);
    fn("clf.w2", p.clf.w2);
    fn("clf.b2", p.clf.b2);
}

/// Tape leaves for every parameter, mirroring the ModelParams structure.
struct ModelNodes {
    std::vector<std::vector<NodeId>> gcn;
    std::vector<NodeId> phi, theta;
    NodeId w1 = 0, b1 = 0, w2 = 0, b2 = 0;
    std::vector<NodeId> all;             // flattened, for_each_param order
    std::vector<std::string> names;
};

ModelNodes stage_params(Tape& tape, const ModelParams& params, const DatasetSchema& schema);

/// Everything the forward pass exposes: the prediction, the learned
/// adjacency at each layer, and the intermediate representations.
struct ForwardTrace {
    Matrix probabilities;                  // 1 x class_count
    std::vector<Matrix> adjacency_sequence;  // mod_layers of m x m, row-stochastic
    Matrix modality_reps;                  // H^(0), m x d_hidden
    Matrix network_rep;                    // z, 1 x d_hidden
    NodeId prob_node = 0;                  // valid while the building tape lives
};

// --- layer primitives -------------------------------------------------

/// relu(a_norm * x * theta)
NodeId gcn_layer_forward(Tape& tape, NodeId x, const NormalizedAdjacency& a_norm, NodeId theta);

/// Sum of node rows: n x d -> 1 x d.
NodeId modality_readout(Tape& tape, NodeId x);

/// Runs every modality subgraph through its GCN stack and stacks the
/// readouts into the m x d_hidden modality representation matrix.
NodeId sub_modality_forward(Tape& tape, const HierarchicalSample& sample,
                            const std::vector<std::vector<NodeId>>& gcn_thetas,
                            const DatasetSchema& schema,
                            const std::vector<NormalizedAdjacency>& norms);

struct H2g2LayerOut {
    NodeId h_next;
    NodeId adjacency;
};

/// a = row_softmax(phi); h_next = relu(a * h * theta). Gradients flow
/// through both the adjacency and the representations.
H2g2LayerOut h2g2_layer_forward(Tape& tape, NodeId h, NodeId phi, NodeId theta);

NodeId network_readout(Tape& tape, NodeId h);

/// row_softmax(relu(z*W1 + b1)*W2 + b2)
NodeId classifier_forward(Tape& tape, NodeId z, NodeId w1, NodeId b1, NodeId w2, NodeId b2);

// --- full forward ------------------------------------------------------

ForwardTrace model_forward(Tape& tape, const HierarchicalSample& sample, const ModelNodes& nodes,
                           const ModelHyper& hyper, const DatasetSchema& schema,
                           const std::vector<NormalizedAdjacency>& norms);

/// Convenience overload on a private tape; for inference and tests.
ForwardTrace model_forward(const HierarchicalSample& sample, const ModelParams& params,
                           const DatasetSchema& schema);

}  // namespace h2g2
