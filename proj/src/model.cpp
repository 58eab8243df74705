#include "h2g2/model.hpp"

#include <cmath>

#include "h2g2/contracts.hpp"
#include "h2g2/rng.hpp"

namespace h2g2 {

namespace {

Matrix glorot(Rng& rng, std::size_t fan_in, std::size_t fan_out, double scale) {
    const double bound =
        scale * std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    Matrix m(fan_in, fan_out);
    for (double& v : m.data()) {
        v = rng.uniform(-bound, bound);
    }
    return m;
}

}  // namespace

ModelParams init_params(const DatasetSchema& schema, const ModelHyper& hyper) {
    validate_schema(schema);
    require(hyper.sub_layers >= 1 && hyper.mod_layers >= 1,
            "init_params: layer counts must be positive");
    require(hyper.d_hidden >= 1 && hyper.d_fc >= 1,
            "init_params: hidden sizes must be positive");

    Rng rng(hyper.seed);
    ModelParams p;
    p.hyper = hyper;

    const std::size_t m = schema.modality_count();
    p.gcn.thetas.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
        std::size_t d_in = schema.feature_len;
        for (std::size_t l = 0; l < hyper.sub_layers; ++l) {
            p.gcn.thetas[i].push_back(glorot(rng, d_in, hyper.d_hidden, hyper.init_scale));
            d_in = hyper.d_hidden;
        }
    }
    for (std::size_t l = 0; l < hyper.mod_layers; ++l) {
        // zero phi starts every layer at the uniform (maximum-entropy) graph
        p.h2g2.phi.push_back(Matrix(m, m, 0.0));
        p.h2g2.theta.push_back(glorot(rng, hyper.d_hidden, hyper.d_hidden, hyper.init_scale));
    }
    p.clf.w1 = glorot(rng, hyper.d_hidden, hyper.d_fc, hyper.init_scale);
    p.clf.b1 = Matrix(1, hyper.d_fc, 0.0);
    p.clf.w2 = glorot(rng, hyper.d_fc, schema.class_count, hyper.init_scale);
    p.clf.b2 = Matrix(1, schema.class_count, 0.0);
    return p;
}

ModelNodes stage_params(Tape& tape, const ModelParams& params, const DatasetSchema& schema) {
    ModelNodes nodes;
    for_each_param(params, schema, [&](const std::string& name, const Matrix& m) {
        nodes.names.push_back(name);
        nodes.all.push_back(tape.leaf(m));
    });

    // Map the flat ids back onto the structure, in the same traversal order.
    std::size_t k = 0;
    nodes.gcn.resize(params.gcn.thetas.size());
    for (std::size_t i = 0; i < params.gcn.thetas.size(); ++i) {
        for (std::size_t l = 0; l < params.gcn.thetas[i].size(); ++l) {
            nodes.gcn[i].push_back(nodes.all[k++]);
        }
    }
    for (std::size_t l = 0; l < params.h2g2.phi.size(); ++l) {
        nodes.phi.push_back(nodes.all[k++]);
        nodes.theta.push_back(nodes.all[k++]);
    }
    nodes.w1 = nodes.all[k++];
    nodes.b1 = nodes.all[k++];
    nodes.w2 = nodes.all[k++];
    nodes.b2 = nodes.all[k++];
    require(k == nodes.all.size(), "stage_params: traversal order out of sync");
    return nodes;
}

NodeId gcn_layer_forward(Tape& tape, NodeId x, const NormalizedAdjacency& a_norm, NodeId theta) {
    NodeId a = tape.leaf(a_norm.matrix());
    return tape.relu(tape.matmul(tape.matmul(a, x), theta));
}

NodeId modality_readout(Tape& tape, NodeId x) {
    return tape.row_sum(x);
}

NodeId sub_modality_forward(Tape& tape, const HierarchicalSample& sample,
                            const std::vector<std::vector<NodeId>>& gcn_thetas,
                            const DatasetSchema& schema,
                            const std::vector<NormalizedAdjacency>& norms) {
    require(sample.features.size() == schema.modality_count() &&
                norms.size() == schema.modality_count(),
            "sub_modality_forward: sample/norms do not match schema");
    std::vector<NodeId> readouts;
    readouts.reserve(schema.modality_count());
    for (std::size_t i = 0; i < schema.modality_count(); ++i) {
        NodeId h = tape.leaf(sample.features[i]);
        for (NodeId theta : gcn_thetas[i]) {
            h = gcn_layer_forward(tape, h, norms[i], theta);
        }
        readouts.push_back(modality_readout(tape, h));
    }
    return tape.concat_rows(readouts);
}

H2g2LayerOut h2g2_layer_forward(Tape& tape, NodeId h, NodeId phi, NodeId theta) {
    NodeId a = tape.row_softmax(phi);
    NodeId h_next = tape.relu(tape.matmul(tape.matmul(a, h), theta));
    return {h_next, a};
}

NodeId network_readout(Tape& tape, NodeId h) {
    return modality_readout(tape, h);
}

NodeId classifier_forward(Tape& tape, NodeId z, NodeId w1, NodeId b1, NodeId w2, NodeId b2) {
    NodeId hidden = tape.relu(tape.add(tape.matmul(z, w1), b1));
    NodeId logits = tape.add(tape.matmul(hidden, w2), b2);
    return tape.row_softmax(logits);
}

ForwardTrace model_forward(Tape& tape, const HierarchicalSample& sample, const ModelNodes& nodes,
                           const ModelHyper& hyper, const DatasetSchema& schema,
                           const std::vector<NormalizedAdjacency>& norms) {
    ForwardTrace trace;
    NodeId h = sub_modality_forward(tape, sample, nodes.gcn, schema, norms);
    trace.modality_reps = tape.value(h);
    for (std::size_t l = 0; l < hyper.mod_layers; ++l) {
        auto out = h2g2_layer_forward(tape, h, nodes.phi[l], nodes.theta[l]);
        trace.adjacency_sequence.push_back(tape.value(out.adjacency));
        h = out.h_next;
    }
    NodeId z = network_readout(tape, h);
    trace.network_rep = tape.value(z);
    NodeId probs = classifier_forward(tape, z, nodes.w1, nodes.b1, nodes.w2, nodes.b2);
    trace.probabilities = tape.value(probs);
    trace.prob_node = probs;
    return trace;
}

ForwardTrace model_forward(const HierarchicalSample& sample, const ModelParams& params,
                           const DatasetSchema& schema) {
    Tape tape;
    ModelNodes nodes = stage_params(tape, params, schema);
    auto norms = build_modality_adjacencies(schema);
    return model_forward(tape, sample, nodes, params.hyper, schema, norms);
}

}  // namespace h2g2
