#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "h2g2/matrix.hpp"

namespace h2g2 {

using NodeId = std::size_t;

/// Reverse-mode autodiff tape. Every operation appends a node holding its
/// forward value and a pull rule that routes adjoints to its parents, so the
/// node order is topological by construction.
///
/// Gradients are additive: each backward() call computes the adjoints of one
/// sweep into scratch storage and adds them onto the persistent per-node
/// gradients. Running backward twice without zero_grad() therefore yields
/// exactly twice the gradient.
class Tape {
public:
    NodeId leaf(Matrix value);

    NodeId matmul(NodeId a, NodeId b);
    NodeId add(NodeId a, NodeId b);
    NodeId scale(NodeId a, double c);
    NodeId relu(NodeId a);
    NodeId row_softmax(NodeId a);
    NodeId row_sum(NodeId a);
    NodeId concat_rows(const std::vector<NodeId>& parts);
    /// -ln(max(value[r][c], floor)); the scalar loss primitive.
    NodeId neg_log_entry(NodeId a, std::size_t r, std::size_t c, double floor = 1e-12);

    void backward(NodeId loss);
    void zero_grad();

    const Matrix& value(NodeId id) const { return nodes_[id].value; }
    const Matrix& grad(NodeId id) const { return nodes_[id].grad; }
    std::size_t size() const { return nodes_.size(); }

private:
    // pull(adjoints): read adjoints[self], accumulate into adjoints[parent].
    using PullRule = std::function<void(Tape&, std::vector<Matrix>&)>;

    struct Node {
        Matrix value;
        Matrix grad;
        PullRule pull;
    };

    NodeId push(Matrix value, PullRule pull);

    std::vector<Node> nodes_;
};

/// Builds a scalar loss node from staged parameter leaves.
using LossBuilder = std::function<NodeId(Tape&, const std::vector<NodeId>&)>;

struct GradCheckReport {
    double max_rel_err = 0.0;
    std::vector<double> per_param;  // max relative error per parameter matrix
};

/// Central finite differences against the tape gradient for every entry of
/// every parameter. Relative error is |a - n| / max(1e-8, |a| + |n|).
GradCheckReport grad_check_detailed(const LossBuilder& f, const std::vector<Matrix>& params,
                                    double eps);
double grad_check(const LossBuilder& f, const std::vector<Matrix>& params, double eps);

}  // namespace h2g2
