#include "h2g2/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "h2g2/contracts.hpp"

namespace h2g2 {

NodeId Tape::push(Matrix value, PullRule pull) {
    Node node;
    node.grad = Matrix(value.rows(), value.cols(), 0.0);
    node.value = std::move(value);
    node.pull = std::move(pull);
    nodes_.push_back(std::move(node));
    return nodes_.size() - 1;
}

NodeId Tape::leaf(Matrix value) {
    return push(std::move(value), nullptr);
}

NodeId Tape::matmul(NodeId a, NodeId b) {
    Matrix c = h2g2::matmul(value(a), value(b));
    NodeId self = push(std::move(c), nullptr);
    // dA = dC * B^T, dB = A^T * dC
    nodes_[self].pull = [self, a, b](Tape& t, std::vector<Matrix>& adj) {
        const Matrix& dc = adj[self];
        adj[a] = h2g2::add(adj[a], h2g2::matmul(dc, transpose(t.value(b))));
        adj[b] = h2g2::add(adj[b], h2g2::matmul(transpose(t.value(a)), dc));
    };
    return self;
}

NodeId Tape::add(NodeId a, NodeId b) {
    Matrix c = h2g2::add(value(a), value(b));
    NodeId self = push(std::move(c), nullptr);
    nodes_[self].pull = [self, a, b](Tape&, std::vector<Matrix>& adj) {
        adj[a] = h2g2::add(adj[a], adj[self]);
        adj[b] = h2g2::add(adj[b], adj[self]);
    };
    return self;
}

NodeId Tape::scale(NodeId a, double c) {
    Matrix out = h2g2::scale(value(a), c);
    NodeId self = push(std::move(out), nullptr);
    nodes_[self].pull = [self, a, c](Tape&, std::vector<Matrix>& adj) {
        adj[a] = h2g2::add(adj[a], h2g2::scale(adj[self], c));
    };
    return self;
}

NodeId Tape::relu(NodeId a) {
    Matrix out = h2g2::relu(value(a));
    NodeId self = push(std::move(out), nullptr);
    // subgradient at 0 is 0
    nodes_[self].pull = [self, a](Tape& t, std::vector<Matrix>& adj) {
        const Matrix& x = t.value(a);
        const Matrix& d = adj[self];
        Matrix& da = adj[a];
        for (std::size_t i = 0; i < x.rows(); ++i) {
            for (std::size_t j = 0; j < x.cols(); ++j) {
                if (x(i, j) > 0.0) da(i, j) += d(i, j);
            }
        }
    };
    return self;
}

NodeId Tape::row_softmax(NodeId a) {
    Matrix out = h2g2::row_softmax(value(a));
    NodeId self = push(std::move(out), nullptr);
    // per row: dx_j = y_j * (dy_j - sum_k dy_k y_k)
    nodes_[self].pull = [self, a](Tape& t, std::vector<Matrix>& adj) {
        const Matrix& y = t.value(self);
        const Matrix& dy = adj[self];
        Matrix& dx = adj[a];
        for (std::size_t i = 0; i < y.rows(); ++i) {
            double dot = 0.0;
            for (std::size_t j = 0; j < y.cols(); ++j) {
                dot += dy(i, j) * y(i, j);
            }
            for (std::size_t j = 0; j < y.cols(); ++j) {
                dx(i, j) += y(i, j) * (dy(i, j) - dot);
            }
        }
    };
    return self;
}

NodeId Tape::row_sum(NodeId a) {
    Matrix out = h2g2::row_sum(value(a));
    NodeId self = push(std::move(out), nullptr);
    nodes_[self].pull = [self, a](Tape& t, std::vector<Matrix>& adj) {
        const Matrix& d = adj[self];
        Matrix& da = adj[a];
        for (std::size_t i = 0; i < t.value(a).rows(); ++i) {
            for (std::size_t j = 0; j < d.cols(); ++j) {
                da(i, j) += d(0, j);
            }
        }
    };
    return self;
}

NodeId Tape::concat_rows(const std::vector<NodeId>& parts) {
    require(!parts.empty(), "concat_rows: no parts");
    const std::size_t cols = value(parts[0]).cols();
    std::size_t rows = 0;
    for (NodeId p : parts) {
        require(value(p).cols() == cols, "concat_rows: column counts differ: " +
                                             value(parts[0]).shape() + " vs " + value(p).shape());
        rows += value(p).rows();
    }
    Matrix out(rows, cols);
    std::size_t r = 0;
    for (NodeId p : parts) {
        const Matrix& v = value(p);
        for (std::size_t i = 0; i < v.rows(); ++i, ++r) {
            for (std::size_t j = 0; j < cols; ++j) {
                out(r, j) = v(i, j);
            }
        }
    }
    NodeId self = push(std::move(out), nullptr);
    std::vector<NodeId> ps = parts;
    nodes_[self].pull = [self, ps](Tape& t, std::vector<Matrix>& adj) {
        const Matrix& d = adj[self];
        std::size_t r = 0;
        for (NodeId p : ps) {
            Matrix& dp = adj[p];
            for (std::size_t i = 0; i < t.value(p).rows(); ++i, ++r) {
                for (std::size_t j = 0; j < d.cols(); ++j) {
                    dp(i, j) += d(r, j);
                }
            }
        }
    };
    return self;
}

NodeId Tape::neg_log_entry(NodeId a, std::size_t r, std::size_t c, double floor) {
    const Matrix& v = value(a);
    require(r < v.rows() && c < v.cols(), "neg_log_entry: index (" + std::to_string(r) + "," +
                                              std::to_string(c) + ") out of range for " +
                                              v.shape());
    Matrix out(1, 1);
    out(0, 0) = -std::log(std::max(v(r, c), floor));
    NodeId self = push(std::move(out), nullptr);
    nodes_[self].pull = [self, a, r, c, floor](Tape& t, std::vector<Matrix>& adj) {
        const double p = t.value(a)(r, c);
        if (p > floor) {
            adj[a](r, c) += -adj[self](0, 0) / p;
        }
    };
    return self;
}

void Tape::backward(NodeId loss) {
    require(loss < nodes_.size(), "backward: node id out of range");
    const Matrix& lv = value(loss);
    require(lv.rows() == 1 && lv.cols() == 1,
            "backward: loss must be 1x1, got " + lv.shape());

    std::vector<Matrix> adj(loss + 1);
    for (NodeId i = 0; i <= loss; ++i) {
        adj[i] = Matrix(nodes_[i].value.rows(), nodes_[i].value.cols(), 0.0);
    }
    adj[loss](0, 0) = 1.0;
    for (NodeId i = loss + 1; i-- > 0;) {
        if (nodes_[i].pull) {
            nodes_[i].pull(*this, adj);
        }
    }
    for (NodeId i = 0; i <= loss; ++i) {
        nodes_[i].grad = h2g2::add(nodes_[i].grad, adj[i]);
    }
}

void Tape::zero_grad() {
    for (Node& n : nodes_) {
        n.grad = Matrix(n.value.rows(), n.value.cols(), 0.0);
    }
}

GradCheckReport grad_check_detailed(const LossBuilder& f, const std::vector<Matrix>& params,
                                    double eps) {
    require(eps > 0.0, "grad_check: eps must be positive");

    auto eval = [&](const std::vector<Matrix>& ps) {
        Tape t;
        std::vector<NodeId> ids;
        ids.reserve(ps.size());
        for (const Matrix& p : ps) {
            ids.push_back(t.leaf(p));
        }
        NodeId loss = f(t, ids);
        return t.value(loss)(0, 0);
    };

    // analytic gradients
    std::vector<Matrix> analytic;
    {
        Tape t;
        std::vector<NodeId> ids;
        for (const Matrix& p : params) {
            ids.push_back(t.leaf(p));
        }
        NodeId loss = f(t, ids);
        t.backward(loss);
        for (NodeId id : ids) {
            analytic.push_back(t.grad(id));
        }
    }

    GradCheckReport report;
    report.per_param.assign(params.size(), 0.0);
    std::vector<Matrix> work = params;
    for (std::size_t p = 0; p < params.size(); ++p) {
        for (std::size_t i = 0; i < params[p].rows(); ++i) {
            for (std::size_t j = 0; j < params[p].cols(); ++j) {
                const double original = work[p](i, j);
                work[p](i, j) = original + eps;
                const double fp = eval(work);
                work[p](i, j) = original - eps;
                const double fm = eval(work);
                work[p](i, j) = original;

                const double numeric = (fp - fm) / (2.0 * eps);
                const double a = analytic[p](i, j);
                const double rel =
                    std::abs(a - numeric) / std::max(1e-8, std::abs(a) + std::abs(numeric));
                report.per_param[p] = std::max(report.per_param[p], rel);
                report.max_rel_err = std::max(report.max_rel_err, rel);
            }
        }
    }
    return report;
}

double grad_check(const LossBuilder& f, const std::vector<Matrix>& params, double eps) {
    return grad_check_detailed(f, params, eps).max_rel_err;
}

}  // namespace h2g2
