#include <cmath>

#include "doctest.h"

#include "h2g2/autodiff.hpp"
#include "h2g2/contracts.hpp"
#include "h2g2/rng.hpp"

using h2g2::Matrix;
using h2g2::NodeId;
using h2g2::Tape;

namespace {

Matrix random_matrix(h2g2::Rng& rng, std::size_t r, std::size_t c) {
    Matrix m(r, c);
    for (double& v : m.data()) {
        v = rng.uniform(-1.0, 1.0);
    }
    return m;
}

// scalar from an arbitrary matrix: row_sum(x * W) with a fixed weighting W,
// then a second row_sum to collapse the remaining row
NodeId weighted_sum(Tape& t, NodeId x, const Matrix& w) {
    NodeId prod = t.matmul(x, t.leaf(w));
    return t.row_sum(t.row_sum(prod));
}

}  // namespace

TEST_CASE("backward through sum of relu") {
    Tape t;
    NodeId w = t.leaf(Matrix::from_rows({{2, -1}}));
    NodeId loss = t.row_sum(t.matmul(t.relu(w), t.leaf(Matrix::from_rows({{1}, {1}}))));
    t.backward(loss);
    CHECK(t.grad(w) == Matrix::from_rows({{1, 0}}));
}

TEST_CASE("backward through product") {
    Tape t;
    NodeId x = t.leaf(Matrix::from_rows({{2}}));
    NodeId w = t.leaf(Matrix::from_rows({{3}}));
    NodeId loss = t.matmul(x, w);
    t.backward(loss);
    CHECK(t.grad(w) == Matrix::from_rows({{2}}));
    CHECK(t.grad(x) == Matrix::from_rows({{3}}));
}

TEST_CASE("backward accumulates additively") {
    Tape t;
    NodeId w = t.leaf(Matrix::from_rows({{1.5, -0.5, 2.0}}));
    NodeId loss = t.row_sum(t.matmul(t.relu(w), t.leaf(Matrix(3, 1, 1.0))));
    t.backward(loss);
    const Matrix once = t.grad(w);
    t.backward(loss);
    const Matrix twice = t.grad(w);
    for (std::size_t j = 0; j < once.cols(); ++j) {
        CHECK(twice(0, j) == 2.0 * once(0, j));
    }

    t.zero_grad();
    t.backward(loss);
    CHECK(t.grad(w) == once);
}

TEST_CASE("backward rejects non-scalar loss") {
    Tape t;
    NodeId w = t.leaf(Matrix(2, 2, 1.0));
    CHECK_THROWS_AS(t.backward(w), h2g2::ContractError);
}

TEST_CASE("grad_check on theta squared") {
    // f(theta) = theta * theta at theta = 3: analytic slope 6
    auto f = [](Tape& t, const std::vector<NodeId>& p) {
        return t.matmul(p[0], p[0]);
    };
    std::vector<Matrix> params{Matrix::from_rows({{3.0}})};
    CHECK(h2g2::grad_check(f, params, 1e-5) < 1e-8);

    Tape t;
    NodeId theta = t.leaf(params[0]);
    NodeId loss = t.matmul(theta, theta);
    t.backward(loss);
    CHECK(t.grad(theta)(0, 0) == doctest::Approx(6.0).epsilon(1e-12));
}

TEST_CASE("grad_check rejects non-positive eps") {
    auto f = [](Tape& t, const std::vector<NodeId>& p) { return t.matmul(p[0], p[0]); };
    std::vector<Matrix> params{Matrix::from_rows({{1.0}})};
    CHECK_THROWS_AS(h2g2::grad_check(f, params, 0.0), h2g2::ContractError);
}

TEST_CASE("grad_check softmax cross-entropy matches closed form") {
    // loss = -ln softmax(logits)[label]; d logits = p - onehot
    const std::size_t label = 1;
    auto f = [label](Tape& t, const std::vector<NodeId>& p) {
        return t.neg_log_entry(t.row_softmax(p[0]), 0, label);
    };
    std::vector<Matrix> params{Matrix::from_rows({{0.3, -0.6, 1.1}})};
    CHECK(h2g2::grad_check(f, params, 1e-5) < 1e-6);

    Tape t;
    NodeId logits = t.leaf(params[0]);
    NodeId loss = t.neg_log_entry(t.row_softmax(logits), 0, label);
    t.backward(loss);
    const Matrix probs = h2g2::row_softmax(params[0]);
    for (std::size_t j = 0; j < 3; ++j) {
        const double expected = probs(0, j) - (j == label ? 1.0 : 0.0);
        CHECK(t.grad(logits)(0, j) == doctest::Approx(expected).epsilon(1e-12));
    }
}

TEST_CASE("every registered operation passes grad_check") {
    h2g2::Rng rng(11);
    const double eps = 1e-5;
    Matrix w41 = random_matrix(rng, 4, 1);
    Matrix w31 = random_matrix(rng, 3, 1);

    SUBCASE("matmul") {
        auto f = [&](Tape& t, const std::vector<NodeId>& p) {
            return weighted_sum(t, t.matmul(p[0], p[1]), w41);
        };
        std::vector<Matrix> params{random_matrix(rng, 3, 2), random_matrix(rng, 2, 4)};
        CHECK(h2g2::grad_check(f, params, eps) < 1e-4);
    }
    SUBCASE("add") {
        auto f = [&](Tape& t, const std::vector<NodeId>& p) {
            return weighted_sum(t, t.add(p[0], p[1]), w41);
        };
        std::vector<Matrix> params{random_matrix(rng, 2, 4), random_matrix(rng, 2, 4)};
        CHECK(h2g2::grad_check(f, params, eps) < 1e-4);
    }
    SUBCASE("scale") {
        auto f = [&](Tape& t, const std::vector<NodeId>& p) {
            return weighted_sum(t, t.scale(p[0], -2.5), w41);
        };
        std::vector<Matrix> params{random_matrix(rng, 3, 4)};
        CHECK(h2g2::grad_check(f, params, eps) < 1e-4);
    }
    SUBCASE("relu") {
        auto f = [&](Tape& t, const std::vector<NodeId>& p) {
            return weighted_sum(t, t.relu(p[0]), w41);
        };
        std::vector<Matrix> params{random_matrix(rng, 3, 4)};
        CHECK(h2g2::grad_check(f, params, eps) < 1e-4);
    }
    SUBCASE("row_softmax") {
        auto f = [&](Tape& t, const std::vector<NodeId>& p) {
            return weighted_sum(t, t.row_softmax(p[0]), w31);
        };
        std::vector<Matrix> params{random_matrix(rng, 4, 3)};
        CHECK(h2g2::grad_check(f, params, eps) < 1e-4);
    }
    SUBCASE("row_sum") {
        auto f = [&](Tape& t, const std::vector<NodeId>& p) {
            return weighted_sum(t, t.row_sum(p[0]), w41);
        };
        std::vector<Matrix> params{random_matrix(rng, 3, 4)};
        CHECK(h2g2::grad_check(f, params, eps) < 1e-4);
    }
    SUBCASE("concat_rows") {
        auto f = [&](Tape& t, const std::vector<NodeId>& p) {
            return weighted_sum(t, t.concat_rows({p[0], p[1]}), w41);
        };
        std::vector<Matrix> params{random_matrix(rng, 1, 4), random_matrix(rng, 2, 4)};
        CHECK(h2g2::grad_check(f, params, eps) < 1e-4);
    }
    SUBCASE("neg_log_entry") {
        auto f = [&](Tape& t, const std::vector<NodeId>& p) {
            return t.neg_log_entry(t.row_softmax(p[0]), 0, 2);
        };
        std::vector<Matrix> params{random_matrix(rng, 1, 4)};
        CHECK(h2g2::grad_check(f, params, eps) < 1e-4);
    }
}

TEST_CASE("gradient matrices share the value shape") {
    Tape t;
    NodeId a = t.leaf(Matrix(3, 5, 0.25));
    CHECK(t.grad(a).rows() == 3);
    CHECK(t.grad(a).cols() == 5);
    CHECK(t.grad(a).all_finite());
}
