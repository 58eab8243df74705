#include <cmath>

#include "doctest.h"

#include "h2g2/contracts.hpp"
#include "h2g2/matrix.hpp"
#include "h2g2/rng.hpp"
#include "oracles.hpp"

using h2g2::Matrix;

namespace {

Matrix random_matrix(h2g2::Rng& rng, std::size_t r, std::size_t c, double lo = -1.0,
                     double hi = 1.0) {
    Matrix m(r, c);
    for (double& v : m.data()) {
        v = rng.uniform(lo, hi);
    }
    return m;
}

double max_abs_diff(const Matrix& m, const oracle::Grid& g) {
    double worst = 0.0;
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) {
            worst = std::max(worst, std::abs(m(i, j) - g[i][j]));
        }
    }
    return worst;
}

}  // namespace

TEST_CASE("matmul identity") {
    Matrix id = Matrix::from_rows({{1, 0}, {0, 1}});
    Matrix b = Matrix::from_rows({{3, 4}, {5, 6}});
    CHECK(matmul(id, b) == b);
}

TEST_CASE("matmul row by column") {
    Matrix a = Matrix::from_rows({{1, 2}});
    Matrix b = Matrix::from_rows({{3}, {4}});
    Matrix c = matmul(a, b);
    CHECK(c.rows() == 1);
    CHECK(c.cols() == 1);
    CHECK(c(0, 0) == doctest::Approx(11.0).epsilon(1e-15));
}

TEST_CASE("matmul matches triple-loop reference") {
    h2g2::Rng rng(42);
    Matrix a = random_matrix(rng, 3, 4);
    Matrix b = random_matrix(rng, 4, 2);
    Matrix c = matmul(a, b);
    auto ref = oracle::matmul_ref(oracle::to_grid(a), oracle::to_grid(b));
    CHECK(max_abs_diff(c, ref) < 1e-12);
}

TEST_CASE("matmul matches reference on random shapes up to 16x16") {
    h2g2::Rng rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 1 + rng.below(16);
        const std::size_t k = 1 + rng.below(16);
        const std::size_t p = 1 + rng.below(16);
        Matrix a = random_matrix(rng, n, k);
        Matrix b = random_matrix(rng, k, p);
        auto ref = oracle::matmul_ref(oracle::to_grid(a), oracle::to_grid(b));
        CHECK(max_abs_diff(matmul(a, b), ref) < 1e-12);
    }
}

TEST_CASE("matmul rejects mismatched shapes naming both") {
    Matrix a(2, 3);
    Matrix b(4, 2);
    CHECK_THROWS_WITH_AS(matmul(a, b), doctest::Contains("2x3"), h2g2::ContractError);
    CHECK_THROWS_WITH_AS(matmul(a, b), doctest::Contains("4x2"), h2g2::ContractError);
}

TEST_CASE("row_softmax of zeros is uniform") {
    Matrix z(3, 3, 0.0);
    Matrix s = row_softmax(z);
    for (std::size_t i = 0; i < 3; ++i) {
        for (std::size_t j = 0; j < 3; ++j) {
            CHECK(s(i, j) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
        }
    }
}

TEST_CASE("row_softmax of [0, ln 3]") {
    Matrix m = Matrix::from_rows({{0.0, std::log(3.0)}});
    Matrix s = row_softmax(m);
    CHECK(s(0, 0) == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(s(0, 1) == doctest::Approx(0.75).epsilon(1e-12));
}

TEST_CASE("row_softmax rows sum to one and are shift invariant") {
    h2g2::Rng rng(3);
    Matrix m = random_matrix(rng, 4, 4, -5.0, 5.0);
    Matrix s = row_softmax(m);
    for (std::size_t i = 0; i < 4; ++i) {
        double sum = 0.0;
        for (std::size_t j = 0; j < 4; ++j) {
            CHECK(s(i, j) > 0.0);
            CHECK(s(i, j) < 1.0);
            sum += s(i, j);
        }
        CHECK(std::abs(sum - 1.0) < 1e-12);
    }

    Matrix shifted = m;
    for (std::size_t j = 0; j < 4; ++j) {
        shifted(2, j) += 17.5;
    }
    Matrix s2 = row_softmax(shifted);
    for (std::size_t i = 0; i < 4; ++i) {
        for (std::size_t j = 0; j < 4; ++j) {
            CHECK(std::abs(s2(i, j) - s(i, j)) < 1e-12);
        }
    }
}

TEST_CASE("relu clamps negatives") {
    Matrix m = Matrix::from_rows({{-1, 2}, {0, -3}});
    Matrix r = relu(m);
    CHECK(r == Matrix::from_rows({{0, 2}, {0, 0}}));
}

TEST_CASE("row_sum totals columns") {
    Matrix m = Matrix::from_rows({{1, 2}, {3, 4}});
    CHECK(row_sum(m) == Matrix::from_rows({{4, 6}}));
}

TEST_CASE("add") {
    CHECK(add(Matrix::from_rows({{1}}), Matrix::from_rows({{2}})) == Matrix::from_rows({{3}}));
    CHECK_THROWS_AS(add(Matrix(1, 2), Matrix(2, 1)), h2g2::ContractError);
}

TEST_CASE("matrix rejects zero dimensions") {
    CHECK_THROWS_AS(Matrix(0, 3), h2g2::ContractError);
    CHECK_THROWS_AS(Matrix(3, 0), h2g2::ContractError);
}
