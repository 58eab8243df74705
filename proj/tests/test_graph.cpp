#include <cmath>

#include "doctest.h"

#include "h2g2/contracts.hpp"
#include "h2g2/graph.hpp"
#include "h2g2/rng.hpp"

using h2g2::DatasetSchema;
using h2g2::HierarchicalSample;
using h2g2::Matrix;

namespace {

Matrix random_symmetric_binary(h2g2::Rng& rng, std::size_t n) {
    Matrix a(n, n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double v = rng.uniform() < 0.5 ? 0.0 : 1.0;
            a(i, j) = v;
            a(j, i) = v;
        }
    }
    return a;
}

double spectral_radius(const Matrix& m) {
    h2g2::Rng rng(99);
    Matrix v(m.rows(), 1);
    for (double& x : v.data()) {
        x = rng.uniform(0.1, 1.0);
    }
    double lambda = 0.0;
    for (int it = 0; it < 500; ++it) {
        Matrix w = matmul(m, v);
        double norm = 0.0;
        for (double x : w.data()) norm += x * x;
        norm = std::sqrt(norm);
        if (norm == 0.0) return 0.0;
        lambda = norm;
        v = scale(w, 1.0 / norm);
    }
    return lambda;
}

HierarchicalSample conforming_sample(const DatasetSchema& schema) {
    HierarchicalSample s;
    s.subject_id = "subjA";
    s.sample_id = "s000";
    s.label = 1;
    for (const auto& mod : schema.modalities) {
        s.features.emplace_back(mod.channel_count, schema.feature_len, 0.5);
    }
    return s;
}

}  // namespace

TEST_CASE("complete subgraph shapes") {
    CHECK(h2g2::build_complete_subgraph(1) == Matrix::from_rows({{0}}));
    CHECK(h2g2::build_complete_subgraph(2) == Matrix::from_rows({{0, 1}, {1, 0}}));
    Matrix a3 = h2g2::build_complete_subgraph(3);
    for (std::size_t i = 0; i < 3; ++i) {
        double sum = 0.0;
        for (std::size_t j = 0; j < 3; ++j) sum += a3(i, j);
        CHECK(sum == 2.0);
    }
    CHECK_THROWS_AS(h2g2::build_complete_subgraph(0), h2g2::ContractError);
}

TEST_CASE("normalize_adjacency base cases") {
    CHECK(h2g2::normalize_adjacency(Matrix::from_rows({{0}})).matrix() ==
          Matrix::from_rows({{1}}));

    Matrix two = h2g2::normalize_adjacency(Matrix::from_rows({{0, 1}, {1, 0}})).matrix();
    for (double v : two.data()) {
        CHECK(v == doctest::Approx(0.5).epsilon(1e-15));
    }

    Matrix four = h2g2::normalize_adjacency(h2g2::build_complete_subgraph(4)).matrix();
    for (double v : four.data()) {
        CHECK(v == doctest::Approx(0.25).epsilon(1e-14));
    }
}

TEST_CASE("normalize_adjacency rejects bad input") {
    CHECK_THROWS_AS(h2g2::normalize_adjacency(Matrix(2, 3, 0.0)), h2g2::ContractError);
    CHECK_THROWS_AS(h2g2::normalize_adjacency(Matrix::from_rows({{0, 1}, {0, 0}})),
                    h2g2::ContractError);
    CHECK_THROWS_AS(h2g2::normalize_adjacency(Matrix::from_rows({{0, 0.5}, {0.5, 0}})),
                    h2g2::ContractError);
    CHECK_THROWS_AS(h2g2::normalize_adjacency(Matrix::from_rows({{1, 0}, {0, 1}})),
                    h2g2::ContractError);
}

TEST_CASE("complete graph normalizes to the constant 1/n") {
    for (std::size_t n = 1; n <= 6; ++n) {
        Matrix norm = h2g2::normalize_adjacency(h2g2::build_complete_subgraph(n)).matrix();
        for (double v : norm.data()) {
            CHECK(v == doctest::Approx(1.0 / static_cast<double>(n)).epsilon(1e-13));
        }
    }
}

TEST_CASE("normalized adjacency is symmetric with bounded spectrum") {
    h2g2::Rng rng(5);
    for (int trial = 0; trial < 25; ++trial) {
        const std::size_t n = 2 + rng.below(7);  // up to 8 nodes
        Matrix a = random_symmetric_binary(rng, n);
        Matrix norm = h2g2::normalize_adjacency(a).matrix();
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                CHECK(std::abs(norm(i, j) - norm(j, i)) < 1e-12);
                CHECK(norm(i, j) >= 0.0);
            }
        }
        CHECK(spectral_radius(norm) <= 1.0 + 1e-9);
    }
}

TEST_CASE("modality adjacencies have unit row sums") {
    // every subgraph the model builds is complete, hence regular, so the
    // normalized rows sum to exactly 1
    for (const auto& norm : h2g2::build_modality_adjacencies(DatasetSchema::cogpilot())) {
        const Matrix& m = norm.matrix();
        for (std::size_t i = 0; i < m.rows(); ++i) {
            double row = 0.0;
            for (std::size_t j = 0; j < m.cols(); ++j) row += m(i, j);
            CHECK(std::abs(row - 1.0) < 1e-12);
        }
    }
}

TEST_CASE("default schema matches the CogPilot channel layout") {
    DatasetSchema s = DatasetSchema::cogpilot();
    CHECK(s.modality_count() == 9);
    CHECK(s.feature_len == 100);
    CHECK(s.class_count == 2);
    std::size_t channels = 0;
    for (const auto& m : s.modalities) channels += m.channel_count;
    CHECK(channels == 22);
    CHECK(*s.index_of("EMG") == 0);
    CHECK(s.modalities[*s.index_of("ACC")].channel_count == 6);
    CHECK(s.modalities[*s.index_of("GD")].channel_count == 6);
    CHECK(s.modalities[*s.index_of("PD")].channel_count == 2);
    CHECK(!s.index_of("XYZ"));
}

TEST_CASE("schema JSON round trip") {
    DatasetSchema s = DatasetSchema::cogpilot();
    DatasetSchema back = h2g2::schema_from_json(h2g2::schema_to_json(s));
    CHECK(back.modality_count() == s.modality_count());
    CHECK(h2g2::schema_hash(back) == h2g2::schema_hash(s));

    DatasetSchema other = s;
    other.modalities[0].channel_count = 3;
    CHECK(h2g2::schema_hash(other) != h2g2::schema_hash(s));
}

TEST_CASE("validate_sample accepts a conforming sample") {
    DatasetSchema schema = DatasetSchema::cogpilot();
    CHECK(h2g2::validate_sample(conforming_sample(schema), schema).empty());
}

TEST_CASE("validate_sample reports a missing modality") {
    DatasetSchema schema = DatasetSchema::cogpilot();
    HierarchicalSample s = conforming_sample(schema);
    s.features[*schema.index_of("PD")] = Matrix{};
    auto violations = h2g2::validate_sample(s, schema);
    REQUIRE(violations.size() == 1);
    CHECK(violations[0] == "missing modality PD");
}

TEST_CASE("validate_sample reports every violation, not just the first") {
    DatasetSchema schema = DatasetSchema::cogpilot();
    HierarchicalSample s = conforming_sample(schema);
    s.label = 7;
    s.features[*schema.index_of("EMG")] = Matrix(3, schema.feature_len, 0.0);  // wrong channels
    s.features[*schema.index_of("EO")](0, 0) = std::nan("");
    auto violations = h2g2::validate_sample(s, schema);
    CHECK(violations.size() == 3);
}

TEST_CASE("validate_sample flags shape mismatch") {
    DatasetSchema schema = DatasetSchema::cogpilot();
    HierarchicalSample s = conforming_sample(schema);
    s.features[0] = Matrix(2, 50, 0.0);  // wrong feature length
    auto violations = h2g2::validate_sample(s, schema);
    REQUIRE(violations.size() == 1);
    CHECK(violations[0].find("EMG") != std::string::npos);
    CHECK(violations[0].find("2x50") != std::string::npos);
}
