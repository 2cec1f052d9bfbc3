#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

#include <Eigen/Eigenvalues>

#include "core/error.hpp"
#include "population/population.hpp"
#include "similarity/mkml.hpp"
#include "../support.hpp"

using namespace mgg;
using namespace mgg::mkml;

namespace {

Matrix blobs(Index per_blob, Index dim, double separation, std::mt19937_64& rng, std::vector<int>& labels) {
    std::normal_distribution<double> noise(0.0, 0.1);
    Matrix x(2 * per_blob, dim);
    labels.clear();
    for (Index i = 0; i < 2 * per_blob; ++i) {
        const int blob = i < per_blob ? 0 : 1;
        labels.push_back(blob);
        for (Index k = 0; k < dim; ++k) {
            x(i, k) = (blob ? separation : 0.0) + noise(rng);
        }
    }
    return x;
}

} // namespace

TEST_CASE("kernel banks") {
    const auto bank = KernelBank::standard();
    REQUIRE(bank.size() == 10);
    CHECK(bank.multipliers.front() == 0.5);
    CHECK(bank.multipliers.back() == 2.75);
    CHECK_NOTHROW(bank.validate());
    KernelBank bad = bank;
    bad.multipliers[3] = bad.multipliers[2];
    CHECK_THROWS_AS(bad.validate(), ValidationError);
    bad = bank;
    bad.weights[0] += 0.1;
    CHECK_THROWS_AS(bad.validate(), ValidationError);
}

TEST_CASE("identical subjects are fully similar") {
    std::mt19937_64 rng(1);
    Matrix x = test::uniform(6, 4, rng);
    x.row(2) = x.row(1);
    const Matrix s = learn_similarity(x, KernelBank::standard()).similarity;
    CHECK(s(1, 2) == 1.0);
    CHECK_THROWS_AS(learn_similarity(Matrix::Ones(4, 3), KernelBank::standard()), NumericalError);
    CHECK_THROWS_AS(learn_similarity(Matrix::Ones(1, 3), KernelBank::standard()), ValidationError);
}

TEST_CASE("a single-kernel bank yields the plain Gaussian kernel") {
    std::mt19937_64 rng(2);
    const Matrix x = test::uniform(7, 3, rng);
    const auto bank = KernelBank::standard(1);
    const Matrix s = learn_similarity(x, bank).similarity;
    double mean = 0.0;
    int pairs = 0;
    for (Index i = 0; i < x.rows(); ++i) {
        for (Index j = i + 1; j < x.rows(); ++j) {
            mean += (x.row(i) - x.row(j)).norm();
            ++pairs;
        }
    }
    mean /= pairs;
    const double width = bank.multipliers[0] * mean;
    for (Index i = 0; i < x.rows(); ++i) {
        for (Index j = 0; j < x.rows(); ++j) {
            const double expected = std::exp(-(x.row(i) - x.row(j)).squaredNorm() / (2.0 * width * width));
            CHECK(s(i, j) == doctest::Approx(expected).epsilon(1e-12));
        }
    }
}

TEST_CASE("well-separated blobs are more similar within than across") {
    const auto pop = synthesize_population({3, 40, 8, 2, 2, 0.02});
    const Matrix s = learn_similarity(pop.source.features, KernelBank::standard()).similarity;
    double within = 0.0, across = 0.0;
    int nw = 0, na = 0;
    for (Index i = 0; i < pop.size(); ++i) {
        for (Index j = i + 1; j < pop.size(); ++j) {
            if (pop.modes[static_cast<std::size_t>(i)] == pop.modes[static_cast<std::size_t>(j)]) {
                within += s(i, j);
                ++nw;
            } else {
                across += s(i, j);
                ++na;
            }
        }
    }
    CHECK(within / nw - across / na >= 0.3);
}

TEST_CASE("similarity invariants and weight simplex") {
    std::mt19937_64 rng(3);
    const Matrix x = test::uniform(25, 6, rng);
    const auto result = learn_similarity(x, KernelBank::standard(), {5, 8});
    const Matrix& s = result.similarity;
    CHECK(s == s.transpose());
    CHECK(s.diagonal() == Vector::Ones(25));
    CHECK(s.minCoeff() >= 0.0);
    CHECK(s.maxCoeff() <= 1.0);
    REQUIRE(result.weight_history.size() == 5);
    for (const auto& w : result.weight_history) {
        double total = 0.0;
        for (double v : w) {
            CHECK(v >= 0.0);
            total += v;
        }
        CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("Jacobi eigensolver agrees with a dense reference") {
    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 10; ++trial) {
        Matrix a = test::uniform(9, 9, rng);
        a = (a + a.transpose()).eval();
        const auto mine = symmetric_eigen(a);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ref(a);
        CHECK(test::max_abs(mine.values - ref.eigenvalues()) < 1e-10);
        const Matrix recon = mine.vectors * mine.values.asDiagonal() * mine.vectors.transpose();
        CHECK(test::max_abs(recon - a) < 1e-10);
        CHECK(test::max_abs(mine.vectors.transpose() * mine.vectors - Matrix::Identity(9, 9)) < 1e-10);
    }
}

TEST_CASE("embedding of a two-block similarity") {
    Matrix s = Matrix::Zero(7, 7);
    s.topLeftCorner(3, 3).setConstant(0.8);
    s.bottomRightCorner(4, 4).setConstant(0.6);
    s.diagonal().setOnes();
    const Matrix z = embed(s, 2);
    for (Index i = 1; i < 3; ++i) {
        CHECK(test::max_abs(z.row(i) - z.row(0)) < 1e-6);
    }
    for (Index i = 4; i < 7; ++i) {
        CHECK(test::max_abs(z.row(i) - z.row(3)) < 1e-6);
    }
    CHECK((z.row(0) - z.row(3)).norm() > 0.5);
}

TEST_CASE("embedding of the identity similarity") {
    // The Laplacian vanishes, so the eigenbasis is the identity basis.
    const Matrix z = embed(Matrix::Identity(4, 4), 2);
    CHECK(z.col(0).cwiseAbs().sum() == doctest::Approx(1.0));
    CHECK(z.col(1).cwiseAbs().sum() == doctest::Approx(1.0));
    CHECK(z.minCoeff() >= 0.0);
    CHECK_THROWS_AS(embed(Matrix::Identity(4, 4), 4), ValidationError);
}

TEST_CASE("embedding is permutation-equivariant") {
    std::mt19937_64 rng(5);
    const Matrix x = test::uniform(12, 3, rng);
    const Matrix s = learn_similarity(x, KernelBank::standard()).similarity;
    const Matrix z = embed(s, 3);
    for (int trial = 0; trial < 10; ++trial) {
        const auto p = test::random_permutation(12, rng);
        const Matrix zp = embed(test::permute_both(s, p), 3);
        CHECK(test::max_abs(zp - test::permute_rows(z, p)) < 1e-8);
    }
}

TEST_CASE("k-means recovers planted point clouds") {
    std::mt19937_64 rng(6);
    std::vector<int> planted;
    const Matrix x = blobs(15, 3, 10.0, rng, planted);
    const auto result = kmeans_cluster(x, 2, 9);
    CHECK(adjusted_rand_index(result.labels, planted) == 1.0);
    for (std::size_t k = 1; k < result.inertia_history.size(); ++k) {
        CHECK(result.inertia_history[k] <= result.inertia_history[k - 1] + 1e-12);
    }
}

TEST_CASE("k-means corner cases") {
    std::mt19937_64 rng(7);
    Matrix x = test::uniform(10, 2, rng);
    const auto one = kmeans_cluster(x, 1, 0);
    for (int label : one.labels) {
        CHECK(label == 0);
    }
    CHECK(test::max_abs(one.centroids.row(0) - x.colwise().mean()) < 1e-12);

    x.row(5) = x.row(2);
    x.row(8) = x.row(2);
    const auto three = kmeans_cluster(x, 3, 4);
    CHECK(three.labels[5] == three.labels[2]);
    CHECK(three.labels[8] == three.labels[2]);
    CHECK_THROWS_AS(kmeans_cluster(x, 11, 0), ValidationError);
}

TEST_CASE("adjusted Rand index") {
    CHECK(adjusted_rand_index({0, 0, 1, 1}, {1, 1, 0, 0}) == doctest::Approx(1.0));
    // pair sums: cells 1, rows 2, cols 3, C(4,2) = 6 -> (1 - 1) / (2.5 - 1)
    CHECK(adjusted_rand_index({0, 0, 1, 1}, {0, 0, 0, 1}) == doctest::Approx(0.0));
}

TEST_CASE("clustering source embeddings") {
    std::mt19937_64 rng(8);
    std::vector<int> planted;
    const Matrix z = blobs(12, 16, 3.0, rng, planted);
    const auto a = cluster_source_embeddings(z, 2, 5);
    const auto b = cluster_source_embeddings(z, 2, 5);
    CHECK(a.labels == b.labels);
    CHECK(adjusted_rand_index(a.labels, planted) >= 0.8);

    const auto p = test::random_permutation(z.rows(), rng);
    const auto permuted = cluster_source_embeddings(test::permute_rows(z, p), 2, 5);
    std::vector<int> expected;
    for (Index k : p) {
        expected.push_back(a.labels[static_cast<std::size_t>(k)]);
    }
    CHECK(adjusted_rand_index(permuted.labels, expected) == doctest::Approx(1.0));

    const Matrix tiny = test::uniform(3, 4, rng);
    const auto each = cluster_source_embeddings(tiny, 3, 1);
    CHECK(std::set<int>(each.labels.begin(), each.labels.end()).size() == 3);
}
