#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "centrality/centrality.hpp"
#include "core/error.hpp"
#include "evaluation/metrics.hpp"
#include "evaluation/plots.hpp"
#include "population/brain_graph.hpp"
#include "training/trainer.hpp"
#include "../support.hpp"

using namespace mgg;
using namespace mgg::eval;
namespace fs = std::filesystem;

namespace {

Matrix random_features(Index n, Index r, std::mt19937_64& rng) {
    Matrix f(n, feature_length(r));
    for (Index i = 0; i < n; ++i) {
        f.row(i) = vectorize(BrainGraph(test::random_weights(r, rng))).transpose();
    }
    return f;
}

double naive_mae(const Matrix& truth, const Matrix& pred, Index r, centrality::Metric metric) {
    double total = 0.0;
    for (Index i = 0; i < truth.rows(); ++i) {
        Vector a = centrality::compute(devectorize(truth.row(i).transpose(), r).graph, metric);
        Vector b = centrality::compute(devectorize(pred.row(i).transpose(), r).graph, metric);
        if (metric == centrality::Metric::eigenvector) {
            a /= a.norm();
            b /= b.norm();
        }
        for (Index k = 0; k < r; ++k) {
            total += std::abs(a(k) - b(k));
        }
    }
    return total / static_cast<double>(truth.rows() * r);
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::istringstream in(line);
    for (std::string cell; std::getline(in, cell, sep);) {
        if (!cell.empty()) out.push_back(cell);
    }
    return out;
}

} // namespace

TEST_CASE("pearson correlation values") {
    Vector a(3), b(3);
    a << 1, 2, 3;
    b << 1, 2, 4;
    CHECK(pcc(a, a) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(pcc(a, Vector(-a)) == doctest::Approx(-1.0).epsilon(1e-15));
    // 3 / sqrt(2 * 42/9)
    CHECK(pcc(a, b) == doctest::Approx(9.0 / std::sqrt(84.0)).epsilon(1e-14));
    CHECK(pcc(a, b) == doctest::Approx(0.98198050606).epsilon(1e-10));
    CHECK_THROWS_AS(pcc(a, Vector(Vector::Ones(3))), NumericalError);
    CHECK_THROWS_AS(pcc(a, Vector(Vector::Ones(2))), ValidationError);
    CHECK_THROWS_AS(pcc(Vector(Vector::Ones(1)), Vector(Vector::Ones(1))), ValidationError);

    std::mt19937_64 rng(1);
    for (int trial = 0; trial < 20; ++trial) {
        const Vector x = test::uniform(30, 1, rng);
        const Vector y = test::uniform(30, 1, rng);
        const double base = pcc(x, y);
        CHECK(std::abs(base) <= 1.0);
        CHECK(pcc(Vector((3.5 * x).array() + 2.0), y) == doctest::Approx(base).epsilon(1e-12));
        CHECK(pcc(y, x) == doctest::Approx(base).epsilon(1e-14));
    }
    const Matrix m = test::uniform(4, 5, rng);
    const Matrix n = test::uniform(4, 5, rng);
    const Matrix mt = m.transpose(), nt = n.transpose();
    CHECK(pcc(m, n) == doctest::Approx(pcc(Vector(Eigen::Map<const Vector>(mt.data(), 20)),
                                           Vector(Eigen::Map<const Vector>(nt.data(), 20))))
                           .epsilon(1e-14));
}

TEST_CASE("centrality MAE matches a direct double loop") {
    std::mt19937_64 rng(2);
    const Index r = 6;
    const Matrix truth = random_features(7, r, rng);
    const Matrix pred = random_features(7, r, rng);
    for (auto metric : {centrality::Metric::betweenness, centrality::Metric::closeness, centrality::Metric::eigenvector}) {
        CHECK(std::abs(mae_centrality(truth, pred, r, metric) - naive_mae(truth, pred, r, metric)) <= 1e-12);
        CHECK(mae_centrality(truth, truth, r, metric) == 0.0);
    }
    CHECK_THROWS_AS(mae_centrality(truth, pred.topRows(3), r, centrality::Metric::closeness), ValidationError);
}

TEST_CASE("scoring a population against itself") {
    std::mt19937_64 rng(3);
    const Index r = 5;
    const std::vector<Matrix> truth{random_features(6, r, rng), random_features(6, r, rng)};
    const auto self = score_predictions(truth, truth, r);
    REQUIRE(self.domains.size() == 2);
    CHECK(self.domains[0].domain == "T1");
    CHECK(self.domains[1].domain == "T2");
    CHECK(self.mean.domain == "mean");
    for (const auto& s : self.domains) {
        CHECK(s.pcc == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(s.mae_bc == 0.0);
        CHECK(s.mae_cc == 0.0);
        CHECK(s.mae_ec == 0.0);
    }

    const std::vector<Matrix> pred{random_features(6, r, rng), random_features(6, r, rng)};
    const auto report = score_predictions(truth, pred, r);
    CHECK(std::abs(report.mean.pcc - 0.5 * (report.domains[0].pcc + report.domains[1].pcc)) <= 1e-12);
    CHECK(std::abs(report.mean.mae_cc - 0.5 * (report.domains[0].mae_cc + report.domains[1].mae_cc)) <= 1e-12);
    CHECK(std::abs(report.mean.mae_ec - 0.5 * (report.domains[0].mae_ec + report.domains[1].mae_ec)) <= 1e-12);
    CHECK(std::abs(report.mean.mae_bc - 0.5 * (report.domains[0].mae_bc + report.domains[1].mae_bc)) <= 1e-12);
    CHECK(report.domains[1].pcc == pcc(truth[1], pred[1]));
    CHECK_THROWS_AS(score_predictions(truth, {pred[0]}, r), ValidationError);
}

TEST_CASE("text and CSV reports agree") {
    EvaluationReport report;
    report.domains = {{"T1", 0.5245, 0.0056, 0.1449, 0.0111}, {"T2", 0.4001, 0.0123, 0.2001, 0.0222}};
    report.mean = {"mean", 0.4623, 0.00895, 0.1725, 0.01665};
    report.metadata = {{"seed", "7"}, {"config_digest", digest("x")}};
    CHECK(format_score(0.5245) == "0.524500");

    const std::string text = render_text(report);
    const std::string csv = render_csv(report);
    CHECK(text.rfind("# config_digest = ", 0) == 0);
    CHECK(text.find("# seed = 7\n") != std::string::npos);

    std::vector<std::vector<std::string>> text_rows, csv_rows;
    std::istringstream t(text), c(csv);
    for (std::string line; std::getline(t, line);) {
        if (line.rfind("#", 0) != 0) text_rows.push_back(split(line, ' '));
    }
    for (std::string line; std::getline(c, line);) {
        csv_rows.push_back(split(line, ','));
    }
    REQUIRE(text_rows.size() == 4);
    REQUIRE(csv_rows.size() == 4);
    CHECK(csv_rows[0] == std::vector<std::string>{"domain", "pcc", "mae_bc", "mae_cc", "mae_ec"});
    for (std::size_t k = 1; k < 4; ++k) {
        CHECK(text_rows[k] == csv_rows[k]);
    }
    CHECK(csv_rows[1] == std::vector<std::string>{"T1", "0.524500", "0.005600", "0.144900", "0.011100"});
    CHECK(csv_rows[3][0] == "mean");
}

TEST_CASE("FNV-1a digests") {
    CHECK(digest("") == "cbf29ce484222325");
    CHECK(digest("a") == "af63dc4c8601ec8c");
    CHECK(digest("foobar") == "85944171f73967e8");
}

TEST_CASE("loss logs become one chart per column") {
    const fs::path dir = fs::temp_directory_path() / "mgg_test_evaluation";
    fs::remove_all(dir);
    fs::create_directories(dir);
    train::TrainingConfig config;
    config.iterations = 3;
    config.batch_size = 8;
    config.seed = 4;
    const auto state = train::train(synthesize_population({2, 12, 5, 2, 2, 0.02}), config);
    const std::string log = (dir / "losses.csv").string();
    train::write_loss_log(log, state.log);

    const auto table = read_loss_log(log);
    CHECK(table.columns.size() == 11);
    CHECK(table.columns.front() == "L_D");
    CHECK(table.iterations == std::vector<double>{1, 2, 3});
    CHECK(table.values[0][2] == state.log[2].d_total);

    const auto paths = write_loss_plots(table, (dir / "plots").string());
    CHECK(paths.size() == 11);
    for (const auto& p : paths) {
        std::ifstream in(p);
        std::string first;
        std::getline(in, first);
        CHECK(first.find("<svg") != std::string::npos);
    }
    const std::string svg = render_line_svg("L_G", {1, 2, 3}, {0.5, -1.0, 2.0});
    CHECK(svg.find("</svg>") != std::string::npos);
    CHECK(svg.find("L_G") != std::string::npos);

    CHECK_THROWS_AS(read_loss_log((dir / "missing.csv").string()), IoError);
    std::ofstream((dir / "bad.csv").string()) << "iteration,L_D\n1,abc\n";
    CHECK_THROWS_AS(read_loss_log((dir / "bad.csv").string()), ValidationError);
}
