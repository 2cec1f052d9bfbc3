#include "evaluation/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

#include <fmt/format.h>

#include "core/error.hpp"

namespace mgg::eval {

double pcc(const Vector& a, const Vector& b) {
    if (a.size() != b.size()) {
        throw ValidationError("pcc: vectors differ in length");
    }
    if (a.size() < 2) {
        throw ValidationError("pcc: need at least two values");
    }
    const Vector da = a.array() - a.mean();
    const Vector db = b.array() - b.mean();
    const double va = da.squaredNorm();
    const double vb = db.squaredNorm();
    if (va == 0.0 || vb == 0.0) {
        throw NumericalError("pcc: correlation is undefined for a constant vector");
    }
    return std::clamp(da.dot(db) / std::sqrt(va * vb), -1.0, 1.0);
}

double pcc(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw DimensionError("pcc: matrices differ in shape");
    }
    // row-major storage, so this flattens row by row
    return pcc(Vector(Eigen::Map<const Vector>(a.data(), a.size())),
               Vector(Eigen::Map<const Vector>(b.data(), b.size())));
}

double mae_centrality(const Matrix& truth, const Matrix& pred, Index regions, centrality::Metric metric) {
    if (truth.rows() != pred.rows() || truth.cols() != pred.cols()) {
        throw DimensionError("mae_centrality: truth and prediction differ in shape");
    }
    if (truth.rows() == 0) {
        throw ValidationError("mae_centrality: no subjects");
    }
    Matrix ct = centrality::centrality_matrix(truth, regions, metric);
    Matrix cp = centrality::centrality_matrix(pred, regions, metric);
    if (metric == centrality::Metric::eigenvector) {
        ct.rowwise().normalize();
        cp.rowwise().normalize();
    }
    return (ct - cp).cwiseAbs().mean();
}

EvaluationReport score_predictions(const std::vector<Matrix>& truth, const std::vector<Matrix>& predicted,
                                   Index regions) {
    if (truth.size() != predicted.size() || truth.empty()) {
        throw ValidationError("evaluation: need one prediction per target domain");
    }
    EvaluationReport report;
    report.mean.domain = "mean";
    for (std::size_t i = 0; i < truth.size(); ++i) {
        DomainScores s;
        s.domain = fmt::format("T{}", i + 1);
        s.pcc = pcc(truth[i], predicted[i]);
        s.mae_bc = mae_centrality(truth[i], predicted[i], regions, centrality::Metric::betweenness);
        s.mae_cc = mae_centrality(truth[i], predicted[i], regions, centrality::Metric::closeness);
        s.mae_ec = mae_centrality(truth[i], predicted[i], regions, centrality::Metric::eigenvector);
        report.domains.push_back(s);
    }
    const double m = static_cast<double>(report.domains.size());
    for (const DomainScores& s : report.domains) {
        report.mean.pcc += s.pcc / m;
        report.mean.mae_bc += s.mae_bc / m;
        report.mean.mae_cc += s.mae_cc / m;
        report.mean.mae_ec += s.mae_ec / m;
    }
    return report;
}

std::string format_score(double value) { return fmt::format("{:.6f}", value); }

std::string render_text(const EvaluationReport& report) {
    std::string out;
    for (const auto& [key, value] : report.metadata) {
        out += fmt::format("# {} = {}\n", key, value);
    }
    out += fmt::format("{:<8} {:>10} {:>10} {:>10} {:>10}\n", "domain", "PCC", "MAE(BC)", "MAE(CC)", "MAE(EC)");
    auto row = [&](const DomainScores& s) {
        out += fmt::format("{:<8} {:>10} {:>10} {:>10} {:>10}\n", s.domain, format_score(s.pcc),
                           format_score(s.mae_bc), format_score(s.mae_cc), format_score(s.mae_ec));
    };
    for (const DomainScores& s : report.domains) {
        row(s);
    }
    row(report.mean);
    return out;
}

std::string render_csv(const EvaluationReport& report) {
    std::string out = "domain,pcc,mae_bc,mae_cc,mae_ec\n";
    auto row = [&](const DomainScores& s) {
        out += fmt::format("{},{},{},{},{}\n", s.domain, format_score(s.pcc), format_score(s.mae_bc),
                           format_score(s.mae_cc), format_score(s.mae_ec));
    };
    for (const DomainScores& s : report.domains) {
        row(s);
    }
    row(report.mean);
    return out;
}

std::string digest(const std::string& text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return fmt::format("{:016x}", h);
}

} // namespace mgg::eval
