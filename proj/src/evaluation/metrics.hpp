#pragma once

#include <map>
#include <string>
#include <vector>

#include "centrality/centrality.hpp"
#include "core/matrix.hpp"

namespace mgg::eval {

/**
 * Pearson correlation of two equally long vectors.
 * @throws ValidationError for length < 2 or mismatched lengths,
 * NumericalError when either side has zero variance.
 */
double pcc(const Vector& a, const Vector& b);

/// PCC of two matrices flattened row by row.
double pcc(const Matrix& a, const Matrix& b);

/**
 * Mean over n x r entries of |centrality(truth) - centrality(pred)|. EC rows
 * are unit-normalized on both sides first.
 */
double mae_centrality(const Matrix& truth, const Matrix& pred, Index regions, centrality::Metric metric);

struct DomainScores {
    std::string domain;
    double pcc = 0.0;
    double mae_bc = 0.0;
    double mae_cc = 0.0;
    double mae_ec = 0.0;
};

struct EvaluationReport {
    std::vector<DomainScores> domains;
    DomainScores mean; ///< domain "mean"
    std::map<std::string, std::string> metadata;
};

/// Scores every target domain and their average.
EvaluationReport score_predictions(const std::vector<Matrix>& truth, const std::vector<Matrix>& predicted,
                                   Index regions);

/// Fixed-precision formatting shared by the text table and the CSV.
std::string format_score(double value);

/// Aligned table preceded by `# key = value` metadata lines.
std::string render_text(const EvaluationReport& report);

/// `domain,pcc,mae_bc,mae_cc,mae_ec` rows for every domain and the mean.
std::string render_csv(const EvaluationReport& report);

/// Hex FNV-1a digest of a text blob (used for config digests).
std::string digest(const std::string& text);

} // namespace mgg::eval
