#pragma once

#include <cstdint>
#include <string>

#include "centrality/centrality.hpp"

namespace mgg::train {

struct LossWeights {
    double gdc = 1.0;
    double gp = 0.1;
    double top = 0.1;
    double rec = 0.01;
    double inf = 1.0;
    /// Gradient-penalty threshold; a negative value means "use m".
    double sigma = -1.0;

    double resolved_sigma(Index targets) const { return sigma < 0.0 ? static_cast<double>(targets) : sigma; }
};

struct TrainingConfig {
    std::int64_t iterations = 1000;
    std::int64_t batch_size = 70;
    double learning_rate = 1e-4;
    double beta1 = 0.5;
    double beta2 = 0.999;
    std::int64_t n_critic = 5;
    std::int64_t clusters = 2;
    centrality::Metric metric = centrality::Metric::eigenvector;
    std::uint64_t seed = 0;
    LossWeights weights;

    /// Subjects per cluster whose centralities enter the topology losses.
    std::int64_t centrality_subsample = 16;
    /// Use every batch subject for the topology losses.
    bool full_batch_centrality = false;
    /// Write a checkpoint every this many iterations (0: only at the end).
    std::int64_t checkpoint_interval = 0;
    /// Share of subjects used for training by the CLI; the rest is held out.
    double train_fraction = 0.8;

    /// @throws ValidationError for out-of-range values.
    void validate() const;
};

/**
 * Parses `key = value` lines; `#` starts a comment. Keys not listed in
 * `render_config` are rejected.
 */
TrainingConfig parse_config(const std::string& text);
TrainingConfig load_config(const std::string& path);

/// Every key with its resolved value, one per line, in a fixed order.
std::string render_config(const TrainingConfig& config);

} // namespace mgg::train
