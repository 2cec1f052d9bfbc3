#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "autodiff/adam.hpp"
#include "nn/model_set.hpp"
#include "population/population.hpp"
#include "training/config.hpp"
#include "training/losses.hpp"

namespace mgg::train {

/// One row of the loss log; every component is summed over clusters.
struct LossRecord {
    std::int64_t iteration = 0;
    double d_total = 0.0;
    double adversarial = 0.0;
    double classification = 0.0;
    double penalty = 0.0;
    double g_total = 0.0;
    double wasserstein = 0.0;
    double topology = 0.0;
    double local = 0.0;
    double global = 0.0;
    double reconstruction = 0.0;
    double infomax = 0.0;
};

struct TrainingState {
    TrainingConfig config;
    MultiDomainPopulation data;
    nn::ModelSet model;
    std::unique_ptr<ad::Adam> discriminator_optimizer;
    std::unique_ptr<ad::Adam> generator_optimizer;
    std::int64_t iteration = 0;
    std::vector<LossRecord> log;

    /// Fixed after setup.
    std::vector<int> cluster_of;
    std::vector<std::vector<Index>> members;
    Matrix source_similarity;
    std::vector<Matrix> target_similarity;
    /// Centralities of every training subject under the training metric.
    Matrix source_centrality;
    std::vector<Matrix> target_centrality;

    std::mt19937_64 rng;
    std::int64_t critic_steps = 0;
    std::int64_t generator_steps = 0;
};

/**
 * Learns the source and target similarities, initializes the networks from
 * the seed and clusters the initial source embeddings.
 *
 * @throws ValidationError when there are fewer than 2c subjects or a cluster
 * comes out empty.
 */
TrainingState setup(const MultiDomainPopulation& train, const TrainingConfig& config);

/// Global row indices per cluster for one stratified batch of min(batch_size, n).
std::vector<std::vector<Index>> sample_batch_rows(TrainingState& state);

/// Cluster batches for the given rows; penalty draws and centrality subsamples come from `rng`.
std::vector<ClusterBatch> make_batch(const TrainingState& state, const std::vector<std::vector<Index>>& rows,
                                     std::mt19937_64& rng);

/// Fresh interpolation coefficients and probe directions.
void draw_penalty_inputs(std::vector<ClusterBatch>& batch, std::mt19937_64& rng);

/// One iteration: n_critic discriminator updates, then one generator update.
void run_iteration(TrainingState& state);

using IterationCallback = std::function<void(const TrainingState&)>;

TrainingState train(const MultiDomainPopulation& train, const TrainingConfig& config,
                    const IterationCallback& after_iteration = {});

/**
 * Target-domain predictions for source graphs (k x f): the identity similarity
 * is used throughout and the c cluster generators are averaged.
 */
std::vector<Matrix> predict(const nn::ModelSet& model, const Matrix& source);

std::string format_loss_log(const std::vector<LossRecord>& log);
void write_loss_log(const std::string& path, const std::vector<LossRecord>& log);

} // namespace mgg::train
