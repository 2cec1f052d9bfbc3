#include "training/trainer.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>

#include <fmt/format.h>

#include "core/error.hpp"
#include "core/log.hpp"
#include "nn/gcn.hpp"
#include "similarity/mkml.hpp"

namespace mgg::train {

namespace {

Matrix restrict(const Matrix& full, const std::vector<Index>& rows) {
    Matrix out(static_cast<Index>(rows.size()), static_cast<Index>(rows.size()));
    for (std::size_t a = 0; a < rows.size(); ++a) {
        for (std::size_t b = 0; b < rows.size(); ++b) {
            out(static_cast<Index>(a), static_cast<Index>(b)) = full(rows[a], rows[b]);
        }
    }
    return out;
}

Matrix take_rows(const Matrix& full, const std::vector<Index>& rows) {
    Matrix out(static_cast<Index>(rows.size()), full.cols());
    for (std::size_t a = 0; a < rows.size(); ++a) {
        out.row(static_cast<Index>(a)) = full.row(rows[a]);
    }
    return out;
}

void zero_all(const std::vector<ad::Tensor>& params) {
    for (ad::Tensor p : params) {
        p.zero_grad();
    }
}

} // namespace

TrainingState setup(const MultiDomainPopulation& train, const TrainingConfig& config) {
    config.validate();
    train.validate();
    const Index n = train.size();
    if (n < 2 * config.clusters) {
        throw ValidationError(fmt::format("training needs at least 2c = {} subjects, got {}", 2 * config.clusters, n));
    }
    TrainingState state;
    state.config = config;
    state.data = train;
    state.rng.seed(config.seed);

    const mkml::KernelBank bank = mkml::KernelBank::standard();
    state.source_similarity = mkml::learn_similarity(train.source.features, bank).similarity;
    for (const DomainDataset& t : train.targets) {
        state.target_similarity.push_back(mkml::learn_similarity(t.features, bank).similarity);
    }

    state.model = nn::ModelSet::create(train.regions, train.target_count(), config.clusters, config.seed);
    ad::Tape tape;
    Matrix z = state.model.encoder
                   .forward(tape, ad::Tensor::constant(nn::normalize_adjacency(state.source_similarity)),
                            ad::Tensor::constant(train.source.features))
                   .value();
    mkml::ClusterAssignment assignment =
        mkml::cluster_source_embeddings(z, static_cast<int>(config.clusters), config.seed);
    state.cluster_of = assignment.labels;
    state.members.assign(static_cast<std::size_t>(config.clusters), {});
    for (Index i = 0; i < n; ++i) {
        state.members[static_cast<std::size_t>(state.cluster_of[static_cast<std::size_t>(i)])].push_back(i);
    }
    for (std::size_t j = 0; j < state.members.size(); ++j) {
        if (state.members[j].empty()) {
            throw ValidationError(fmt::format("cluster {} is empty after assignment; use fewer clusters", j));
        }
    }

    state.source_centrality = loss_centrality(config.metric, train.source.features, train.regions);
    for (const DomainDataset& t : train.targets) {
        state.target_centrality.push_back(loss_centrality(config.metric, t.features, train.regions));
    }

    ad::AdamOptions opts{config.learning_rate, config.beta1, config.beta2, 1e-8};
    state.discriminator_optimizer = std::make_unique<ad::Adam>(state.model.discriminator_parameters(), opts);
    state.generator_optimizer = std::make_unique<ad::Adam>(state.model.generator_parameters(), opts);
    return state;
}

std::vector<std::vector<Index>> sample_batch_rows(TrainingState& state) {
    const std::size_t c = state.members.size();
    const Index n = state.data.size();
    const Index total = std::min<Index>(state.config.batch_size, n);

    // proportional quotas, at least one per cluster, largest remainders first
    std::vector<Index> quota(c);
    std::vector<double> remainder(c);
    Index assigned = 0;
    for (std::size_t j = 0; j < c; ++j) {
        const auto size = static_cast<Index>(state.members[j].size());
        const double exact = static_cast<double>(total) * static_cast<double>(size) / static_cast<double>(n);
        quota[j] = std::clamp<Index>(static_cast<Index>(exact), 1, size);
        remainder[j] = exact - static_cast<double>(quota[j]);
        assigned += quota[j];
    }
    std::vector<std::size_t> order(c);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
    while (assigned < total) {
        bool grew = false;
        for (std::size_t j : order) {
            if (assigned < total && quota[j] < static_cast<Index>(state.members[j].size())) {
                ++quota[j];
                ++assigned;
                grew = true;
            }
        }
        if (!grew) {
            break;
        }
    }
    while (assigned > total) {
        auto largest = std::max_element(quota.begin(), quota.end());
        if (*largest <= 1) {
            break;
        }
        --*largest;
        --assigned;
    }

    std::vector<std::vector<Index>> rows(c);
    for (std::size_t j = 0; j < c; ++j) {
        std::vector<Index> pool = state.members[j];
        std::shuffle(pool.begin(), pool.end(), state.rng);
        pool.resize(static_cast<std::size_t>(quota[j]));
        std::sort(pool.begin(), pool.end());
        rows[j] = std::move(pool);
    }
    return rows;
}

std::vector<ClusterBatch> make_batch(const TrainingState& state, const std::vector<std::vector<Index>>& rows,
                                     std::mt19937_64& rng) {
    const MultiDomainPopulation& data = state.data;
    const std::size_t m = data.targets.size();
    std::vector<ClusterBatch> batch;
    for (const std::vector<Index>& r : rows) {
        if (r.empty()) {
            throw ContractError("make_batch: empty cluster batch");
        }
        ClusterBatch b;
        const auto nj = static_cast<Index>(r.size());
        b.source = take_rows(data.source.features, r);
        b.source_adjacency = nn::normalize_adjacency(restrict(state.source_similarity, r));
        b.stacked_adjacency = Matrix::Zero(nj * static_cast<Index>(m), nj * static_cast<Index>(m));
        for (std::size_t i = 0; i < m; ++i) {
            b.targets.push_back(take_rows(data.targets[i].features, r));
            b.target_adjacency.push_back(nn::normalize_adjacency(restrict(state.target_similarity[i], r)));
            b.stacked_adjacency.block(static_cast<Index>(i) * nj, static_cast<Index>(i) * nj, nj, nj) =
                b.source_adjacency;
        }

        std::vector<Index> local(r.size());
        std::iota(local.begin(), local.end(), 0);
        if (!state.config.full_batch_centrality && nj > state.config.centrality_subsample) {
            std::shuffle(local.begin(), local.end(), rng);
            local.resize(static_cast<std::size_t>(state.config.centrality_subsample));
            std::sort(local.begin(), local.end());
        }
        std::vector<Index> global;
        for (Index l : local) {
            global.push_back(r[static_cast<std::size_t>(l)]);
        }
        b.subsample = local;
        b.source_centrality = take_rows(state.source_centrality, global);
        for (std::size_t i = 0; i < m; ++i) {
            b.target_centrality.push_back(take_rows(state.target_centrality[i], global));
        }
        batch.push_back(std::move(b));
    }
    draw_penalty_inputs(batch, rng);
    return batch;
}

void draw_penalty_inputs(std::vector<ClusterBatch>& batch, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (ClusterBatch& b : batch) {
        const Index rows = b.source.rows() * static_cast<Index>(b.targets.size());
        b.alpha.resize(rows);
        for (Index k = 0; k < rows; ++k) {
            b.alpha(k) = unit(rng);
        }
        b.directions.clear();
        for (int d = 0; d < 4; ++d) {
            b.directions.push_back(random_unit_rows(rows, b.source.cols(), rng));
        }
    }
}

void run_iteration(TrainingState& state) {
    nn::ModelSet& model = state.model;
    const auto g_params = model.generator_parameters();
    const auto d_params = model.discriminator_parameters();
    std::vector<ClusterBatch> batch = make_batch(state, sample_batch_rows(state), state.rng);
    LossRecord record;
    record.iteration = state.iteration + 1;

    model.set_generator_trainable(false);
    model.set_discriminator_trainable(true);
    for (std::int64_t k = 0; k < state.config.n_critic; ++k) {
        if (k > 0) {
            draw_penalty_inputs(batch, state.rng);
        }
        zero_all(g_params);
        zero_all(d_params);
        ad::Tape tape;
        DiscriminatorTerms terms = discriminator_objective(tape, model, batch, state.config.weights);
        tape.backward(terms.total);
        state.discriminator_optimizer->step();
        ++state.critic_steps;
        record.d_total = terms.total.item();
        record.adversarial = terms.adversarial;
        record.classification = terms.classification;
        record.penalty = terms.penalty;
    }

    model.set_discriminator_trainable(false);
    model.set_generator_trainable(true);
    {
        zero_all(g_params);
        zero_all(d_params);
        ad::Tape tape;
        GeneratorTerms terms = generator_objective(tape, model, batch, state.config.weights, state.config.metric);
        tape.backward(terms.total);
        state.generator_optimizer->step();
        ++state.generator_steps;
        record.g_total = terms.total.item();
        record.wasserstein = terms.wasserstein;
        record.topology = terms.topology;
        record.local = terms.local;
        record.global = terms.global;
        record.reconstruction = terms.reconstruction;
        record.infomax = terms.infomax;
    }
    model.set_discriminator_trainable(true);

    ++state.iteration;
    state.log.push_back(record);
}

TrainingState train(const MultiDomainPopulation& train, const TrainingConfig& config,
                    const IterationCallback& after_iteration) {
    TrainingState state = setup(train, config);
    for (std::int64_t it = 0; it < config.iterations; ++it) {
        run_iteration(state);
        if (after_iteration) {
            after_iteration(state);
        }
    }
    return state;
}

std::vector<Matrix> predict(const nn::ModelSet& model, const Matrix& source) {
    if (source.cols() != model.features) {
        throw ValidationError(fmt::format("predict: source graphs have {} features, the model expects {}",
                                          source.cols(), model.features));
    }
    if (source.rows() == 0) {
        return std::vector<Matrix>(static_cast<std::size_t>(model.targets), Matrix(0, model.features));
    }
    ad::Tape tape;
    ad::Tensor identity = ad::Tensor::constant(Matrix::Identity(source.rows(), source.rows()));
    ad::Tensor z = model.encoder.forward(tape, identity, ad::Tensor::constant(source));
    std::vector<Matrix> out;
    for (Index i = 0; i < model.targets; ++i) {
        Matrix sum = Matrix::Zero(source.rows(), model.features);
        for (Index j = 0; j < model.clusters; ++j) {
            sum += model.generators[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)]
                       .forward(tape, identity, z)
                       .value();
        }
        out.push_back(sum / static_cast<double>(model.clusters));
    }
    return out;
}

std::string format_loss_log(const std::vector<LossRecord>& log) {
    std::string out = "iteration,L_D,L_adv,L_gdc,L_gp,L_G,L_wass_G,L_top,L_loc,L_glb,L_rec,L_inf\n";
    for (const LossRecord& r : log) {
        out += fmt::format("{},{},{},{},{},{},{},{},{},{},{},{}\n", r.iteration, r.d_total, r.adversarial,
                           r.classification, r.penalty, r.g_total, r.wasserstein, r.topology, r.local, r.global,
                           r.reconstruction, r.infomax);
    }
    return out;
}

void write_loss_log(const std::string& path, const std::vector<LossRecord>& log) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot write loss log " + path);
    }
    out << format_loss_log(log);
}

} // namespace mgg::train
