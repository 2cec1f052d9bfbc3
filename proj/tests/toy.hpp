#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "autodiff/gradcheck.hpp"
#include "centrality/differentiable.hpp"
#include "population/population.hpp"
#include "training/losses.hpp"
#include "training/trainer.hpp"

// A 6-subject, r = 5, m = 2, c = 2 training setup and every loss term built on it.
namespace toy {

using mgg::Index;
using mgg::Matrix;
using mgg::ad::Tape;
using mgg::ad::Tensor;
using namespace mgg::train;
namespace centrality = mgg::centrality;

struct Toy {
    TrainingState state;
    std::vector<ClusterBatch> batch;
};

inline Toy make(std::uint64_t seed, centrality::Metric metric = centrality::Metric::eigenvector, Index subjects = 6,
                Index regions = 5) {
    TrainingConfig config;
    config.clusters = 2;
    config.seed = seed;
    config.metric = metric;
    config.full_batch_centrality = true;
    const auto pop = mgg::synthesize_population({seed, subjects, regions, 2, 2, 0.02});
    Toy toy{setup(pop, config), {}};
    toy.batch = make_batch(toy.state, sample_batch_rows(toy.state), toy.state.rng);
    return toy;
}

enum class Term { adv, gdc, gp, glb, loc_cc, loc_ec, rec, inf, discriminator, generator };

inline const std::vector<std::pair<Term, std::string>>& terms() {
    static const std::vector<std::pair<Term, std::string>> all{
        {Term::adv, "L_adv"},          {Term::gdc, "L_gdc"},     {Term::gp, "L_gp"},   {Term::glb, "L_glb"},
        {Term::loc_cc, "L_loc(CC)"},   {Term::loc_ec, "L_loc(EC)"}, {Term::rec, "L_rec"}, {Term::inf, "L_inf"},
        {Term::discriminator, "L_D"}, {Term::generator, "L_G"},
    };
    return all;
}

inline Tensor add(Tape& tape, const Tensor& total, const Tensor& term) {
    return total.defined() ? tape.add(total, term) : term;
}

/// One loss term summed over clusters. The penalty uses sigma = 0 so its hinge is active.
inline Tensor build(Tape& tape, const Toy& toy, Term term) {
    const auto& model = toy.state.model;
    const auto& d = model.discriminator;
    const auto& weights = toy.state.config.weights;
    if (term == Term::discriminator) {
        return discriminator_objective(tape, model, toy.batch, weights).total;
    }
    if (term == Term::generator) {
        return generator_objective(tape, model, toy.batch, weights, toy.state.config.metric).total;
    }
    Tensor total;
    for (std::size_t j = 0; j < toy.batch.size(); ++j) {
        const ClusterBatch& b = toy.batch[j];
        const auto fakes = generate_cluster(tape, model, j, b);
        std::vector<Tensor> critics, fake_probs, real_probs, reals;
        for (std::size_t i = 0; i < fakes.size(); ++i) {
            const Tensor adj = Tensor::constant(b.target_adjacency[i]);
            const auto out = d.forward(tape, adj, fakes[i]);
            critics.push_back(out.critic);
            fake_probs.push_back(out.probability);
            real_probs.push_back(d.forward(tape, adj, Tensor::constant(b.targets[i])).probability);
            reals.push_back(Tensor::constant(b.targets[i]));
        }
        Tensor value;
        switch (term) {
        case Term::adv:
            value = adversarial_loss(tape, d.critic(tape, Tensor::constant(b.source_adjacency), Tensor::constant(b.source)),
                                     critics);
            break;
        case Term::gdc:
            value = domain_classification_loss(tape, fake_probs, real_probs);
            break;
        case Term::gp: {
            const Index nj = b.source.rows();
            Matrix x(nj * static_cast<Index>(fakes.size()), b.source.cols());
            for (std::size_t i = 0; i < fakes.size(); ++i) {
                for (Index k = 0; k < nj; ++k) {
                    const Index row = static_cast<Index>(i) * nj + k;
                    x.row(row) = b.alpha(row) * b.source.row(k) + (1.0 - b.alpha(row)) * fakes[i].value().row(k);
                }
            }
            const Tensor adj = Tensor::constant(b.stacked_adjacency);
            value = gradient_penalty(
                        tape, [&](Tape& t, const Tensor& in) { return d.critic(t, adj, in); }, x, b.directions, 1e-3, 0.0)
                        .penalty;
            break;
        }
        case Term::glb:
            value = global_topology_loss(tape, reals, fakes);
            break;
        case Term::loc_cc:
        case Term::loc_ec: {
            const auto metric = term == Term::loc_cc ? centrality::Metric::closeness : centrality::Metric::eigenvector;
            std::vector<Matrix> real;
            for (const Matrix& t : b.targets) {
                real.push_back(loss_centrality(metric, t, model.regions));
            }
            value = local_topology_loss(tape, metric, real, fakes, model.regions);
            break;
        }
        case Term::rec: {
            ReconstructionInputs in;
            in.encoder = &model.encoder;
            in.decoder = &model.decoders[j];
            in.source = Tensor::constant(b.source);
            in.source_adjacency = Tensor::constant(b.source_adjacency);
            in.source_centrality = b.source_centrality;
            in.subsample = b.subsample;
            in.metric = toy.state.config.metric;
            in.regions = model.regions;
            value = reconstruction_loss(tape, in, fakes);
            break;
        }
        case Term::inf:
            value = infomax_loss(tape, fake_probs);
            break;
        default:
            break;
        }
        total = add(tape, total, value);
    }
    return total;
}

inline std::vector<Tensor> all_parameters(const Toy& toy) {
    auto params = toy.state.model.generator_parameters();
    for (const auto& p : toy.state.model.discriminator_parameters()) {
        params.push_back(p);
    }
    return params;
}

/// Parameters a term is differentiated against. The penalty interpolates are
/// data for the critic, so terms containing it are checked on the
/// discriminator only.
inline std::vector<Tensor> checked_parameters(const Toy& toy, Term term) {
    if (term == Term::gp || term == Term::discriminator) {
        return toy.state.model.discriminator_parameters();
    }
    return all_parameters(toy);
}

inline mgg::ad::GradCheckResult check(Toy& toy, Term term, std::size_t entries, std::uint64_t seed) {
    toy.state.model.set_generator_trainable(true);
    toy.state.model.set_discriminator_trainable(true);
    mgg::ad::GradCheckOptions options;
    options.max_entries = entries;
    options.seed = seed;
    return mgg::ad::check_gradients([&](Tape& tape) { return build(tape, toy, term); }, checked_parameters(toy, term),
                                    options);
}

} // namespace toy
