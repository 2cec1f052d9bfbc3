#include "training/losses.hpp"

#include <cmath>

#include "centrality/differentiable.hpp"
#include "core/error.hpp"

namespace mgg::train {

namespace {

using ad::Tensor;

Tensor constant(const Matrix& m) { return Tensor::constant(m); }

Tensor mae(ad::Tape& tape, const Tensor& a, const Tensor& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw DimensionError("mae: operand shapes differ");
    }
    return tape.mean(tape.abs(tape.sub(a, b)));
}

Tensor accumulate(ad::Tape& tape, const Tensor& total, const Tensor& term) {
    return total.defined() ? tape.add(total, term) : term;
}

std::vector<Index> all_rows(Index n) {
    std::vector<Index> rows(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) {
        rows[static_cast<std::size_t>(i)] = i;
    }
    return rows;
}

Tensor weighted(ad::Tape& tape, const Tensor& term, double weight) { return tape.scale(term, weight); }

} // namespace

Tensor adversarial_loss(ad::Tape& tape, const Tensor& source_critic, const std::vector<Tensor>& fake_critics) {
    if (fake_critics.empty() || source_critic.rows() == 0) {
        throw ContractError("adversarial_loss: empty cluster batch");
    }
    Tensor fake_mean;
    for (const Tensor& c : fake_critics) {
        if (c.rows() == 0) {
            throw ContractError("adversarial_loss: empty cluster batch");
        }
        fake_mean = accumulate(tape, fake_mean, tape.mean(c));
    }
    fake_mean = tape.scale(fake_mean, 1.0 / static_cast<double>(fake_critics.size()));
    return tape.sub(fake_mean, tape.mean(source_critic));
}

Tensor domain_classification_loss(ad::Tape& tape, const std::vector<Tensor>& fake_probs,
                                  const std::vector<Tensor>& real_probs) {
    if (fake_probs.size() != real_probs.size() || fake_probs.empty()) {
        throw DimensionError("domain_classification_loss: need one real and one fake batch per target domain");
    }
    Tensor total;
    for (std::size_t i = 0; i < fake_probs.size(); ++i) {
        const Index nf = fake_probs[i].rows();
        const Index nr = real_probs[i].rows();
        Matrix labels(nf + nr, 1);
        labels.topRows(nf).setZero();
        labels.bottomRows(nr).setOnes();
        Tensor stacked = tape.vstack({fake_probs[i], real_probs[i]});
        total = accumulate(tape, total, tape.mean(tape.square(tape.sub(stacked, constant(labels)))));
    }
    return total;
}

PenaltyTerm gradient_penalty(ad::Tape& tape, const std::function<Tensor(ad::Tape&, const Tensor&)>& critic,
                             const Matrix& interpolates, const std::vector<Matrix>& directions, double step,
                             double sigma) {
    if (directions.empty() || !(step > 0.0)) {
        throw ContractError("gradient_penalty: need at least one direction and a positive step");
    }
    Tensor slope;
    for (const Matrix& u : directions) {
        if (u.rows() != interpolates.rows() || u.cols() != interpolates.cols()) {
            throw DimensionError("gradient_penalty: direction shape differs from the interpolates");
        }
        Tensor plus = critic(tape, constant(interpolates + step * u));
        Tensor minus = critic(tape, constant(interpolates - step * u));
        Tensor s = tape.scale(tape.abs(tape.sub(plus, minus)), 0.5 / step);
        slope = slope.defined() ? tape.maximum(slope, s) : s;
    }
    Tensor estimate = tape.mean(slope);
    Tensor penalty = tape.square(tape.relu(tape.add_scalar(estimate, -sigma)));
    return {penalty, estimate.item()};
}

Matrix random_unit_rows(Index rows, Index cols, std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix u(rows, cols);
    for (Index i = 0; i < rows; ++i) {
        double norm = 0.0;
        do {
            for (Index j = 0; j < cols; ++j) {
                u(i, j) = normal(rng);
            }
            norm = u.row(i).norm();
        } while (norm == 0.0);
        u.row(i) /= norm;
    }
    return u;
}

Matrix loss_centrality(centrality::Metric metric, const Matrix& features, Index regions) {
    Matrix out(features.rows(), regions);
    ad::Tape tape;
    for (Index i = 0; i < features.rows(); ++i) {
        Tensor row = constant(features.row(i));
        out.row(i) = centrality::differentiable_centrality(tape, metric, row, regions).value();
    }
    return out;
}

Tensor local_topology_loss(ad::Tape& tape, centrality::Metric metric, const std::vector<Matrix>& real_centrality,
                           const std::vector<Tensor>& fakes, Index regions) {
    if (real_centrality.size() != fakes.size() || fakes.empty()) {
        throw DimensionError("local_topology_loss: need one real centrality matrix per generated batch");
    }
    Tensor total;
    for (std::size_t i = 0; i < fakes.size(); ++i) {
        Tensor generated = centrality::centrality_rows(tape, metric, fakes[i], regions, all_rows(fakes[i].rows()));
        total = accumulate(tape, total, mae(tape, constant(real_centrality[i]), generated));
    }
    return total;
}

Tensor global_topology_loss(ad::Tape& tape, const std::vector<Tensor>& reals, const std::vector<Tensor>& fakes) {
    if (reals.size() != fakes.size() || fakes.empty()) {
        throw DimensionError("global_topology_loss: need one real batch per generated batch");
    }
    Tensor total;
    for (std::size_t i = 0; i < fakes.size(); ++i) {
        total = accumulate(tape, total, mae(tape, reals[i], fakes[i]));
    }
    return total;
}

Tensor reconstruction_loss(ad::Tape& tape, const ReconstructionInputs& in, const std::vector<Tensor>& fakes) {
    if (!in.encoder || !in.decoder || fakes.empty()) {
        throw ContractError("reconstruction_loss: missing encoder, decoder or generated batches");
    }
    Tensor total;
    for (const Tensor& fake : fakes) {
        Tensor z = in.encoder->forward(tape, in.source_adjacency, fake);
        Tensor back = in.decoder->forward(tape, in.source_adjacency, z);
        Tensor cent = centrality::centrality_rows(tape, in.metric, back, in.regions, in.subsample);
        total = accumulate(tape, total, mae(tape, constant(in.source_centrality), cent));
        total = accumulate(tape, total, mae(tape, in.source, back));
    }
    return total;
}

Tensor infomax_loss(ad::Tape& tape, const std::vector<Tensor>& fake_probs) {
    if (fake_probs.empty()) {
        throw ContractError("infomax_loss: no generated batches");
    }
    Tensor total;
    for (const Tensor& p : fake_probs) {
        Tensor logp = tape.log(tape.clamp(p, 1e-7, 1.0 - 1e-7));
        total = accumulate(tape, total, tape.scale(tape.mean(logp), -1.0));
    }
    return total;
}

std::vector<Tensor> generate_cluster(ad::Tape& tape, const nn::ModelSet& model, std::size_t cluster,
                                     const ClusterBatch& batch, Tensor* embeddings) {
    if (batch.source.rows() == 0) {
        throw ContractError("empty cluster batch");
    }
    Tensor z = model.encoder.forward(tape, constant(batch.source_adjacency), constant(batch.source));
    if (embeddings) {
        *embeddings = z;
    }
    std::vector<Tensor> fakes;
    for (std::size_t i = 0; i < batch.targets.size(); ++i) {
        fakes.push_back(model.generators[cluster][i].forward(tape, constant(batch.target_adjacency[i]), z));
    }
    return fakes;
}

DiscriminatorTerms discriminator_objective(ad::Tape& tape, const nn::ModelSet& model,
                                           const std::vector<ClusterBatch>& batch, const LossWeights& weights) {
    if (batch.size() != static_cast<std::size_t>(model.clusters)) {
        throw ContractError("discriminator_objective: batch does not match the cluster count");
    }
    const nn::Discriminator& d = model.discriminator;
    const double sigma = weights.resolved_sigma(model.targets);
    DiscriminatorTerms out;
    for (std::size_t j = 0; j < batch.size(); ++j) {
        const ClusterBatch& b = batch[j];
        std::vector<Tensor> fakes = generate_cluster(tape, model, j, b);
        Tensor source_critic = d.critic(tape, constant(b.source_adjacency), constant(b.source));
        std::vector<Tensor> fake_critics, fake_probs, real_probs;
        for (std::size_t i = 0; i < fakes.size(); ++i) {
            Tensor adj = constant(b.target_adjacency[i]);
            nn::DiscriminatorOutput fake_out = d.forward(tape, adj, fakes[i]);
            fake_critics.push_back(fake_out.critic);
            fake_probs.push_back(fake_out.probability);
            real_probs.push_back(d.forward(tape, adj, constant(b.targets[i])).probability);
        }
        Tensor adv = adversarial_loss(tape, source_critic, fake_critics);
        Tensor gdc = domain_classification_loss(tape, fake_probs, real_probs);

        const Index nj = b.source.rows();
        Matrix interpolates(nj * static_cast<Index>(fakes.size()), b.source.cols());
        for (std::size_t i = 0; i < fakes.size(); ++i) {
            for (Index k = 0; k < nj; ++k) {
                const Index row = static_cast<Index>(i) * nj + k;
                const double a = b.alpha(row);
                interpolates.row(row) = a * b.source.row(k) + (1.0 - a) * fakes[i].value().row(k);
            }
        }
        Tensor stacked_adj = constant(b.stacked_adjacency);
        auto critic = [&](ad::Tape& t, const Tensor& x) { return d.critic(t, stacked_adj, x); };
        PenaltyTerm gp = gradient_penalty(tape, critic, interpolates, b.directions, 1e-3, sigma);

        Tensor total = tape.add(adv, tape.add(weighted(tape, gdc, weights.gdc), weighted(tape, gp.penalty, weights.gp)));
        out.total = accumulate(tape, out.total, total);
        out.adversarial += adv.item();
        out.classification += gdc.item();
        out.penalty += gp.penalty.item();
    }
    return out;
}

GeneratorTerms generator_objective(ad::Tape& tape, const nn::ModelSet& model, const std::vector<ClusterBatch>& batch,
                                   const LossWeights& weights, centrality::Metric metric) {
    if (batch.size() != static_cast<std::size_t>(model.clusters)) {
        throw ContractError("generator_objective: batch does not match the cluster count");
    }
    const nn::Discriminator& d = model.discriminator;
    GeneratorTerms out;
    for (std::size_t j = 0; j < batch.size(); ++j) {
        const ClusterBatch& b = batch[j];
        std::vector<Tensor> fakes = generate_cluster(tape, model, j, b);
        const double m = static_cast<double>(fakes.size());
        Tensor wass;
        std::vector<Tensor> probs, reals, sampled;
        for (std::size_t i = 0; i < fakes.size(); ++i) {
            nn::DiscriminatorOutput o = d.forward(tape, constant(b.target_adjacency[i]), fakes[i]);
            wass = accumulate(tape, wass, tape.mean(o.critic));
            probs.push_back(o.probability);
            reals.push_back(constant(b.targets[i]));
            sampled.push_back(tape.select_rows(fakes[i], b.subsample));
        }
        wass = tape.scale(wass, -1.0 / m);
        Tensor loc = local_topology_loss(tape, metric, b.target_centrality, sampled, model.regions);
        Tensor glb = global_topology_loss(tape, reals, fakes);
        Tensor top = tape.add(loc, glb);

        ReconstructionInputs rec_in;
        rec_in.encoder = &model.encoder;
        rec_in.decoder = &model.decoders[j];
        rec_in.source = constant(b.source);
        rec_in.source_adjacency = constant(b.source_adjacency);
        rec_in.source_centrality = b.source_centrality;
        rec_in.subsample = b.subsample;
        rec_in.metric = metric;
        rec_in.regions = model.regions;
        Tensor rec = reconstruction_loss(tape, rec_in, fakes);
        Tensor inf = infomax_loss(tape, probs);

        Tensor total = tape.add(tape.add(wass, weighted(tape, top, weights.top)),
                                tape.add(weighted(tape, rec, weights.rec), weighted(tape, inf, weights.inf)));
        out.total = accumulate(tape, out.total, total);
        out.wasserstein += wass.item();
        out.topology += top.item();
        out.local += loc.item();
        out.global += glb.item();
        out.reconstruction += rec.item();
        out.infomax += inf.item();
    }
    return out;
}

} // namespace mgg::train
