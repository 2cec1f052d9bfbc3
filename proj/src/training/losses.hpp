#pragma once

#include <functional>
#include <vector>

#include "autodiff/tensor.hpp"
#include "centrality/centrality.hpp"
#include "nn/model_set.hpp"
#include "training/config.hpp"

namespace mgg::train {

/// -mean(source critic) + (1/m) sum_i mean(fake critic_i).
ad::Tensor adversarial_loss(ad::Tape& tape, const ad::Tensor& source_critic, const std::vector<ad::Tensor>& fake_critics);

/// sum_i mean over [fake_i; real_i] of (p - y)^2 with y = 0 for fakes, 1 for reals.
ad::Tensor domain_classification_loss(ad::Tape& tape, const std::vector<ad::Tensor>& fake_probs,
                                      const std::vector<ad::Tensor>& real_probs);

struct PenaltyTerm {
    ad::Tensor penalty;
    double norm_estimate = 0.0; ///< mean per-row gradient-norm estimate
};

/**
 * First-order gradient-penalty surrogate. For each direction U (rows of unit
 * length) the per-row slope |D(X + hU) - D(X - hU)| / 2h is measured; the
 * per-row maximum over directions is averaged over rows and enters
 * max(0, estimate - sigma)^2.
 */
PenaltyTerm gradient_penalty(ad::Tape& tape, const std::function<ad::Tensor(ad::Tape&, const ad::Tensor&)>& critic,
                             const Matrix& interpolates, const std::vector<Matrix>& directions, double step,
                             double sigma);

/// Random n x f matrix whose rows are unit vectors.
Matrix random_unit_rows(Index rows, Index cols, std::mt19937_64& rng);

/// Centralities as seen by the topology losses (the tape forward), without gradients.
Matrix loss_centrality(centrality::Metric metric, const Matrix& features, Index regions);

/// sum_i mean |X_i - Xhat_i| with Xhat_i the centralities of `fakes[i]`.
ad::Tensor local_topology_loss(ad::Tape& tape, centrality::Metric metric, const std::vector<Matrix>& real_centrality,
                               const std::vector<ad::Tensor>& fakes, Index regions);

/// sum_i mean |F_i - Fhat_i|.
ad::Tensor global_topology_loss(ad::Tape& tape, const std::vector<ad::Tensor>& reals,
                                const std::vector<ad::Tensor>& fakes);

struct ReconstructionInputs {
    const nn::Encoder* encoder = nullptr;
    const nn::Generator* decoder = nullptr;
    ad::Tensor source;          ///< F_S of the cluster batch
    ad::Tensor source_adjacency; ///< normalized S_S of the cluster batch
    Matrix source_centrality;   ///< centralities of `source` rows listed in `subsample`
    std::vector<Index> subsample;
    centrality::Metric metric = centrality::Metric::eigenvector;
    Index regions = 0;
};

/// sum_i [ MAE(X_S, X(Fhat_S,i)) + MAE(F_S, Fhat_S,i) ] with Fhat_S,i = decoder(E(fake_i)).
ad::Tensor reconstruction_loss(ad::Tape& tape, const ReconstructionInputs& in, const std::vector<ad::Tensor>& fakes);

/// sum_i mean(-log clamp(p_i, 1e-7, 1 - 1e-7)).
ad::Tensor infomax_loss(ad::Tape& tape, const std::vector<ad::Tensor>& fake_probs);

/// Everything the objectives need about one cluster's share of a batch.
struct ClusterBatch {
    Matrix source;                     ///< n_j x f
    Matrix source_adjacency;           ///< normalized S_S restricted to the batch rows
    std::vector<Matrix> targets;       ///< m of n_j x f
    std::vector<Matrix> target_adjacency;
    Matrix stacked_adjacency;          ///< normalized I_m (x) S_S, for the penalty interpolates
    std::vector<Index> subsample;      ///< local rows used by the topology losses
    Matrix source_centrality;          ///< subsample x r
    std::vector<Matrix> target_centrality;
    Vector alpha;                      ///< m n_j interpolation coefficients
    std::vector<Matrix> directions;    ///< penalty probe directions, each m n_j x f
};

struct DiscriminatorTerms {
    ad::Tensor total;
    double adversarial = 0.0;
    double classification = 0.0;
    double penalty = 0.0;
};

struct GeneratorTerms {
    ad::Tensor total;
    double wasserstein = 0.0;
    double topology = 0.0;
    double local = 0.0;
    double global = 0.0;
    double reconstruction = 0.0;
    double infomax = 0.0;
};

/// Generated targets of cluster j: G_{T_i}^j(E(F_S^j, S_S^j), S_{T_i}^j) for every i.
std::vector<ad::Tensor> generate_cluster(ad::Tape& tape, const nn::ModelSet& model, std::size_t cluster,
                                         const ClusterBatch& batch, ad::Tensor* embeddings = nullptr);

/// sum_j (L_adv + l_gdc L_gdc + l_gp L_gp). Does not touch requires_grad flags.
DiscriminatorTerms discriminator_objective(ad::Tape& tape, const nn::ModelSet& model,
                                           const std::vector<ClusterBatch>& batch, const LossWeights& weights);

/// sum_j (-(1/m) sum_i mean D(Fhat_i) + l_top L_top + l_rec L_rec + l_inf L_inf).
GeneratorTerms generator_objective(ad::Tape& tape, const nn::ModelSet& model, const std::vector<ClusterBatch>& batch,
                                   const LossWeights& weights, centrality::Metric metric);

} // namespace mgg::train
