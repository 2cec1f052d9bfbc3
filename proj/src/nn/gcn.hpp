#pragma once

#include <random>
#include <vector>

#include "autodiff/tensor.hpp"

namespace mgg::nn {

enum class Activation { relu, linear, sigmoid };

/**
 * D^-1/2 (S + I) D^-1/2 with D the row sums of S + I.
 * @throws ValidationError for non-square or non-finite S, or a non-positive
 * row sum.
 */
Matrix normalize_adjacency(const Matrix& similarity);

/// One graph convolution act(A X W); no bias.
struct GcnLayer {
    ad::Tensor weight;
    Activation activation = Activation::linear;

    /// Glorot-uniform weights in [-sqrt(6/(in+out)), sqrt(6/(in+out))].
    static GcnLayer glorot(Index in, Index out, Activation activation, std::mt19937_64& rng);

    Index in_features() const { return weight.rows(); }
    Index out_features() const { return weight.cols(); }

    ad::Tensor forward(ad::Tape& tape, const ad::Tensor& adjacency, const ad::Tensor& x) const;
};

/// f -> 32 (relu) -> 16 (linear).
struct Encoder {
    std::vector<GcnLayer> layers;

    static Encoder create(Index features, std::mt19937_64& rng);
    ad::Tensor forward(ad::Tape& tape, const ad::Tensor& adjacency, const ad::Tensor& x) const;
    std::vector<ad::Tensor> parameters() const;
};

/// 16 -> 16 (relu) -> 32 (relu) -> f (sigmoid). Also used for source decoders.
struct Generator {
    std::vector<GcnLayer> layers;

    static Generator create(Index features, std::mt19937_64& rng);
    ad::Tensor forward(ad::Tape& tape, const ad::Tensor& adjacency, const ad::Tensor& z) const;
    std::vector<ad::Tensor> parameters() const;
};

struct DiscriminatorOutput {
    ad::Tensor critic;      ///< n x 1, unbounded
    ad::Tensor probability; ///< n x 1, in (0, 1)
};

/**
 * Shared trunk f -> 32 (relu) -> 16 (relu), then a linear 16 -> 1 critic and
 * a sigmoid 16 -> 1 domain classifier, both reading the 16-wide layer.
 */
struct Discriminator {
    std::vector<GcnLayer> layers; ///< trunk (2) followed by the critic layer
    ad::Tensor classifier;        ///< 16 x 1

    static Discriminator create(Index features, std::mt19937_64& rng);
    DiscriminatorOutput forward(ad::Tape& tape, const ad::Tensor& adjacency, const ad::Tensor& x) const;
    /// Critic only; skips the classifier head.
    ad::Tensor critic(ad::Tape& tape, const ad::Tensor& adjacency, const ad::Tensor& x) const;
    std::vector<ad::Tensor> parameters() const;
};

} // namespace mgg::nn
