#include "nn/gcn.hpp"

#include <cmath>
#include <string>

#include "core/error.hpp"

namespace mgg::nn {

Matrix normalize_adjacency(const Matrix& similarity) {
    if (similarity.rows() != similarity.cols()) {
        throw ValidationError("normalize_adjacency: similarity must be square");
    }
    if (!similarity.allFinite()) {
        throw ValidationError("normalize_adjacency: similarity has non-finite entries");
    }
    const Index n = similarity.rows();
    Matrix shifted = similarity + Matrix::Identity(n, n);
    Vector degree = shifted.rowwise().sum();
    if ((degree.array() <= 0.0).any()) {
        throw ValidationError("normalize_adjacency: S + I has a non-positive row sum");
    }
    Vector inv_sqrt = degree.array().rsqrt().matrix();
    Matrix out = inv_sqrt.asDiagonal() * shifted * inv_sqrt.asDiagonal();
    // exact symmetry for asymmetric rounding of the two diagonal scalings
    return (0.5 * (out + out.transpose())).eval();
}

GcnLayer GcnLayer::glorot(Index in, Index out, Activation activation, std::mt19937_64& rng) {
    const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
    std::uniform_real_distribution<double> dist(-limit, limit);
    Matrix w(in, out);
    for (Index i = 0; i < in; ++i) {
        for (Index j = 0; j < out; ++j) {
            w(i, j) = dist(rng);
        }
    }
    return GcnLayer{ad::Tensor::parameter(std::move(w)), activation};
}

ad::Tensor GcnLayer::forward(ad::Tape& tape, const ad::Tensor& adjacency, const ad::Tensor& x) const {
    if (adjacency.rows() != adjacency.cols() || adjacency.rows() != x.rows()) {
        throw DimensionError("gcn: adjacency is " + std::to_string(adjacency.rows()) + "x" +
                             std::to_string(adjacency.cols()) + " but input has " + std::to_string(x.rows()) +
                             " rows");
    }
    if (x.cols() != in_features()) {
        throw DimensionError("gcn: input width " + std::to_string(x.cols()) + " does not match layer width " +
                             std::to_string(in_features()));
    }
    ad::Tensor h = tape.matmul(tape.matmul(adjacency, x), weight);
    switch (activation) {
    case Activation::relu:
        return tape.relu(h);
    case Activation::sigmoid:
        return tape.sigmoid(h);
    case Activation::linear:
        break;
    }
    return h;
}

namespace {

ad::Tensor run(ad::Tape& tape, const std::vector<GcnLayer>& layers, const ad::Tensor& adjacency, ad::Tensor x) {
    for (const GcnLayer& layer : layers) {
        x = layer.forward(tape, adjacency, x);
    }
    return x;
}

std::vector<ad::Tensor> weights_of(const std::vector<GcnLayer>& layers) {
    std::vector<ad::Tensor> out;
    for (const GcnLayer& layer : layers) {
        out.push_back(layer.weight);
    }
    return out;
}

} // namespace

Encoder Encoder::create(Index features, std::mt19937_64& rng) {
    Encoder e;
    e.layers.push_back(GcnLayer::glorot(features, 32, Activation::relu, rng));
    e.layers.push_back(GcnLayer::glorot(32, 16, Activation::linear, rng));
    return e;
}

ad::Tensor Encoder::forward(ad::Tape& tape, const ad::Tensor& adjacency, const ad::Tensor& x) const {
    return run(tape, layers, adjacency, x);
}

std::vector<ad::Tensor> Encoder::parameters() const { return weights_of(layers); }

Generator Generator::create(Index features, std::mt19937_64& rng) {
    Generator g;
    g.layers.push_back(GcnLayer::glorot(16, 16, Activation::relu, rng));
    g.layers.push_back(GcnLayer::glorot(16, 32, Activation::relu, rng));
    g.layers.push_back(GcnLayer::glorot(32, features, Activation::sigmoid, rng));
    return g;
}

ad::Tensor Generator::forward(ad::Tape& tape, const ad::Tensor& adjacency, const ad::Tensor& z) const {
    return run(tape, layers, adjacency, z);
}

std::vector<ad::Tensor> Generator::parameters() const { return weights_of(layers); }

Discriminator Discriminator::create(Index features, std::mt19937_64& rng) {
    Discriminator d;
    d.layers.push_back(GcnLayer::glorot(features, 32, Activation::relu, rng));
    d.layers.push_back(GcnLayer::glorot(32, 16, Activation::relu, rng));
    d.layers.push_back(GcnLayer::glorot(16, 1, Activation::linear, rng));
    d.classifier = GcnLayer::glorot(16, 1, Activation::linear, rng).weight;
    return d;
}

DiscriminatorOutput Discriminator::forward(ad::Tape& tape, const ad::Tensor& adjacency, const ad::Tensor& x) const {
    ad::Tensor h = layers[1].forward(tape, adjacency, layers[0].forward(tape, adjacency, x));
    return {layers[2].forward(tape, adjacency, h), tape.sigmoid(tape.matmul(h, classifier))};
}

ad::Tensor Discriminator::critic(ad::Tape& tape, const ad::Tensor& adjacency, const ad::Tensor& x) const {
    return run(tape, layers, adjacency, x);
}

std::vector<ad::Tensor> Discriminator::parameters() const {
    std::vector<ad::Tensor> out = weights_of(layers);
    out.push_back(classifier);
    return out;
}

} // namespace mgg::nn
