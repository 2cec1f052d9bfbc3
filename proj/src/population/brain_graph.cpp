#include "population/brain_graph.hpp"

#include <cmath>
#include <string>

#include "core/error.hpp"

namespace mgg {

BrainGraph::BrainGraph(Matrix weights) : weights_(std::move(weights)) {
    const Index r = weights_.rows();
    if (r != weights_.cols()) {
        throw ValidationError("BrainGraph: adjacency must be square");
    }
    if (!weights_.allFinite()) {
        throw ValidationError("BrainGraph: non-finite weight");
    }
    for (Index i = 0; i < r; ++i) {
        if (weights_(i, i) != 0.0) {
            throw ValidationError("BrainGraph: non-zero diagonal at region " + std::to_string(i));
        }
        for (Index j = i + 1; j < r; ++j) {
            if (weights_(i, j) != weights_(j, i)) {
                throw ValidationError("BrainGraph: asymmetric weight at (" + std::to_string(i) + "," +
                                      std::to_string(j) + ")");
            }
            if (weights_(i, j) < 0.0) {
                throw ValidationError("BrainGraph: negative weight at (" + std::to_string(i) + "," +
                                      std::to_string(j) + ")");
            }
        }
    }
}

Index feature_length(Index regions) { return regions * (regions - 1) / 2; }

Index regions_for_features(Index features) {
    if (features < 1) {
        throw ValidationError("feature vector must not be empty");
    }
    const auto r = static_cast<Index>(std::llround((1.0 + std::sqrt(1.0 + 8.0 * static_cast<double>(features))) / 2.0));
    if (feature_length(r) != features) {
        throw ValidationError("feature length " + std::to_string(features) + " is not r(r-1)/2 for any r");
    }
    return r;
}

std::pair<Index, Index> feature_position(Index feature, Index regions) {
    Index k = feature;
    for (Index i = 0; i < regions; ++i) {
        const Index row_len = regions - 1 - i;
        if (k < row_len) {
            return {i, i + 1 + k};
        }
        k -= row_len;
    }
    throw ValidationError("feature index out of range");
}

Vector vectorize(const BrainGraph& graph) {
    const Index r = graph.regions();
    Vector out(feature_length(r));
    Index k = 0;
    for (Index i = 0; i < r; ++i) {
        for (Index j = i + 1; j < r; ++j) {
            out(k++) = graph.weight(i, j);
        }
    }
    return out;
}

Devectorized devectorize(const Vector& features, Index regions) {
    if (regions < 2) {
        throw ValidationError("devectorize: need at least 2 regions");
    }
    if (features.size() != feature_length(regions)) {
        throw ValidationError("devectorize: feature length " + std::to_string(features.size()) +
                              " does not match r=" + std::to_string(regions));
    }
    if (!features.allFinite()) {
        throw ValidationError("devectorize: non-finite feature");
    }
    Matrix w = Matrix::Zero(regions, regions);
    std::size_t clamped = 0;
    Index k = 0;
    for (Index i = 0; i < regions; ++i) {
        for (Index j = i + 1; j < regions; ++j) {
            double v = features(k++);
            if (v < 0.0) {
                v = 0.0;
                ++clamped;
            }
            w(i, j) = v;
            w(j, i) = v;
        }
    }
    return Devectorized{BrainGraph(std::move(w)), clamped};
}

} // namespace mgg
