#pragma once

#include <cstddef>
#include <utility>

#include "core/matrix.hpp"

namespace mgg {

/// Symmetric, non-negative, zero-diagonal weighted adjacency over r regions.
class BrainGraph {
public:
    /// @throws ValidationError on asymmetric, negative, non-finite or non-zero-diagonal input.
    explicit BrainGraph(Matrix weights);

    Index regions() const { return weights_.rows(); }
    const Matrix& weights() const { return weights_; }
    double weight(Index i, Index j) const { return weights_(i, j); }

private:
    Matrix weights_;
};

/// r(r-1)/2
Index feature_length(Index regions);

/// Inverse of feature_length; throws ValidationError if f is not triangular.
Index regions_for_features(Index features);

/// Upper triangle (i < j) in row-major order.
Vector vectorize(const BrainGraph& graph);

struct Devectorized {
    BrainGraph graph;
    std::size_t clamped = 0; ///< negative entries replaced by 0
};

/// Symmetric zero-diagonal graph from an upper-triangle vector; negative
/// entries (common in generated features) are clamped to 0 and counted.
Devectorized devectorize(const Vector& features, Index regions);

/// Region pair (i, j), i < j, stored at a given feature slot.
std::pair<Index, Index> feature_position(Index feature, Index regions);

} // namespace mgg
