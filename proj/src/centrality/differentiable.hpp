#pragma once

#include <vector>

#include "autodiff/tensor.hpp"
#include "centrality/centrality.hpp"

namespace mgg::centrality {

/**
 * Eigenvector centrality of one vectorized graph (1 x f tensor) expressed on
 * the tape: clamp at 0, scatter into the adjacency, then `unroll_steps`
 * normalized power steps with A + I. Returns a 1 x r tensor.
 */
ad::Tensor differentiable_ec(ad::Tape& tape, const ad::Tensor& features, Index regions, int unroll_steps = 50);

/**
 * Closeness on the tape. Shortest-path trees are fixed on detached values
 * (lowest-index predecessor on ties); each distance is then re-expressed as a
 * sum of 1/w over its path edges. Nodes that cannot reach the whole graph
 * score 0 with zero gradient.
 */
ad::Tensor differentiable_cc(ad::Tape& tape, const ad::Tensor& features, Index regions);

/**
 * Betweenness is piecewise constant in the weights, so this returns the exact
 * value as a constant: no gradient flows back into `features`.
 */
ad::Tensor betweenness_constant(const ad::Tensor& features, Index regions);

ad::Tensor differentiable_centrality(ad::Tape& tape, Metric metric, const ad::Tensor& features, Index regions);

/// Stacks the centrality rows (k x r) of the selected rows of an n x f tensor.
ad::Tensor centrality_rows(ad::Tape& tape, Metric metric, const ad::Tensor& features, Index regions,
                           const std::vector<Index>& rows);

} // namespace mgg::centrality
