#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "core/matrix.hpp"
#include "population/brain_graph.hpp"

/**
 * @file centrality.hpp
 *
 * @brief Node centralities of weighted brain graphs.
 *
 * Path-based metrics treat an edge of weight w > 0 as having length 1/w
 * (stronger connection, shorter path); w = 0 means no edge. Path lengths
 * that agree within a relative 1e-12 count as ties.
 */

namespace mgg::centrality {

enum class Metric { closeness, betweenness, eigenvector };

/// "CC", "BC", "EC"
std::string metric_name(Metric metric);
/// Accepts CC/BC/EC (any case). @throws ValidationError otherwise.
Metric parse_metric(const std::string& name);

struct ShortestPaths {
    Vector distance;                        ///< +inf when unreachable
    Vector path_count;                      ///< number of shortest paths
    std::vector<std::vector<Index>> preds;  ///< all shortest-path predecessors, ascending
    std::vector<Index> settle_order;        ///< non-decreasing distance
};

/// Dense Dijkstra from `source` under the 1/w edge length.
ShortestPaths shortest_paths(const BrainGraph& graph, Index source);

/**
 * CC(v) = (V - 1) / sum_u d(v, u). A node that cannot reach every other node
 * scores 0 and a warning is logged.
 */
Vector closeness(const BrainGraph& graph);

/**
 * Brandes accumulation, normalized by 2 / ((V-1)(V-2)) over unordered pairs,
 * so every score lies in [0, 1].
 */
Vector betweenness(const BrainGraph& graph);

struct EigenvectorOptions {
    int max_iterations = 1000;
    double tolerance = 1e-10;
};

/**
 * Perron vector of the adjacency by power iteration on A + I from the uniform
 * positive vector; the shift leaves the eigenvectors unchanged but keeps
 * bipartite graphs from oscillating. Output is non-negative with unit norm.
 *
 * @throws NumericalError for an all-zero adjacency or when the iterates do
 * not settle within `max_iterations`.
 */
Vector eigenvector(const BrainGraph& graph, const EigenvectorOptions& options = {});

Vector compute(const BrainGraph& graph, Metric metric);

/**
 * Row-wise centrality of vectorized graphs (n x f in, n x r out). Negative
 * features are clamped to 0; the number clamped is added to `clamped`.
 */
Matrix centrality_matrix(const Matrix& features, Index regions, Metric metric, std::size_t* clamped = nullptr);

} // namespace mgg::centrality
