#include "centrality/differentiable.hpp"

#include <cmath>
#include <map>

#include "core/error.hpp"
#include "population/brain_graph.hpp"

namespace mgg::centrality {

namespace {

void require_row(const ad::Tensor& features, Index regions, const char* op) {
    if (features.rows() != 1 || features.cols() != feature_length(regions)) {
        throw DimensionError(std::string(op) + ": expected a 1 x " + std::to_string(feature_length(regions)) +
                             " feature row");
    }
}

// feature slot of every adjacency entry (-1 on the diagonal)
std::vector<Index> adjacency_indices(Index regions) {
    std::vector<Index> idx(static_cast<std::size_t>(regions * regions), -1);
    Index k = 0;
    for (Index i = 0; i < regions; ++i) {
        for (Index j = i + 1; j < regions; ++j) {
            idx[static_cast<std::size_t>(i * regions + j)] = k;
            idx[static_cast<std::size_t>(j * regions + i)] = k;
            ++k;
        }
    }
    return idx;
}

Index edge_slot(Index a, Index b, Index regions) {
    const Index i = std::min(a, b);
    const Index j = std::max(a, b);
    // offset of row i in the upper triangle plus column offset
    return i * regions - i * (i + 1) / 2 + (j - i - 1);
}

} // namespace

ad::Tensor differentiable_ec(ad::Tape& tape, const ad::Tensor& features, Index regions, int unroll_steps) {
    require_row(features, regions, "differentiable_ec");
    if (unroll_steps < 1) {
        throw ValidationError("differentiable_ec: unroll_steps must be positive");
    }
    ad::Tensor weights = tape.relu(features);
    ad::Tensor adjacency = tape.gather(weights, adjacency_indices(regions), regions, regions);
    ad::Tensor shifted = tape.add(adjacency, ad::Tensor::constant(Matrix::Identity(regions, regions)));
    ad::Tensor x = ad::Tensor::constant(Matrix::Constant(regions, 1, 1.0 / std::sqrt(static_cast<double>(regions))));
    for (int step = 0; step < unroll_steps; ++step) {
        ad::Tensor y = tape.matmul(shifted, x);
        ad::Tensor norm = tape.sqrt(tape.sum(tape.square(y)));
        if (norm.item() == 0.0) {
            throw NumericalError("differentiable_ec: zero-norm iterate");
        }
        x = tape.div_scalar(y, norm);
    }
    return tape.transpose(x);
}

ad::Tensor differentiable_cc(ad::Tape& tape, const ad::Tensor& features, Index regions) {
    require_row(features, regions, "differentiable_cc");
    Vector values = features.value().row(0).transpose();
    const BrainGraph graph = devectorize(values, regions).graph;

    // counts(v, e): how many of v's shortest paths use used-edge e
    std::map<Index, Index> used; // feature slot -> column
    std::vector<std::vector<std::pair<Index, double>>> per_node(static_cast<std::size_t>(regions));
    Matrix connected = Matrix::Zero(1, regions);
    for (Index v = 0; v < regions; ++v) {
        ShortestPaths sp = shortest_paths(graph, v);
        if (static_cast<Index>(sp.settle_order.size()) != regions) {
            continue;
        }
        connected(0, v) = 1.0;
        std::map<Index, double> counts;
        for (Index u = 0; u < regions; ++u) {
            for (Index cur = u; cur != v;) {
                const Index prev = sp.preds[static_cast<std::size_t>(cur)].front();
                counts[edge_slot(prev, cur, regions)] += 1.0;
                cur = prev;
            }
        }
        for (const auto& [slot, count] : counts) {
            used.emplace(slot, 0);
            per_node[static_cast<std::size_t>(v)].emplace_back(slot, count);
        }
    }
    if (used.empty()) {
        return ad::Tensor::constant(Matrix::Zero(1, regions));
    }
    std::vector<Index> slots;
    for (auto& [slot, column] : used) {
        column = static_cast<Index>(slots.size());
        slots.push_back(slot);
    }
    Matrix counts = Matrix::Zero(static_cast<Index>(slots.size()), regions);
    for (Index v = 0; v < regions; ++v) {
        for (const auto& [slot, count] : per_node[static_cast<std::size_t>(v)]) {
            counts(used[slot], v) = count;
        }
    }

    ad::Tensor lengths = tape.reciprocal(tape.gather(features, slots, 1, static_cast<Index>(slots.size())));
    ad::Tensor totals = tape.matmul(lengths, ad::Tensor::constant(counts));
    // disconnected nodes: total 0 -> divide by 1 and mask out
    Matrix pad = (1.0 - connected.array()).matrix();
    ad::Tensor safe = tape.add(totals, ad::Tensor::constant(pad));
    ad::Tensor scores = tape.scale(tape.reciprocal(safe), static_cast<double>(regions - 1));
    return tape.mul(scores, ad::Tensor::constant(connected));
}

ad::Tensor betweenness_constant(const ad::Tensor& features, Index regions) {
    if (features.rows() != 1) {
        throw DimensionError("betweenness_constant: expected a single feature row");
    }
    Vector values = features.value().row(0).transpose();
    Vector scores = betweenness(devectorize(values, regions).graph);
    return ad::Tensor::constant(Matrix(scores.transpose()));
}

ad::Tensor differentiable_centrality(ad::Tape& tape, Metric metric, const ad::Tensor& features, Index regions) {
    switch (metric) {
    case Metric::closeness:
        return differentiable_cc(tape, features, regions);
    case Metric::betweenness:
        return betweenness_constant(features, regions);
    case Metric::eigenvector:
        return differentiable_ec(tape, features, regions);
    }
    throw ContractError("unknown centrality metric");
}

ad::Tensor centrality_rows(ad::Tape& tape, Metric metric, const ad::Tensor& features, Index regions,
                           const std::vector<Index>& rows) {
    if (rows.empty()) {
        throw ContractError("centrality_rows: no rows selected");
    }
    std::vector<ad::Tensor> parts;
    parts.reserve(rows.size());
    for (Index row : rows) {
        ad::Tensor one = tape.select_rows(features, {row});
        parts.push_back(differentiable_centrality(tape, metric, one, regions));
    }
    return parts.size() == 1 ? parts.front() : tape.vstack(parts);
}

} // namespace mgg::centrality
