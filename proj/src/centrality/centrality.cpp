#include "centrality/centrality.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>

#include "core/error.hpp"
#include "core/log.hpp"

namespace mgg::centrality {

namespace {

constexpr double kTie = 1e-12;

bool same_length(double a, double b) { return std::abs(a - b) <= kTie * std::max(1.0, std::max(std::abs(a), std::abs(b))); }

} // namespace

std::string metric_name(Metric metric) {
    switch (metric) {
    case Metric::closeness:
        return "CC";
    case Metric::betweenness:
        return "BC";
    case Metric::eigenvector:
        return "EC";
    }
    return "?";
}

Metric parse_metric(const std::string& name) {
    std::string upper;
    for (char ch : name) {
        upper.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(ch))));
    }
    if (upper == "CC") {
        return Metric::closeness;
    }
    if (upper == "BC") {
        return Metric::betweenness;
    }
    if (upper == "EC") {
        return Metric::eigenvector;
    }
    throw ValidationError("unknown centrality metric '" + name + "' (expected CC, BC or EC)");
}

ShortestPaths shortest_paths(const BrainGraph& graph, Index source) {
    const Index r = graph.regions();
    const Matrix& w = graph.weights();
    ShortestPaths sp;
    sp.distance = Vector::Constant(r, std::numeric_limits<double>::infinity());
    sp.path_count = Vector::Zero(r);
    sp.preds.assign(static_cast<std::size_t>(r), {});
    std::vector<bool> settled(static_cast<std::size_t>(r), false);
    sp.distance(source) = 0.0;
    sp.path_count(source) = 1.0;

    for (Index step = 0; step < r; ++step) {
        Index v = -1;
        for (Index u = 0; u < r; ++u) {
            if (!settled[static_cast<std::size_t>(u)] && std::isfinite(sp.distance(u)) &&
                (v < 0 || sp.distance(u) < sp.distance(v))) {
                v = u;
            }
        }
        if (v < 0) {
            break;
        }
        settled[static_cast<std::size_t>(v)] = true;
        sp.settle_order.push_back(v);
        for (Index u = 0; u < r; ++u) {
            if (settled[static_cast<std::size_t>(u)] || !(w(v, u) > 0.0)) {
                continue;
            }
            const double alt = sp.distance(v) + 1.0 / w(v, u);
            auto& preds = sp.preds[static_cast<std::size_t>(u)];
            if (std::isfinite(sp.distance(u)) && same_length(alt, sp.distance(u))) {
                sp.path_count(u) += sp.path_count(v);
                preds.push_back(v);
            } else if (alt < sp.distance(u)) {
                sp.distance(u) = alt;
                sp.path_count(u) = sp.path_count(v);
                preds.assign(1, v);
            }
        }
    }
    for (auto& p : sp.preds) {
        std::sort(p.begin(), p.end());
    }
    return sp;
}

Vector closeness(const BrainGraph& graph) {
    const Index r = graph.regions();
    if (r < 2) {
        throw ValidationError("closeness: need at least 2 regions");
    }
    Vector out = Vector::Zero(r);
    Index disconnected = 0;
    for (Index v = 0; v < r; ++v) {
        ShortestPaths sp = shortest_paths(graph, v);
        if (static_cast<Index>(sp.settle_order.size()) != r) {
            ++disconnected;
            continue;
        }
        // settle order, so the sum runs outward from v
        double total = 0.0;
        for (Index u : sp.settle_order) {
            total += sp.distance(u);
        }
        out(v) = static_cast<double>(r - 1) / total;
    }
    if (disconnected > 0) {
        logger()->warn("closeness: {} of {} regions cannot reach the whole graph; their CC is 0", disconnected, r);
    }
    return out;
}

Vector betweenness(const BrainGraph& graph) {
    const Index r = graph.regions();
    if (r < 3) {
        throw ValidationError("betweenness: need at least 3 regions");
    }
    Vector ordered_pairs = Vector::Zero(r);
    for (Index s = 0; s < r; ++s) {
        ShortestPaths sp = shortest_paths(graph, s);
        Vector delta = Vector::Zero(r);
        for (auto it = sp.settle_order.rbegin(); it != sp.settle_order.rend(); ++it) {
            const Index w = *it;
            for (Index v : sp.preds[static_cast<std::size_t>(w)]) {
                delta(v) += sp.path_count(v) / sp.path_count(w) * (1.0 + delta(w));
            }
            if (w != s) {
                ordered_pairs(w) += delta(w);
            }
        }
    }
    // ordered pairs count every unordered pair twice
    return ordered_pairs / (static_cast<double>(r - 1) * static_cast<double>(r - 2));
}

Vector eigenvector(const BrainGraph& graph, const EigenvectorOptions& options) {
    const Index r = graph.regions();
    const Matrix& a = graph.weights();
    if (a.isZero(0.0)) {
        throw NumericalError("eigenvector: adjacency is all zero");
    }
    Vector x = Vector::Constant(r, 1.0 / std::sqrt(static_cast<double>(r)));
    double change = 0.0;
    for (int iter = 0; iter < options.max_iterations; ++iter) {
        Vector y = a * x + x;
        y /= y.norm();
        change = (y - x).cwiseAbs().maxCoeff();
        x = std::move(y);
        if (change < options.tolerance) {
            return x.cwiseMax(0.0);
        }
    }
    throw NumericalError("eigenvector: power iteration did not converge in " + std::to_string(options.max_iterations) +
                         " iterations (last change " + std::to_string(change) + ")");
}

Vector compute(const BrainGraph& graph, Metric metric) {
    switch (metric) {
    case Metric::closeness:
        return closeness(graph);
    case Metric::betweenness:
        return betweenness(graph);
    case Metric::eigenvector:
        return eigenvector(graph);
    }
    throw ContractError("unknown centrality metric");
}

Matrix centrality_matrix(const Matrix& features, Index regions, Metric metric, std::size_t* clamped) {
    Matrix out(features.rows(), regions);
    for (Index i = 0; i < features.rows(); ++i) {
        Devectorized d = devectorize(features.row(i).transpose(), regions);
        if (clamped) {
            *clamped += d.clamped;
        }
        out.row(i) = compute(d.graph, metric).transpose();
    }
    return out;
}

} // namespace mgg::centrality
