#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include <Eigen/Eigenvalues>

#include "core/matrix.hpp"

// Slow reference implementations used to check the library.
namespace oracle {

using mgg::Index;
using mgg::Matrix;
using mgg::Vector;

/// Every simple path between a and b with its length under 1/w.
inline void simple_paths(const Matrix& w, Index a, Index b, std::vector<std::vector<Index>>& paths,
                         std::vector<double>& lengths) {
    const Index r = w.rows();
    std::vector<Index> path{a};
    std::vector<bool> used(static_cast<std::size_t>(r), false);
    used[static_cast<std::size_t>(a)] = true;
    std::function<void(Index, double)> walk = [&](Index at, double length) {
        if (at == b) {
            paths.push_back(path);
            lengths.push_back(length);
            return;
        }
        for (Index next = 0; next < r; ++next) {
            if (w(at, next) > 0.0 && !used[static_cast<std::size_t>(next)]) {
                used[static_cast<std::size_t>(next)] = true;
                path.push_back(next);
                walk(next, length + 1.0 / w(at, next));
                path.pop_back();
                used[static_cast<std::size_t>(next)] = false;
            }
        }
    };
    walk(a, 0.0);
}

/// Betweenness by enumerating all shortest paths, normalized by 2/((r-1)(r-2)).
inline Vector betweenness(const Matrix& w) {
    const Index r = w.rows();
    Vector score = Vector::Zero(r);
    for (Index a = 0; a < r; ++a) {
        for (Index b = a + 1; b < r; ++b) {
            std::vector<std::vector<Index>> paths;
            std::vector<double> lengths;
            simple_paths(w, a, b, paths, lengths);
            if (paths.empty()) {
                continue;
            }
            double best = std::numeric_limits<double>::infinity();
            for (double l : lengths) {
                best = std::min(best, l);
            }
            std::vector<const std::vector<Index>*> shortest;
            for (std::size_t k = 0; k < paths.size(); ++k) {
                if (lengths[k] <= best * (1.0 + 1e-12)) {
                    shortest.push_back(&paths[k]);
                }
            }
            for (const auto* p : shortest) {
                for (std::size_t k = 1; k + 1 < p->size(); ++k) {
                    score((*p)[k]) += 1.0 / static_cast<double>(shortest.size());
                }
            }
        }
    }
    if (r > 2) {
        score *= 2.0 / (static_cast<double>(r - 1) * static_cast<double>(r - 2));
    }
    return score;
}

/// Floyd-Warshall closeness; 0 for nodes that cannot reach everyone.
inline Vector closeness(const Matrix& w) {
    const Index r = w.rows();
    const double inf = std::numeric_limits<double>::infinity();
    Matrix d = Matrix::Constant(r, r, inf);
    for (Index i = 0; i < r; ++i) {
        d(i, i) = 0.0;
        for (Index j = 0; j < r; ++j) {
            if (w(i, j) > 0.0) {
                d(i, j) = 1.0 / w(i, j);
            }
        }
    }
    for (Index k = 0; k < r; ++k) {
        for (Index i = 0; i < r; ++i) {
            for (Index j = 0; j < r; ++j) {
                d(i, j) = std::min(d(i, j), d(i, k) + d(k, j));
            }
        }
    }
    Vector out(r);
    for (Index i = 0; i < r; ++i) {
        const double total = d.row(i).sum();
        out(i) = std::isfinite(total) ? static_cast<double>(r - 1) / total : 0.0;
    }
    return out;
}

/// Principal eigenvector from a dense symmetric eigensolver, made non-negative with unit norm.
inline Vector eigenvector(const Matrix& w) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver{Eigen::MatrixXd(w)};
    Vector v = solver.eigenvectors().col(w.rows() - 1);
    if (v.sum() < 0.0) {
        v = -v;
    }
    return v / v.norm();
}

} // namespace oracle
