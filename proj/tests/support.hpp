#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "core/matrix.hpp"
#include "population/brain_graph.hpp"

namespace test {

using mgg::Index;
using mgg::Matrix;
using mgg::Vector;

inline Matrix uniform(Index rows, Index cols, std::mt19937_64& rng, double lo = -2.0, double hi = 2.0) {
    std::uniform_real_distribution<double> dist(lo, hi);
    Matrix m(rows, cols);
    for (Index k = 0; k < m.size(); ++k) {
        m.data()[k] = dist(rng);
    }
    return m;
}

/// Uniform in [lo, hi] with every entry at least `gap` away from zero.
inline Matrix away_from_zero(Index rows, Index cols, std::mt19937_64& rng, double gap = 1e-3, double lo = -2.0,
                             double hi = 2.0) {
    std::uniform_real_distribution<double> dist(lo, hi);
    Matrix m(rows, cols);
    for (Index k = 0; k < m.size(); ++k) {
        double v = dist(rng);
        while (std::abs(v) < gap) {
            v = dist(rng);
        }
        m.data()[k] = v;
    }
    return m;
}

/// Symmetric weights in [0.1, 1]; each edge present with probability `density`.
inline Matrix random_weights(Index r, std::mt19937_64& rng, double density = 1.0) {
    std::uniform_real_distribution<double> weight(0.1, 1.0);
    std::bernoulli_distribution keep(density);
    Matrix w = Matrix::Zero(r, r);
    for (Index i = 0; i < r; ++i) {
        for (Index j = i + 1; j < r; ++j) {
            if (keep(rng)) {
                w(i, j) = w(j, i) = weight(rng);
            }
        }
    }
    return w;
}

inline std::vector<Index> random_permutation(Index n, std::mt19937_64& rng) {
    std::vector<Index> p(static_cast<std::size_t>(n));
    std::iota(p.begin(), p.end(), Index{0});
    std::shuffle(p.begin(), p.end(), rng);
    return p;
}

/// out(k, :) = m(p[k], :)
inline Matrix permute_rows(const Matrix& m, const std::vector<Index>& p) {
    Matrix out(m.rows(), m.cols());
    for (std::size_t k = 0; k < p.size(); ++k) {
        out.row(static_cast<Index>(k)) = m.row(p[k]);
    }
    return out;
}

/// out(a, b) = m(p[a], p[b])
inline Matrix permute_both(const Matrix& m, const std::vector<Index>& p) {
    Matrix out(m.rows(), m.cols());
    for (std::size_t a = 0; a < p.size(); ++a) {
        for (std::size_t b = 0; b < p.size(); ++b) {
            out(static_cast<Index>(a), static_cast<Index>(b)) = m(p[a], p[b]);
        }
    }
    return out;
}

inline Vector permute(const Vector& v, const std::vector<Index>& p) {
    Vector out(v.size());
    for (std::size_t k = 0; k < p.size(); ++k) {
        out(static_cast<Index>(k)) = v(p[k]);
    }
    return out;
}

/// Upper-triangle features of `weights` relabelled by `p`.
inline Vector permuted_features(const Matrix& weights, const std::vector<Index>& p) {
    return mgg::vectorize(mgg::BrainGraph(permute_both(weights, p)));
}

inline double max_abs(const Matrix& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

} // namespace test
