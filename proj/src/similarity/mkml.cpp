#include "similarity/mkml.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "core/error.hpp"

namespace mgg::mkml {

KernelBank KernelBank::standard(std::size_t kernels) {
    KernelBank bank;
    for (std::size_t k = 0; k < kernels; ++k) {
        bank.multipliers.push_back(0.5 + 0.25 * static_cast<double>(k));
    }
    bank.weights.assign(kernels, 1.0 / static_cast<double>(kernels));
    return bank;
}

void KernelBank::validate() const {
    if (multipliers.empty() || multipliers.size() != weights.size()) {
        throw ValidationError("KernelBank: need as many weights as kernels (and at least one)");
    }
    double total = 0.0;
    for (std::size_t k = 0; k < multipliers.size(); ++k) {
        if (!(multipliers[k] > 0.0) || (k > 0 && !(multipliers[k] > multipliers[k - 1]))) {
            throw ValidationError("KernelBank: bandwidth multipliers must be positive and strictly increasing");
        }
        if (!(weights[k] >= 0.0)) {
            throw ValidationError("KernelBank: kernel weights must be non-negative");
        }
        total += weights[k];
    }
    if (std::abs(total - 1.0) > 1e-9) {
        throw ValidationError("KernelBank: kernel weights must sum to 1");
    }
}

namespace {

Matrix combine(const std::vector<Matrix>& kernels, const std::vector<double>& weights) {
    Matrix s = Matrix::Zero(kernels.front().rows(), kernels.front().cols());
    for (std::size_t k = 0; k < kernels.size(); ++k) {
        s += weights[k] * kernels[k];
    }
    return s;
}

// Row-wise top-k mask, symmetrized and degree-normalized.
Matrix sparse_affinity(const Matrix& s, std::size_t neighbors) {
    const Index n = s.rows();
    Matrix p = Matrix::Zero(n, n);
    std::vector<Index> order(static_cast<std::size_t>(n));
    const auto keep = std::min<std::size_t>(neighbors, static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) {
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return s(i, a) > s(i, b); });
        for (std::size_t k = 0; k < keep; ++k) {
            p(i, order[k]) = s(i, order[k]);
        }
    }
    Matrix sym = 0.5 * (p + p.transpose());
    Vector scale = sym.rowwise().sum();
    for (Index i = 0; i < n; ++i) {
        scale(i) = scale(i) > 0.0 ? 1.0 / std::sqrt(scale(i)) : 0.0;
    }
    return scale.asDiagonal() * sym * scale.asDiagonal();
}

} // namespace

SimilarityResult learn_similarity(const Matrix& features, const KernelBank& bank, const SimilarityOptions& options) {
    bank.validate();
    const Index n = features.rows();
    if (n < 2) {
        throw ValidationError("learn_similarity: need at least two samples");
    }
    if (!features.allFinite()) {
        throw ValidationError("learn_similarity: non-finite features");
    }

    Matrix sq = Matrix::Zero(n, n);
    double distance_sum = 0.0;
    for (Index i = 0; i < n; ++i) {
        for (Index j = i + 1; j < n; ++j) {
            const double d2 = (features.row(i) - features.row(j)).squaredNorm();
            sq(i, j) = d2;
            sq(j, i) = d2;
            distance_sum += std::sqrt(d2);
        }
    }
    const double mean_distance = distance_sum / (0.5 * static_cast<double>(n) * static_cast<double>(n - 1));
    if (!(mean_distance > 0.0)) {
        throw NumericalError("learn_similarity: all samples are identical (mean pairwise distance is 0)");
    }

    std::vector<Matrix> kernels;
    kernels.reserve(bank.size());
    for (double mult : bank.multipliers) {
        const double width = mult * mean_distance;
        kernels.push_back((-sq.array() / (2.0 * width * width)).exp().matrix());
    }

    SimilarityResult result;
    result.bank = bank;
    std::vector<double>& w = result.bank.weights;
    for (std::size_t round = 0; round < options.rounds; ++round) {
        const Matrix target = sparse_affinity(combine(kernels, w), options.neighbors);
        const double target_norm = target.norm();
        std::vector<double> alignment(kernels.size(), 0.0);
        double total = 0.0;
        for (std::size_t k = 0; k < kernels.size(); ++k) {
            const double denom = kernels[k].norm() * target_norm;
            alignment[k] = denom > 0.0 ? std::max(0.0, kernels[k].cwiseProduct(target).sum() / denom) : 0.0;
            total += alignment[k];
        }
        if (total > 0.0) {
            for (std::size_t k = 0; k < kernels.size(); ++k) {
                w[k] = alignment[k] / total;
            }
        }
        result.weight_history.push_back(w);
    }

    Matrix s = combine(kernels, w);
    for (Index i = 0; i < n; ++i) {
        s(i, i) = 1.0;
        for (Index j = i + 1; j < n; ++j) {
            const double v = std::clamp(0.5 * (s(i, j) + s(j, i)), 0.0, 1.0);
            s(i, j) = v;
            s(j, i) = v;
        }
    }
    result.similarity = std::move(s);
    return result;
}

SymmetricEigen symmetric_eigen(const Matrix& input, int max_sweeps) {
    const Index n = input.rows();
    if (n != input.cols()) {
        throw DimensionError("symmetric_eigen: matrix must be square");
    }
    Matrix a = 0.5 * (input + input.transpose());
    Matrix v = Matrix::Identity(n, n);
    const double scale = std::max(a.norm(), 1e-300);

    int sweep = 0;
    for (;; ++sweep) {
        double off = 0.0;
        for (Index p = 0; p < n; ++p) {
            for (Index q = p + 1; q < n; ++q) {
                off += a(p, q) * a(p, q);
            }
        }
        if (std::sqrt(off) <= 1e-14 * scale * static_cast<double>(std::max<Index>(n, 1))) {
            break;
        }
        if (sweep >= max_sweeps) {
            throw NumericalError("symmetric_eigen: no convergence after " + std::to_string(sweep) + " sweeps");
        }
        for (Index p = 0; p < n; ++p) {
            for (Index q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (std::abs(apq) < 1e-300) {
                    continue;
                }
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (Index k = 0; k < n; ++k) {
                    const double akp = a(k, p);
                    const double akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (Index k = 0; k < n; ++k) {
                    const double apk = a(p, k);
                    const double aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                for (Index k = 0; k < n; ++k) {
                    const double vkp = v(k, p);
                    const double vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }

    std::vector<Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](Index x, Index y) { return a(x, x) < a(y, y); });
    SymmetricEigen out;
    out.values = Vector(n);
    out.vectors = Matrix(n, n);
    for (Index k = 0; k < n; ++k) {
        out.values(k) = a(order[static_cast<std::size_t>(k)], order[static_cast<std::size_t>(k)]);
        out.vectors.col(k) = v.col(order[static_cast<std::size_t>(k)]);
    }
    out.sweeps = sweep;
    return out;
}

Matrix embed(const Matrix& similarity, Index dim) {
    const Index n = similarity.rows();
    if (n != similarity.cols()) {
        throw DimensionError("embed: similarity must be square");
    }
    if (dim < 1 || dim >= n) {
        throw ValidationError("embed: need 1 <= dim < n");
    }
    Vector inv_sqrt_degree(n);
    for (Index i = 0; i < n; ++i) {
        const double d = similarity.row(i).sum();
        if (!(d > 0.0)) {
            throw NumericalError("embed: subject " + std::to_string(i) + " has zero degree");
        }
        inv_sqrt_degree(i) = 1.0 / std::sqrt(d);
    }
    Matrix laplacian = Matrix::Identity(n, n) -
                       inv_sqrt_degree.asDiagonal() * similarity * inv_sqrt_degree.asDiagonal();
    SymmetricEigen eig = symmetric_eigen(laplacian);

    Matrix out(n, dim);
    for (Index k = 0; k < dim; ++k) {
        Vector col = eig.vectors.col(k);
        const double total = col.sum();
        double sign = 1.0;
        if (std::abs(total) > 1e-10 * std::sqrt(static_cast<double>(n))) {
            sign = total > 0.0 ? 1.0 : -1.0;
        } else {
            Index best = 0;
            for (Index i = 1; i < n; ++i) {
                if (std::abs(col(i)) > std::abs(col(best)) + 1e-12) {
                    best = i;
                }
            }
            sign = col(best) >= 0.0 ? 1.0 : -1.0;
        }
        out.col(k) = sign * col;
    }
    for (Index i = 0; i < n; ++i) {
        const double norm = out.row(i).norm();
        if (norm > 1e-300) {
            out.row(i) /= norm;
        }
    }
    return out;
}

namespace {

double squared_distance(const Matrix& points, Index i, const Matrix& centroids, Index c) {
    return (points.row(i) - centroids.row(c)).squaredNorm();
}

} // namespace

ClusterAssignment kmeans_cluster(const Matrix& points, int clusters, std::uint64_t seed, int max_iterations,
                                 double tolerance) {
    const Index n = points.rows();
    if (clusters < 1) {
        throw ValidationError("kmeans: need at least one cluster");
    }
    if (clusters > n) {
        throw ValidationError("kmeans: more clusters (" + std::to_string(clusters) + ") than points (" +
                              std::to_string(n) + ")");
    }
    if (!points.allFinite()) {
        throw ValidationError("kmeans: non-finite input");
    }
    const Index c = clusters;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);

    // k-means++ seeding
    Matrix centroids(c, points.cols());
    std::vector<bool> chosen(static_cast<std::size_t>(n), false);
    Index first = std::min<Index>(static_cast<Index>(uniform(rng) * static_cast<double>(n)), n - 1);
    centroids.row(0) = points.row(first);
    chosen[static_cast<std::size_t>(first)] = true;
    Vector nearest(n);
    for (Index i = 0; i < n; ++i) {
        nearest(i) = squared_distance(points, i, centroids, 0);
    }
    for (Index k = 1; k < c; ++k) {
        const double total = nearest.sum();
        Index pick = -1;
        if (total > 0.0) {
            const double target = uniform(rng) * total;
            double running = 0.0;
            for (Index i = 0; i < n; ++i) {
                running += nearest(i);
                if (nearest(i) > 0.0 && running >= target) {
                    pick = i;
                    break;
                }
            }
            if (pick < 0) {
                for (Index i = n - 1; i >= 0; --i) {
                    if (nearest(i) > 0.0) {
                        pick = i;
                        break;
                    }
                }
            }
        } else {
            for (Index i = 0; i < n; ++i) {
                if (!chosen[static_cast<std::size_t>(i)]) {
                    pick = i;
                    break;
                }
            }
        }
        chosen[static_cast<std::size_t>(pick)] = true;
        centroids.row(k) = points.row(pick);
        for (Index i = 0; i < n; ++i) {
            nearest(i) = std::min(nearest(i), squared_distance(points, i, centroids, k));
        }
    }

    ClusterAssignment out;
    out.clusters = clusters;
    out.labels.assign(static_cast<std::size_t>(n), 0);
    double previous = 0.0;
    for (int iter = 0; iter < max_iterations; ++iter) {
        std::vector<Index> counts(static_cast<std::size_t>(c), 0);
        for (Index i = 0; i < n; ++i) {
            Index best = 0;
            double best_d = squared_distance(points, i, centroids, 0);
            for (Index k = 1; k < c; ++k) {
                const double d = squared_distance(points, i, centroids, k);
                if (d < best_d) {
                    best_d = d;
                    best = k;
                }
            }
            out.labels[static_cast<std::size_t>(i)] = static_cast<int>(best);
            ++counts[static_cast<std::size_t>(best)];
        }
        for (Index k = 0; k < c; ++k) {
            if (counts[static_cast<std::size_t>(k)] > 0) {
                continue;
            }
            const auto largest = static_cast<Index>(std::max_element(counts.begin(), counts.end()) - counts.begin());
            Index far = -1;
            double far_d = -1.0;
            for (Index i = 0; i < n; ++i) {
                if (out.labels[static_cast<std::size_t>(i)] == largest) {
                    const double d = squared_distance(points, i, centroids, largest);
                    if (d > far_d) {
                        far_d = d;
                        far = i;
                    }
                }
            }
            out.labels[static_cast<std::size_t>(far)] = static_cast<int>(k);
            --counts[static_cast<std::size_t>(largest)];
            ++counts[static_cast<std::size_t>(k)];
            centroids.row(k) = points.row(far);
        }
        double inertia = 0.0;
        for (Index i = 0; i < n; ++i) {
            inertia += squared_distance(points, i, centroids, out.labels[static_cast<std::size_t>(i)]);
        }
        out.inertia_history.push_back(inertia);

        Matrix updated = Matrix::Zero(c, points.cols());
        for (Index i = 0; i < n; ++i) {
            updated.row(out.labels[static_cast<std::size_t>(i)]) += points.row(i);
        }
        for (Index k = 0; k < c; ++k) {
            updated.row(k) /= static_cast<double>(counts[static_cast<std::size_t>(k)]);
        }
        centroids = std::move(updated);

        if (iter > 0) {
            const double change = std::abs(previous - inertia) / std::max(previous, 1e-300);
            if (change < tolerance || inertia == 0.0) {
                break;
            }
        }
        previous = inertia;
    }
    out.centroids = std::move(centroids);
    return out;
}

ClusterAssignment cluster_source_embeddings(const Matrix& embeddings, int clusters, std::uint64_t seed) {
    if (!embeddings.allFinite()) {
        throw ValidationError("cluster_source_embeddings: non-finite embeddings");
    }
    const Index n = embeddings.rows();
    if (clusters < 1 || clusters > n) {
        throw ValidationError("cluster_source_embeddings: need 1 <= c <= n");
    }
    auto sim = learn_similarity(embeddings, KernelBank::standard());
    const Index dim = std::min<Index>(clusters, n - 1);
    Matrix spectral = embed(sim.similarity, dim);
    return kmeans_cluster(spectral, clusters, seed);
}

double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b) {
    if (a.size() != b.size() || a.empty()) {
        throw ValidationError("adjusted_rand_index: labelings must be non-empty and equally long");
    }
    const int ka = *std::max_element(a.begin(), a.end()) + 1;
    const int kb = *std::max_element(b.begin(), b.end()) + 1;
    std::vector<double> table(static_cast<std::size_t>(ka * kb), 0.0);
    std::vector<double> rows(static_cast<std::size_t>(ka), 0.0), cols(static_cast<std::size_t>(kb), 0.0);
    for (std::size_t i = 0; i < a.size(); ++i) {
        table[static_cast<std::size_t>(a[i] * kb + b[i])] += 1.0;
        rows[static_cast<std::size_t>(a[i])] += 1.0;
        cols[static_cast<std::size_t>(b[i])] += 1.0;
    }
    auto pairs = [](double x) { return x * (x - 1.0) / 2.0; };
    double index = 0.0, sum_rows = 0.0, sum_cols = 0.0;
    for (double v : table) {
        index += pairs(v);
    }
    for (double v : rows) {
        sum_rows += pairs(v);
    }
    for (double v : cols) {
        sum_cols += pairs(v);
    }
    const double expected = sum_rows * sum_cols / pairs(static_cast<double>(a.size()));
    const double maximum = 0.5 * (sum_rows + sum_cols);
    if (maximum - expected == 0.0) {
        return index == expected ? 1.0 : 0.0;
    }
    return (index - expected) / (maximum - expected);
}

} // namespace mgg::mkml
