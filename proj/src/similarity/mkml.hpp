#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "core/matrix.hpp"

namespace mgg::mkml {

/**
 * Gaussian kernel family. Kernel k uses bandwidth `multipliers[k] * mean
 * pairwise distance`; `weights` lie on the probability simplex.
 */
struct KernelBank {
    std::vector<double> multipliers;
    std::vector<double> weights;

    /// k kernels at 0.5, 0.75, ... with uniform weights (k = 10 spans 0.5..2.75).
    static KernelBank standard(std::size_t kernels = 10);

    /// @throws ValidationError unless multipliers are positive and strictly
    /// increasing and weights are non-negative and sum to 1.
    void validate() const;

    std::size_t size() const { return multipliers.size(); }
};

struct SimilarityOptions {
    std::size_t rounds = 5;
    std::size_t neighbors = 20;
};

struct SimilarityResult {
    /// Symmetric, unit diagonal, entries in [0, 1].
    Matrix similarity;
    /// Refined kernel bank.
    KernelBank bank;
    /// Kernel weights after each refinement round.
    std::vector<std::vector<double>> weight_history;
};

/**
 * Multi-kernel sample similarity.
 *
 * Alternates `rounds` times: combine the kernels with the current weights,
 * keep each row's `neighbors` strongest entries, symmetrize and degree-normalize
 * the sparse graph, then reweight every kernel by its Frobenius alignment with
 * that graph. The returned similarity is the dense weighted combination under
 * the final weights.
 *
 * @throws NumericalError when all rows coincide (zero mean distance).
 */
SimilarityResult learn_similarity(const Matrix& features, const KernelBank& bank,
                                  const SimilarityOptions& options = {});

/// Eigenpairs of a symmetric matrix, ascending; eigenvectors are columns.
struct SymmetricEigen {
    Vector values;
    Matrix vectors;
    int sweeps = 0;
};

/// Cyclic Jacobi rotations. @throws NumericalError if `max_sweeps` is exhausted.
SymmetricEigen symmetric_eigen(const Matrix& a, int max_sweeps = 100);

/**
 * Spectral embedding: eigenvectors of I - D^-1/2 S D^-1/2 for the `dim`
 * smallest eigenvalues, each row scaled to unit length (zero rows stay zero).
 *
 * Signs are fixed so that each eigenvector's entries sum to a positive value;
 * when the sum vanishes the largest-magnitude entry is made positive. Both
 * rules commute with permuting subjects.
 */
Matrix embed(const Matrix& similarity, Index dim);

struct ClusterAssignment {
    std::vector<int> labels;
    int clusters = 0;
    Matrix centroids;
    /// Inertia after each Lloyd assignment step.
    std::vector<double> inertia_history;
};

/**
 * k-means++ seeding then Lloyd iterations until the relative inertia change
 * drops below `tolerance` or `max_iterations` is hit. An empty cluster takes
 * the point farthest from its centroid in the currently largest cluster.
 */
ClusterAssignment kmeans_cluster(const Matrix& points, int clusters, std::uint64_t seed,
                                 int max_iterations = 300, double tolerance = 1e-6);

/// learn_similarity -> embed(dim = c) -> kmeans_cluster on encoder embeddings.
ClusterAssignment cluster_source_embeddings(const Matrix& embeddings, int clusters, std::uint64_t seed);

/// Chance-corrected agreement between two labelings of the same items.
double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b);

} // namespace mgg::mkml
