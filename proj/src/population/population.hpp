#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "core/matrix.hpp"

namespace mgg {

/// Features of one domain (source "S" or target "T1".."Tm"), one row per subject.
struct DomainDataset {
    std::string domain;
    Matrix features;
    std::optional<Matrix> similarity;
};

/**
 * Paired multi-view population: every subject has one source graph and m
 * target graphs. Rows of every dataset follow `subjects`, which is sorted
 * lexicographically.
 */
struct MultiDomainPopulation {
    Index regions = 0;
    std::vector<std::string> subjects;
    DomainDataset source;
    std::vector<DomainDataset> targets;
    /// Planted mode per subject (synthetic data only); empty when unknown.
    std::vector<int> modes;

    Index size() const { return static_cast<Index>(subjects.size()); }
    Index target_count() const { return static_cast<Index>(targets.size()); }
    Index feature_count() const { return source.features.cols(); }

    /// @throws ValidationError when shapes, pairing or ordering are inconsistent.
    void validate() const;

    /// Rows `rows` (kept in the given order) of every dataset; similarities are dropped.
    MultiDomainPopulation subset(const std::vector<Index>& rows) const;

    /// Row of `id` or -1.
    Index find(const std::string& id) const;
};

std::string target_domain_name(Index i); // 0-based -> "T1"

/**
 * Reads the population CSV (`subject_id,domain,v_0,...,v_{f-1}`).
 * Pass 0 for `regions` or `targets` to infer them from the header / domain
 * labels. Rows may come in any order; output is sorted by subject id.
 */
MultiDomainPopulation load_population(const std::string& path, Index regions, Index targets);

/// Attaches planted labels from a `subject_id,mode` CSV.
void load_labels(MultiDomainPopulation& population, const std::string& path);

void write_population_csv(const MultiDomainPopulation& population, const std::string& path);
void write_labels_csv(const MultiDomainPopulation& population, const std::string& path);

/// Source-only rows (`domain == S`) of a population CSV, for prediction input.
std::pair<std::vector<std::string>, Matrix> load_source_rows(const std::string& path);

struct SynthesisParams {
    std::uint64_t seed = 0;
    Index subjects = 40;
    Index regions = 35;
    Index targets = 2;
    Index modes = 2;
    double noise = 0.02;
};

/**
 * Multi-modal synthetic population. Source graphs come from `modes` Gaussian
 * components whose means are at least 4 within-component radii apart; every
 * target domain is a per-mode affine map followed by a sigmoid, plus noise.
 * Each domain is min-max rescaled to [0, 1].
 */
MultiDomainPopulation synthesize_population(const SynthesisParams& params);

/// Seeded subject split; `fraction` of subjects go to the training side.
std::pair<MultiDomainPopulation, MultiDomainPopulation> split_train_test(const MultiDomainPopulation& population,
                                                                          double fraction, std::uint64_t seed);

} // namespace mgg
