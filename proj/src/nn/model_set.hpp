#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "nn/gcn.hpp"

namespace mgg::nn {

/**
 * Encoder, c x m cluster-specific generators, c source decoders and the
 * discriminator. The encoder, generators and decoders form the generator-side
 * optimizer group; the discriminator (trunk, critic and classifier) forms the
 * discriminator-side group.
 */
struct ModelSet {
    Index regions = 0;
    Index features = 0;
    Index targets = 0;  ///< m
    Index clusters = 0; ///< c
    std::uint64_t seed = 0;

    Encoder encoder;
    std::vector<std::vector<Generator>> generators; ///< [cluster][target]
    std::vector<Generator> decoders;                ///< [cluster]
    Discriminator discriminator;

    /// Glorot-initialized from `seed`; parameter counts are checked.
    static ModelSet create(Index regions, Index targets, Index clusters, std::uint64_t seed);

    std::vector<ad::Tensor> generator_parameters() const;
    std::vector<ad::Tensor> discriminator_parameters() const;

    /// Stable key -> tensor, e.g. `generator/T2/cluster0/layer1/W`.
    std::vector<std::pair<std::string, ad::Tensor>> named_parameters() const;

    /// Freezes or unfreezes a whole optimizer group.
    void set_generator_trainable(bool flag) const;
    void set_discriminator_trainable(bool flag) const;

    /// Deep copy of all weights.
    ModelSet clone() const;
};

/// Expected parameter counts per network.
std::int64_t encoder_parameter_count(Index features);
std::int64_t generator_parameter_count(Index features);
std::int64_t discriminator_parameter_count(Index features);

struct Checkpoint {
    ModelSet model;
    std::int64_t iteration = 0;
    /// Free-form metadata (config, test subject ids, ...), one line per key.
    std::map<std::string, std::string> metadata;
};

/// Writes the manifest plus every named weight as little-endian doubles.
void save_checkpoint(const std::string& path, const ModelSet& model, std::int64_t iteration,
                     const std::map<std::string, std::string>& metadata);

/// @throws IoError when the file cannot be read, ValidationError when it is malformed.
Checkpoint load_checkpoint(const std::string& path);

} // namespace mgg::nn
