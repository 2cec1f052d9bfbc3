#include "nn/model_set.hpp"

#include <bit>
#include <fstream>
#include <iterator>
#include <sstream>

#include <fmt/format.h>

#include "core/error.hpp"
#include "population/brain_graph.hpp"

namespace mgg::nn {

namespace {

constexpr char kMagic[] = "MGGCKPT1";

std::int64_t count(const std::vector<ad::Tensor>& params) {
    std::int64_t total = 0;
    for (const auto& p : params) {
        total += static_cast<std::int64_t>(p.rows() * p.cols());
    }
    return total;
}

void check_count(const char* what, const std::vector<ad::Tensor>& params, std::int64_t expected) {
    if (count(params) != expected) {
        throw ContractError(fmt::format("{} has {} parameters, expected {}", what, count(params), expected));
    }
}

void append_layers(std::vector<std::pair<std::string, ad::Tensor>>& out, const std::string& prefix,
                   const std::vector<GcnLayer>& layers) {
    for (std::size_t l = 0; l < layers.size(); ++l) {
        out.emplace_back(fmt::format("{}/layer{}/W", prefix, l), layers[l].weight);
    }
}

void copy_layers(const std::vector<GcnLayer>& from, std::vector<GcnLayer>& to) {
    to.clear();
    for (const GcnLayer& layer : from) {
        to.push_back({ad::Tensor::parameter(layer.weight.value()), layer.activation});
    }
}

void put_u32(std::ostream& out, std::uint32_t v) {
    for (int b = 0; b < 4; ++b) {
        out.put(static_cast<char>((v >> (8 * b)) & 0xFFu));
    }
}

void put_u64(std::ostream& out, std::uint64_t v) {
    for (int b = 0; b < 8; ++b) {
        out.put(static_cast<char>((v >> (8 * b)) & 0xFFu));
    }
}

class Reader {
public:
    Reader(std::string data, std::string path) : data_(std::move(data)), path_(std::move(path)) {}

    std::uint64_t uint(int bytes) {
        need(static_cast<std::size_t>(bytes));
        std::uint64_t v = 0;
        for (int b = 0; b < bytes; ++b) {
            v |= static_cast<std::uint64_t>(static_cast<unsigned char>(data_[pos_++])) << (8 * b);
        }
        return v;
    }

    std::string text(std::size_t length) {
        need(length);
        std::string s = data_.substr(pos_, length);
        pos_ += length;
        return s;
    }

    bool done() const { return pos_ == data_.size(); }

private:
    void need(std::size_t n) const {
        if (data_.size() - pos_ < n) {
            throw ValidationError("checkpoint " + path_ + " is truncated");
        }
    }

    std::string data_;
    std::string path_;
    std::size_t pos_ = 0;
};

} // namespace

std::int64_t encoder_parameter_count(Index f) { return f * 32 + 32 * 16; }
std::int64_t generator_parameter_count(Index f) { return 16 * 16 + 16 * 32 + 32 * f; }
std::int64_t discriminator_parameter_count(Index f) { return f * 32 + 32 * 16 + 16 + 16; }

ModelSet ModelSet::create(Index regions, Index targets, Index clusters, std::uint64_t seed) {
    if (regions < 3 || targets < 1 || clusters < 1) {
        throw ValidationError(fmt::format("model: need r >= 3, m >= 1, c >= 1 (got r={}, m={}, c={})", regions,
                                          targets, clusters));
    }
    ModelSet ms;
    ms.regions = regions;
    ms.features = feature_length(regions);
    ms.targets = targets;
    ms.clusters = clusters;
    ms.seed = seed;
    std::mt19937_64 rng(seed);
    ms.encoder = Encoder::create(ms.features, rng);
    check_count("encoder", ms.encoder.parameters(), encoder_parameter_count(ms.features));
    ms.generators.resize(static_cast<std::size_t>(clusters));
    for (Index j = 0; j < clusters; ++j) {
        for (Index i = 0; i < targets; ++i) {
            ms.generators[static_cast<std::size_t>(j)].push_back(Generator::create(ms.features, rng));
            check_count("generator", ms.generators[static_cast<std::size_t>(j)].back().parameters(),
                        generator_parameter_count(ms.features));
        }
    }
    for (Index j = 0; j < clusters; ++j) {
        ms.decoders.push_back(Generator::create(ms.features, rng));
    }
    ms.discriminator = Discriminator::create(ms.features, rng);
    check_count("discriminator", ms.discriminator.parameters(), discriminator_parameter_count(ms.features));
    return ms;
}

std::vector<ad::Tensor> ModelSet::generator_parameters() const {
    std::vector<ad::Tensor> out = encoder.parameters();
    for (const auto& row : generators) {
        for (const Generator& g : row) {
            auto p = g.parameters();
            out.insert(out.end(), p.begin(), p.end());
        }
    }
    for (const Generator& d : decoders) {
        auto p = d.parameters();
        out.insert(out.end(), p.begin(), p.end());
    }
    return out;
}

std::vector<ad::Tensor> ModelSet::discriminator_parameters() const { return discriminator.parameters(); }

std::vector<std::pair<std::string, ad::Tensor>> ModelSet::named_parameters() const {
    std::vector<std::pair<std::string, ad::Tensor>> out;
    append_layers(out, "encoder", encoder.layers);
    for (std::size_t j = 0; j < generators.size(); ++j) {
        for (std::size_t i = 0; i < generators[j].size(); ++i) {
            append_layers(out, fmt::format("generator/T{}/cluster{}", i + 1, j), generators[j][i].layers);
        }
    }
    for (std::size_t j = 0; j < decoders.size(); ++j) {
        append_layers(out, fmt::format("decoder/cluster{}", j), decoders[j].layers);
    }
    append_layers(out, "discriminator", discriminator.layers);
    out.emplace_back("discriminator/classifier/W", discriminator.classifier);
    return out;
}

void ModelSet::set_generator_trainable(bool flag) const {
    for (ad::Tensor p : generator_parameters()) {
        p.set_requires_grad(flag);
    }
}

void ModelSet::set_discriminator_trainable(bool flag) const {
    for (ad::Tensor p : discriminator_parameters()) {
        p.set_requires_grad(flag);
    }
}

ModelSet ModelSet::clone() const {
    ModelSet ms;
    ms.regions = regions;
    ms.features = features;
    ms.targets = targets;
    ms.clusters = clusters;
    ms.seed = seed;
    copy_layers(encoder.layers, ms.encoder.layers);
    ms.generators.resize(generators.size());
    for (std::size_t j = 0; j < generators.size(); ++j) {
        for (const Generator& g : generators[j]) {
            Generator copy;
            copy_layers(g.layers, copy.layers);
            ms.generators[j].push_back(std::move(copy));
        }
    }
    for (const Generator& d : decoders) {
        Generator copy;
        copy_layers(d.layers, copy.layers);
        ms.decoders.push_back(std::move(copy));
    }
    copy_layers(discriminator.layers, ms.discriminator.layers);
    ms.discriminator.classifier = ad::Tensor::parameter(discriminator.classifier.value());
    return ms;
}

void save_checkpoint(const std::string& path, const ModelSet& model, std::int64_t iteration,
                     const std::map<std::string, std::string>& metadata) {
    std::string manifest = fmt::format("regions={}\nfeatures={}\ntargets={}\nclusters={}\nseed={}\niteration={}\n",
                                       model.regions, model.features, model.targets, model.clusters, model.seed,
                                       iteration);
    for (const auto& [key, value] : metadata) {
        if (key.find_first_of("=\n") != std::string::npos || value.find('\n') != std::string::npos) {
            throw ContractError("checkpoint metadata must be single-line key=value text (key '" + key + "')");
        }
        manifest += "meta." + key + "=" + value + "\n";
    }
    std::ostringstream out;
    out.write(kMagic, 8);
    put_u32(out, static_cast<std::uint32_t>(manifest.size()));
    out << manifest;
    const auto named = model.named_parameters();
    put_u32(out, static_cast<std::uint32_t>(named.size()));
    for (const auto& [key, tensor] : named) {
        put_u32(out, static_cast<std::uint32_t>(key.size()));
        out << key;
        const Matrix& v = tensor.value();
        put_u64(out, static_cast<std::uint64_t>(v.rows()));
        put_u64(out, static_cast<std::uint64_t>(v.cols()));
        for (Index i = 0; i < v.rows(); ++i) {
            for (Index j = 0; j < v.cols(); ++j) {
                put_u64(out, std::bit_cast<std::uint64_t>(v(i, j)));
            }
        }
    }
    std::ofstream file(path, std::ios::binary | std::ios::trunc);
    if (!file) {
        throw IoError("cannot write checkpoint " + path);
    }
    const std::string bytes = out.str();
    file.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!file) {
        throw IoError("failed while writing checkpoint " + path);
    }
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream file(path, std::ios::binary);
    if (!file) {
        throw IoError("cannot open checkpoint " + path);
    }
    std::string data((std::istreambuf_iterator<char>(file)), std::istreambuf_iterator<char>());
    Reader in(std::move(data), path);
    if (in.text(8) != std::string(kMagic, 8)) {
        throw ValidationError(path + " is not a checkpoint file");
    }
    const std::string manifest = in.text(in.uint(4));
    std::map<std::string, std::string> fields;
    Checkpoint ckpt;
    std::istringstream lines(manifest);
    for (std::string line; std::getline(lines, line);) {
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ValidationError("checkpoint " + path + ": bad manifest line '" + line + "'");
        }
        const std::string key = line.substr(0, eq);
        if (key.rfind("meta.", 0) == 0) {
            ckpt.metadata[key.substr(5)] = line.substr(eq + 1);
        } else {
            fields[key] = line.substr(eq + 1);
        }
    }
    auto number = [&](const char* key) -> std::int64_t {
        auto it = fields.find(key);
        if (it == fields.end()) {
            throw ValidationError(fmt::format("checkpoint {}: manifest lacks '{}'", path, key));
        }
        try {
            return std::stoll(it->second);
        } catch (const std::exception&) {
            throw ValidationError(fmt::format("checkpoint {}: bad value for '{}'", path, key));
        }
    };
    const auto seed_it = fields.find("seed");
    if (seed_it == fields.end()) {
        throw ValidationError("checkpoint " + path + ": manifest lacks 'seed'");
    }
    ckpt.model = ModelSet::create(number("regions"), number("targets"), number("clusters"),
                                  std::stoull(seed_it->second));
    ckpt.iteration = number("iteration");
    if (number("features") != ckpt.model.features) {
        throw ValidationError("checkpoint " + path + ": feature count does not match region count");
    }

    std::map<std::string, ad::Tensor> slots;
    for (auto& [key, tensor] : ckpt.model.named_parameters()) {
        slots.emplace(key, tensor);
    }
    const std::uint64_t entries = in.uint(4);
    if (entries != slots.size()) {
        throw ValidationError(fmt::format("checkpoint {}: {} weight entries, expected {}", path, entries, slots.size()));
    }
    for (std::uint64_t e = 0; e < entries; ++e) {
        const std::string key = in.text(in.uint(4));
        auto it = slots.find(key);
        if (it == slots.end()) {
            throw ValidationError("checkpoint " + path + ": unexpected weight '" + key + "'");
        }
        Matrix& v = it->second.mutable_value();
        const auto rows = static_cast<Index>(in.uint(8));
        const auto cols = static_cast<Index>(in.uint(8));
        if (rows != v.rows() || cols != v.cols()) {
            throw ValidationError(fmt::format("checkpoint {}: '{}' is {}x{}, expected {}x{}", path, key, rows, cols,
                                              v.rows(), v.cols()));
        }
        for (Index i = 0; i < rows; ++i) {
            for (Index j = 0; j < cols; ++j) {
                v(i, j) = std::bit_cast<double>(in.uint(8));
            }
        }
        if (!v.allFinite()) {
            throw ValidationError("checkpoint " + path + ": '" + key + "' has non-finite weights");
        }
        slots.erase(it);
    }
    if (!in.done()) {
        throw ValidationError("checkpoint " + path + " has trailing bytes");
    }
    return ckpt;
}

} // namespace mgg::nn
