#include "training/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <fmt/format.h>

#include "core/error.hpp"

namespace mgg::train {

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
    T value{};
    const char* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc() || ptr != end) {
        throw ValidationError(fmt::format("config: '{}' expects a number, got '{}'", key, text));
    }
    return value;
}

double parse_real(const std::string& key, const std::string& text) {
    // from_chars for double is not in libstdc++ 11
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(text, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != text.size()) {
        throw ValidationError(fmt::format("config: '{}' expects a real number, got '{}'", key, text));
    }
    return v;
}

bool parse_bool(const std::string& key, const std::string& text) {
    if (text == "true" || text == "1") {
        return true;
    }
    if (text == "false" || text == "0") {
        return false;
    }
    throw ValidationError(fmt::format("config: '{}' expects true or false, got '{}'", key, text));
}

using Setter = std::function<void(TrainingConfig&, const std::string&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
    static const std::map<std::string, Setter> table = {
        {"iterations", [](auto& c, auto& k, auto& v) { c.iterations = parse_number<std::int64_t>(k, v); }},
        {"batch_size", [](auto& c, auto& k, auto& v) { c.batch_size = parse_number<std::int64_t>(k, v); }},
        {"learning_rate", [](auto& c, auto& k, auto& v) { c.learning_rate = parse_real(k, v); }},
        {"beta1", [](auto& c, auto& k, auto& v) { c.beta1 = parse_real(k, v); }},
        {"beta2", [](auto& c, auto& k, auto& v) { c.beta2 = parse_real(k, v); }},
        {"n_critic", [](auto& c, auto& k, auto& v) { c.n_critic = parse_number<std::int64_t>(k, v); }},
        {"clusters", [](auto& c, auto& k, auto& v) { c.clusters = parse_number<std::int64_t>(k, v); }},
        {"centrality_metric", [](auto& c, auto&, auto& v) { c.metric = centrality::parse_metric(v); }},
        {"seed", [](auto& c, auto& k, auto& v) { c.seed = parse_number<std::uint64_t>(k, v); }},
        {"lambda_gdc", [](auto& c, auto& k, auto& v) { c.weights.gdc = parse_real(k, v); }},
        {"lambda_gp", [](auto& c, auto& k, auto& v) { c.weights.gp = parse_real(k, v); }},
        {"lambda_top", [](auto& c, auto& k, auto& v) { c.weights.top = parse_real(k, v); }},
        {"lambda_rec", [](auto& c, auto& k, auto& v) { c.weights.rec = parse_real(k, v); }},
        {"lambda_inf", [](auto& c, auto& k, auto& v) { c.weights.inf = parse_real(k, v); }},
        {"sigma", [](auto& c, auto& k, auto& v) { c.weights.sigma = v == "m" ? -1.0 : parse_real(k, v); }},
        {"centrality_subsample",
         [](auto& c, auto& k, auto& v) { c.centrality_subsample = parse_number<std::int64_t>(k, v); }},
        {"full_batch_centrality", [](auto& c, auto& k, auto& v) { c.full_batch_centrality = parse_bool(k, v); }},
        {"checkpoint_interval",
         [](auto& c, auto& k, auto& v) { c.checkpoint_interval = parse_number<std::int64_t>(k, v); }},
        {"train_fraction", [](auto& c, auto& k, auto& v) { c.train_fraction = parse_real(k, v); }},
    };
    return table;
}

} // namespace

void TrainingConfig::validate() const {
    auto fail = [](const std::string& msg) { throw ValidationError("config: " + msg); };
    if (iterations < 1) fail("iterations must be positive");
    if (batch_size < 1) fail("batch_size must be positive");
    if (!(learning_rate > 0.0)) fail("learning_rate must be positive");
    if (!(beta1 >= 0.0 && beta1 < 1.0)) fail("beta1 must lie in [0, 1)");
    if (!(beta2 >= 0.0 && beta2 < 1.0)) fail("beta2 must lie in [0, 1)");
    if (n_critic < 1) fail("n_critic must be at least 1");
    if (clusters < 1) fail("clusters must be positive");
    if (centrality_subsample < 1) fail("centrality_subsample must be positive");
    if (checkpoint_interval < 0) fail("checkpoint_interval must be non-negative");
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) fail("train_fraction must lie in (0, 1)");
    for (double w : {weights.gdc, weights.gp, weights.top, weights.rec, weights.inf}) {
        if (!(w >= 0.0)) fail("loss weights must be non-negative");
    }
}

TrainingConfig parse_config(const std::string& text) {
    TrainingConfig config;
    std::istringstream in(text);
    int number = 0;
    for (std::string line; std::getline(in, line);) {
        ++number;
        const auto hash = line.find('#');
        if (hash != std::string::npos) {
            line.erase(hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ValidationError(fmt::format("config line {}: expected key = value", number));
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        auto it = setters().find(key);
        if (it == setters().end()) {
            throw ValidationError(fmt::format("config line {}: unknown key '{}'", number, key));
        }
        it->second(config, key, value);
    }
    config.validate();
    return config;
}

TrainingConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open config " + path);
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_config(buffer.str());
}

std::string render_config(const TrainingConfig& c) {
    std::string out;
    auto line = [&](const char* key, const auto& value) { out += fmt::format("{} = {}\n", key, value); };
    line("iterations", c.iterations);
    line("batch_size", c.batch_size);
    line("learning_rate", c.learning_rate);
    line("beta1", c.beta1);
    line("beta2", c.beta2);
    line("n_critic", c.n_critic);
    line("clusters", c.clusters);
    line("centrality_metric", centrality::metric_name(c.metric));
    line("seed", c.seed);
    line("lambda_gdc", c.weights.gdc);
    line("lambda_gp", c.weights.gp);
    line("lambda_top", c.weights.top);
    line("lambda_rec", c.weights.rec);
    line("lambda_inf", c.weights.inf);
    if (c.weights.sigma < 0.0) {
        line("sigma", "m");
    } else {
        line("sigma", c.weights.sigma);
    }
    line("centrality_subsample", c.centrality_subsample);
    line("full_batch_centrality", c.full_batch_centrality ? "true" : "false");
    line("checkpoint_interval", c.checkpoint_interval);
    line("train_fraction", c.train_fraction);
    return out;
}

} // namespace mgg::train
