#include "population/population.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "core/error.hpp"
#include "core/log.hpp"
#include "population/brain_graph.hpp"

namespace mgg {

namespace {

constexpr double kModeSpread = 0.05;

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string current;
    for (char ch : line) {
        if (ch == ',') {
            fields.push_back(current);
            current.clear();
        } else if (ch != '\r') {
            current.push_back(ch);
        }
    }
    fields.push_back(current);
    return fields;
}

double parse_double(const std::string& text, std::size_t line_no) {
    double value = 0.0;
    const char* begin = text.data();
    const char* end = text.data() + text.size();
    while (begin != end && *begin == ' ') {
        ++begin;
    }
    if (begin != end && *begin == '+') {
        ++begin;
    }
    auto [ptr, ec] = std::from_chars(begin, end, value);
    while (ptr != end && *ptr == ' ') {
        ++ptr;
    }
    if (ec != std::errc() || ptr != end) {
        throw ValidationError(fmt::format("line {}: cannot parse number '{}'", line_no, text));
    }
    if (!std::isfinite(value)) {
        throw ValidationError(fmt::format("line {}: non-finite value", line_no));
    }
    return value;
}

// "S" -> 0, "T<k>" -> k, anything else -> -1
long domain_index(const std::string& name) {
    if (name == "S") {
        return 0;
    }
    if (name.size() >= 2 && name[0] == 'T') {
        long k = 0;
        auto [ptr, ec] = std::from_chars(name.data() + 1, name.data() + name.size(), k);
        if (ec == std::errc() && ptr == name.data() + name.size() && k >= 1) {
            return k;
        }
    }
    return -1;
}

std::vector<std::string> read_header(std::ifstream& in, const std::string& path, Index& features) {
    std::string line;
    if (!std::getline(in, line)) {
        throw ValidationError(path + ": empty file");
    }
    if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF) {
        line = line.substr(3); // UTF-8 BOM
    }
    auto header = split_csv_line(line);
    if (header.size() < 3 || header[0] != "subject_id" || header[1] != "domain") {
        throw ValidationError(path + ": header must start with subject_id,domain,v_0");
    }
    for (std::size_t k = 2; k < header.size(); ++k) {
        if (header[k] != "v_" + std::to_string(k - 2)) {
            throw ValidationError(fmt::format("{}: header column {} should be v_{}", path, k, k - 2));
        }
    }
    features = static_cast<Index>(header.size() - 2);
    return header;
}

void write_matrix_row(std::ostream& out, const Matrix& m, Index row) {
    for (Index c = 0; c < m.cols(); ++c) {
        out << ',' << fmt::format("{}", m(row, c));
    }
}

Matrix rescale_unit(const Matrix& m) {
    const double lo = m.minCoeff();
    const double hi = m.maxCoeff();
    if (hi - lo <= 0.0) {
        return Matrix::Constant(m.rows(), m.cols(), 0.5);
    }
    return ((m.array() - lo) / (hi - lo)).matrix();
}

} // namespace

std::string target_domain_name(Index i) { return "T" + std::to_string(i + 1); }

void MultiDomainPopulation::validate() const {
    const Index n = size();
    const Index f = source.features.cols();
    if (regions < 2 || f != feature_length(regions)) {
        throw ValidationError(fmt::format("population: f={} does not match r={}", f, regions));
    }
    if (!std::is_sorted(subjects.begin(), subjects.end()) ||
        std::adjacent_find(subjects.begin(), subjects.end()) != subjects.end()) {
        throw ValidationError("population: subject ids must be unique and sorted");
    }
    auto check = [&](const DomainDataset& d) {
        if (d.features.rows() != n || d.features.cols() != f) {
            throw ValidationError(fmt::format("population: domain {} has shape {}x{}, expected {}x{}", d.domain,
                                              d.features.rows(), d.features.cols(), n, f));
        }
        if (d.similarity) {
            const Matrix& s = *d.similarity;
            if (s.rows() != n || s.cols() != n || s != s.transpose() || (s.array() < 0.0).any()) {
                throw ValidationError("population: similarity of " + d.domain + " must be symmetric, non-negative, n x n");
            }
        }
    };
    check(source);
    for (const auto& t : targets) {
        check(t);
    }
    if (!modes.empty() && static_cast<Index>(modes.size()) != n) {
        throw ValidationError("population: label count does not match subject count");
    }
}

MultiDomainPopulation MultiDomainPopulation::subset(const std::vector<Index>& rows) const {
    MultiDomainPopulation out;
    out.regions = regions;
    auto take = [&](const DomainDataset& d) {
        DomainDataset s{d.domain, Matrix(static_cast<Index>(rows.size()), d.features.cols()), std::nullopt};
        for (std::size_t k = 0; k < rows.size(); ++k) {
            s.features.row(static_cast<Index>(k)) = d.features.row(rows[k]);
        }
        return s;
    };
    for (Index r : rows) {
        if (r < 0 || r >= size()) {
            throw ValidationError("population subset: row out of range");
        }
        out.subjects.push_back(subjects[static_cast<std::size_t>(r)]);
        if (!modes.empty()) {
            out.modes.push_back(modes[static_cast<std::size_t>(r)]);
        }
    }
    out.source = take(source);
    for (const auto& t : targets) {
        out.targets.push_back(take(t));
    }
    return out;
}

Index MultiDomainPopulation::find(const std::string& id) const {
    auto it = std::lower_bound(subjects.begin(), subjects.end(), id);
    if (it == subjects.end() || *it != id) {
        return -1;
    }
    return static_cast<Index>(it - subjects.begin());
}

MultiDomainPopulation load_population(const std::string& path, Index regions, Index targets) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open population file " + path);
    }
    Index f = 0;
    read_header(in, path, f);
    const Index r = regions > 0 ? regions : regions_for_features(f);
    if (f != feature_length(r)) {
        throw ValidationError(fmt::format("{}: header has {} features, r={} needs {}", path, f, r, feature_length(r)));
    }

    // subject -> domain index -> (features, line)
    std::map<std::string, std::map<long, std::pair<Vector, std::size_t>>> rows;
    long max_target = 0;
    std::string line;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") {
            continue;
        }
        auto fields = split_csv_line(line);
        if (static_cast<Index>(fields.size()) != f + 2) {
            throw ValidationError(fmt::format("{}: line {} has {} features, expected {}", path, line_no,
                                              static_cast<long>(fields.size()) - 2, f));
        }
        const long d = domain_index(fields[1]);
        if (d < 0) {
            throw ValidationError(fmt::format("{}: line {}: unknown domain '{}'", path, line_no, fields[1]));
        }
        if (targets > 0 && d > targets) {
            throw ValidationError(fmt::format("{}: line {}: domain {} exceeds m={}", path, line_no, fields[1], targets));
        }
        max_target = std::max(max_target, d);
        Vector v(f);
        for (Index k = 0; k < f; ++k) {
            v(k) = parse_double(fields[static_cast<std::size_t>(k + 2)], line_no);
        }
        auto& slot = rows[fields[0]];
        if (slot.count(d)) {
            throw ValidationError(fmt::format("{}: line {}: duplicate row for subject {} domain {}", path, line_no,
                                              fields[0], fields[1]));
        }
        slot.emplace(d, std::make_pair(std::move(v), line_no));
    }
    if (rows.empty()) {
        throw ValidationError(path + ": no data rows");
    }
    const long m = targets > 0 ? static_cast<long>(targets) : max_target;
    if (m < 1) {
        throw ValidationError(path + ": no target domains found");
    }

    std::vector<std::string> incomplete;
    for (const auto& [id, domains] : rows) {
        if (static_cast<long>(domains.size()) != m + 1) {
            incomplete.push_back(id);
        }
    }
    if (!incomplete.empty()) {
        std::string list;
        for (const auto& id : incomplete) {
            list += (list.empty() ? "" : ", ") + id;
        }
        throw ValidationError("incomplete pairing: subjects missing a domain: " + list);
    }

    MultiDomainPopulation pop;
    pop.regions = r;
    const auto n = static_cast<Index>(rows.size());
    pop.source = DomainDataset{"S", Matrix(n, f), std::nullopt};
    for (long i = 0; i < m; ++i) {
        pop.targets.push_back(DomainDataset{target_domain_name(i), Matrix(n, f), std::nullopt});
    }
    Index row = 0;
    std::size_t out_of_range = 0;
    for (const auto& [id, domains] : rows) {
        pop.subjects.push_back(id);
        for (const auto& [d, entry] : domains) {
            const Vector& v = entry.first;
            out_of_range += static_cast<std::size_t>(((v.array() < 0.0) || (v.array() > 1.0)).count());
            if (d == 0) {
                pop.source.features.row(row) = v.transpose();
            } else {
                pop.targets[static_cast<std::size_t>(d - 1)].features.row(row) = v.transpose();
            }
        }
        ++row;
    }
    if (out_of_range > 0) {
        logger()->warn("{}: {} feature values fall outside [0, 1]", path, out_of_range);
    }
    pop.validate();
    return pop;
}

void load_labels(MultiDomainPopulation& population, const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open labels file " + path);
    }
    std::string line;
    std::getline(in, line);
    if (split_csv_line(line) != std::vector<std::string>{"subject_id", "mode"}) {
        throw ValidationError(path + ": header must be subject_id,mode");
    }
    std::vector<int> modes(population.subjects.size(), -1);
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        auto fields = split_csv_line(line);
        if (fields.size() != 2) {
            throw ValidationError(fmt::format("{}: line {} malformed", path, line_no));
        }
        const Index row = population.find(fields[0]);
        if (row < 0) {
            continue;
        }
        modes[static_cast<std::size_t>(row)] = static_cast<int>(parse_double(fields[1], line_no));
    }
    if (std::find(modes.begin(), modes.end(), -1) != modes.end()) {
        throw ValidationError(path + ": labels missing for some subjects");
    }
    population.modes = std::move(modes);
}

void write_population_csv(const MultiDomainPopulation& population, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot write " + path);
    }
    const Index f = population.feature_count();
    out << "subject_id,domain";
    for (Index k = 0; k < f; ++k) {
        out << ",v_" << k;
    }
    out << '\n';
    for (Index i = 0; i < population.size(); ++i) {
        const auto& id = population.subjects[static_cast<std::size_t>(i)];
        out << id << ",S";
        write_matrix_row(out, population.source.features, i);
        out << '\n';
        for (const auto& t : population.targets) {
            out << id << ',' << t.domain;
            write_matrix_row(out, t.features, i);
            out << '\n';
        }
    }
}

void write_labels_csv(const MultiDomainPopulation& population, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot write " + path);
    }
    out << "subject_id,mode\n";
    for (std::size_t i = 0; i < population.subjects.size(); ++i) {
        out << population.subjects[i] << ',' << (population.modes.empty() ? 0 : population.modes[i]) << '\n';
    }
}

std::pair<std::vector<std::string>, Matrix> load_source_rows(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open source file " + path);
    }
    Index f = 0;
    read_header(in, path, f);
    std::map<std::string, Vector> rows;
    std::string line;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") {
            continue;
        }
        auto fields = split_csv_line(line);
        if (static_cast<Index>(fields.size()) != f + 2) {
            throw ValidationError(fmt::format("{}: line {} has wrong feature length", path, line_no));
        }
        if (fields[1] != "S") {
            continue;
        }
        Vector v(f);
        for (Index k = 0; k < f; ++k) {
            v(k) = parse_double(fields[static_cast<std::size_t>(k + 2)], line_no);
        }
        if (!rows.emplace(fields[0], std::move(v)).second) {
            throw ValidationError(fmt::format("{}: line {}: duplicate source row", path, line_no));
        }
    }
    if (rows.empty()) {
        throw ValidationError(path + ": no source (S) rows");
    }
    std::vector<std::string> ids;
    Matrix features(static_cast<Index>(rows.size()), f);
    Index i = 0;
    for (auto& [id, v] : rows) {
        ids.push_back(id);
        features.row(i++) = v.transpose();
    }
    return {std::move(ids), std::move(features)};
}

MultiDomainPopulation synthesize_population(const SynthesisParams& params) {
    if (params.regions < 3) {
        throw ValidationError("synthesize: r must be at least 3");
    }
    if (params.modes < 1 || params.targets < 1) {
        throw ValidationError("synthesize: need at least one mode and one target domain");
    }
    if (params.subjects < 2 * params.modes) {
        throw ValidationError("synthesize: need n >= 2 * modes");
    }
    if (!(params.noise >= 0.0) || !std::isfinite(params.noise)) {
        throw ValidationError("synthesize: noise level must be finite and non-negative");
    }

    const Index n = params.subjects;
    const Index r = params.regions;
    const Index f = feature_length(r);
    const Index m = params.targets;
    const Index modes = params.modes;
    std::mt19937_64 rng(params.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);

    // Mode centres 0.5 +- 0.25 per edge, resampled until every pair is at
    // least four within-mode radii apart.
    const double min_separation = 4.0 * kModeSpread * std::sqrt(static_cast<double>(f));
    std::vector<Vector> centres;
    for (int attempt = 0; static_cast<Index>(centres.size()) < modes; ++attempt) {
        if (attempt > 10000) {
            throw ValidationError("synthesize: cannot place that many separated modes for this r");
        }
        Vector c(f);
        for (Index k = 0; k < f; ++k) {
            c(k) = uniform(rng) < 0.5 ? 0.25 : 0.75;
        }
        bool ok = true;
        for (const auto& other : centres) {
            ok = ok && (c - other).norm() >= min_separation;
        }
        if (ok) {
            centres.push_back(std::move(c));
        }
    }

    // Per (mode, domain) maps: t = sigmoid(A (x - 0.5) + b).
    struct Map {
        Matrix gain;
        Vector offset;
    };
    std::vector<std::vector<Map>> maps(static_cast<std::size_t>(modes));
    for (Index k = 0; k < modes; ++k) {
        for (Index i = 0; i < m; ++i) {
            Map map;
            const double diagonal = 2.0 + 2.0 * uniform(rng);
            map.gain = Matrix(f, f);
            for (Index a = 0; a < f; ++a) {
                for (Index b = 0; b < f; ++b) {
                    map.gain(a, b) = 0.3 * normal(rng) / std::sqrt(static_cast<double>(f));
                }
                map.gain(a, a) += diagonal;
            }
            map.offset = Vector(f);
            for (Index a = 0; a < f; ++a) {
                map.offset(a) = 0.5 * normal(rng);
            }
            maps[static_cast<std::size_t>(k)].push_back(std::move(map));
        }
    }

    std::vector<int> labels(static_cast<std::size_t>(n));
    for (Index s = 0; s < n; ++s) {
        labels[static_cast<std::size_t>(s)] = static_cast<int>(s % modes);
    }
    std::shuffle(labels.begin(), labels.end(), rng);

    Matrix source(n, f);
    std::vector<Matrix> target(static_cast<std::size_t>(m), Matrix(n, f));
    for (Index s = 0; s < n; ++s) {
        const auto k = static_cast<std::size_t>(labels[static_cast<std::size_t>(s)]);
        Vector x(f);
        for (Index a = 0; a < f; ++a) {
            x(a) = centres[k](a) + kModeSpread * normal(rng);
        }
        source.row(s) = x.transpose();
        const Vector centred = (x.array() - 0.5).matrix();
        for (Index i = 0; i < m; ++i) {
            const Map& map = maps[k][static_cast<std::size_t>(i)];
            Vector z = map.gain * centred + map.offset;
            for (Index a = 0; a < f; ++a) {
                double t = 1.0 / (1.0 + std::exp(-z(a)));
                if (params.noise > 0.0) {
                    t += params.noise * normal(rng);
                }
                target[static_cast<std::size_t>(i)](s, a) = t;
            }
        }
    }

    MultiDomainPopulation pop;
    pop.regions = r;
    const int width = std::max<int>(3, static_cast<int>(std::to_string(n - 1).size()));
    for (Index s = 0; s < n; ++s) {
        pop.subjects.push_back(fmt::format("s{:0{}}", s, width));
    }
    pop.source = DomainDataset{"S", rescale_unit(source), std::nullopt};
    for (Index i = 0; i < m; ++i) {
        pop.targets.push_back(DomainDataset{target_domain_name(i), rescale_unit(target[static_cast<std::size_t>(i)]), std::nullopt});
    }
    pop.modes = std::move(labels);
    pop.validate();
    return pop;
}

std::pair<MultiDomainPopulation, MultiDomainPopulation> split_train_test(const MultiDomainPopulation& population,
                                                                          double fraction, std::uint64_t seed) {
    if (!(fraction > 0.0 && fraction < 1.0)) {
        throw ValidationError("split: fraction must lie in (0, 1)");
    }
    const Index n = population.size();
    const auto n_train = static_cast<Index>(std::llround(fraction * static_cast<double>(n)));
    if (n_train < 1 || n_train >= n) {
        throw ValidationError(fmt::format("split: fraction {} of n={} leaves an empty side", fraction, n));
    }
    std::vector<Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<Index> train(order.begin(), order.begin() + n_train);
    std::vector<Index> test(order.begin() + n_train, order.end());
    std::sort(train.begin(), train.end());
    std::sort(test.begin(), test.end());
    return {population.subset(train), population.subset(test)};
}

} // namespace mgg
