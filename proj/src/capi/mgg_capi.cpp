#include "mgg/mgg.h"

#include <cstring>
#include <exception>
#include <filesystem>
#include <fstream>
#include <new>
#include <sstream>
#include <string>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "core/error.hpp"
#include "core/log.hpp"
#include "evaluation/metrics.hpp"
#include "evaluation/plots.hpp"
#include "nn/model_set.hpp"
#include "population/population.hpp"
#include "training/trainer.hpp"

struct mgg_population {
    mgg::MultiDomainPopulation data;
};

struct mgg_model {
    mgg::nn::Checkpoint checkpoint;
};

namespace {

thread_local std::string last_error;

template <typename F>
mgg_status guarded(F&& body) {
    try {
        body();
        last_error.clear();
        return MGG_OK;
    } catch (const mgg::NumericalError& e) {
        last_error = e.what();
        return MGG_ERR_NUMERICAL;
    } catch (const mgg::ValidationError& e) {
        last_error = e.what();
        return MGG_ERR_VALIDATION;
    } catch (const mgg::IoError& e) {
        last_error = e.what();
        return MGG_ERR_IO;
    } catch (const mgg::ContractError& e) {
        last_error = e.what();
        return MGG_ERR_CONTRACT;
    } catch (const std::bad_alloc&) {
        last_error = "out of memory";
        return MGG_ERR_INTERNAL;
    } catch (const std::exception& e) {
        last_error = e.what();
        return MGG_ERR_INTERNAL;
    } catch (...) {
        last_error = "unknown error";
        return MGG_ERR_INTERNAL;
    }
}

void require(const void* p, const char* what) {
    if (!p) {
        throw mgg::ContractError(std::string(what) + " must not be NULL");
    }
}

char* copy_string(const std::string& s) {
    char* out = new char[s.size() + 1];
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

void ensure_parent(const std::string& path) {
    const auto parent = std::filesystem::path(path).parent_path();
    if (parent.empty()) {
        return;
    }
    std::error_code ec;
    std::filesystem::create_directories(parent, ec);
    if (ec) {
        throw mgg::IoError("cannot create directory " + parent.string() + ": " + ec.message());
    }
}

void write_text(const std::string& path, const std::string& text) {
    ensure_parent(path);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw mgg::IoError("cannot write " + path);
    }
    out << text;
    if (!out) {
        throw mgg::IoError("failed while writing " + path);
    }
}

std::string join_config(const std::string& rendered) {
    std::string out;
    std::istringstream in(rendered);
    for (std::string line; std::getline(in, line);) {
        out += (out.empty() ? "" : "; ") + line;
    }
    return out;
}

std::string split_config(const std::string& joined) {
    std::string out;
    std::size_t start = 0;
    while (start <= joined.size()) {
        const auto sep = joined.find("; ", start);
        out += joined.substr(start, sep == std::string::npos ? std::string::npos : sep - start) + "\n";
        if (sep == std::string::npos) {
            break;
        }
        start = sep + 2;
    }
    return out;
}

std::string meta(const mgg::nn::Checkpoint& c, const std::string& key) {
    auto it = c.metadata.find(key);
    return it == c.metadata.end() ? std::string() : it->second;
}

std::string matrix_csv(const mgg::Matrix& m) {
    std::string out;
    for (mgg::Index i = 0; i < m.rows(); ++i) {
        for (mgg::Index j = 0; j < m.cols(); ++j) {
            out += fmt::format("{}{}", j ? "," : "", m(i, j));
        }
        out += '\n';
    }
    return out;
}

} // namespace

extern "C" {

const char* mgg_last_error(void) { return last_error.c_str(); }

const char* mgg_version(void) { return "1.0.0"; }

void mgg_string_free(char* s) { delete[] s; }

void mgg_set_verbosity(int level) {
    const auto lvl = level <= 0 ? spdlog::level::err : level == 1 ? spdlog::level::warn : spdlog::level::info;
    mgg::logger()->set_level(lvl);
}

mgg_status mgg_population_synthesize(uint64_t seed, int64_t subjects, int64_t regions, int64_t targets,
                                     int64_t modes, double noise, mgg_population** out) {
    return guarded([&] {
        require(out, "out");
        *out = nullptr;
        mgg::SynthesisParams p;
        p.seed = seed;
        p.subjects = subjects;
        p.regions = regions;
        p.targets = targets;
        p.modes = modes;
        p.noise = noise;
        *out = new mgg_population{mgg::synthesize_population(p)};
    });
}

mgg_status mgg_population_load(const char* csv_path, const char* labels_path, int64_t regions, int64_t targets,
                               mgg_population** out) {
    return guarded([&] {
        require(csv_path, "csv_path");
        require(out, "out");
        *out = nullptr;
        mgg::MultiDomainPopulation pop = mgg::load_population(csv_path, regions, targets);
        if (labels_path) {
            mgg::load_labels(pop, labels_path);
        }
        *out = new mgg_population{std::move(pop)};
    });
}

mgg_status mgg_population_save(const mgg_population* population, const char* csv_path, const char* labels_path) {
    return guarded([&] {
        require(population, "population");
        require(csv_path, "csv_path");
        ensure_parent(csv_path);
        mgg::write_population_csv(population->data, csv_path);
        if (labels_path && !population->data.modes.empty()) {
            ensure_parent(labels_path);
            mgg::write_labels_csv(population->data, labels_path);
        }
    });
}

mgg_status mgg_population_info(const mgg_population* population, int64_t* subjects, int64_t* regions,
                               int64_t* targets) {
    return guarded([&] {
        require(population, "population");
        if (subjects) *subjects = population->data.size();
        if (regions) *regions = population->data.regions;
        if (targets) *targets = population->data.target_count();
    });
}

void mgg_population_free(mgg_population* population) { delete population; }

mgg_status mgg_config_resolve(const char* config_path, char** resolved) {
    return guarded([&] {
        require(resolved, "resolved");
        *resolved = nullptr;
        const mgg::train::TrainingConfig config =
            config_path ? mgg::train::load_config(config_path) : mgg::train::TrainingConfig{};
        *resolved = copy_string(mgg::train::render_config(config));
    });
}

mgg_status mgg_train(const mgg_population* population, const mgg_train_options* options, mgg_model** out) {
    return guarded([&] {
        require(population, "population");
        require(options, "options");
        require(options->out_dir, "options->out_dir");
        require(out, "out");
        *out = nullptr;
        const mgg::train::TrainingConfig config =
            options->config_path ? mgg::train::load_config(options->config_path) : mgg::train::TrainingConfig{};
        const std::string dir = options->out_dir;
        std::error_code ec;
        std::filesystem::create_directories(dir, ec);
        if (ec) {
            throw mgg::IoError("cannot create output directory " + dir + ": " + ec.message());
        }

        auto [train_side, test_side] = mgg::split_train_test(population->data, config.train_fraction, config.seed);
        std::map<std::string, std::string> metadata;
        const std::string rendered = mgg::train::render_config(config);
        metadata["config"] = join_config(rendered);
        metadata["config_digest"] = mgg::eval::digest(rendered);
        metadata["centrality_metric"] = mgg::centrality::metric_name(config.metric);
        std::string ids;
        for (const std::string& id : test_side.subjects) {
            ids += (ids.empty() ? "" : ",") + id;
        }
        metadata["test_subjects"] = ids;

        auto after = [&](const mgg::train::TrainingState& state) {
            const mgg::train::LossRecord& last = state.log.back();
            if (options->progress) {
                options->progress(state.iteration, config.iterations, last.d_total, last.g_total,
                                  options->user_data);
            }
            if (config.checkpoint_interval > 0 && state.iteration % config.checkpoint_interval == 0 &&
                state.iteration < config.iterations) {
                mgg::nn::save_checkpoint(fmt::format("{}/checkpoint_{:06d}.ckpt", dir, state.iteration), state.model,
                                         state.iteration, metadata);
            }
        };
        mgg::train::TrainingState state = mgg::train::train(train_side, config, after);

        mgg::nn::save_checkpoint(dir + "/model.ckpt", state.model, state.iteration, metadata);
        mgg::train::write_loss_log(dir + "/loss_log.csv", state.log);
        if (options->dump_similarity) {
            write_text(dir + "/similarity_S.csv", matrix_csv(state.source_similarity));
            for (std::size_t i = 0; i < state.target_similarity.size(); ++i) {
                write_text(fmt::format("{}/similarity_T{}.csv", dir, i + 1), matrix_csv(state.target_similarity[i]));
            }
            std::string clusters = "subject_id,cluster\n";
            for (std::size_t s = 0; s < state.cluster_of.size(); ++s) {
                clusters += fmt::format("{},{}\n", train_side.subjects[s], state.cluster_of[s]);
            }
            write_text(dir + "/clusters.csv", clusters);
        }
        *out = new mgg_model{mgg::nn::Checkpoint{std::move(state.model), state.iteration, std::move(metadata)}};
    });
}

mgg_status mgg_model_load(const char* path, mgg_model** out) {
    return guarded([&] {
        require(path, "path");
        require(out, "out");
        *out = nullptr;
        *out = new mgg_model{mgg::nn::load_checkpoint(path)};
    });
}

mgg_status mgg_model_save(const mgg_model* model, const char* path) {
    return guarded([&] {
        require(model, "model");
        require(path, "path");
        ensure_parent(path);
        mgg::nn::save_checkpoint(path, model->checkpoint.model, model->checkpoint.iteration,
                                 model->checkpoint.metadata);
    });
}

mgg_status mgg_model_info(const mgg_model* model, int64_t* regions, int64_t* targets, int64_t* clusters,
                          int64_t* iteration) {
    return guarded([&] {
        require(model, "model");
        const auto& m = model->checkpoint.model;
        if (regions) *regions = m.regions;
        if (targets) *targets = m.targets;
        if (clusters) *clusters = m.clusters;
        if (iteration) *iteration = model->checkpoint.iteration;
    });
}

mgg_status mgg_model_config(const mgg_model* model, char** resolved) {
    return guarded([&] {
        require(model, "model");
        require(resolved, "resolved");
        *resolved = nullptr;
        const std::string joined = meta(model->checkpoint, "config");
        *resolved = copy_string(joined.empty() ? std::string() : split_config(joined));
    });
}

void mgg_model_free(mgg_model* model) { delete model; }

mgg_status mgg_predict(const mgg_model* model, const double* source, int64_t rows, int64_t features, double* out) {
    return guarded([&] {
        require(model, "model");
        require(source, "source");
        require(out, "out");
        if (rows < 0 || features < 0) {
            throw mgg::ValidationError("predict: negative shape");
        }
        const mgg::Matrix x = Eigen::Map<const mgg::Matrix>(source, rows, features);
        const std::vector<mgg::Matrix> pred = mgg::train::predict(model->checkpoint.model, x);
        for (std::size_t i = 0; i < pred.size(); ++i) {
            Eigen::Map<mgg::Matrix>(out + static_cast<std::ptrdiff_t>(i) * rows * features, rows, features) = pred[i];
        }
    });
}

mgg_status mgg_predict_csv(const mgg_model* model, const char* source_csv, const char* out_csv) {
    return guarded([&] {
        require(model, "model");
        require(source_csv, "source_csv");
        require(out_csv, "out_csv");
        auto [ids, source] = mgg::load_source_rows(source_csv);
        const std::vector<mgg::Matrix> pred = mgg::train::predict(model->checkpoint.model, source);
        std::string text = "subject_id,domain";
        for (mgg::Index k = 0; k < model->checkpoint.model.features; ++k) {
            text += fmt::format(",v_{}", k);
        }
        text += '\n';
        for (std::size_t s = 0; s < ids.size(); ++s) {
            for (std::size_t i = 0; i < pred.size(); ++i) {
                text += ids[s] + "," + mgg::target_domain_name(static_cast<mgg::Index>(i));
                for (mgg::Index k = 0; k < pred[i].cols(); ++k) {
                    text += fmt::format(",{}", pred[i](static_cast<mgg::Index>(s), k));
                }
                text += '\n';
            }
        }
        write_text(out_csv, text);
    });
}

mgg_status mgg_evaluate(const mgg_model* model, const mgg_population* population, const char* out_prefix,
                        char** report_text) {
    return guarded([&] {
        require(model, "model");
        require(population, "population");
        if (report_text) {
            *report_text = nullptr;
        }
        const mgg::nn::Checkpoint& ckpt = model->checkpoint;
        const mgg::MultiDomainPopulation& data = population->data;
        if (data.regions != ckpt.model.regions || data.target_count() != ckpt.model.targets) {
            throw mgg::ValidationError(fmt::format("evaluate: population has r={}, m={} but the model has r={}, m={}",
                                                   data.regions, data.target_count(), ckpt.model.regions,
                                                   ckpt.model.targets));
        }
        std::vector<mgg::Index> rows;
        const std::string ids = meta(ckpt, "test_subjects");
        if (ids.empty()) {
            for (mgg::Index i = 0; i < data.size(); ++i) {
                rows.push_back(i);
            }
        } else {
            std::istringstream in(ids);
            for (std::string id; std::getline(in, id, ',');) {
                const mgg::Index row = data.find(id);
                if (row < 0) {
                    throw mgg::ValidationError("evaluate: held-out subject '" + id + "' is not in the population");
                }
                rows.push_back(row);
            }
        }
        const mgg::MultiDomainPopulation test = data.subset(rows);
        std::vector<mgg::Matrix> truth;
        for (const auto& t : test.targets) {
            truth.push_back(t.features);
        }
        mgg::eval::EvaluationReport report =
            mgg::eval::score_predictions(truth, mgg::train::predict(ckpt.model, test.source.features), data.regions);
        report.metadata["seed"] = std::to_string(ckpt.model.seed);
        report.metadata["config_digest"] = meta(ckpt, "config_digest");
        report.metadata["centrality_metric"] = meta(ckpt, "centrality_metric");
        report.metadata["iterations"] = std::to_string(ckpt.iteration);
        report.metadata["test_subjects"] = std::to_string(test.size());

        const std::string text = mgg::eval::render_text(report);
        if (out_prefix) {
            std::string prefix = out_prefix;
            for (const char* ext : {".txt", ".csv"}) {
                if (prefix.size() > 4 && prefix.compare(prefix.size() - 4, 4, ext) == 0) {
                    prefix.resize(prefix.size() - 4);
                }
            }
            write_text(prefix + ".txt", text);
            write_text(prefix + ".csv", mgg::eval::render_csv(report));
        }
        if (report_text) {
            *report_text = copy_string(text);
        }
    });
}

mgg_status mgg_report(const char* loss_log_csv, const char* out_dir, int64_t* plots_written) {
    return guarded([&] {
        require(loss_log_csv, "loss_log_csv");
        require(out_dir, "out_dir");
        const auto written = mgg::eval::write_loss_plots(mgg::eval::read_loss_log(loss_log_csv), out_dir);
        if (plots_written) {
            *plots_written = static_cast<int64_t>(written.size());
        }
    });
}

} // extern "C"
