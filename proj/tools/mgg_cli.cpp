#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "mgg/mgg.h"

namespace {

int fail(mgg_status status) {
    std::cerr << "error: " << mgg_last_error() << "\n";
    return status == MGG_ERR_NUMERICAL ? 2 : 1;
}

void progress(int64_t iteration, int64_t total, double loss_d, double loss_g, void*) {
    const int64_t every = total >= 10 ? total / 10 : 1;
    if (iteration % every == 0 || iteration == total) {
        std::printf("iteration %lld/%lld  L_D=%.6g  L_G=%.6g\n", static_cast<long long>(iteration),
                    static_cast<long long>(total), loss_d, loss_g);
        std::fflush(stdout);
    }
}

struct Population {
    mgg_population* handle = nullptr;
    ~Population() { mgg_population_free(handle); }
};

struct Model {
    mgg_model* handle = nullptr;
    ~Model() { mgg_model_free(handle); }
};

struct Text {
    char* text = nullptr;
    ~Text() { mgg_string_free(text); }
};

mgg_status load_data_dir(const std::string& dir, Population& pop) {
    const std::string labels = dir + "/labels.csv";
    const bool has_labels = std::filesystem::exists(labels);
    return mgg_population_load((dir + "/population.csv").c_str(), has_labels ? labels.c_str() : nullptr, 0, 0,
                               &pop.handle);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-target brain graph prediction from a single source graph"};
    app.require_subcommand(1);
    app.failure_message(CLI::FailureMessage::help);
    int verbosity = 1;
    app.add_option("-v,--verbosity", verbosity, "0 errors, 1 warnings, 2 info")->check(CLI::Range(0, 2));

    auto* synth = app.add_subcommand("synth", "Write a synthetic multi-domain population");
    std::string synth_out;
    int64_t n = 40, r = 35, m = 2, modes = 2;
    double noise = 0.02;
    uint64_t synth_seed = 0;
    synth->add_option("--out", synth_out, "Output directory")->required();
    synth->add_option("--n", n, "Subjects");
    synth->add_option("--r", r, "Brain regions");
    synth->add_option("--m", m, "Target domains");
    synth->add_option("--modes", modes, "Planted modes");
    synth->add_option("--noise", noise, "Target noise level");
    synth->add_option("--seed", synth_seed, "Random seed");

    auto* train = app.add_subcommand("train", "Train on a population directory");
    std::string train_data, train_config, train_out;
    bool dump_similarity = false;
    train->add_option("--data", train_data, "Directory with population.csv (and labels.csv)")->required();
    train->add_option("--config", train_config, "key = value configuration file");
    train->add_option("--out", train_out, "Output directory")->required();
    train->add_flag("--dump-similarity", dump_similarity, "Also write learned similarities and clusters");

    auto* predict = app.add_subcommand("predict", "Predict target graphs for source graphs");
    std::string predict_model, predict_source, predict_out;
    predict->add_option("--model", predict_model, "Model checkpoint")->required();
    predict->add_option("--source", predict_source, "Population CSV; its S rows are used")->required();
    predict->add_option("--out", predict_out, "Output CSV")->required();

    auto* evaluate = app.add_subcommand("evaluate", "Score a model on its held-out subjects");
    std::string eval_model, eval_data, eval_out;
    evaluate->add_option("--model", eval_model, "Model checkpoint")->required();
    evaluate->add_option("--data", eval_data, "Directory with population.csv")->required();
    evaluate->add_option("--out", eval_out, "Report path prefix (.txt and .csv are written)")->required();

    auto* report = app.add_subcommand("report", "Plot a loss log as SVG files");
    std::string report_log, report_out;
    report->add_option("--losslog", report_log, "loss_log.csv from train")->required();
    report->add_option("--out", report_out, "Output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }
    mgg_set_verbosity(verbosity);

    if (*synth) {
        std::printf("synth: n = %lld, r = %lld, m = %lld, modes = %lld, noise = %g, seed = %llu\n",
                    static_cast<long long>(n), static_cast<long long>(r), static_cast<long long>(m),
                    static_cast<long long>(modes), noise, static_cast<unsigned long long>(synth_seed));
        Population pop;
        if (auto s = mgg_population_synthesize(synth_seed, n, r, m, modes, noise, &pop.handle); s != MGG_OK) {
            return fail(s);
        }
        const std::string csv = synth_out + "/population.csv";
        const std::string labels = synth_out + "/labels.csv";
        if (auto s = mgg_population_save(pop.handle, csv.c_str(), labels.c_str()); s != MGG_OK) {
            return fail(s);
        }
        std::printf("wrote %s and %s\n", csv.c_str(), labels.c_str());
        return 0;
    }

    if (*train) {
        const char* config = train_config.empty() ? nullptr : train_config.c_str();
        Text resolved;
        if (auto s = mgg_config_resolve(config, &resolved.text); s != MGG_OK) {
            return fail(s);
        }
        std::printf("resolved config:\n%s", resolved.text);
        Population pop;
        if (auto s = load_data_dir(train_data, pop); s != MGG_OK) {
            return fail(s);
        }
        mgg_train_options options{config, train_out.c_str(), dump_similarity ? 1 : 0, progress, nullptr};
        Model model;
        if (auto s = mgg_train(pop.handle, &options, &model.handle); s != MGG_OK) {
            return fail(s);
        }
        std::printf("wrote %s/model.ckpt and %s/loss_log.csv\n", train_out.c_str(), train_out.c_str());
        return 0;
    }

    if (*predict || *evaluate) {
        Model model;
        const std::string& path = *predict ? predict_model : eval_model;
        if (auto s = mgg_model_load(path.c_str(), &model.handle); s != MGG_OK) {
            return fail(s);
        }
        int64_t mr = 0, mm = 0, mc = 0, it = 0;
        mgg_model_info(model.handle, &mr, &mm, &mc, &it);
        Text resolved;
        if (auto s = mgg_model_config(model.handle, &resolved.text); s != MGG_OK) {
            return fail(s);
        }
        std::printf("model: r = %lld, m = %lld, c = %lld, iteration = %lld\nresolved config:\n%s",
                    static_cast<long long>(mr), static_cast<long long>(mm), static_cast<long long>(mc),
                    static_cast<long long>(it), resolved.text);
        if (*predict) {
            if (auto s = mgg_predict_csv(model.handle, predict_source.c_str(), predict_out.c_str()); s != MGG_OK) {
                return fail(s);
            }
            std::printf("wrote %s\n", predict_out.c_str());
            return 0;
        }
        Population pop;
        if (auto s = load_data_dir(eval_data, pop); s != MGG_OK) {
            return fail(s);
        }
        Text table;
        if (auto s = mgg_evaluate(model.handle, pop.handle, eval_out.c_str(), &table.text); s != MGG_OK) {
            return fail(s);
        }
        std::printf("%s", table.text);
        return 0;
    }

    if (*report) {
        std::printf("report: losslog = %s, out = %s\n", report_log.c_str(), report_out.c_str());
        int64_t written = 0;
        if (auto s = mgg_report(report_log.c_str(), report_out.c_str(), &written); s != MGG_OK) {
            return fail(s);
        }
        std::printf("wrote %lld plots to %s\n", static_cast<long long>(written), report_out.c_str());
        return 0;
    }
    return 1;
}
