#ifndef MGG_MGG_H
#define MGG_MGG_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define MGG_API __declspec(dllexport)
#else
#define MGG_API __attribute__((visibility("default")))
#endif

/*
 * Multi-target brain graph prediction.
 *
 * Every function returns an mgg_status. On failure the message is available
 * from mgg_last_error() until the next call on the same thread. Handles are
 * opaque and owned by the caller, who releases them with the matching _free.
 * Strings returned through char** are released with mgg_string_free.
 */

typedef enum mgg_status {
    MGG_OK = 0,
    MGG_ERR_VALIDATION = 1, /* malformed input, shapes, files or configs */
    MGG_ERR_NUMERICAL = 2,  /* NaN/Inf, degenerate data, no convergence */
    MGG_ERR_IO = 3,
    MGG_ERR_CONTRACT = 4,   /* API misuse */
    MGG_ERR_INTERNAL = 5
} mgg_status;

typedef struct mgg_population mgg_population;
typedef struct mgg_model mgg_model;

MGG_API const char* mgg_last_error(void);
MGG_API const char* mgg_version(void);
MGG_API void mgg_string_free(char* s);

/* Verbosity of diagnostics on stderr: 0 errors only, 1 warnings (default), 2 info. */
MGG_API void mgg_set_verbosity(int level);

/* ---- populations ---- */

MGG_API mgg_status mgg_population_synthesize(uint64_t seed, int64_t subjects, int64_t regions, int64_t targets,
                                             int64_t modes, double noise, mgg_population** out);

/* regions/targets of 0 are inferred. labels_path may be NULL. */
MGG_API mgg_status mgg_population_load(const char* csv_path, const char* labels_path, int64_t regions,
                                       int64_t targets, mgg_population** out);

/* labels_path may be NULL; it is ignored when the population has no labels. */
MGG_API mgg_status mgg_population_save(const mgg_population* population, const char* csv_path,
                                       const char* labels_path);

MGG_API mgg_status mgg_population_info(const mgg_population* population, int64_t* subjects, int64_t* regions,
                                       int64_t* targets);

MGG_API void mgg_population_free(mgg_population* population);

/* ---- configuration ---- */

/* Resolved configuration (defaults merged with the file) as key = value lines.
 * config_path may be NULL for the defaults. */
MGG_API mgg_status mgg_config_resolve(const char* config_path, char** resolved);

/* ---- training ---- */

typedef void (*mgg_progress_fn)(int64_t iteration, int64_t total, double loss_d, double loss_g, void* user_data);

typedef struct mgg_train_options {
    const char* config_path; /* NULL: defaults */
    const char* out_dir;     /* receives model.ckpt, loss_log.csv and periodic checkpoints */
    int dump_similarity;     /* non-zero: also write the learned similarities and clusters */
    mgg_progress_fn progress;
    void* user_data;
} mgg_train_options;

/* Splits the population by the configured train fraction and seed, trains on
 * the training side and records the held-out subject ids in the model. */
MGG_API mgg_status mgg_train(const mgg_population* population, const mgg_train_options* options,
                             mgg_model** out);

/* ---- models ---- */

MGG_API mgg_status mgg_model_load(const char* path, mgg_model** out);
MGG_API mgg_status mgg_model_save(const mgg_model* model, const char* path);
MGG_API mgg_status mgg_model_info(const mgg_model* model, int64_t* regions, int64_t* targets, int64_t* clusters,
                                  int64_t* iteration);
/* Training configuration recorded in the model, as key = value lines. */
MGG_API mgg_status mgg_model_config(const mgg_model* model, char** resolved);
MGG_API void mgg_model_free(mgg_model* model);

/* ---- prediction and evaluation ---- */

/* source: rows x features, row-major. out: targets * rows * features values,
 * domain-major then row-major. */
MGG_API mgg_status mgg_predict(const mgg_model* model, const double* source, int64_t rows, int64_t features,
                               double* out);

/* Reads the S rows of a population CSV and writes T1..Tm predictions in the same format. */
MGG_API mgg_status mgg_predict_csv(const mgg_model* model, const char* source_csv, const char* out_csv);

/* Scores the model on the held-out subjects recorded at training time (all
 * subjects when none were recorded). Writes <out_prefix>.txt and
 * <out_prefix>.csv; the text table is also returned when report_text is not NULL. */
MGG_API mgg_status mgg_evaluate(const mgg_model* model, const mgg_population* population, const char* out_prefix,
                                char** report_text);

/* One SVG loss curve per column of a loss-log CSV. */
MGG_API mgg_status mgg_report(const char* loss_log_csv, const char* out_dir, int64_t* plots_written);

#ifdef __cplusplus
}
#endif

#endif
