/* C interface to the citembed pipeline. All functions return a ce_status;
 * on failure ce_last_error() describes the problem (thread-local). Handles
 * are opaque and must be released with the matching _free function. */
#ifndef CITEMBED_H
#define CITEMBED_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define CE_API __declspec(dllexport)
#else
#define CE_API __attribute__((visibility("default")))
#endif

/* Status values double as CLI exit codes. */
typedef enum ce_status {
    CE_OK = 0,
    CE_ERROR = 1,          /* unexpected failure */
    CE_CONFIG_ERROR = 2,
    CE_DATA_ERROR = 3,
    CE_NUMERIC_ERROR = 4
} ce_status;

/* Message of the most recent failure on this thread; empty string if none. */
CE_API const char* ce_last_error(void);

CE_API const char* ce_version(void);

/* --- corpus --- */

typedef struct ce_corpus ce_corpus;

CE_API ce_status ce_corpus_load(const char* path, ce_corpus** out);
CE_API void ce_corpus_free(ce_corpus* corpus);
CE_API ce_status ce_corpus_stats(const ce_corpus* corpus, uint64_t* papers, uint64_t* edges);

/* --- embedding stores --- */

typedef struct ce_store ce_store;

CE_API ce_status ce_store_load(const char* path, ce_store** out);
CE_API void ce_store_free(ce_store* store);
CE_API ce_status ce_store_dim(const ce_store* store, int64_t* dim);
CE_API ce_status ce_store_size(const ce_store* store, uint64_t* n);
/* Copies the vector for `id` into buf (buf_len must equal the store dim). */
CE_API ce_status ce_store_get(const ce_store* store, const char* id, double* buf,
                              int64_t buf_len);

/* --- pipeline stages ---
 * config_json is a full run-config document (the same format the CLI
 * accepts as a config file). Artifacts land in its output_dir. */

CE_API ce_status ce_run_ingest(const char* config_json);
CE_API ce_status ce_run_gen_synth(const char* config_json);
CE_API ce_status ce_run_sample(const char* config_json);
CE_API ce_status ce_run_train(const char* config_json);
CE_API ce_status ce_run_embed(const char* config_json);
CE_API ce_status ce_run_embed_baseline(const char* config_json);
CE_API ce_status ce_run_eval(const char* config_json);
CE_API ce_status ce_run_analyze(const char* config_json);
CE_API ce_status ce_run_report(const char* config_json);
/* Generic dispatch: stage is one of the command names above
 * ("gen-synth", "embed-baseline", ...). */
CE_API ce_status ce_run_stage(const char* stage, const char* config_json);

/* --- direct metric helpers --- */

/* Average precision / nDCG of a binary relevance list in rank order. */
CE_API ce_status ce_average_precision(const int32_t* relevance, int64_t n, double* out);
CE_API ce_status ce_ndcg(const int32_t* relevance, int64_t n, double* out);

/* Triplet margin loss over three equal-length vectors. */
CE_API ce_status ce_triplet_loss(const double* vq, const double* vp, const double* vn,
                                 int64_t dim, double margin, double* out);

#ifdef __cplusplus
}
#endif

#endif /* CITEMBED_H */
