#include "citembed.h"

#include <exception>
#include <string>

#include <json.hpp>

#include "citembed/config.hpp"
#include "citembed/corpus.hpp"
#include "citembed/embedding_store.hpp"
#include "citembed/error.hpp"
#include "citembed/evaluation.hpp"
#include "citembed/pipeline.hpp"
#include "citembed/trainer.hpp"

namespace {

thread_local std::string g_last_error;

ce_status status_of(const citembed::Error& e) {
    switch (e.kind()) {
        case citembed::ErrorKind::config: return CE_CONFIG_ERROR;
        case citembed::ErrorKind::data: return CE_DATA_ERROR;
        case citembed::ErrorKind::numeric: return CE_NUMERIC_ERROR;
    }
    return CE_ERROR;
}

// runs fn, translating exceptions into status codes + last-error text
template <class F>
ce_status guarded(F&& fn) {
    try {
        fn();
        g_last_error.clear();
        return CE_OK;
    } catch (const citembed::Error& e) {
        g_last_error = e.what();
        return status_of(e);
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return CE_ERROR;
    } catch (...) {
        g_last_error = "unknown error";
        return CE_ERROR;
    }
}

ce_status invalid_argument(const char* msg) {
    g_last_error = msg;
    return CE_CONFIG_ERROR;
}

citembed::RunConfig parse_config(const char* config_json) {
    if (!config_json) citembed::throw_config("config_json is null");
    nlohmann::json doc = nlohmann::json::parse(config_json, nullptr, false);
    if (doc.is_discarded()) citembed::throw_config("config_json is not valid JSON");
    return citembed::RunConfig::from_json(doc);
}

ce_status run(const char* stage, const char* config_json) {
    return guarded([&] { citembed::run_stage(stage, parse_config(config_json)); });
}

}  // namespace

struct ce_corpus {
    citembed::Corpus corpus;
};

struct ce_store {
    citembed::EmbeddingStore store;
};

extern "C" {

const char* ce_last_error(void) { return g_last_error.c_str(); }

const char* ce_version(void) { return "0.1.0"; }

ce_status ce_corpus_load(const char* path, ce_corpus** out) {
    if (!path || !out) return invalid_argument("ce_corpus_load: null argument");
    *out = nullptr;
    return guarded([&] { *out = new ce_corpus{citembed::Corpus::load(path)}; });
}

void ce_corpus_free(ce_corpus* corpus) { delete corpus; }

ce_status ce_corpus_stats(const ce_corpus* corpus, uint64_t* papers, uint64_t* edges) {
    if (!corpus) return invalid_argument("ce_corpus_stats: null corpus");
    if (papers) *papers = corpus->corpus.stats().papers;
    if (edges) *edges = corpus->corpus.stats().edges;
    return CE_OK;
}

ce_status ce_store_load(const char* path, ce_store** out) {
    if (!path || !out) return invalid_argument("ce_store_load: null argument");
    *out = nullptr;
    return guarded([&] { *out = new ce_store{citembed::load_store(path)}; });
}

void ce_store_free(ce_store* store) { delete store; }

ce_status ce_store_dim(const ce_store* store, int64_t* dim) {
    if (!store || !dim) return invalid_argument("ce_store_dim: null argument");
    *dim = int64_t(store->store.dim());
    return CE_OK;
}

ce_status ce_store_size(const ce_store* store, uint64_t* n) {
    if (!store || !n) return invalid_argument("ce_store_size: null argument");
    *n = store->store.size();
    return CE_OK;
}

ce_status ce_store_get(const ce_store* store, const char* id, double* buf, int64_t buf_len) {
    if (!store || !id || !buf) return invalid_argument("ce_store_get: null argument");
    return guarded([&] {
        const Eigen::VectorXd& v = store->store.at(id);
        if (buf_len != int64_t(v.size()))
            citembed::throw_data("ce_store_get: buffer length " + std::to_string(buf_len) +
                                 " does not match dimension " + std::to_string(v.size()));
        for (Eigen::Index i = 0; i < v.size(); ++i) buf[i] = v(i);
    });
}

ce_status ce_run_ingest(const char* config_json) { return run("ingest", config_json); }
ce_status ce_run_gen_synth(const char* config_json) { return run("gen-synth", config_json); }
ce_status ce_run_sample(const char* config_json) { return run("sample", config_json); }
ce_status ce_run_train(const char* config_json) { return run("train", config_json); }
ce_status ce_run_embed(const char* config_json) { return run("embed", config_json); }
ce_status ce_run_embed_baseline(const char* config_json) {
    return run("embed-baseline", config_json);
}
ce_status ce_run_eval(const char* config_json) { return run("eval", config_json); }
ce_status ce_run_analyze(const char* config_json) { return run("analyze", config_json); }
ce_status ce_run_report(const char* config_json) { return run("report", config_json); }

ce_status ce_run_stage(const char* stage, const char* config_json) {
    if (!stage) return invalid_argument("ce_run_stage: null stage");
    return run(stage, config_json);
}

ce_status ce_average_precision(const int32_t* relevance, int64_t n, double* out) {
    if (!relevance || !out || n < 1)
        return invalid_argument("ce_average_precision: bad arguments");
    return guarded([&] {
        std::vector<int> rel(relevance, relevance + n);
        *out = citembed::average_precision(rel);
    });
}

ce_status ce_ndcg(const int32_t* relevance, int64_t n, double* out) {
    if (!relevance || !out || n < 1) return invalid_argument("ce_ndcg: bad arguments");
    return guarded([&] {
        std::vector<int> rel(relevance, relevance + n);
        *out = citembed::ndcg(rel);
    });
}

ce_status ce_triplet_loss(const double* vq, const double* vp, const double* vn, int64_t dim,
                          double margin, double* out) {
    if (!vq || !vp || !vn || !out || dim < 1)
        return invalid_argument("ce_triplet_loss: bad arguments");
    return guarded([&] {
        Eigen::Map<const Eigen::VectorXd> q(vq, dim), p(vp, dim), n(vn, dim);
        *out = citembed::triplet_loss(q, p, n, margin);
    });
}

}  // extern "C"
