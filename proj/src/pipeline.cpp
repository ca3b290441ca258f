#include "citembed/pipeline.hpp"

#include <filesystem>
#include <set>

#include <json.hpp>

#include "citembed/embedding_store.hpp"
#include "citembed/error.hpp"
#include "citembed/jsonl.hpp"
#include "citembed/pipeline.hpp"
#include "citembed/weights_io.hpp"

namespace citembed {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

std::string out_path(const RunConfig& cfg, const std::string& name) {
    fs::create_directories(cfg.output_dir);
    return (fs::path(cfg.output_dir) / name).string();
}

std::string require_corpus_path(const RunConfig& cfg) {
    if (!cfg.corpus_path.empty()) return cfg.corpus_path;
    // stages after ingest/gen-synth default to the pipeline's own corpus
    const std::string own = (fs::path(cfg.output_dir) / "corpus.jsonl").string();
    if (fs::exists(own)) return own;
    throw_config("no corpus configured: set config.corpus or run ingest/gen-synth first");
}

std::string embeddings_path(const RunConfig& cfg) {
    if (!cfg.embeddings_path.empty()) return cfg.embeddings_path;
    return (fs::path(cfg.output_dir) / "embeddings.jsonl").string();
}

SamplerConfig effective_sampler(const RunConfig& cfg) {
    SamplerConfig s = cfg.sampler;
    if (!cfg.hard_negatives) {
        // ablation: every slot becomes an easy negative
        s.easy_per_query = s.max_triplets_per_query;
        s.hard_per_query = 0;
    }
    return s;
}

std::map<std::string, std::string> load_labels(const std::string& path) {
    const ClassificationTask task = ClassificationTask::load(path);
    std::map<std::string, std::string> labels;
    for (const auto& e : task.examples) labels.emplace(e.paper_id, e.label);
    return labels;
}

}  // namespace

void run_ingest(const RunConfig& cfg) {
    if (cfg.corpus_path.empty()) throw_config("ingest needs config.corpus");
    const Corpus corpus = Corpus::load(cfg.corpus_path);
    corpus.save(out_path(cfg, "corpus.jsonl"));
    ordered_json stats{{"papers", corpus.stats().papers},
                       {"edges", corpus.stats().edges},
                       {"empty_abstracts", corpus.stats().empty_abstracts}};
    write_json_file(out_path(cfg, "corpus_stats.json"), stats);
}

void run_gen_synth(const RunConfig& cfg) {
    const SynthOutput out = generate_synthetic_corpus(cfg.synth);
    out.corpus.save(out_path(cfg, "corpus.jsonl"));
    out.ranking.save(out_path(cfg, "ranking.jsonl"));
    out.classification.save(out_path(cfg, "classification.jsonl"));
    out.clicks.save(out_path(cfg, "clicks.jsonl"));
}

void run_sample(const RunConfig& cfg) {
    const Corpus corpus = Corpus::load(require_corpus_path(cfg));
    SamplerReport report;
    const std::vector<TrainingTriplet> triplets =
        build_triplets(corpus, effective_sampler(cfg), &report);
    write_triplets(out_path(cfg, "triplets.jsonl"), triplets);
    ordered_json j{{"queries_seen", report.queries_seen},
                   {"queries_without_citations", report.queries_without_citations},
                   {"queries_exhausted", report.queries_exhausted},
                   {"hard_fallbacks", report.hard_fallbacks},
                   {"triplets_emitted", report.triplets_emitted}};
    write_json_file(out_path(cfg, "sampler_report.json"), j);
}

void run_train(const RunConfig& cfg) {
    const Corpus corpus = Corpus::load(require_corpus_path(cfg));
    const std::vector<TrainingTriplet> triplets =
        read_triplets((fs::path(cfg.output_dir) / "triplets.jsonl").string());

    const BasicTokenizer tokenizer;
    const Vocabulary vocab = Vocabulary::build(corpus, tokenizer, cfg.vocab_min_count);
    vocab.save(out_path(cfg, "vocab.txt"));

    EncoderConfig enc = cfg.encoder;
    enc.vocab_size = int(vocab.size());
    enc.init_seed = cfg.seed;

    const TrainResult result =
        train(corpus, triplets, enc, cfg.trainer, vocab, cfg.fields, tokenizer, nullptr,
              out_path(cfg, "checkpoint.bin"));
    save_weights(out_path(cfg, "weights.bin"), result.weights);
    write_train_log(out_path(cfg, "train_log.jsonl"), result.log);
}

void run_embed(const RunConfig& cfg) {
    const Corpus corpus = Corpus::load(require_corpus_path(cfg));
    const EncoderWeights weights =
        load_weights((fs::path(cfg.output_dir) / "weights.bin").string());
    const Vocabulary vocab =
        Vocabulary::load((fs::path(cfg.output_dir) / "vocab.txt").string());
    if (int(vocab.size()) != weights.config.vocab_size)
        throw_data("vocabulary size does not match the trained weights");
    const BasicTokenizer tokenizer;
    const EmbeddingStore store =
        embed_corpus(corpus.papers(), weights, vocab, cfg.fields, tokenizer);
    save_store(store, out_path(cfg, "embeddings.jsonl"));
}

void run_embed_baseline(const RunConfig& cfg) {
    const Corpus corpus = Corpus::load(require_corpus_path(cfg));
    const BasicTokenizer tokenizer;

    auto word_vectors = [&]() {
        WordVectors wv;
        if (!cfg.word_vectors_path.empty()) {
            wv = WordVectors::load(cfg.word_vectors_path);
        } else {
            // desk-scale stand-in for pretrained vectors
            std::set<std::string> tokens;
            for (const auto& [id, p] : corpus.papers()) {
                for (const auto& t : tokenizer.tokenize(p.title)) tokens.insert(t);
                for (const auto& t : tokenizer.tokenize(p.abstract)) tokens.insert(t);
            }
            wv = random_word_vectors(tokens, cfg.word_vector_dim, cfg.seed);
        }
        wv.estimate_probabilities(corpus.papers(), tokenizer);
        return wv;
    };

    EmbeddingStore store;
    if (cfg.baseline_kind == "random") {
        store = random_embeddings(corpus.papers(), cfg.seed);
    } else if (cfg.baseline_kind == "bow") {
        store = weighted_bow_embed(corpus.papers(), word_vectors(), cfg.bow_weighting, tokenizer);
    } else if (cfg.baseline_kind == "sif") {
        store = sif_embed(corpus.papers(), word_vectors(), cfg.sif, tokenizer);
    } else if (cfg.baseline_kind == "sgc") {
        const EmbeddingStore features =
            sif_embed(corpus.papers(), word_vectors(), cfg.sif, tokenizer);
        store = sgc_propagate(corpus.graph(), features, cfg.sgc_k);
    } else {
        throw_config("unknown baseline kind '" + cfg.baseline_kind + "'");
    }
    save_store(store, out_path(cfg, "embeddings_" + cfg.baseline_kind + ".jsonl"));
}

void run_eval(const RunConfig& cfg) {
    const EmbeddingStore store = load_store(embeddings_path(cfg));
    ordered_json doc;
    doc["embeddings"] = fs::path(embeddings_path(cfg)).filename().string();
    bool any = false;
    if (!cfg.ranking_path.empty()) {
        const RankingTask task = RankingTask::load(cfg.ranking_path);
        const RankingMetrics m = evaluate_ranking_task(store, task);
        doc["ranking"] = {{"map", table_score(m.map)}, {"ndcg", table_score(m.ndcg)}};
        any = true;
    }
    if (!cfg.classification_path.empty()) {
        const ClassificationTask task = ClassificationTask::load(cfg.classification_path);
        const ClassificationResult r = train_linear_classifier(store, task);
        doc["classification"] = {{"macro_f1", table_score(r.test_macro_f1)},
                                 {"best_c", r.best_c}};
        any = true;
    }
    if (!cfg.clicks_path.empty()) {
        const ClickthroughLog log = ClickthroughLog::load(cfg.clicks_path);
        const PropensityMetrics m = propensity_adjusted_metrics(store, log, cfg.estimator);
        doc["recommendation"] = {{"p_at_1_hat", table_score(m.p_at_1_hat)},
                                 {"ndcg_hat", table_score(m.ndcg_hat)}};
        any = true;
    }
    if (!any) throw_config("eval needs at least one task path in config.tasks");
    write_json_file(out_path(cfg, "eval.json"), doc);
}

void run_analyze(const RunConfig& cfg) {
    const EmbeddingStore store = load_store(embeddings_path(cfg));
    std::string labels_path = cfg.analysis_labels_path;
    if (labels_path.empty()) labels_path = cfg.classification_path;
    if (labels_path.empty()) throw_config("analyze needs config.analysis.labels");

    LabeledPoints points;
    const AnalysisReport report =
        analyze_store(store, load_labels(labels_path), cfg.analysis, &points);
    write_analysis_report(out_path(cfg, "analysis.json"), report);
    write_points_csv(out_path(cfg, "points.csv"), points);
}

void run_report(const RunConfig& cfg) {
    ordered_json doc;
    doc["seed"] = cfg.seed;
    doc["fields"] = {{"abstract", cfg.fields.abstract},
                     {"venue", cfg.fields.venue},
                     {"authors", cfg.fields.authors}};
    doc["hard_negatives"] = cfg.hard_negatives;
    bool any = false;
    const std::string eval_path = (fs::path(cfg.output_dir) / "eval.json").string();
    if (fs::exists(eval_path)) {
        doc["metrics"] = read_json_file(eval_path);
        any = true;
    }
    const std::string analysis_path = (fs::path(cfg.output_dir) / "analysis.json").string();
    if (fs::exists(analysis_path)) {
        doc["analysis"] = read_json_file(analysis_path);
        any = true;
    }
    if (!any) throw_config("report needs eval.json or analysis.json in the output directory");
    write_json_file(out_path(cfg, "report.json"), doc);
}

void run_stage(const std::string& name, const RunConfig& cfg) {
    if (name == "ingest")
        run_ingest(cfg);
    else if (name == "gen-synth")
        run_gen_synth(cfg);
    else if (name == "sample")
        run_sample(cfg);
    else if (name == "train")
        run_train(cfg);
    else if (name == "embed")
        run_embed(cfg);
    else if (name == "embed-baseline")
        run_embed_baseline(cfg);
    else if (name == "eval")
        run_eval(cfg);
    else if (name == "analyze")
        run_analyze(cfg);
    else if (name == "report")
        run_report(cfg);
    else
        throw_config("unknown command '" + name + "'");
}

}  // namespace citembed
