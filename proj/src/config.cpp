#include "citembed/config.hpp"

#include <cstdlib>
#include <set>

#include "citembed/error.hpp"
#include "citembed/jsonl.hpp"

namespace citembed {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

// strict object walker: every consumed key is recorded, leftovers are
// config errors
class ObjectReader {
  public:
    ObjectReader(const json& doc, std::string where) : doc_(doc), where_(std::move(where)) {
        if (!doc.is_object()) throw_config(where_ + " must be a JSON object");
    }

    ~ObjectReader() = default;

    template <class T>
    void get(const char* key, T& out) {
        if (!doc_.contains(key)) {
            seen_.insert(key);
            return;
        }
        seen_.insert(key);
        try {
            out = doc_.at(key).get<T>();
        } catch (const json::exception&) {
            throw_config(where_ + "." + key + " has the wrong type");
        }
    }

    bool has(const char* key) {
        seen_.insert(key);
        return doc_.contains(key);
    }

    const json& sub(const char* key) {
        seen_.insert(key);
        return doc_.at(key);
    }

    void finish() const {
        for (auto it = doc_.begin(); it != doc_.end(); ++it)
            if (!seen_.count(it.key()))
                throw_config("unknown config key " + where_ + "." + it.key());
    }

  private:
    const json& doc_;
    std::string where_;
    std::set<std::string> seen_;
};

}  // namespace

RunConfig RunConfig::from_json(const json& doc) {
    RunConfig cfg;
    ObjectReader top(doc, "config");
    top.get("seed", cfg.seed);
    top.get("output_dir", cfg.output_dir);
    top.get("corpus", cfg.corpus_path);
    top.get("vocab_min_count", cfg.vocab_min_count);
    top.get("hard_negatives", cfg.hard_negatives);

    if (top.has("fields")) {
        ObjectReader r(top.sub("fields"), "config.fields");
        r.get("abstract", cfg.fields.abstract);
        r.get("venue", cfg.fields.venue);
        r.get("authors", cfg.fields.authors);
        r.finish();
    }
    if (top.has("sampler")) {
        ObjectReader r(top.sub("sampler"), "config.sampler");
        r.get("max_triplets_per_query", cfg.sampler.max_triplets_per_query);
        r.get("hard_per_query", cfg.sampler.hard_per_query);
        r.get("easy_per_query", cfg.sampler.easy_per_query);
        r.finish();
    }
    if (top.has("encoder")) {
        ObjectReader r(top.sub("encoder"), "config.encoder");
        r.get("layers", cfg.encoder.layers);
        r.get("heads", cfg.encoder.heads);
        r.get("hidden_dim", cfg.encoder.hidden_dim);
        r.get("feedforward_dim", cfg.encoder.feedforward_dim);
        r.get("max_sequence_length", cfg.encoder.max_sequence_length);
        r.finish();
    }
    if (top.has("trainer")) {
        ObjectReader r(top.sub("trainer"), "config.trainer");
        r.get("margin", cfg.trainer.margin);
        r.get("peak_lr", cfg.trainer.peak_lr);
        r.get("warmup_cut_fraction", cfg.trainer.warmup_cut_fraction);
        r.get("epochs", cfg.trainer.epochs);
        r.get("micro_batch", cfg.trainer.micro_batch);
        r.get("grad_accumulation", cfg.trainer.grad_accumulation);
        r.get("adam_beta1", cfg.trainer.adam_beta1);
        r.get("adam_beta2", cfg.trainer.adam_beta2);
        r.get("adam_eps", cfg.trainer.adam_eps);
        r.finish();
    }
    if (top.has("tasks")) {
        ObjectReader r(top.sub("tasks"), "config.tasks");
        r.get("ranking", cfg.ranking_path);
        r.get("classification", cfg.classification_path);
        r.get("clicks", cfg.clicks_path);
        r.finish();
    }
    top.get("embeddings", cfg.embeddings_path);
    if (top.has("analysis")) {
        ObjectReader r(top.sub("analysis"), "config.analysis");
        if (r.has("eps")) {
            double eps = 0.0;
            r.get("eps", eps);
            cfg.analysis.eps = eps;
        }
        r.get("eps_scale", cfg.analysis.eps_scale);
        r.get("min_pts", cfg.analysis.min_pts);
        std::string noise = "exclude";
        r.get("noise", noise);
        if (noise == "exclude")
            cfg.analysis.noise = NoiseHandling::exclude;
        else if (noise == "singletons")
            cfg.analysis.noise = NoiseHandling::singletons;
        else
            throw_config("config.analysis.noise must be \"exclude\" or \"singletons\"");
        r.get("labels", cfg.analysis_labels_path);
        r.finish();
    }
    if (top.has("propensity_estimator")) {
        std::string est;
        top.get("propensity_estimator", est);
        if (est == "self_normalized")
            cfg.estimator = PropensityEstimator::self_normalized;
        else if (est == "plain")
            cfg.estimator = PropensityEstimator::plain;
        else
            throw_config("config.propensity_estimator must be \"self_normalized\" or \"plain\"");
    }
    if (top.has("synth")) {
        ObjectReader r(top.sub("synth"), "config.synth");
        r.get("clusters", cfg.synth.clusters);
        r.get("papers", cfg.synth.papers);
        r.get("ranking_queries", cfg.synth.ranking_queries);
        r.get("relevant_per_query", cfg.synth.relevant_per_query);
        r.get("irrelevant_per_query", cfg.synth.irrelevant_per_query);
        r.get("click_events", cfg.synth.click_events);
        r.get("click_pool", cfg.synth.click_pool);
        r.finish();
    }
    if (top.has("baseline")) {
        ObjectReader r(top.sub("baseline"), "config.baseline");
        r.get("kind", cfg.baseline_kind);
        r.get("word_vectors", cfg.word_vectors_path);
        r.get("word_vector_dim", cfg.word_vector_dim);
        std::string weighting = "tf";
        r.get("weighting", weighting);
        if (weighting == "uniform")
            cfg.bow_weighting = BowWeighting::uniform;
        else if (weighting == "tf")
            cfg.bow_weighting = BowWeighting::tf;
        else if (weighting == "tf-idf")
            cfg.bow_weighting = BowWeighting::tfidf;
        else
            throw_config("config.baseline.weighting must be \"uniform\", \"tf\" or \"tf-idf\"");
        r.get("sif_a", cfg.sif.a);
        r.get("sgc_k", cfg.sgc_k);
        r.finish();
        const std::set<std::string> kinds{"random", "bow", "sif", "sgc"};
        if (!kinds.count(cfg.baseline_kind))
            throw_config("config.baseline.kind must be one of random, bow, sif, sgc");
    }
    top.finish();

    // single global seed feeds every stage
    cfg.sampler.seed = cfg.seed;
    cfg.encoder.init_seed = cfg.seed;
    cfg.trainer.seed = cfg.seed;
    cfg.synth.seed = cfg.seed;
    return cfg;
}

RunConfig RunConfig::load(const std::string& path) {
    return from_json(read_json_file(path));
}

nlohmann::ordered_json RunConfig::to_json() const {
    ordered_json doc;
    doc["seed"] = seed;
    doc["output_dir"] = output_dir;
    doc["corpus"] = corpus_path;
    doc["vocab_min_count"] = vocab_min_count;
    doc["hard_negatives"] = hard_negatives;
    doc["fields"] = {{"abstract", fields.abstract},
                     {"venue", fields.venue},
                     {"authors", fields.authors}};
    doc["sampler"] = {{"max_triplets_per_query", sampler.max_triplets_per_query},
                      {"hard_per_query", sampler.hard_per_query},
                      {"easy_per_query", sampler.easy_per_query}};
    doc["encoder"] = {{"layers", encoder.layers},
                      {"heads", encoder.heads},
                      {"hidden_dim", encoder.hidden_dim},
                      {"feedforward_dim", encoder.feedforward_dim},
                      {"max_sequence_length", encoder.max_sequence_length}};
    doc["trainer"] = {{"margin", trainer.margin},
                      {"peak_lr", trainer.peak_lr},
                      {"warmup_cut_fraction", trainer.warmup_cut_fraction},
                      {"epochs", trainer.epochs},
                      {"micro_batch", trainer.micro_batch},
                      {"grad_accumulation", trainer.grad_accumulation},
                      {"adam_beta1", trainer.adam_beta1},
                      {"adam_beta2", trainer.adam_beta2},
                      {"adam_eps", trainer.adam_eps}};
    doc["tasks"] = {{"ranking", ranking_path},
                    {"classification", classification_path},
                    {"clicks", clicks_path}};
    doc["embeddings"] = embeddings_path;
    ordered_json an;
    if (analysis.eps) an["eps"] = *analysis.eps;
    an["eps_scale"] = analysis.eps_scale;
    an["min_pts"] = analysis.min_pts;
    an["noise"] = analysis.noise == NoiseHandling::exclude ? "exclude" : "singletons";
    an["labels"] = analysis_labels_path;
    doc["analysis"] = an;
    doc["propensity_estimator"] =
        estimator == PropensityEstimator::self_normalized ? "self_normalized" : "plain";
    doc["synth"] = {{"clusters", synth.clusters},
                    {"papers", synth.papers},
                    {"ranking_queries", synth.ranking_queries},
                    {"relevant_per_query", synth.relevant_per_query},
                    {"irrelevant_per_query", synth.irrelevant_per_query},
                    {"click_events", synth.click_events},
                    {"click_pool", synth.click_pool}};
    const char* weighting = bow_weighting == BowWeighting::uniform ? "uniform"
                            : bow_weighting == BowWeighting::tf    ? "tf"
                                                                   : "tf-idf";
    doc["baseline"] = {{"kind", baseline_kind},
                       {"word_vectors", word_vectors_path},
                       {"word_vector_dim", word_vector_dim},
                       {"weighting", weighting},
                       {"sif_a", sif.a},
                       {"sgc_k", sgc_k}};
    return doc;
}

void apply_env_overrides(RunConfig& cfg) {
    if (const char* v = std::getenv("CITEMBED_SEED")) {
        try {
            size_t pos = 0;
            cfg.seed = std::stoull(v, &pos);
            if (pos != std::string(v).size()) throw std::invalid_argument(v);
        } catch (const std::exception&) {
            throw_config(std::string("CITEMBED_SEED is not an unsigned integer: ") + v);
        }
        cfg.sampler.seed = cfg.seed;
        cfg.encoder.init_seed = cfg.seed;
        cfg.trainer.seed = cfg.seed;
        cfg.synth.seed = cfg.seed;
    }
    if (const char* v = std::getenv("CITEMBED_OUTPUT_DIR")) cfg.output_dir = v;
    if (const char* v = std::getenv("CITEMBED_CORPUS")) cfg.corpus_path = v;
}

}  // namespace citembed
