#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "citembed/analysis.hpp"
#include "citembed/baselines.hpp"
#include "citembed/encoder.hpp"
#include "citembed/evaluation.hpp"
#include "citembed/sampler.hpp"
#include "citembed/synth.hpp"
#include "citembed/text.hpp"
#include "citembed/trainer.hpp"

namespace citembed {

// One manifest drives the whole pipeline. Every sub-seed derives from the
// single global seed; unknown keys are rejected so typos fail fast.
struct RunConfig {
    uint64_t seed = 0;
    std::string output_dir = "out";
    std::string corpus_path;

    FieldSet fields;               // title is always on
    size_t vocab_min_count = 1;
    bool hard_negatives = true;    // off: every sampler slot becomes easy

    SamplerConfig sampler;
    EncoderConfig encoder;         // vocab_size/init_seed are filled at run time
    TrainerConfig trainer;

    std::string ranking_path;
    std::string classification_path;
    std::string clicks_path;
    std::string embeddings_path;   // defaults to <output_dir>/embeddings.jsonl

    AnalysisConfig analysis;
    std::string analysis_labels_path;  // defaults to classification_path
    PropensityEstimator estimator = PropensityEstimator::self_normalized;

    SynthConfig synth;

    std::string baseline_kind = "random";  // random | bow | sif | sgc
    std::string word_vectors_path;         // empty: seeded random word vectors
    int word_vector_dim = 25;
    BowWeighting bow_weighting = BowWeighting::tf;
    SIFConfig sif;
    int sgc_k = 2;

    static RunConfig from_json(const nlohmann::json& doc);
    static RunConfig load(const std::string& path);
    nlohmann::ordered_json to_json() const;
};

// CITEMBED_SEED, CITEMBED_OUTPUT_DIR and CITEMBED_CORPUS override the file
// values (command-line flags override both; the CLI applies those itself).
void apply_env_overrides(RunConfig& cfg);

}  // namespace citembed
