#pragma once

#include <string>

#include "citembed/config.hpp"

namespace citembed {

// Pipeline stages. Each one reads its inputs (from config paths or the
// output directory), writes artifacts under cfg.output_dir, and throws
// Error on failure. Artifact names are fixed:
//   ingest         -> corpus.jsonl, corpus_stats.json
//   gen-synth      -> corpus.jsonl, ranking.jsonl, classification.jsonl,
//                     clicks.jsonl
//   sample         -> triplets.jsonl, sampler_report.json
//   train          -> vocab.txt, weights.bin, checkpoint.bin,
//                     train_log.jsonl
//   embed          -> embeddings.jsonl
//   embed-baseline -> embeddings_<kind>.jsonl
//   eval           -> eval.json
//   analyze        -> analysis.json, points.csv
//   report         -> report.json
void run_ingest(const RunConfig& cfg);
void run_gen_synth(const RunConfig& cfg);
void run_sample(const RunConfig& cfg);
void run_train(const RunConfig& cfg);
void run_embed(const RunConfig& cfg);
void run_embed_baseline(const RunConfig& cfg);
void run_eval(const RunConfig& cfg);
void run_analyze(const RunConfig& cfg);
void run_report(const RunConfig& cfg);

// Dispatch by stage name; unknown names are config errors.
void run_stage(const std::string& name, const RunConfig& cfg);

}  // namespace citembed
