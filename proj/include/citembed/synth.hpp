#pragma once

#include <cstdint>
#include <string>

#include "citembed/corpus.hpp"
#include "citembed/evaluation.hpp"

namespace citembed {

struct SynthConfig {
    int clusters = 3;
    int papers = 300;
    uint64_t seed = 0;
    int ranking_queries = 100;       // capped by the number of eligible queries
    int relevant_per_query = 5;
    int irrelevant_per_query = 25;
    int click_events = 60;
    int click_pool = 10;             // candidates per clickthrough event

    void validate() const;  // clusters >= 2, papers >= 10 * clusters
};

// A topical-cluster testbed: papers cite 3-8 random papers of their own
// cluster, titles/abstracts mix cluster topic words with per-paper signature
// words (abstracts quote the signatures of cited papers, so citation
// structure is recoverable from text alone). The ranking task holds out up
// to `relevant_per_query` cited papers per query; held-out edges are removed
// from the corpus so retrieval measures generalization, not memorized edges.
// Classification labels papers by cluster with interleaved 60/20/20 splits.
// Clickthrough events present one cited paper among uncited ones in random
// order with a position-bias propensity for the clicked slot.
struct SynthOutput {
    Corpus corpus;
    RankingTask ranking;
    ClassificationTask classification;
    ClickthroughLog clicks;
};

SynthOutput generate_synthetic_corpus(const SynthConfig& cfg);

}  // namespace citembed
