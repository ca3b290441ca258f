#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "citembed/corpus.hpp"

namespace citembed {

enum class NegativeKind { hard, easy };

// One training example: the positive is cited by the query, the negative is
// not cited by it. Hard negatives additionally come from the query's
// citations-of-citations.
struct TrainingTriplet {
    std::string query;
    std::string positive;
    std::string negative;
    NegativeKind kind = NegativeKind::easy;

    bool operator==(const TrainingTriplet&) const = default;
};

struct SamplerConfig {
    int max_triplets_per_query = 5;
    int hard_per_query = 2;
    int easy_per_query = 3;
    uint64_t seed = 0;

    void validate() const;
};

struct SamplerReport {
    size_t queries_seen = 0;
    size_t queries_without_citations = 0;
    size_t queries_exhausted = 0;   // no negative candidate at all, skipped
    size_t hard_fallbacks = 0;      // hard slots filled by easy negatives
    size_t triplets_emitted = 0;
};

// Papers cited by q's citations but not by q itself (and not q):
//   { p : exists c in out(q) with p in out(c) } \ (out(q) u {q}).
std::set<std::string> hard_negative_pool(const Corpus& corpus, const std::string& query);

// Builds up to cfg.max_triplets_per_query triplets per query that has at
// least one out-citation. Positives are drawn without replacement from the
// query's citations (reused round-robin when the query has fewer citations
// than triplets). Hard negatives are drawn without replacement from the
// hard-negative pool; shortfalls fall back to easy negatives. Easy negatives
// are drawn uniformly from papers the query does not cite. Within a query no
// negative repeats. Each query consumes its own random stream derived from
// (cfg.seed, query id), so the output is deterministic and independent of
// iteration order.
std::vector<TrainingTriplet> build_triplets(const Corpus& corpus, const SamplerConfig& cfg,
                                            SamplerReport* report = nullptr);

// Triplet JSONL: {"query": str, "positive": str, "negative": str,
//                 "kind": "hard"|"easy"}.
void write_triplets(const std::string& path, const std::vector<TrainingTriplet>& triplets);
std::vector<TrainingTriplet> read_triplets(const std::string& path);

}  // namespace citembed
