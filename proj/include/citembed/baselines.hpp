#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "citembed/corpus.hpp"
#include "citembed/embedding_store.hpp"
#include "citembed/text.hpp"

namespace citembed {

// Pluggable pretrained-style word vectors plus corpus word probabilities.
struct WordVectors {
    Eigen::Index dim = 0;
    std::map<std::string, Eigen::VectorXd> vectors;
    std::map<std::string, double> word_probability;

    bool has(const std::string& token) const { return vectors.count(token) != 0; }

    // p(w) = occurrence count / total tokens over title+abstract of the
    // given papers.
    void estimate_probabilities(const std::map<std::string, Paper>& papers,
                                const Tokenizer& tokenizer);

    // File format: one line per token, "token v1 ... vd".
    static WordVectors load(const std::string& path);
    void save(const std::string& path) const;
};

// Seeded random word vectors for tests and desk-scale runs.
WordVectors random_word_vectors(const std::set<std::string>& tokens, Eigen::Index dim,
                                uint64_t seed);

struct SIFConfig {
    double a = 1e-4;
    void validate() const;  // a in [1e-5, 1e-3]
};

inline constexpr Eigen::Index kRandomBaselineDim = 25;

// Zero-mean i.i.d. unit-variance 25-d vectors, one seeded stream per paper.
EmbeddingStore random_embeddings(const std::map<std::string, Paper>& papers, uint64_t seed);

enum class BowWeighting { uniform, tf, tfidf };

// Weighted sum of word vectors over title+abstract tokens. uniform counts
// each distinct token once; tf weights by occurrence count; tfidf by
// count * (ln(N/df) + 1). Out-of-vocabulary tokens are skipped; papers with
// no in-vocabulary token get a zero vector and a warning.
EmbeddingStore weighted_bow_embed(const std::map<std::string, Paper>& papers,
                                  const WordVectors& wv, BowWeighting weighting,
                                  const Tokenizer& tokenizer,
                                  std::vector<std::string>* warnings = nullptr);

// Weighted average with weight a/(a + p(w)) per token occurrence, then
// removal of each vector's projection onto the embedding matrix's first
// principal component. Exposes the component for the orthogonality check.
EmbeddingStore sif_embed(const std::map<std::string, Paper>& papers, const WordVectors& wv,
                         const SIFConfig& cfg, const Tokenizer& tokenizer,
                         Eigen::VectorXd* principal_out = nullptr);

// k-fold propagation with the symmetric degree-normalized self-looped
// adjacency of the undirected citation graph; k=0 returns the features
// unchanged.
EmbeddingStore sgc_propagate(const CitationGraph& graph, const EmbeddingStore& features, int k);

// Copy of the graph with the listed directed edges removed (for holding out
// evaluation citations before propagation or training).
CitationGraph remove_edges(const CitationGraph& graph,
                           const std::vector<std::pair<std::string, std::string>>& edges);

}  // namespace citembed
