#pragma once

#include <map>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "citembed/corpus.hpp"
#include "citembed/encoder.hpp"
#include "citembed/text.hpp"

namespace citembed {

// Immutable-after-build map from paper id to a fixed-dimension vector. The
// dimension is fixed by the first insert.
class EmbeddingStore {
  public:
    EmbeddingStore() = default;
    explicit EmbeddingStore(Eigen::Index dim) : dim_(dim) {}

    void insert(const std::string& id, Eigen::VectorXd vec);
    const Eigen::VectorXd& at(const std::string& id) const;
    bool contains(const std::string& id) const { return vectors_.count(id) != 0; }

    Eigen::Index dim() const { return dim_; }
    size_t size() const { return vectors_.size(); }
    const std::map<std::string, Eigen::VectorXd>& vectors() const { return vectors_; }

  private:
    Eigen::Index dim_ = 0;
    std::map<std::string, Eigen::VectorXd> vectors_;
};

// Inference over the paper map alone — the citation graph is deliberately
// not part of the signature, so embeddings can never depend on it.
EmbeddingStore embed_corpus(const std::map<std::string, Paper>& papers,
                            const EncoderWeights& weights, const Vocabulary& vocab,
                            const FieldSet& fields, const Tokenizer& tokenizer);

void save_store(const EmbeddingStore& store, const std::string& path);
EmbeddingStore load_store(const std::string& path);

}  // namespace citembed
