#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "citembed/embedding_store.hpp"

namespace citembed {

// --- task inputs ---

struct RankingCandidate {
    std::string id;
    int rel = 0;  // binary relevance
};

struct RankingQuery {
    std::string query_id;
    std::vector<RankingCandidate> candidates;
};

struct RankingTask {
    std::vector<RankingQuery> queries;

    void validate() const;
    static RankingTask load(const std::string& path);
    void save(const std::string& path) const;
};

enum class Split { train, validation, test };

struct ClassificationExample {
    std::string paper_id;
    std::string label;
    Split split = Split::train;
};

struct ClassificationTask {
    std::vector<ClassificationExample> examples;

    void validate() const;
    static ClassificationTask load(const std::string& path);
    void save(const std::string& path) const;
};

struct ClickthroughEvent {
    // Optional extension over the on-disk contract: events carrying a
    // query id are re-ranked against the store; events without one are
    // scored in presented order.
    std::optional<std::string> query_id;
    std::vector<std::string> candidates;
    int clicked_index = 0;
    double propensity = 1.0;
};

struct ClickthroughLog {
    std::vector<ClickthroughEvent> events;

    void validate() const;
    static ClickthroughLog load(const std::string& path);
    void save(const std::string& path) const;
};

// --- ranking metrics ---

// Ascending L2 distance to the query embedding, ties by lexicographic id.
std::vector<std::string> rank_candidates(const EmbeddingStore& store, const std::string& query_id,
                                         const std::vector<std::string>& candidate_ids);

// Mean over relevant positions i (1-based) of precision@i; 0 when nothing
// is relevant.
double average_precision(const std::vector<int>& relevance_in_rank_order);

// Binary-gain DCG with discount 1/log2(i+1), normalized by the ideal
// ordering. Requires at least one relevant item.
double ndcg(const std::vector<int>& relevance_in_rank_order);

struct RankingMetrics {
    double map = 0.0;   // fractions in [0, 1]; reports scale them by 100
    double ndcg = 0.0;
};

RankingMetrics evaluate_ranking_task(const EmbeddingStore& store, const RankingTask& task);

// --- classification ---

// Macro F1 over the provided class set; a class with no true and no
// predicted members scores 0 by convention.
double macro_f1(const std::vector<std::string>& gold, const std::vector<std::string>& predicted,
                const std::vector<std::string>& classes);

struct LinearClassifier {
    std::vector<std::string> classes;  // sorted; row i of weights scores classes[i]
    Eigen::MatrixXd weights;           // n_classes x dim
    Eigen::VectorXd bias;              // n_classes

    std::string predict(const Eigen::VectorXd& x) const;
};

struct ClassificationResult {
    LinearClassifier classifier;
    double best_c = 0.0;
    double validation_f1 = 0.0;
    double test_macro_f1 = 0.0;
};

// One-vs-rest L2-regularized logistic regression on train embeddings;
// C picked from a powers-of-10 grid by validation macro-F1 (ties favor the
// smaller C); test macro-F1 reported.
ClassificationResult train_linear_classifier(const EmbeddingStore& store,
                                             const ClassificationTask& task);

// --- propensity-adjusted recommendation metrics ---

enum class PropensityEstimator { self_normalized, plain };

struct PropensityMetrics {
    double p_at_1_hat = 0.0;
    double ndcg_hat = 0.0;
};

// Store-based variant: events with a query id re-rank their candidates by
// embedding distance; the rest keep their presented order.
PropensityMetrics propensity_adjusted_metrics(
    const EmbeddingStore& store, const ClickthroughLog& log,
    PropensityEstimator estimator = PropensityEstimator::self_normalized);

// Score-based variant: scores[e][i] scores event e's candidate i, ranked by
// descending score (ties by lexicographic id).
PropensityMetrics propensity_adjusted_metrics(
    const std::vector<std::vector<double>>& scores, const ClickthroughLog& log,
    PropensityEstimator estimator = PropensityEstimator::self_normalized);

// Table-style presentation: value scaled by 100 and rounded to one decimal.
double table_score(double fraction);

}  // namespace citembed
