#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "citembed/embedding_store.hpp"

namespace citembed {

struct LabeledPoints {
    Eigen::MatrixXd points;            // n x 2
    std::vector<std::string> ids;      // row order
    std::vector<std::string> labels;   // gold topics
    std::vector<int> cluster_ids;      // -1 = noise
};

// Centered top-2 PCA coordinates, rows in sorted-id order (returned through
// ids_out when asked). Signs are fixed so each component's
// largest-magnitude loading is positive.
Eigen::MatrixXd project_2d(const EmbeddingStore& store,
                           std::vector<std::string>* ids_out = nullptr);

// Classic density clustering. Expansion visits points in index order, so
// the labeling is deterministic for a fixed point order. min_pts counts the
// point itself; noise is -1.
std::vector<int> dbscan(const Eigen::MatrixXd& points, double eps, int min_pts);

// Default-eps heuristic: lower median over points of the distance to the
// k-th nearest neighbor.
double median_knn_distance(const Eigen::MatrixXd& points, int k);

enum class NoiseHandling { exclude, singletons };

struct HCScore {
    double homogeneity = 0.0;
    double completeness = 0.0;
    bool single_gold_class = false;   // h = 1 by convention
    bool single_cluster = false;      // c = 1 by convention
};

// Entropy-based homogeneity h = 1 - H(gold|cluster)/H(gold) and
// completeness c = 1 - H(cluster|gold)/H(cluster). Noise points are either
// dropped from the contingency table or treated as singleton clusters.
HCScore homogeneity_completeness(const std::vector<std::string>& gold_labels,
                                 const std::vector<int>& cluster_ids,
                                 NoiseHandling noise = NoiseHandling::exclude);

struct AnalysisConfig {
    std::string projection = "pca";
    std::optional<double> eps;         // defaults to median 4-NN distance
    double eps_scale = 1.0;            // applied to the heuristic eps only
    int min_pts = 4;
    NoiseHandling noise = NoiseHandling::exclude;

    void validate() const;
};

struct AnalysisReport {
    std::string projection;
    double eps = 0.0;
    int min_pts = 0;
    int n_clusters = 0;
    int n_noise = 0;
    double homogeneity = 0.0;
    double completeness = 0.0;
};

// Projection + clustering + scoring in one pass. Every embedded id must
// carry a gold label. Fills points_out for external plotting when given.
AnalysisReport analyze_store(const EmbeddingStore& store,
                             const std::map<std::string, std::string>& gold_labels,
                             const AnalysisConfig& cfg, LabeledPoints* points_out = nullptr);

void write_analysis_report(const std::string& path, const AnalysisReport& report);
void write_points_csv(const std::string& path, const LabeledPoints& points);

}  // namespace citembed
