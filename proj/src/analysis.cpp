#include "citembed/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include <Eigen/Dense>
#include <json.hpp>

#include "citembed/error.hpp"
#include "citembed/jsonl.hpp"

namespace citembed {

namespace {

// contingency-table entropies over already-densified label indices
double entropy(const std::vector<size_t>& counts, size_t total) {
    double h = 0.0;
    for (size_t c : counts) {
        if (c == 0) continue;
        const double p = double(c) / double(total);
        h -= p * std::log(p);
    }
    return h;
}

}  // namespace

Eigen::MatrixXd project_2d(const EmbeddingStore& store, std::vector<std::string>* ids_out) {
    if (store.size() < 3) throw_data("2D projection needs at least 3 vectors");
    const Eigen::Index n = Eigen::Index(store.size());
    Eigen::MatrixXd x(n, store.dim());
    std::vector<std::string> ids;
    ids.reserve(store.size());
    Eigen::Index row = 0;
    for (const auto& [id, vec] : store.vectors()) {
        x.row(row++) = vec.transpose();
        ids.push_back(id);
    }
    x.rowwise() -= x.colwise().mean();

    Eigen::MatrixXd cov = x.transpose() * x / double(n - 1);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
    if (solver.info() != Eigen::Success) throw_numeric("eigendecomposition failed");
    const Eigen::VectorXd& evals = solver.eigenvalues();  // ascending
    const Eigen::Index d = evals.size();
    if (d < 2 || evals(d - 1) <= 1e-12 * double(store.dim()))
        throw_data("embedding matrix is rank-degenerate; cannot project to 2D");

    Eigen::MatrixXd components(store.dim(), 2);
    components.col(0) = solver.eigenvectors().col(d - 1);
    components.col(1) = solver.eigenvectors().col(d - 2);
    // deterministic sign: the largest-magnitude loading of each component
    // points in the positive direction
    for (int c = 0; c < 2; ++c) {
        Eigen::Index arg = 0;
        components.col(c).cwiseAbs().maxCoeff(&arg);
        if (components(arg, c) < 0.0) components.col(c) = -components.col(c);
    }
    if (ids_out) *ids_out = std::move(ids);
    return x * components;
}

std::vector<int> dbscan(const Eigen::MatrixXd& points, double eps, int min_pts) {
    if (!(eps > 0.0)) throw_config("dbscan eps must be > 0");
    if (min_pts < 1) throw_config("dbscan min_pts must be >= 1");
    const Eigen::Index n = points.rows();
    constexpr int kUnvisited = -2, kNoise = -1;
    std::vector<int> label(size_t(n), kUnvisited);

    auto neighbors = [&](Eigen::Index p) {
        std::vector<Eigen::Index> out;
        for (Eigen::Index q = 0; q < n; ++q)
            if ((points.row(p) - points.row(q)).norm() <= eps) out.push_back(q);
        return out;  // includes p itself
    };

    int next_cluster = 0;
    for (Eigen::Index p = 0; p < n; ++p) {
        if (label[size_t(p)] != kUnvisited) continue;
        std::vector<Eigen::Index> nbrs = neighbors(p);
        if (int(nbrs.size()) < min_pts) {
            label[size_t(p)] = kNoise;
            continue;
        }
        const int cluster = next_cluster++;
        label[size_t(p)] = cluster;
        // breadth-first expansion in discovery order keeps results stable
        std::vector<Eigen::Index> queue(nbrs.begin(), nbrs.end());
        for (size_t qi = 0; qi < queue.size(); ++qi) {
            const Eigen::Index q = queue[qi];
            if (label[size_t(q)] == kNoise) label[size_t(q)] = cluster;  // border point
            if (label[size_t(q)] != kUnvisited) continue;
            label[size_t(q)] = cluster;
            std::vector<Eigen::Index> qn = neighbors(q);
            if (int(qn.size()) >= min_pts) queue.insert(queue.end(), qn.begin(), qn.end());
        }
    }
    return label;
}

double median_knn_distance(const Eigen::MatrixXd& points, int k) {
    const Eigen::Index n = points.rows();
    if (k < 1) throw_config("k must be >= 1");
    if (n <= k) throw_data("median k-NN distance needs more than k points");
    std::vector<double> kth;
    kth.reserve(size_t(n));
    std::vector<double> dists;
    for (Eigen::Index p = 0; p < n; ++p) {
        dists.clear();
        for (Eigen::Index q = 0; q < n; ++q)
            if (q != p) dists.push_back((points.row(p) - points.row(q)).norm());
        std::nth_element(dists.begin(), dists.begin() + (k - 1), dists.end());
        kth.push_back(dists[size_t(k - 1)]);
    }
    std::sort(kth.begin(), kth.end());
    return kth[(kth.size() - 1) / 2];  // lower median
}

HCScore homogeneity_completeness(const std::vector<std::string>& gold_labels,
                                 const std::vector<int>& cluster_ids, NoiseHandling noise) {
    if (gold_labels.empty() || gold_labels.size() != cluster_ids.size())
        throw_data("homogeneity/completeness needs equal-length non-empty label lists");

    // apply the noise policy, then densify both label spaces
    std::vector<std::string> gold;
    std::vector<int> clusters;
    int synthetic_id = 0;
    for (int c : cluster_ids) synthetic_id = std::max(synthetic_id, c + 1);
    for (size_t i = 0; i < gold_labels.size(); ++i) {
        if (cluster_ids[i] < 0) {
            if (noise == NoiseHandling::exclude) continue;
            gold.push_back(gold_labels[i]);
            clusters.push_back(synthetic_id++);  // each noise point is its own cluster
        } else {
            gold.push_back(gold_labels[i]);
            clusters.push_back(cluster_ids[i]);
        }
    }
    if (gold.empty()) throw_data("all points are noise; nothing to score");

    std::map<std::string, size_t> gold_index;
    std::map<int, size_t> cluster_index;
    for (const auto& g : gold) gold_index.emplace(g, gold_index.size());
    for (int c : clusters) cluster_index.emplace(c, cluster_index.size());
    const size_t ng = gold_index.size(), nk = cluster_index.size(), n = gold.size();

    std::vector<std::vector<size_t>> table(ng, std::vector<size_t>(nk, 0));
    std::vector<size_t> gold_counts(ng, 0), cluster_counts(nk, 0);
    for (size_t i = 0; i < n; ++i) {
        const size_t g = gold_index.at(gold[i]);
        const size_t k = cluster_index.at(clusters[i]);
        ++table[g][k];
        ++gold_counts[g];
        ++cluster_counts[k];
    }

    const double h_gold = entropy(gold_counts, n);
    const double h_cluster = entropy(cluster_counts, n);
    double h_gold_given_cluster = 0.0, h_cluster_given_gold = 0.0;
    for (size_t g = 0; g < ng; ++g) {
        for (size_t k = 0; k < nk; ++k) {
            const size_t c = table[g][k];
            if (c == 0) continue;
            const double p = double(c) / double(n);
            h_gold_given_cluster -= p * std::log(double(c) / double(cluster_counts[k]));
            h_cluster_given_gold -= p * std::log(double(c) / double(gold_counts[g]));
        }
    }

    HCScore score;
    score.single_gold_class = ng == 1;
    score.single_cluster = nk == 1;
    score.homogeneity = ng == 1 ? 1.0 : 1.0 - h_gold_given_cluster / h_gold;
    score.completeness = nk == 1 ? 1.0 : 1.0 - h_cluster_given_gold / h_cluster;
    // entropy arithmetic can drift a hair past the bounds
    score.homogeneity = std::min(1.0, std::max(0.0, score.homogeneity));
    score.completeness = std::min(1.0, std::max(0.0, score.completeness));
    return score;
}

void AnalysisConfig::validate() const {
    if (projection != "pca") throw_config("unknown projection '" + projection + "'");
    if (eps && !(*eps > 0.0)) throw_config("analysis eps must be > 0");
    if (!(eps_scale > 0.0)) throw_config("analysis eps_scale must be > 0");
    if (min_pts < 1) throw_config("analysis min_pts must be >= 1");
}

AnalysisReport analyze_store(const EmbeddingStore& store,
                             const std::map<std::string, std::string>& gold_labels,
                             const AnalysisConfig& cfg, LabeledPoints* points_out) {
    cfg.validate();
    std::vector<std::string> ids;
    Eigen::MatrixXd coords = project_2d(store, &ids);

    std::vector<std::string> labels;
    labels.reserve(ids.size());
    for (const auto& id : ids) {
        auto it = gold_labels.find(id);
        if (it == gold_labels.end()) throw_data("no gold label for embedded paper '" + id + "'");
        labels.push_back(it->second);
    }
    if (std::set<std::string>(labels.begin(), labels.end()).size() < 2)
        throw_data("scoring needs at least 2 distinct gold labels");

    const double eps =
        cfg.eps ? *cfg.eps : cfg.eps_scale * median_knn_distance(coords, 4);
    std::vector<int> clusters = dbscan(coords, eps, cfg.min_pts);

    AnalysisReport report;
    report.projection = cfg.projection;
    report.eps = eps;
    report.min_pts = cfg.min_pts;
    report.n_noise = int(std::count(clusters.begin(), clusters.end(), -1));
    std::set<int> distinct(clusters.begin(), clusters.end());
    distinct.erase(-1);
    report.n_clusters = int(distinct.size());

    const HCScore score = homogeneity_completeness(labels, clusters, cfg.noise);
    report.homogeneity = score.homogeneity;
    report.completeness = score.completeness;

    if (points_out) {
        points_out->points = std::move(coords);
        points_out->ids = std::move(ids);
        points_out->labels = std::move(labels);
        points_out->cluster_ids = std::move(clusters);
    }
    return report;
}

void write_analysis_report(const std::string& path, const AnalysisReport& report) {
    nlohmann::ordered_json j{{"projection", report.projection},
                             {"eps", report.eps},
                             {"min_pts", report.min_pts},
                             {"n_clusters", report.n_clusters},
                             {"n_noise", report.n_noise},
                             {"homogeneity", report.homogeneity},
                             {"completeness", report.completeness}};
    write_json_file(path, j);
}

void write_points_csv(const std::string& path, const LabeledPoints& points) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw_data("cannot open points CSV for writing: " + path);
    out << "x,y,gold_label,cluster_id\n";
    for (Eigen::Index i = 0; i < points.points.rows(); ++i) {
        out << format_double(points.points(i, 0)) << "," << format_double(points.points(i, 1))
            << "," << points.labels[size_t(i)] << "," << points.cluster_ids[size_t(i)] << "\n";
    }
    if (!out) throw_data("failed writing points CSV: " + path);
}

}  // namespace citembed
