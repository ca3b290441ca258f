#include "citembed/evaluation.hpp"

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

using nlohmann::json;
using nlohmann::ordered_json;

std::string loc(const std::string& path, size_t line) {
    return path + ":" + std::to_string(line) + ": ";
}

double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

// L2-regularized binary logistic regression by Newton's method. The bias is
// unregularized. Returns (w, b).
std::pair<Eigen::VectorXd, double> fit_binary_logistic(const Eigen::MatrixXd& X,
                                                       const Eigen::VectorXd& y, double c) {
    const Eigen::Index n = X.rows(), d = X.cols();
    const double lambda = 1.0 / c;
    Eigen::VectorXd wb = Eigen::VectorXd::Zero(d + 1);  // last entry is the bias

    for (int iter = 0; iter < 100; ++iter) {
        Eigen::VectorXd z = X * wb.head(d);
        z.array() += wb(d);
        Eigen::VectorXd p(n);
        for (Eigen::Index i = 0; i < n; ++i) p(i) = sigmoid(z(i));

        Eigen::VectorXd grad(d + 1);
        grad.head(d) = X.transpose() * (p - y) + lambda * wb.head(d);
        grad(d) = (p - y).sum();
        if (grad.norm() < 1e-9) break;

        Eigen::VectorXd s = (p.array() * (1.0 - p.array())).max(1e-12).matrix();
        Eigen::MatrixXd H(d + 1, d + 1);
        const Eigen::MatrixXd Xs = X.array().colwise() * s.array();
        H.topLeftCorner(d, d) = X.transpose() * Xs;
        H.topLeftCorner(d, d).diagonal().array() += lambda;
        H.topRightCorner(d, 1) = Xs.colwise().sum().transpose();
        H.bottomLeftCorner(1, d) = Xs.colwise().sum();
        H(d, d) = s.sum() + 1e-12;

        Eigen::VectorXd step = H.ldlt().solve(grad);
        if (!step.allFinite()) break;
        wb -= step;
        if (step.norm() < 1e-10) break;
    }
    return {wb.head(d), wb(d)};
}

struct SplitData {
    std::vector<std::string> ids;
    std::vector<std::string> labels;
};

// rank event candidates by descending score, ties by ascending id, and
// return the 1-based rank of the clicked candidate
int clicked_rank(const ClickthroughEvent& ev, const std::vector<double>& scores) {
    const size_t n = ev.candidates.size();
    std::vector<size_t> order(n);
    for (size_t i = 0; i < n; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return ev.candidates[a] < ev.candidates[b];
    });
    for (size_t r = 0; r < n; ++r)
        if (order[r] == size_t(ev.clicked_index)) return int(r) + 1;
    throw_data("clicked candidate not found while ranking");
}

PropensityMetrics aggregate_propensity(const std::vector<double>& p1,
                                       const std::vector<double>& ng,
                                       const std::vector<double>& propensities,
                                       PropensityEstimator estimator) {
    double p1_num = 0.0, ng_num = 0.0, denom = 0.0;
    for (size_t i = 0; i < p1.size(); ++i) {
        const double inv = 1.0 / propensities[i];
        p1_num += p1[i] * inv;
        ng_num += ng[i] * inv;
        denom += inv;
    }
    PropensityMetrics out;
    if (estimator == PropensityEstimator::self_normalized) {
        out.p_at_1_hat = p1_num / denom;
        out.ndcg_hat = ng_num / denom;
    } else {
        out.p_at_1_hat = p1_num / double(p1.size());
        out.ndcg_hat = ng_num / double(p1.size());
    }
    return out;
}

}  // namespace

// --- task loading / validation ---

void RankingTask::validate() const {
    if (queries.empty()) throw_data("ranking task has no queries");
    for (const auto& q : queries) {
        if (q.query_id.empty()) throw_data("ranking task query with empty id");
        int rel = 0, irrel = 0;
        std::set<std::string> seen;
        for (const auto& c : q.candidates) {
            if (c.id == q.query_id)
                throw_data("query '" + q.query_id + "' appears among its own candidates");
            if (!seen.insert(c.id).second)
                throw_data("duplicate candidate '" + c.id + "' for query '" + q.query_id + "'");
            if (c.rel != 0 && c.rel != 1)
                throw_data("relevance must be 0 or 1 for query '" + q.query_id + "'");
            (c.rel ? rel : irrel) += 1;
        }
        if (rel == 0 || irrel == 0)
            throw_data("query '" + q.query_id +
                       "' needs at least one relevant and one non-relevant candidate");
    }
}

RankingTask RankingTask::load(const std::string& path) {
    RankingTask task;
    for_each_jsonl_record(path, [&](size_t line, const json& j) {
        if (!j.is_object() || !j.contains("query_id") || !j.at("query_id").is_string() ||
            !j.contains("candidates") || !j.at("candidates").is_array())
            throw_data(loc(path, line) + "ranking record needs \"query_id\" and \"candidates\"");
        RankingQuery q;
        q.query_id = j.at("query_id").get<std::string>();
        for (const auto& c : j.at("candidates")) {
            if (!c.is_object() || !c.contains("id") || !c.at("id").is_string() ||
                !c.contains("rel") || !c.at("rel").is_number_integer())
                throw_data(loc(path, line) + "candidate needs string \"id\" and integer \"rel\"");
            q.candidates.push_back({c.at("id").get<std::string>(), c.at("rel").get<int>()});
        }
        task.queries.push_back(std::move(q));
    });
    task.validate();
    return task;
}

void RankingTask::save(const std::string& path) const {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw_data("cannot open ranking task for writing: " + path);
    for (const auto& q : queries) {
        ordered_json cands = json::array();
        for (const auto& c : q.candidates) cands.push_back({{"id", c.id}, {"rel", c.rel}});
        ordered_json j{{"query_id", q.query_id}, {"candidates", cands}};
        out << j.dump() << "\n";
    }
    if (!out) throw_data("failed writing ranking task: " + path);
}

void ClassificationTask::validate() const {
    if (examples.empty()) throw_data("classification task has no examples");
    std::set<std::string> seen;
    bool has[3] = {false, false, false};
    for (const auto& e : examples) {
        if (e.paper_id.empty() || e.label.empty())
            throw_data("classification example with empty paper_id or label");
        if (!seen.insert(e.paper_id).second)
            throw_data("paper '" + e.paper_id + "' assigned to more than one split entry");
        has[int(e.split)] = true;
    }
    if (!has[0] || !has[1] || !has[2])
        throw_data("classification task needs non-empty train, validation and test splits");
}

ClassificationTask ClassificationTask::load(const std::string& path) {
    ClassificationTask task;
    for_each_jsonl_record(path, [&](size_t line, const json& j) {
        if (!j.is_object() || !j.contains("paper_id") || !j.at("paper_id").is_string() ||
            !j.contains("label") || !j.at("label").is_string() || !j.contains("split") ||
            !j.at("split").is_string())
            throw_data(loc(path, line) +
                       "classification record needs \"paper_id\", \"label\", \"split\"");
        const std::string s = j.at("split").get<std::string>();
        Split split;
        if (s == "train")
            split = Split::train;
        else if (s == "val")
            split = Split::validation;
        else if (s == "test")
            split = Split::test;
        else
            throw_data(loc(path, line) + "split must be \"train\", \"val\" or \"test\"");
        task.examples.push_back(
            {j.at("paper_id").get<std::string>(), j.at("label").get<std::string>(), split});
    });
    task.validate();
    return task;
}

void ClassificationTask::save(const std::string& path) const {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw_data("cannot open classification task for writing: " + path);
    for (const auto& e : examples) {
        const char* s = e.split == Split::train ? "train"
                        : e.split == Split::validation ? "val"
                                                       : "test";
        ordered_json j{{"paper_id", e.paper_id}, {"label", e.label}, {"split", s}};
        out << j.dump() << "\n";
    }
    if (!out) throw_data("failed writing classification task: " + path);
}

void ClickthroughLog::validate() const {
    if (events.empty()) throw_data("clickthrough log has no events");
    for (const auto& e : events) {
        if (e.candidates.empty()) throw_data("clickthrough event with no candidates");
        std::set<std::string> seen(e.candidates.begin(), e.candidates.end());
        if (seen.size() != e.candidates.size())
            throw_data("clickthrough event lists a candidate twice");
        if (e.clicked_index < 0 || size_t(e.clicked_index) >= e.candidates.size())
            throw_data("clicked_index out of range");
        if (!(e.propensity > 0.0)) throw_data("propensity must be positive");
    }
}

ClickthroughLog ClickthroughLog::load(const std::string& path) {
    ClickthroughLog log;
    for_each_jsonl_record(path, [&](size_t line, const json& j) {
        if (!j.is_object() || !j.contains("candidates") || !j.at("candidates").is_array() ||
            !j.contains("clicked_index") || !j.at("clicked_index").is_number_integer() ||
            !j.contains("propensity") || !j.at("propensity").is_number())
            throw_data(loc(path, line) +
                       "clickthrough record needs \"candidates\", \"clicked_index\", "
                       "\"propensity\"");
        ClickthroughEvent e;
        for (const auto& c : j.at("candidates")) {
            if (!c.is_string()) throw_data(loc(path, line) + "candidates must be strings");
            e.candidates.push_back(c.get<std::string>());
        }
        e.clicked_index = j.at("clicked_index").get<int>();
        e.propensity = j.at("propensity").get<double>();
        if (j.contains("query_id")) {
            if (!j.at("query_id").is_string())
                throw_data(loc(path, line) + "query_id must be a string");
            e.query_id = j.at("query_id").get<std::string>();
        }
        log.events.push_back(std::move(e));
    });
    log.validate();
    return log;
}

void ClickthroughLog::save(const std::string& path) const {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw_data("cannot open clickthrough log for writing: " + path);
    for (const auto& e : events) {
        ordered_json j;
        if (e.query_id) j["query_id"] = *e.query_id;
        j["candidates"] = e.candidates;
        j["clicked_index"] = e.clicked_index;
        j["propensity"] = e.propensity;
        out << j.dump() << "\n";
    }
    if (!out) throw_data("failed writing clickthrough log: " + path);
}

// --- ranking metrics ---

std::vector<std::string> rank_candidates(const EmbeddingStore& store, const std::string& query_id,
                                         const std::vector<std::string>& candidate_ids) {
    const Eigen::VectorXd& q = store.at(query_id);
    std::vector<std::pair<double, std::string>> keyed;
    keyed.reserve(candidate_ids.size());
    for (const auto& id : candidate_ids) keyed.emplace_back((store.at(id) - q).norm(), id);
    std::sort(keyed.begin(), keyed.end());  // pair order = (distance, then id)
    std::vector<std::string> out;
    out.reserve(keyed.size());
    for (auto& [d, id] : keyed) out.push_back(std::move(id));
    return out;
}

namespace {

void check_binary(const std::vector<int>& rels, const char* who) {
    for (int r : rels)
        if (r != 0 && r != 1) throw_data(std::string(who) + ": relevance labels must be 0 or 1");
}

}  // namespace

double average_precision(const std::vector<int>& relevance_in_rank_order) {
    if (relevance_in_rank_order.empty()) throw_data("average_precision of an empty ranking");
    check_binary(relevance_in_rank_order, "average_precision");
    int relevant_seen = 0;
    double sum = 0.0;
    for (size_t i = 0; i < relevance_in_rank_order.size(); ++i) {
        if (relevance_in_rank_order[i]) {
            ++relevant_seen;
            sum += double(relevant_seen) / double(i + 1);
        }
    }
    if (relevant_seen == 0) return 0.0;
    return sum / double(relevant_seen);
}

double ndcg(const std::vector<int>& relevance_in_rank_order) {
    if (relevance_in_rank_order.empty()) throw_data("ndcg of an empty ranking");
    check_binary(relevance_in_rank_order, "ndcg");
    const int total_relevant =
        int(std::count(relevance_in_rank_order.begin(), relevance_in_rank_order.end(), 1));
    if (total_relevant == 0) throw_data("ndcg undefined with zero relevant items");
    double dcg = 0.0;
    for (size_t i = 0; i < relevance_in_rank_order.size(); ++i)
        if (relevance_in_rank_order[i]) dcg += 1.0 / std::log2(double(i) + 2.0);
    double ideal = 0.0;
    for (int i = 0; i < total_relevant; ++i) ideal += 1.0 / std::log2(double(i) + 2.0);
    return dcg / ideal;
}

RankingMetrics evaluate_ranking_task(const EmbeddingStore& store, const RankingTask& task) {
    task.validate();
    double ap_sum = 0.0, ndcg_sum = 0.0;
    for (const auto& q : task.queries) {
        std::map<std::string, int> rel;
        std::vector<std::string> ids;
        for (const auto& c : q.candidates) {
            rel[c.id] = c.rel;
            ids.push_back(c.id);
        }
        const std::vector<std::string> ordered = rank_candidates(store, q.query_id, ids);
        std::vector<int> rel_in_order;
        rel_in_order.reserve(ordered.size());
        for (const auto& id : ordered) rel_in_order.push_back(rel.at(id));
        ap_sum += average_precision(rel_in_order);
        ndcg_sum += ndcg(rel_in_order);
    }
    const double n = double(task.queries.size());
    return RankingMetrics{ap_sum / n, ndcg_sum / n};
}

// --- classification ---

double macro_f1(const std::vector<std::string>& gold, const std::vector<std::string>& predicted,
                const std::vector<std::string>& classes) {
    if (gold.size() != predicted.size()) throw_data("macro_f1 label lists differ in length");
    if (gold.empty()) throw_data("macro_f1 of an empty example set");
    if (classes.empty()) throw_data("macro_f1 needs a non-empty class set");
    double sum = 0.0;
    for (const auto& cls : classes) {
        long tp = 0, fp = 0, fn = 0;
        for (size_t i = 0; i < gold.size(); ++i) {
            const bool g = gold[i] == cls, p = predicted[i] == cls;
            if (g && p)
                ++tp;
            else if (!g && p)
                ++fp;
            else if (g && !p)
                ++fn;
        }
        const long denom = 2 * tp + fp + fn;
        sum += denom == 0 ? 0.0 : 2.0 * double(tp) / double(denom);
    }
    return sum / double(classes.size());
}

std::string LinearClassifier::predict(const Eigen::VectorXd& x) const {
    Eigen::VectorXd scores = weights * x + bias;
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < scores.size(); ++i)
        if (scores(i) > scores(best)) best = i;  // ties keep the earlier class
    return classes[size_t(best)];
}

ClassificationResult train_linear_classifier(const EmbeddingStore& store,
                                             const ClassificationTask& task) {
    task.validate();
    SplitData splits[3];
    for (const auto& e : task.examples) {
        SplitData& s = splits[int(e.split)];
        s.ids.push_back(e.paper_id);
        s.labels.push_back(e.label);
    }

    std::set<std::string> train_classes(splits[0].labels.begin(), splits[0].labels.end());
    for (int s = 1; s < 3; ++s)
        for (const auto& l : splits[s].labels)
            if (!train_classes.count(l))
                throw_data("class '" + l + "' missing from the training split");
    if (train_classes.size() < 2) throw_data("classification needs at least two classes");
    const std::vector<std::string> classes(train_classes.begin(), train_classes.end());

    auto features = [&](const SplitData& s) {
        Eigen::MatrixXd X(Eigen::Index(s.ids.size()), store.dim());
        for (size_t i = 0; i < s.ids.size(); ++i)
            X.row(Eigen::Index(i)) = store.at(s.ids[i]).transpose();
        return X;
    };
    const Eigen::MatrixXd x_train = features(splits[0]);
    const Eigen::MatrixXd x_val = features(splits[1]);
    const Eigen::MatrixXd x_test = features(splits[2]);

    auto fit_ovr = [&](double c) {
        LinearClassifier clf;
        clf.classes = classes;
        clf.weights.resize(Eigen::Index(classes.size()), store.dim());
        clf.bias.resize(Eigen::Index(classes.size()));
        for (size_t k = 0; k < classes.size(); ++k) {
            Eigen::VectorXd y(x_train.rows());
            for (size_t i = 0; i < splits[0].labels.size(); ++i)
                y(Eigen::Index(i)) = splits[0].labels[i] == classes[k] ? 1.0 : 0.0;
            auto [w, b] = fit_binary_logistic(x_train, y, c);
            clf.weights.row(Eigen::Index(k)) = w.transpose();
            clf.bias(Eigen::Index(k)) = b;
        }
        return clf;
    };
    auto score = [&](const LinearClassifier& clf, const Eigen::MatrixXd& X,
                     const std::vector<std::string>& gold) {
        std::vector<std::string> pred;
        pred.reserve(gold.size());
        for (Eigen::Index i = 0; i < X.rows(); ++i)
            pred.push_back(clf.predict(X.row(i).transpose()));
        return macro_f1(gold, pred, classes);
    };

    ClassificationResult best;
    bool first = true;
    for (int e = -2; e <= 4; ++e) {  // C grid: 1e-2 .. 1e4
        const double c = std::pow(10.0, e);
        LinearClassifier clf = fit_ovr(c);
        const double val = score(clf, x_val, splits[1].labels);
        if (first || val > best.validation_f1) {  // ties keep the smaller C
            best.classifier = std::move(clf);
            best.best_c = c;
            best.validation_f1 = val;
            first = false;
        }
    }
    best.test_macro_f1 = score(best.classifier, x_test, splits[2].labels);
    return best;
}

// --- propensity-adjusted metrics ---

PropensityMetrics propensity_adjusted_metrics(const EmbeddingStore& store,
                                              const ClickthroughLog& log,
                                              PropensityEstimator estimator) {
    log.validate();
    std::vector<std::vector<double>> scores;
    scores.reserve(log.events.size());
    for (const auto& e : log.events) {
        std::vector<double> s(e.candidates.size());
        if (e.query_id) {
            const Eigen::VectorXd& q = store.at(*e.query_id);
            for (size_t i = 0; i < e.candidates.size(); ++i)
                s[i] = -(store.at(e.candidates[i]) - q).norm();  // nearer is better
        } else {
            for (size_t i = 0; i < e.candidates.size(); ++i)
                s[i] = -double(i);  // presented order
        }
        scores.push_back(std::move(s));
    }
    return propensity_adjusted_metrics(scores, log, estimator);
}

PropensityMetrics propensity_adjusted_metrics(const std::vector<std::vector<double>>& scores,
                                              const ClickthroughLog& log,
                                              PropensityEstimator estimator) {
    log.validate();
    if (scores.size() != log.events.size())
        throw_data("score list does not match the number of clickthrough events");
    std::vector<double> p1, ng, prop;
    for (size_t e = 0; e < log.events.size(); ++e) {
        const auto& ev = log.events[e];
        if (scores[e].size() != ev.candidates.size())
            throw_data("score vector does not match candidate count for an event");
        const int rank = clicked_rank(ev, scores[e]);
        p1.push_back(rank == 1 ? 1.0 : 0.0);
        ng.push_back(1.0 / std::log2(double(rank) + 1.0));  // single relevant item: ideal DCG = 1
        prop.push_back(ev.propensity);
    }
    return aggregate_propensity(p1, ng, prop, estimator);
}

double table_score(double fraction) { return std::round(fraction * 1000.0) / 10.0; }

}  // namespace citembed
