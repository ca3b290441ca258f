#include "citembed/baselines.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <Eigen/Sparse>

#include "citembed/error.hpp"
#include "citembed/jsonl.hpp"
#include "citembed/rng.hpp"

namespace citembed {

namespace {

std::vector<std::string> paper_tokens(const Paper& p, const Tokenizer& tokenizer) {
    std::vector<std::string> toks = tokenizer.tokenize(p.title);
    std::vector<std::string> abs_toks = tokenizer.tokenize(p.abstract);
    toks.insert(toks.end(), abs_toks.begin(), abs_toks.end());
    return toks;
}

// Dominant eigenvector of M^T M by seeded power iteration; M is the
// (uncentered) document matrix, so this is the first right singular vector.
Eigen::VectorXd first_principal_component(const Eigen::MatrixXd& m) {
    if (m.isZero(0.0)) throw_numeric("principal component of an all-zero matrix");
    const Eigen::Index d = m.cols();
    Rng rng = Rng::stream(0, "sif-pc");
    Eigen::VectorXd u(d);
    for (Eigen::Index i = 0; i < d; ++i) u(i) = rng.next_normal();
    u.normalize();
    for (int iter = 0; iter < 10000; ++iter) {
        Eigen::VectorXd next = m.transpose() * (m * u);
        const double norm = next.norm();
        if (norm == 0.0) throw_numeric("power iteration collapsed to zero");
        next /= norm;
        if (next.dot(u) < 0.0) next = -next;  // fix sign before convergence test
        const bool converged = (next - u).norm() < 1e-10;
        u = next;
        if (converged) break;
    }
    // canonical sign: the removal is sign-invariant, but downstream outputs
    // should not depend on the power-iteration start vector
    Eigen::Index imax = 0;
    u.cwiseAbs().maxCoeff(&imax);
    if (u(imax) < 0.0) u = -u;
    return u;
}

}  // namespace

void WordVectors::estimate_probabilities(const std::map<std::string, Paper>& papers,
                                         const Tokenizer& tokenizer) {
    word_probability.clear();
    std::map<std::string, size_t> counts;
    size_t total = 0;
    for (const auto& [id, p] : papers) {
        for (const auto& tok : paper_tokens(p, tokenizer)) {
            ++counts[tok];
            ++total;
        }
    }
    if (total == 0) throw_data("cannot estimate word probabilities: corpus has no tokens");
    for (const auto& [tok, n] : counts) word_probability[tok] = double(n) / double(total);
}

WordVectors WordVectors::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw_data("cannot open word-vector file: " + path);
    WordVectors wv;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string token;
        ss >> token;
        std::vector<double> vals;
        double v;
        while (ss >> v) vals.push_back(v);
        if (token.empty() || vals.empty())
            throw_data(path + ":" + std::to_string(line_no) + ": expected \"token v1 ... vd\"");
        if (wv.dim == 0) wv.dim = Eigen::Index(vals.size());
        if (Eigen::Index(vals.size()) != wv.dim)
            throw_data(path + ":" + std::to_string(line_no) + ": vector dimension " +
                       std::to_string(vals.size()) + " differs from " + std::to_string(wv.dim));
        Eigen::VectorXd vec = Eigen::Map<Eigen::VectorXd>(vals.data(), Eigen::Index(vals.size()));
        if (!wv.vectors.emplace(token, std::move(vec)).second)
            throw_data(path + ":" + std::to_string(line_no) + ": duplicate token '" + token + "'");
    }
    if (wv.vectors.empty()) throw_data("word-vector file is empty: " + path);
    return wv;
}

void WordVectors::save(const std::string& path) const {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw_data("cannot open word-vector file for writing: " + path);
    for (const auto& [token, vec] : vectors) {
        out << token;
        for (Eigen::Index i = 0; i < vec.size(); ++i) out << " " << format_double(vec(i));
        out << "\n";
    }
    if (!out) throw_data("failed writing word-vector file: " + path);
}

WordVectors random_word_vectors(const std::set<std::string>& tokens, Eigen::Index dim,
                                uint64_t seed) {
    if (tokens.empty()) throw_data("random word vectors need a non-empty token set");
    if (dim < 1) throw_config("word-vector dimension must be >= 1");
    WordVectors wv;
    wv.dim = dim;
    for (const auto& tok : tokens) {
        Rng rng = Rng::stream(seed, "word-vec", tok);
        Eigen::VectorXd v(dim);
        for (Eigen::Index i = 0; i < dim; ++i) v(i) = rng.next_normal();
        wv.vectors.emplace(tok, std::move(v));
    }
    return wv;
}

void SIFConfig::validate() const {
    if (!(a >= 1e-5 && a <= 1e-3))
        throw_config("SIF smoothing parameter a must lie in [1e-5, 1e-3]");
}

EmbeddingStore random_embeddings(const std::map<std::string, Paper>& papers, uint64_t seed) {
    EmbeddingStore store(kRandomBaselineDim);
    for (const auto& [id, p] : papers) {
        Rng rng = Rng::stream(seed, "random-embed", id);
        Eigen::VectorXd v(kRandomBaselineDim);
        for (Eigen::Index i = 0; i < kRandomBaselineDim; ++i) v(i) = rng.next_normal();
        store.insert(id, std::move(v));
    }
    return store;
}

EmbeddingStore weighted_bow_embed(const std::map<std::string, Paper>& papers,
                                  const WordVectors& wv, BowWeighting weighting,
                                  const Tokenizer& tokenizer,
                                  std::vector<std::string>* warnings) {
    if (wv.dim < 1) throw_data("word vectors are empty");

    // document frequencies over the same paper set, for tf-idf
    std::map<std::string, size_t> df;
    if (weighting == BowWeighting::tfidf) {
        for (const auto& [id, p] : papers) {
            std::set<std::string> seen;
            for (const auto& tok : paper_tokens(p, tokenizer)) seen.insert(tok);
            for (const auto& tok : seen) ++df[tok];
        }
    }
    const double n_docs = double(papers.size());

    EmbeddingStore store(wv.dim);
    for (const auto& [id, p] : papers) {
        std::map<std::string, size_t> counts;
        for (const auto& tok : paper_tokens(p, tokenizer))
            if (wv.has(tok)) ++counts[tok];
        Eigen::VectorXd v = Eigen::VectorXd::Zero(wv.dim);
        for (const auto& [tok, count] : counts) {
            double w = 1.0;
            switch (weighting) {
                case BowWeighting::uniform: w = 1.0; break;
                case BowWeighting::tf: w = double(count); break;
                case BowWeighting::tfidf:
                    w = double(count) * (std::log(n_docs / double(df.at(tok))) + 1.0);
                    break;
            }
            v += w * wv.vectors.at(tok);
        }
        if (counts.empty() && warnings)
            warnings->push_back("paper '" + id + "' has no in-vocabulary tokens; embedded as zero");
        store.insert(id, std::move(v));
    }
    return store;
}

EmbeddingStore sif_embed(const std::map<std::string, Paper>& papers, const WordVectors& wv,
                         const SIFConfig& cfg, const Tokenizer& tokenizer,
                         Eigen::VectorXd* principal_out) {
    cfg.validate();
    if (papers.size() < 2) throw_data("SIF needs at least 2 papers");
    if (wv.dim < 1) throw_data("word vectors are empty");

    std::vector<std::string> ids;
    ids.reserve(papers.size());
    Eigen::MatrixXd m(Eigen::Index(papers.size()), wv.dim);
    Eigen::Index row = 0;
    for (const auto& [id, p] : papers) {
        Eigen::VectorXd v = Eigen::VectorXd::Zero(wv.dim);
        size_t in_vocab = 0;
        for (const auto& tok : paper_tokens(p, tokenizer)) {
            if (!wv.has(tok)) continue;
            auto it = wv.word_probability.find(tok);
            // a token with no estimated frequency gets full weight
            const double pw = it == wv.word_probability.end() ? 0.0 : it->second;
            v += (cfg.a / (cfg.a + pw)) * wv.vectors.at(tok);
            ++in_vocab;
        }
        if (in_vocab > 0) v /= double(in_vocab);
        m.row(row++) = v.transpose();
        ids.push_back(id);
    }

    const Eigen::VectorXd u = first_principal_component(m);
    if (principal_out) *principal_out = u;

    EmbeddingStore store(wv.dim);
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        Eigen::VectorXd v = m.row(i).transpose();
        store.insert(ids[size_t(i)], v - u * u.dot(v));
    }
    return store;
}

EmbeddingStore sgc_propagate(const CitationGraph& graph, const EmbeddingStore& features, int k) {
    if (k < 0) throw_config("SGC propagation count k must be >= 0");
    std::vector<std::string> ids;
    ids.reserve(graph.out_edges().size());
    std::map<std::string, Eigen::Index> index;
    for (const auto& [id, targets] : graph.out_edges()) {
        index.emplace(id, Eigen::Index(ids.size()));
        ids.push_back(id);
    }
    if (ids.empty()) throw_data("SGC propagation over an empty graph");
    for (const auto& id : ids)
        if (!features.contains(id)) throw_data("missing features for graph node '" + id + "'");
    if (features.size() != ids.size())
        throw_data("feature store and graph disagree on the node set");

    const Eigen::Index n = Eigen::Index(ids.size());
    Eigen::MatrixXd x(n, features.dim());
    for (Eigen::Index i = 0; i < n; ++i) x.row(i) = features.at(ids[size_t(i)]).transpose();

    if (k == 0) {
        EmbeddingStore out(features.dim());
        for (Eigen::Index i = 0; i < n; ++i) out.insert(ids[size_t(i)], x.row(i).transpose());
        return out;
    }

    // undirected adjacency with self-loops, S = D^{-1/2} (A + I) D^{-1/2}
    std::vector<Eigen::Triplet<double>> triplets;
    std::set<std::pair<Eigen::Index, Eigen::Index>> seen;
    auto add_edge = [&](Eigen::Index a, Eigen::Index b) {
        if (seen.insert({a, b}).second) triplets.emplace_back(int(a), int(b), 1.0);
    };
    for (Eigen::Index i = 0; i < n; ++i) add_edge(i, i);
    for (const auto& [from, targets] : graph.out_edges()) {
        const Eigen::Index a = index.at(from);
        for (const auto& to : targets) {
            const Eigen::Index b = index.at(to);
            add_edge(a, b);
            add_edge(b, a);
        }
    }
    Eigen::SparseMatrix<double> adj(n, n);
    adj.setFromTriplets(triplets.begin(), triplets.end());

    Eigen::VectorXd inv_sqrt_deg(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        double deg = 0.0;
        for (Eigen::SparseMatrix<double>::InnerIterator it(adj, i); it; ++it) deg += it.value();
        inv_sqrt_deg(i) = 1.0 / std::sqrt(deg);  // >= 1 thanks to the self-loop
    }
    Eigen::SparseMatrix<double> s = inv_sqrt_deg.asDiagonal() * adj * inv_sqrt_deg.asDiagonal();

    for (int step = 0; step < k; ++step) x = s * x;

    EmbeddingStore out(features.dim());
    for (Eigen::Index i = 0; i < n; ++i) out.insert(ids[size_t(i)], x.row(i).transpose());
    return out;
}

CitationGraph remove_edges(const CitationGraph& graph,
                           const std::vector<std::pair<std::string, std::string>>& edges) {
    CitationGraph::EdgeMap out = graph.out_edges();
    for (const auto& [from, to] : edges) {
        auto it = out.find(from);
        if (it == out.end() || it->second.erase(to) == 0)
            throw_data("cannot remove absent edge " + from + " -> " + to);
    }
    return CitationGraph(std::move(out));
}

}  // namespace citembed
