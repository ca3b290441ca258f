#include "citembed/synth.hpp"

#include <algorithm>
#include <set>

#include "citembed/error.hpp"
#include "citembed/rng.hpp"

namespace citembed {

namespace {

const char* kFillers[] = {"the",     "of",     "a",      "in",       "we",
                          "show",    "that",   "results", "method",  "analysis"};
constexpr size_t kFillerCount = sizeof(kFillers) / sizeof(kFillers[0]);
constexpr int kTopicWords = 10;
constexpr int kSubtopics = 5;       // sub-communities inside a cluster
constexpr int kSubtopicWords = 4;   // vocabulary per sub-community
constexpr int kMinCites = 3;
constexpr int kMaxCites = 8;

std::string topic_word(int cluster, size_t j) {
    return "t" + std::to_string(cluster) + "w" + std::to_string(j);
}

std::string subtopic_word(int cluster, int sub, size_t j) {
    return "c" + std::to_string(cluster) + "s" + std::to_string(sub) + "w" + std::to_string(j);
}

std::string join(const std::vector<std::string>& tokens) {
    std::string out;
    for (size_t i = 0; i < tokens.size(); ++i) {
        if (i) out += " ";
        out += tokens[i];
    }
    return out;
}

// first k elements of a shuffled copy
template <class T>
std::vector<T> sample_k(std::vector<T> pool, size_t k, Rng& rng) {
    rng.shuffle(pool);
    pool.resize(std::min(k, pool.size()));
    return pool;
}

}  // namespace

void SynthConfig::validate() const {
    if (clusters < 2) throw_config("synthetic corpus needs at least 2 clusters");
    if (papers < 10 * clusters)
        throw_config("synthetic corpus needs at least 10 papers per cluster");
    if (ranking_queries < 1) throw_config("ranking_queries must be >= 1");
    if (relevant_per_query < 1 || relevant_per_query > kMaxCites - 1)
        throw_config("relevant_per_query must lie in [1, " + std::to_string(kMaxCites - 1) + "]");
    if (irrelevant_per_query < 1) throw_config("irrelevant_per_query must be >= 1");
    if (papers - 1 - kMaxCites < irrelevant_per_query)
        throw_config("too few papers to fill the irrelevant candidate pools");
    if (click_events < 1) throw_config("click_events must be >= 1");
    if (click_pool < 2) throw_config("click_pool must be >= 2");
    if (papers - 1 - kMaxCites < click_pool - 1)
        throw_config("too few papers to fill the clickthrough pools");
}

SynthOutput generate_synthetic_corpus(const SynthConfig& cfg) {
    cfg.validate();
    const int n = cfg.papers, k = cfg.clusters;

    size_t width = std::to_string(n - 1).size();
    width = std::max(width, size_t(3));
    auto pid = [&](int i) {
        std::string digits = std::to_string(i);
        return "p" + std::string(width - digits.size(), '0') + digits;
    };
    auto cluster_of = [&](int i) { return i % k; };
    auto subtopic_of = [&](int i) { return (i / k) % kSubtopics; };

    std::vector<std::vector<int>> members(static_cast<size_t>(k));
    for (int i = 0; i < n; ++i) members[size_t(cluster_of(i))].push_back(i);

    // citations first: abstracts quote cited papers' signature words.
    // Most targets come from the paper's own sub-community, the rest from
    // elsewhere in the cluster, so two-hop neighbourhoods straddle
    // sub-community boundaries the way hard negatives need them to.
    std::vector<std::vector<int>> cites(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
        const int c = cluster_of(i);
        Rng rng = Rng::stream(cfg.seed, "synth-cite", uint64_t(i));
        std::vector<int> near, far;
        for (int j : members[size_t(c)]) {
            if (j == i) continue;
            (subtopic_of(j) == subtopic_of(i) ? near : far).push_back(j);
        }
        rng.shuffle(near);
        rng.shuffle(far);
        const int hi = std::min(kMaxCites, int(near.size() + far.size()));
        const int count = kMinCites + int(rng.next_index(size_t(hi - kMinCites + 1)));
        std::vector<int> picked;
        size_t ni = 0, fi = 0;
        while (int(picked.size()) < count) {
            const bool want_near = rng.next_unit() < 0.7;
            if ((want_near && ni < near.size()) || fi >= far.size())
                picked.push_back(near[ni++]);
            else
                picked.push_back(far[fi++]);
        }
        cites[size_t(i)] = std::move(picked);
        std::sort(cites[size_t(i)].begin(), cites[size_t(i)].end());
    }

    std::map<std::string, Paper> papers;
    CitationGraph::EdgeMap edges;
    for (int i = 0; i < n; ++i) {
        const int c = cluster_of(i);
        Paper p;
        p.id = pid(i);

        const int s = (i / k) % kSubtopics;
        Rng trng = Rng::stream(cfg.seed, "synth-title", uint64_t(i));
        p.title = join({topic_word(c, trng.next_index(kTopicWords)),
                        subtopic_word(c, s, trng.next_index(kSubtopicWords)),
                        "sig" + std::to_string(i), kFillers[trng.next_index(kFillerCount)]});

        Rng arng = Rng::stream(cfg.seed, "synth-abs", uint64_t(i));
        std::vector<std::string> abs_tokens;
        for (int j : cites[size_t(i)]) abs_tokens.push_back("sig" + std::to_string(j));
        for (int t = 0; t < 3; ++t)
            abs_tokens.push_back(subtopic_word(c, s, arng.next_index(kSubtopicWords)));
        for (int t = 0; t < 2; ++t)
            abs_tokens.push_back(topic_word(c, arng.next_index(kTopicWords)));
        for (int t = 0; t < 2; ++t)
            abs_tokens.push_back(kFillers[arng.next_index(kFillerCount)]);
        arng.shuffle(abs_tokens);
        p.abstract = join(abs_tokens);

        p.venue = "venue" + std::to_string(c);
        Rng aurng = Rng::stream(cfg.seed, "synth-auth", uint64_t(i));
        const size_t a1 = aurng.next_index(6);
        size_t a2 = aurng.next_index(5);
        if (a2 >= a1) ++a2;  // distinct pair
        p.authors = std::vector<std::string>{
            "author" + std::to_string(c) + "p" + std::to_string(a1),
            "author" + std::to_string(c) + "p" + std::to_string(a2)};

        std::set<std::string> targets;
        for (int j : cites[size_t(i)]) targets.insert(pid(j));
        edges[p.id] = std::move(targets);
        papers.emplace(p.id, std::move(p));
    }

    // ranking task: hold out relevant_per_query cited papers per chosen
    // query, keeping at least one citation for training
    std::vector<int> eligible;
    for (int i = 0; i < n; ++i)
        if (int(cites[size_t(i)].size()) > cfg.relevant_per_query) eligible.push_back(i);
    if (eligible.empty()) throw_config("no paper cites enough papers to build ranking queries");

    Rng qrng = Rng::stream(cfg.seed, "synth-rank");
    std::vector<int> chosen = sample_k(eligible, size_t(cfg.ranking_queries), qrng);
    std::sort(chosen.begin(), chosen.end());

    RankingTask ranking;
    std::vector<std::pair<std::string, std::string>> held_out;
    for (int i : chosen) {
        Rng rng = Rng::stream(cfg.seed, "synth-rank-q", uint64_t(i));
        const std::vector<int> relevant =
            sample_k(cites[size_t(i)], size_t(cfg.relevant_per_query), rng);

        std::set<int> cited(cites[size_t(i)].begin(), cites[size_t(i)].end());
        std::vector<int> uncited;
        for (int j = 0; j < n; ++j)
            if (j != i && !cited.count(j)) uncited.push_back(j);
        const std::vector<int> irrelevant =
            sample_k(uncited, size_t(cfg.irrelevant_per_query), rng);

        RankingQuery q;
        q.query_id = pid(i);
        for (int j : relevant) {
            q.candidates.push_back({pid(j), 1});
            held_out.emplace_back(pid(i), pid(j));
        }
        for (int j : irrelevant) q.candidates.push_back({pid(j), 0});
        ranking.queries.push_back(std::move(q));
    }
    for (const auto& [from, to] : held_out) edges.at(from).erase(to);

    // classification: cluster is the label; interleaved 60/20/20 split
    // (cycling within each cluster so no cluster aliases onto one split)
    ClassificationTask classification;
    for (int i = 0; i < n; ++i) {
        const int s = (i / k) % 5;
        const Split split = s <= 2 ? Split::train : s == 3 ? Split::validation : Split::test;
        classification.examples.push_back(
            {pid(i), "c" + std::to_string(cluster_of(i)), split});
    }

    // clickthrough: one remaining-cited paper hidden among uncited ones,
    // presented in random order, position-bias propensity 1/position
    std::vector<int> click_queries;
    for (int i = 0; i < n; ++i)
        if (!edges.at(pid(i)).empty()) click_queries.push_back(i);
    Rng crng = Rng::stream(cfg.seed, "synth-click");
    std::vector<int> click_chosen = sample_k(click_queries, size_t(cfg.click_events), crng);
    std::sort(click_chosen.begin(), click_chosen.end());

    ClickthroughLog clicks;
    for (int i : click_chosen) {
        Rng rng = Rng::stream(cfg.seed, "synth-click-e", uint64_t(i));
        std::vector<std::string> remaining(edges.at(pid(i)).begin(), edges.at(pid(i)).end());
        const std::string target = remaining[rng.next_index(remaining.size())];

        std::set<int> cited(cites[size_t(i)].begin(), cites[size_t(i)].end());
        std::vector<int> uncited;
        for (int j = 0; j < n; ++j)
            if (j != i && !cited.count(j)) uncited.push_back(j);
        std::vector<int> fillers = sample_k(uncited, size_t(cfg.click_pool - 1), rng);

        ClickthroughEvent ev;
        ev.query_id = pid(i);
        ev.candidates.push_back(target);
        for (int j : fillers) ev.candidates.push_back(pid(j));
        rng.shuffle(ev.candidates);
        for (size_t pos = 0; pos < ev.candidates.size(); ++pos)
            if (ev.candidates[pos] == target) ev.clicked_index = int(pos);
        ev.propensity = 1.0 / double(ev.clicked_index + 1);
        clicks.events.push_back(std::move(ev));
    }

    SynthOutput out{Corpus(std::move(papers), CitationGraph(std::move(edges))),
                    std::move(ranking), std::move(classification), std::move(clicks)};
    out.ranking.validate();
    out.classification.validate();
    out.clicks.validate();
    return out;
}

}  // namespace citembed
