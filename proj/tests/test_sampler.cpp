#include <doctest.h>

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "citembed/corpus.hpp"
#include "citembed/error.hpp"
#include "citembed/rng.hpp"
#include "citembed/sampler.hpp"

using namespace citembed;

namespace {

// Independent oracle for the hard-negative definition, written directly from
// the set expression: two-hop targets minus direct citations minus the query.
std::set<std::string> two_hop_oracle(const Corpus& corpus, const std::string& q) {
    std::set<std::string> pool;
    for (const auto& c : corpus.out_citations(q)) {
        for (const auto& p : corpus.out_citations(c)) {
            pool.insert(p);
        }
    }
    for (const auto& c : corpus.out_citations(q)) pool.erase(c);
    pool.erase(q);
    return pool;
}

Corpus random_corpus(uint64_t seed, int n_nodes, double edge_prob) {
    Rng rng = Rng::stream(seed, "test-graph");
    std::map<std::string, Paper> papers;
    CitationGraph::EdgeMap edges;
    std::vector<std::string> ids;
    for (int i = 0; i < n_nodes; ++i) {
        std::string id = "n" + std::to_string(i);
        ids.push_back(id);
        papers[id] = {id, "title " + id, "", std::nullopt, std::nullopt};
        edges[id] = {};
    }
    for (const auto& a : ids) {
        for (const auto& b : ids) {
            if (a != b && rng.next_unit() < edge_prob) edges[a].insert(b);
        }
    }
    return Corpus(std::move(papers), CitationGraph(std::move(edges)));
}

Corpus tiny_fixture() {
    // q cites a and b; a cites c and d; b cites d and q; e isolated.
    // two-hop(q) = {c, d, q} \ {a, b, q} = {c, d}
    std::map<std::string, Paper> papers;
    for (std::string id : {"q", "a", "b", "c", "d", "e"}) {
        papers[id] = {id, "t " + id, "", std::nullopt, std::nullopt};
    }
    CitationGraph::EdgeMap edges{{"q", {"a", "b"}}, {"a", {"c", "d"}}, {"b", {"d", "q"}},
                                 {"c", {}},         {"d", {}},         {"e", {}}};
    return Corpus(std::move(papers), CitationGraph(std::move(edges)));
}

}  // namespace

TEST_CASE("hard negative pool on a hand-checked fixture") {
    Corpus c = tiny_fixture();
    CHECK(hard_negative_pool(c, "q") == std::set<std::string>{"c", "d"});
    CHECK(hard_negative_pool(c, "a").empty());
    // b cites d (no out-edges) and q; two-hop(b) = {a} (via q; b's own cites excluded)
    CHECK(hard_negative_pool(c, "b") == std::set<std::string>{"a"});
    CHECK(hard_negative_pool(c, "e").empty());
}

TEST_CASE("hard negative pool matches the two-hop oracle on random graphs") {
    int graphs = 0;
    for (uint64_t seed = 1; seed <= 60; ++seed) {
        const int n = 5 + static_cast<int>(seed % 46);  // up to 50 nodes
        Corpus c = random_corpus(seed, n, 0.15);
        for (const auto& [id, p] : c.papers()) {
            CHECK(hard_negative_pool(c, id) == two_hop_oracle(c, id));
        }
        ++graphs;
    }
    CHECK(graphs == 60);
}

TEST_CASE("build_triplets satisfies the triplet invariants") {
    SamplerConfig cfg;
    cfg.seed = 11;
    for (uint64_t seed = 100; seed < 120; ++seed) {
        Corpus c = random_corpus(seed, 30, 0.12);
        std::vector<TrainingTriplet> trips = build_triplets(c, cfg);
        std::map<std::string, std::set<std::string>> negatives_by_query;
        std::map<std::string, int> per_query;
        for (const auto& t : trips) {
            const auto& cited = c.out_citations(t.query);
            CHECK(cited.count(t.positive) == 1);
            CHECK(cited.count(t.negative) == 0);
            CHECK(t.negative != t.query);
            CHECK(t.positive != t.query);
            if (t.kind == NegativeKind::hard) {
                CHECK(two_hop_oracle(c, t.query).count(t.negative) == 1);
            }
            // negatives never repeat within a query
            CHECK(negatives_by_query[t.query].insert(t.negative).second);
            ++per_query[t.query];
        }
        for (const auto& [q, n] : per_query) CHECK(n <= cfg.max_triplets_per_query);
    }
}

TEST_CASE("queries without citations emit nothing and are counted") {
    Corpus c = tiny_fixture();
    SamplerConfig cfg;
    cfg.seed = 3;
    SamplerReport rep;
    auto trips = build_triplets(c, cfg, &rep);
    CHECK(rep.queries_seen == 6);
    CHECK(rep.queries_without_citations == 3);  // c, d, e
    CHECK(rep.triplets_emitted == trips.size());
    for (const auto& t : trips) CHECK(t.query != "e");
}

TEST_CASE("hard slots fall back to easy negatives when the pool is small") {
    // a cites c,d only; pool(a) is empty, so both hard slots fall back
    Corpus c = tiny_fixture();
    SamplerConfig cfg;
    cfg.seed = 5;
    SamplerReport rep;
    auto trips = build_triplets(c, cfg, &rep);
    CHECK(rep.hard_fallbacks > 0);
    int a_hard = 0;
    for (const auto& t : trips) {
        if (t.query == "a" && t.kind == NegativeKind::hard) ++a_hard;
    }
    CHECK(a_hard == 0);
}

TEST_CASE("easy-only config produces no hard triplets") {
    Corpus c = tiny_fixture();
    SamplerConfig cfg;
    cfg.seed = 5;
    cfg.hard_per_query = 0;
    cfg.easy_per_query = 5;
    auto trips = build_triplets(c, cfg);
    for (const auto& t : trips) CHECK(t.kind == NegativeKind::easy);
}

TEST_CASE("sampling is deterministic in the seed and order-independent") {
    Corpus c = random_corpus(77, 40, 0.1);
    SamplerConfig cfg;
    cfg.seed = 9;
    auto a = build_triplets(c, cfg);
    auto b = build_triplets(c, cfg);
    CHECK(a == b);

    cfg.seed = 10;
    auto d = build_triplets(c, cfg);
    CHECK(a != d);  // astronomically unlikely to collide
}

TEST_CASE("triplets round-trip through jsonl") {
    Corpus c = random_corpus(42, 25, 0.15);
    SamplerConfig cfg;
    cfg.seed = 1;
    auto trips = build_triplets(c, cfg);
    REQUIRE(!trips.empty());
    const auto path =
        (std::filesystem::temp_directory_path() / "triplets_rt.jsonl").string();
    write_triplets(path, trips);
    auto back = read_triplets(path);
    CHECK(back == trips);
}

TEST_CASE("sampler config validation") {
    SamplerConfig cfg;
    cfg.max_triplets_per_query = 0;
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg = SamplerConfig{};
    cfg.hard_per_query = -1;
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg = SamplerConfig{};
    CHECK_NOTHROW(cfg.validate());  // default 2 + 3 = 5
    cfg.hard_per_query = 4;
    cfg.easy_per_query = 4;
    CHECK_THROWS_AS(cfg.validate(), Error);  // 4 + 4 != 5
}
