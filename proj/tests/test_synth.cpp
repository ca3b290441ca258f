#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "citembed/error.hpp"
#include "citembed/synth.hpp"

using namespace citembed;

namespace {

std::string tmp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::string> split_ws(const std::string& text) {
    std::istringstream in(text);
    std::vector<std::string> out;
    std::string tok;
    while (in >> tok) out.push_back(tok);
    return out;
}

// signature tokens quoted by a paper's text; these mirror the citations the
// text was written against, whether or not the edge survived hold-out
std::set<std::string> quoted_signatures(const Paper& p) {
    std::set<std::string> sigs;
    for (const std::string& tok : split_ws(p.abstract))
        if (tok.rfind("sig", 0) == 0) sigs.insert(tok);
    return sigs;
}

std::string sig_of(const std::string& paper_id) {
    size_t i = 1;
    while (i < paper_id.size() && paper_id[i] == '0') ++i;
    if (i == paper_id.size()) return "sig0";
    return "sig" + paper_id.substr(i);
}

SynthConfig small_config() {
    SynthConfig cfg;
    cfg.clusters = 3;
    cfg.papers = 60;
    cfg.seed = 5;
    return cfg;
}

int cluster_index(const std::string& paper_id) {
    return std::stoi(paper_id.substr(1)) % 3;
}

}  // namespace

TEST_CASE("synthetic corpus structure invariants") {
    const SynthConfig cfg = small_config();
    SynthOutput out = generate_synthetic_corpus(cfg);
    const auto& papers = out.corpus.papers();
    const auto& edges = out.corpus.graph().out_edges();

    REQUIRE(papers.size() == 60);
    REQUIRE(edges.size() == 60);
    CHECK(papers.begin()->first == "p000");
    CHECK(papers.rbegin()->first == "p059");

    for (const auto& [id, p] : papers) {
        const int c = cluster_index(id);
        REQUIRE(p.venue.has_value());
        CHECK(*p.venue == "venue" + std::to_string(c));
        REQUIRE(p.authors.has_value());
        REQUIRE(p.authors->size() == 2);
        CHECK((*p.authors)[0] != (*p.authors)[1]);
        for (const std::string& a : *p.authors)
            CHECK(a.rfind("author" + std::to_string(c) + "p", 0) == 0);

        // the title carries the paper's own signature word
        const std::vector<std::string> title = split_ws(p.title);
        CHECK(std::count(title.begin(), title.end(), sig_of(id)) == 1);

        // citations stay within the cluster and are quoted in the abstract
        const std::set<std::string>& cited = edges.at(id);
        CHECK(cited.size() >= 1);
        CHECK(cited.size() <= 8);
        const std::set<std::string> sigs = quoted_signatures(p);
        for (const std::string& t : cited) {
            CHECK(t != id);
            CHECK(cluster_index(t) == c);
            CHECK(sigs.count(sig_of(t)) == 1);
        }
        // every quoted signature is a same-cluster paper
        for (const std::string& s : sigs) {
            const int target = std::stoi(s.substr(3));
            CHECK(target % 3 == c);
            CHECK(target != std::stoi(id.substr(1)));
        }
    }
}

TEST_CASE("ranking holds out quoted citations and strips their edges") {
    const SynthConfig cfg = small_config();
    SynthOutput out = generate_synthetic_corpus(cfg);
    const auto& papers = out.corpus.papers();
    const auto& edges = out.corpus.graph().out_edges();

    // queries are exactly the papers whose text quotes more signatures than
    // the hold-out size (they cited enough to spare relevant_per_query)
    std::set<std::string> eligible;
    for (const auto& [id, p] : papers)
        if (int(quoted_signatures(p).size()) > cfg.relevant_per_query) eligible.insert(id);
    REQUIRE(!eligible.empty());
    REQUIRE(eligible.size() <= size_t(cfg.ranking_queries));
    CHECK(out.ranking.queries.size() == eligible.size());

    std::vector<std::string> query_ids;
    for (const RankingQuery& q : out.ranking.queries) {
        query_ids.push_back(q.query_id);
        CHECK(eligible.count(q.query_id) == 1);
        const Paper& p = papers.at(q.query_id);
        const std::set<std::string> sigs = quoted_signatures(p);
        const std::set<std::string>& still_cited = edges.at(q.query_id);

        int relevant = 0, irrelevant = 0;
        std::set<std::string> seen;
        for (const RankingCandidate& cand : q.candidates) {
            CHECK(cand.id != q.query_id);
            CHECK(seen.insert(cand.id).second);
            if (cand.rel == 1) {
                ++relevant;
                // originally cited (quoted) but removed from the graph
                CHECK(sigs.count(sig_of(cand.id)) == 1);
                CHECK(still_cited.count(cand.id) == 0);
            } else {
                ++irrelevant;
                CHECK(sigs.count(sig_of(cand.id)) == 0);
            }
        }
        CHECK(relevant == cfg.relevant_per_query);
        CHECK(irrelevant == cfg.irrelevant_per_query);

        // at least one citation survives for training
        CHECK(!still_cited.empty());
    }
    CHECK(std::is_sorted(query_ids.begin(), query_ids.end()));
}

TEST_CASE("classification labels follow the cluster and the interleaved split") {
    SynthOutput out = generate_synthetic_corpus(small_config());
    REQUIRE(out.classification.examples.size() == 60);

    int train = 0, val = 0, test = 0;
    for (const ClassificationExample& ex : out.classification.examples) {
        const int i = std::stoi(ex.paper_id.substr(1));
        CHECK(ex.label == "c" + std::to_string(i % 3));
        const int s = (i / 3) % 5;
        const Split expect = s <= 2 ? Split::train : s == 3 ? Split::validation : Split::test;
        CHECK(ex.split == expect);
        if (ex.split == Split::train) ++train;
        if (ex.split == Split::validation) ++val;
        if (ex.split == Split::test) ++test;
    }
    CHECK(train == 36);
    CHECK(val == 12);
    CHECK(test == 12);
}

TEST_CASE("clickthrough events hide one surviving citation among uncited papers") {
    const SynthConfig cfg = small_config();
    SynthOutput out = generate_synthetic_corpus(cfg);
    const auto& papers = out.corpus.papers();
    const auto& edges = out.corpus.graph().out_edges();

    // every paper keeps at least one citation, so the full quota is reachable
    REQUIRE(out.clicks.events.size() == size_t(cfg.click_events));

    std::vector<std::string> event_queries;
    for (const ClickthroughEvent& ev : out.clicks.events) {
        REQUIRE(ev.query_id.has_value());
        event_queries.push_back(*ev.query_id);
        REQUIRE(ev.candidates.size() == size_t(cfg.click_pool));
        REQUIRE(ev.clicked_index >= 0);
        REQUIRE(ev.clicked_index < int(ev.candidates.size()));
        CHECK(ev.propensity == 1.0 / double(ev.clicked_index + 1));

        const std::set<std::string> sigs = quoted_signatures(papers.at(*ev.query_id));
        const std::string& clicked = ev.candidates[size_t(ev.clicked_index)];
        CHECK(edges.at(*ev.query_id).count(clicked) == 1);

        std::set<std::string> seen;
        for (size_t pos = 0; pos < ev.candidates.size(); ++pos) {
            const std::string& cand = ev.candidates[pos];
            CHECK(cand != *ev.query_id);
            CHECK(seen.insert(cand).second);
            if (int(pos) != ev.clicked_index) {
                // fillers were never cited, so their signatures are unquoted
                CHECK(sigs.count(sig_of(cand)) == 0);
            }
        }
    }
    CHECK(std::is_sorted(event_queries.begin(), event_queries.end()));
}

TEST_CASE("generation is deterministic and seed-sensitive") {
    const SynthConfig cfg = small_config();
    SynthOutput a = generate_synthetic_corpus(cfg);
    SynthOutput b = generate_synthetic_corpus(cfg);

    const std::string pa = tmp_path("synth_a_corpus.jsonl"), pb = tmp_path("synth_b_corpus.jsonl");
    a.corpus.save(pa);
    b.corpus.save(pb);
    CHECK(slurp(pa) == slurp(pb));

    const std::string ra = tmp_path("synth_a_rank.json"), rb = tmp_path("synth_b_rank.json");
    a.ranking.save(ra);
    b.ranking.save(rb);
    CHECK(slurp(ra) == slurp(rb));

    const std::string ca = tmp_path("synth_a_cls.json"), cb = tmp_path("synth_b_cls.json");
    a.classification.save(ca);
    b.classification.save(cb);
    CHECK(slurp(ca) == slurp(cb));

    const std::string ka = tmp_path("synth_a_clicks.json"), kb = tmp_path("synth_b_clicks.json");
    a.clicks.save(ka);
    b.clicks.save(kb);
    CHECK(slurp(ka) == slurp(kb));

    SynthConfig other = cfg;
    other.seed = cfg.seed + 1;
    SynthOutput c = generate_synthetic_corpus(other);
    const std::string pc = tmp_path("synth_c_corpus.jsonl");
    c.corpus.save(pc);
    CHECK(slurp(pa) != slurp(pc));
}

TEST_CASE("paper id width grows with the corpus size") {
    SynthConfig cfg;
    cfg.clusters = 3;
    cfg.papers = 1200;
    cfg.seed = 1;
    SynthOutput out = generate_synthetic_corpus(cfg);
    CHECK(out.corpus.papers().size() == 1200);
    CHECK(out.corpus.papers().begin()->first == "p0000");
    CHECK(out.corpus.papers().rbegin()->first == "p1199");
    // plenty of eligible queries, so the requested quota is met exactly
    CHECK(out.ranking.queries.size() == 100);
}

TEST_CASE("synth config validation") {
    CHECK_NOTHROW(SynthConfig{}.validate());

    SynthConfig cfg;
    cfg.clusters = 1;
    CHECK_THROWS_AS(cfg.validate(), Error);

    cfg = SynthConfig{};
    cfg.clusters = 4;
    cfg.papers = 39;  // needs 10 per cluster
    CHECK_THROWS_AS(cfg.validate(), Error);

    cfg = SynthConfig{};
    cfg.ranking_queries = 0;
    CHECK_THROWS_AS(cfg.validate(), Error);

    cfg = SynthConfig{};
    cfg.relevant_per_query = 0;
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg.relevant_per_query = 8;  // must leave one citation in place
    CHECK_THROWS_AS(cfg.validate(), Error);

    cfg = SynthConfig{};
    cfg.papers = 30;
    cfg.irrelevant_per_query = 22;  // only 21 never-cited papers exist
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg.irrelevant_per_query = 0;
    CHECK_THROWS_AS(cfg.validate(), Error);

    cfg = SynthConfig{};
    cfg.click_events = 0;
    CHECK_THROWS_AS(cfg.validate(), Error);

    cfg = SynthConfig{};
    cfg.click_pool = 1;
    CHECK_THROWS_AS(cfg.validate(), Error);

    cfg = SynthConfig{};
    cfg.papers = 30;
    cfg.click_pool = 23;
    CHECK_THROWS_AS(cfg.validate(), Error);

    try {
        SynthConfig bad;
        bad.clusters = 0;
        bad.validate();
        FAIL("expected a config error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::config);
    }
}
