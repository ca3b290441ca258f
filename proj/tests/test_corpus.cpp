#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "citembed/corpus.hpp"
#include "citembed/error.hpp"
#include "citembed/jsonl.hpp"

using namespace citembed;

namespace {

std::string temp_file(const std::string& name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

std::string write_lines(const std::string& name, const std::string& body) {
    const std::string path = temp_file(name);
    std::ofstream out(path, std::ios::trunc);
    out << body;
    return path;
}

const char* kSmallCorpus =
    R"({"paper_id":"a","title":"alpha paper","abstract":"first text","cited_ids":["b"]})"
    "\n"
    R"({"paper_id":"b","title":"beta paper","abstract":"","venue":"conf","cited_ids":[]})"
    "\n"
    R"({"paper_id":"c","title":"gamma paper","abstract":"third","authors":["x","y"],"cited_ids":["a","b"]})"
    "\n";

}  // namespace

TEST_CASE("corpus load parses fields and graph") {
    const auto path = write_lines("corpus_basic.jsonl", kSmallCorpus);
    Corpus c = Corpus::load(path);

    CHECK(c.size() == 3);
    CHECK(c.contains("a"));
    CHECK(c.paper("a").title == "alpha paper");
    CHECK(c.paper("b").venue.has_value());
    CHECK(*c.paper("b").venue == "conf");
    CHECK_FALSE(c.paper("a").venue.has_value());
    REQUIRE(c.paper("c").authors.has_value());
    CHECK(c.paper("c").authors->size() == 2);

    CHECK(c.out_citations("a") == std::set<std::string>{"b"});
    CHECK(c.out_citations("b").empty());
    CHECK(c.out_citations("c") == std::set<std::string>{"a", "b"});

    CHECK(c.stats().papers == 3);
    CHECK(c.stats().edges == 3);
    CHECK(c.stats().empty_abstracts == 1);
}

TEST_CASE("corpus save/load round-trips exactly") {
    const auto path = write_lines("corpus_rt_in.jsonl", kSmallCorpus);
    Corpus c = Corpus::load(path);

    const auto out = temp_file("corpus_rt_out.jsonl");
    c.save(out);
    Corpus c2 = Corpus::load(out);

    CHECK(c2.size() == c.size());
    for (const auto& [id, p] : c.papers()) {
        const Paper& q = c2.paper(id);
        CHECK(q.title == p.title);
        CHECK(q.abstract == p.abstract);
        CHECK(q.venue == p.venue);
        CHECK(q.authors == p.authors);
        CHECK(c2.out_citations(id) == c.out_citations(id));
    }

    // a second save must be byte-identical (stable ordering)
    const auto out2 = temp_file("corpus_rt_out2.jsonl");
    c2.save(out2);
    CHECK(read_text_file(out) == read_text_file(out2));
}

TEST_CASE("duplicate cited_ids entries are deduplicated") {
    const auto path = write_lines(
        "corpus_dup_edge.jsonl",
        R"({"paper_id":"a","title":"t","abstract":"","cited_ids":["b","b","b"]})"
        "\n"
        R"({"paper_id":"b","title":"t","abstract":"","cited_ids":[]})"
        "\n");
    Corpus c = Corpus::load(path);
    CHECK(c.out_citations("a").size() == 1);
    CHECK(c.stats().edges == 1);
}

TEST_CASE("corpus load rejects malformed input") {
    auto load_body = [](const std::string& name, const std::string& body) {
        return Corpus::load(write_lines(name, body));
    };

    SUBCASE("duplicate paper id") {
        CHECK_THROWS_AS(load_body("corpus_dup.jsonl",
                                  R"({"paper_id":"a","title":"t","abstract":"","cited_ids":[]})"
                                  "\n"
                                  R"({"paper_id":"a","title":"t","abstract":"","cited_ids":[]})"
                                  "\n"),
                        Error);
    }
    SUBCASE("self citation") {
        CHECK_THROWS_AS(load_body("corpus_self.jsonl",
                                  R"({"paper_id":"a","title":"t","abstract":"","cited_ids":["a"]})"
                                  "\n"),
                        Error);
    }
    SUBCASE("dangling citation") {
        CHECK_THROWS_AS(load_body("corpus_dangling.jsonl",
                                  R"({"paper_id":"a","title":"t","abstract":"","cited_ids":["z"]})"
                                  "\n"),
                        Error);
    }
    SUBCASE("missing title") {
        CHECK_THROWS_AS(
            load_body("corpus_notitle.jsonl", R"({"paper_id":"a","abstract":"","cited_ids":[]})"
                                              "\n"),
            Error);
    }
    SUBCASE("empty id") {
        CHECK_THROWS_AS(load_body("corpus_emptyid.jsonl",
                                  R"({"paper_id":"","title":"t","abstract":"","cited_ids":[]})"
                                  "\n"),
                        Error);
    }
    SUBCASE("not json") {
        CHECK_THROWS_AS(load_body("corpus_notjson.jsonl", "not json at all\n"), Error);
    }
    SUBCASE("missing file") {
        CHECK_THROWS_AS(Corpus::load(temp_file("corpus_does_not_exist.jsonl")), Error);
    }

    SUBCASE("error kinds are data errors") {
        try {
            load_body("corpus_kind.jsonl",
                      R"({"paper_id":"a","title":"t","abstract":"","cited_ids":["a"]})"
                      "\n");
            FAIL("expected throw");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::data);
        }
    }
}

TEST_CASE("unknown id lookups are data errors") {
    const auto path = write_lines("corpus_lookup.jsonl", kSmallCorpus);
    Corpus c = Corpus::load(path);
    CHECK_THROWS_AS(c.paper("nope"), Error);
    CHECK_THROWS_AS(c.out_citations("nope"), Error);
}

TEST_CASE("graph edge_count sums out-degrees") {
    CitationGraph g(CitationGraph::EdgeMap{
        {"a", {"b", "c"}},
        {"b", {}},
        {"c", {"a"}},
    });
    CHECK(g.edge_count() == 3);
    CHECK(g.has_node("b"));
    CHECK_FALSE(g.has_node("q"));
}
