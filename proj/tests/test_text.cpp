#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "citembed/corpus.hpp"
#include "citembed/error.hpp"
#include "citembed/text.hpp"

using namespace citembed;

namespace {

std::string temp_file(const std::string& name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

Corpus make_corpus() {
    std::map<std::string, Paper> papers;
    papers["a"] = {"a", "Graph Neural Networks", "we study graph networks", std::nullopt,
                   std::nullopt};
    papers["b"] = {"b", "Neural Ranking", "ranking with networks and graph signals",
                   std::optional<std::string>("SIGIR"), std::nullopt};
    papers["c"] = {"c", "Graph Sampling", "", std::nullopt,
                   std::optional<std::vector<std::string>>({"Ada Smith"})};
    CitationGraph::EdgeMap edges{{"a", {}}, {"b", {}}, {"c", {}}};
    return Corpus(std::move(papers), CitationGraph(std::move(edges)));
}

}  // namespace

TEST_CASE("basic tokenizer lowercases and splits on non-alphanumerics") {
    BasicTokenizer tok;
    CHECK(tok.tokenize("Hello, World!") == std::vector<std::string>{"hello", "world"});
    CHECK(tok.tokenize("BERT-large v2.0") == std::vector<std::string>{"bert", "large", "v2", "0"});
    CHECK(tok.tokenize("  spaced\tout\nlines ") ==
          std::vector<std::string>{"spaced", "out", "lines"});
    CHECK(tok.tokenize("") == std::vector<std::string>{});
    CHECK(tok.tokenize("--- ::: ---") == std::vector<std::string>{});
    CHECK(tok.tokenize("alpha123beta") == std::vector<std::string>{"alpha123beta"});
}

TEST_CASE("basic tokenizer keeps multi-byte utf-8 runs intact") {
    BasicTokenizer tok;
    // "naïve" has a two-byte ï; the run must not be split or mangled
    auto toks = tok.tokenize("na\xc3\xafve bayes");
    REQUIRE(toks.size() == 2);
    CHECK(toks[0] == "na\xc3\xafve");
    CHECK(toks[1] == "bayes");
}

TEST_CASE("vocabulary reserves control ids and orders by count then token") {
    Corpus c = make_corpus();
    BasicTokenizer tok;
    Vocabulary v = Vocabulary::build(c, tok, 1);

    CHECK(v.tokens()[Vocabulary::kPad] == "[PAD]");
    CHECK(v.tokens()[Vocabulary::kUnk] == "[UNK]");
    CHECK(v.tokens()[Vocabulary::kCls] == "[CLS]");
    CHECK(v.tokens()[Vocabulary::kSep] == "[SEP]");

    // counts: graph=4 networks=3 neural=2 ranking=2 ... -> graph first
    CHECK(v.id_of("graph") == Vocabulary::kReserved);
    CHECK(v.id_of("networks") == Vocabulary::kReserved + 1);
    // neural and ranking tie at 2; lexicographic break
    CHECK(v.id_of("neural") < v.id_of("ranking"));
    CHECK(v.id_of("never-seen") == Vocabulary::kUnk);

    // venue and authors text count toward the vocabulary too
    CHECK(v.id_of("sigir") != Vocabulary::kUnk);
    CHECK(v.id_of("ada") != Vocabulary::kUnk);
}

TEST_CASE("vocabulary min_count filters rare tokens") {
    Corpus c = make_corpus();
    BasicTokenizer tok;
    Vocabulary v = Vocabulary::build(c, tok, 2);
    CHECK(v.id_of("graph") != Vocabulary::kUnk);
    CHECK(v.id_of("networks") != Vocabulary::kUnk);
    CHECK(v.id_of("sigir") == Vocabulary::kUnk);  // appears once
    for (size_t i = Vocabulary::kReserved; i < v.size(); ++i) {
        CHECK(v.tokens()[i] != "sigir");
    }
}

TEST_CASE("vocabulary save/load round-trips ids") {
    Corpus c = make_corpus();
    BasicTokenizer tok;
    Vocabulary v = Vocabulary::build(c, tok, 1);
    const auto path = temp_file("vocab_rt.txt");
    v.save(path);
    Vocabulary w = Vocabulary::load(path);
    REQUIRE(w.size() == v.size());
    for (size_t i = 0; i < v.size(); ++i) CHECK(w.tokens()[i] == v.tokens()[i]);
    CHECK(w.id_of("graph") == v.id_of("graph"));
}

TEST_CASE("vocabulary load validates the reserved prefix") {
    const auto path = temp_file("vocab_bad.txt");
    std::ofstream(path, std::ios::trunc) << "[PAD]\n[UNK]\nwrong\n[SEP]\n";
    CHECK_THROWS_AS(Vocabulary::load(path), Error);
}

TEST_CASE("swap_token_ids exchanges two mappings") {
    Corpus c = make_corpus();
    BasicTokenizer tok;
    Vocabulary v = Vocabulary::build(c, tok, 1);
    const int g = v.id_of("graph");
    const int n = v.id_of("networks");
    v.swap_token_ids("graph", "networks");
    CHECK(v.id_of("graph") == n);
    CHECK(v.id_of("networks") == g);
    CHECK_THROWS_AS(v.swap_token_ids("graph", "[PAD]"), Error);
    CHECK_THROWS_AS(v.swap_token_ids("graph", "absent-token"), Error);
}

TEST_CASE("build is deterministic") {
    Corpus c = make_corpus();
    BasicTokenizer tok;
    Vocabulary v1 = Vocabulary::build(c, tok, 1);
    Vocabulary v2 = Vocabulary::build(c, tok, 1);
    CHECK(v1.tokens() == v2.tokens());
}
