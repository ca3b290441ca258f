#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace citembed {

// One document. `abstract` may be empty (title-only corpora are valid);
// `venue` and `authors` are optional metadata used by the input-field
// ablations.
struct Paper {
    std::string id;
    std::string title;
    std::string abstract;
    std::optional<std::string> venue;
    std::optional<std::vector<std::string>> authors;
};

// Directed out-citation adjacency. Every corpus paper has an entry, so the
// node universe is explicit even for papers with no edges in either
// direction. Invariants: no self-edges, every target id exists.
class CitationGraph {
public:
    using EdgeMap = std::map<std::string, std::set<std::string>>;

    CitationGraph() = default;
    explicit CitationGraph(EdgeMap edges) : out_edges_(std::move(edges)) {}

    const EdgeMap& out_edges() const { return out_edges_; }
    EdgeMap& out_edges() { return out_edges_; }

    bool has_node(const std::string& id) const { return out_edges_.count(id) > 0; }

    size_t edge_count() const {
        size_t n = 0;
        for (const auto& [id, targets] : out_edges_) {
            n += targets.size();
        }
        return n;
    }

private:
    EdgeMap out_edges_;
};

struct CorpusStats {
    size_t papers = 0;
    size_t edges = 0;
    size_t empty_abstracts = 0;
};

// Immutable after construction; safe for unlimited concurrent readers.
class Corpus {
public:
    // Builds a corpus from parts, validating all invariants (unique non-empty
    // ids, non-empty titles, no self-edges, referential integrity).
    Corpus(std::map<std::string, Paper> papers, CitationGraph graph);

    // Loads corpus JSONL: one record per line,
    //   {"paper_id": str, "title": str, "abstract": str,
    //    "venue": str?, "authors": [str]?, "cited_ids": [str]}
    // Duplicate ids, records missing required keys, self-citations and
    // citations to unknown ids are hard errors. Duplicate entries inside
    // cited_ids are deduplicated.
    static Corpus load(const std::string& path);

    // Writes the same JSONL format; load(save(c)) round-trips exactly.
    void save(const std::string& path) const;

    const std::map<std::string, Paper>& papers() const { return papers_; }
    const CitationGraph& graph() const { return graph_; }
    const CorpusStats& stats() const { return stats_; }

    bool contains(const std::string& id) const { return papers_.count(id) > 0; }
    size_t size() const { return papers_.size(); }

    const Paper& paper(const std::string& id) const;

    // Exact out-edge set for `id` (possibly empty). Unknown id is a data
    // error.
    const std::set<std::string>& out_citations(const std::string& id) const;

private:
    std::map<std::string, Paper> papers_;
    CitationGraph graph_;
    CorpusStats stats_;
};

}  // namespace citembed
