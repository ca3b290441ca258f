#include "citembed/corpus.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "citembed/error.hpp"
#include "citembed/jsonl.hpp"

namespace citembed {

namespace {

void validate_invariants(const std::map<std::string, Paper>& papers, const CitationGraph& graph) {
    for (const auto& [id, paper] : papers) {
        if (id.empty()) {
            throw_data("corpus invariant violated: empty paper id");
        }
        if (paper.id != id) {
            throw_data("corpus invariant violated: paper map key '" + id +
                       "' does not match paper id '" + paper.id + "'");
        }
        if (paper.title.empty()) {
            throw_data("corpus invariant violated: paper '" + id + "' has an empty title");
        }
    }
    std::vector<std::string> bad_edges;
    for (const auto& [src, targets] : graph.out_edges()) {
        if (papers.count(src) == 0) {
            throw_data("citation graph references unknown source paper '" + src + "'");
        }
        for (const auto& dst : targets) {
            if (dst == src) {
                bad_edges.push_back(src + " -> " + dst + " (self-citation)");
            } else if (papers.count(dst) == 0) {
                bad_edges.push_back(src + " -> " + dst + " (unknown target)");
            }
        }
    }
    if (!bad_edges.empty()) {
        std::ostringstream msg;
        msg << "referential-integrity error, " << bad_edges.size() << " offending edge(s):";
        for (const auto& e : bad_edges) {
            msg << "\n  " << e;
        }
        throw_data(msg.str());
    }
    for (const auto& [id, paper] : papers) {
        (void)paper;
        if (!graph.has_node(id)) {
            throw_data("citation graph is missing a node entry for paper '" + id + "'");
        }
    }
}

CorpusStats compute_stats(const std::map<std::string, Paper>& papers, const CitationGraph& graph) {
    CorpusStats stats;
    stats.papers = papers.size();
    stats.edges = graph.edge_count();
    for (const auto& [id, paper] : papers) {
        (void)id;
        if (paper.abstract.empty()) {
            ++stats.empty_abstracts;
        }
    }
    return stats;
}

std::string require_string(const nlohmann::json& record, const char* key, const std::string& path,
                           size_t line_no) {
    auto it = record.find(key);
    if (it == record.end() || !it->is_string()) {
        throw_data(path + ":" + std::to_string(line_no) + ": record missing string field \"" +
                   key + "\"");
    }
    return it->get<std::string>();
}

}  // namespace

Corpus::Corpus(std::map<std::string, Paper> papers, CitationGraph graph)
    : papers_(std::move(papers)), graph_(std::move(graph)) {
    // Papers absent from the edge map get an explicit empty entry so the
    // graph's node universe always equals the paper set.
    for (const auto& [id, paper] : papers_) {
        (void)paper;
        graph_.out_edges().try_emplace(id);
    }
    validate_invariants(papers_, graph_);
    stats_ = compute_stats(papers_, graph_);
}

Corpus Corpus::load(const std::string& path) {
    std::map<std::string, Paper> papers;
    CitationGraph::EdgeMap edges;

    for_each_jsonl_record(path, [&](size_t line_no, const nlohmann::json& record) {
        const std::string where = path + ":" + std::to_string(line_no);
        if (!record.is_object()) {
            throw_data(where + ": record is not a JSON object");
        }
        Paper p;
        p.id = require_string(record, "paper_id", path, line_no);
        p.title = require_string(record, "title", path, line_no);
        p.abstract = require_string(record, "abstract", path, line_no);
        if (p.id.empty()) {
            throw_data(where + ": \"paper_id\" must be non-empty");
        }
        if (p.title.empty()) {
            throw_data(where + ": \"title\" must be non-empty");
        }
        if (auto it = record.find("venue"); it != record.end() && !it->is_null()) {
            if (!it->is_string()) {
                throw_data(where + ": \"venue\" must be a string");
            }
            p.venue = it->get<std::string>();
        }
        if (auto it = record.find("authors"); it != record.end() && !it->is_null()) {
            if (!it->is_array()) {
                throw_data(where + ": \"authors\" must be an array of strings");
            }
            std::vector<std::string> authors;
            for (const auto& a : *it) {
                if (!a.is_string()) {
                    throw_data(where + ": \"authors\" must be an array of strings");
                }
                authors.push_back(a.get<std::string>());
            }
            p.authors = std::move(authors);
        }
        auto cit = record.find("cited_ids");
        if (cit == record.end() || !cit->is_array()) {
            throw_data(where + ": record missing array field \"cited_ids\"");
        }
        std::set<std::string> cited;  // set: duplicate citations are deduplicated
        for (const auto& c : *cit) {
            if (!c.is_string()) {
                throw_data(where + ": \"cited_ids\" must be an array of strings");
            }
            cited.insert(c.get<std::string>());
        }
        if (papers.count(p.id) > 0) {
            throw_data(where + ": duplicate paper id '" + p.id + "'");
        }
        edges[p.id] = std::move(cited);
        papers[p.id] = std::move(p);
    });

    if (papers.empty()) {
        throw_data(path + ": corpus is empty");
    }
    return Corpus(std::move(papers), CitationGraph(std::move(edges)));
}

void Corpus::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw_data("cannot open file for writing: " + path);
    }
    for (const auto& [id, paper] : papers_) {
        nlohmann::ordered_json record;
        record["paper_id"] = id;
        record["title"] = paper.title;
        record["abstract"] = paper.abstract;
        if (paper.venue) {
            record["venue"] = *paper.venue;
        }
        if (paper.authors) {
            record["authors"] = *paper.authors;
        }
        record["cited_ids"] = out_citations(id);
        out << record.dump() << "\n";
    }
    if (!out) {
        throw_data("write failed: " + path);
    }
}

const Paper& Corpus::paper(const std::string& id) const {
    auto it = papers_.find(id);
    if (it == papers_.end()) {
        throw_data("unknown paper id '" + id + "'");
    }
    return it->second;
}

const std::set<std::string>& Corpus::out_citations(const std::string& id) const {
    auto it = graph_.out_edges().find(id);
    if (it == graph_.out_edges().end()) {
        throw_data("unknown paper id '" + id + "'");
    }
    return it->second;
}

}  // namespace citembed
