#include "citembed/embedding_store.hpp"

#include <fstream>

#include <json.hpp>

#include "citembed/error.hpp"
#include "citembed/jsonl.hpp"

namespace citembed {

void EmbeddingStore::insert(const std::string& id, Eigen::VectorXd vec) {
    if (id.empty()) throw_data("embedding id must be non-empty");
    if (vec.size() == 0) throw_data("embedding for '" + id + "' is empty");
    if (vectors_.empty() && dim_ == 0) dim_ = vec.size();
    if (vec.size() != dim_)
        throw_data("embedding for '" + id + "' has dimension " + std::to_string(vec.size()) +
                   ", store expects " + std::to_string(dim_));
    if (!vectors_.emplace(id, std::move(vec)).second)
        throw_data("duplicate embedding id '" + id + "'");
}

const Eigen::VectorXd& EmbeddingStore::at(const std::string& id) const {
    auto it = vectors_.find(id);
    if (it == vectors_.end()) throw_data("missing embedding for id '" + id + "'");
    return it->second;
}

EmbeddingStore embed_corpus(const std::map<std::string, Paper>& papers,
                            const EncoderWeights& weights, const Vocabulary& vocab,
                            const FieldSet& fields, const Tokenizer& tokenizer) {
    EmbeddingStore store(weights.config.hidden_dim);
    for (const auto& [id, paper] : papers)
        store.insert(id, encode(paper, weights, vocab, fields, tokenizer));
    return store;
}

void save_store(const EmbeddingStore& store, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw_data("cannot open embedding file for writing: " + path);
    for (const auto& [id, vec] : store.vectors()) {
        out << "{\"paper_id\":" << nlohmann::json(id).dump() << ",\"embedding\":[";
        for (Eigen::Index i = 0; i < vec.size(); ++i) {
            if (i) out << ",";
            // -0.0 would reload as +0.0; normalize so save/load/save is stable
            out << format_double(vec(i) == 0.0 ? 0.0 : vec(i));
        }
        out << "]}\n";
    }
    if (!out) throw_data("failed writing embedding file: " + path);
}

EmbeddingStore load_store(const std::string& path) {
    EmbeddingStore store;
    for_each_jsonl_record(path, [&](size_t line, const nlohmann::json& j) {
        if (!j.is_object() || !j.contains("paper_id") || !j.at("paper_id").is_string() ||
            !j.contains("embedding") || !j.at("embedding").is_array())
            throw_data(path + ":" + std::to_string(line) +
                       ": embedding record needs \"paper_id\" and \"embedding\"");
        const auto& arr = j.at("embedding");
        Eigen::VectorXd vec(Eigen::Index(arr.size()));
        for (size_t i = 0; i < arr.size(); ++i) {
            if (!arr.at(i).is_number())
                throw_data(path + ":" + std::to_string(line) + ": non-numeric embedding entry");
            vec(Eigen::Index(i)) = arr.at(i).get<double>();
        }
        try {
            store.insert(j.at("paper_id").get<std::string>(), std::move(vec));
        } catch (const Error& e) {
            throw_data(path + ":" + std::to_string(line) + ": " + e.what());
        }
    });
    return store;
}

}  // namespace citembed
