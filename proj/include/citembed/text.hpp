#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "citembed/corpus.hpp"

namespace citembed {

// Which paper fields feed the encoder input. Title is always included.
struct FieldSet {
    bool abstract = true;
    bool venue = false;
    bool authors = false;
};

// Tokenization is an interface so a subword tokenizer can be swapped in
// without touching the encoder.
class Tokenizer {
public:
    virtual ~Tokenizer() = default;
    virtual std::vector<std::string> tokenize(std::string_view text) const = 0;
};

// ASCII-lowercasing whitespace/punctuation splitter. A token is a maximal
// run of [a-z0-9] or non-ASCII bytes (multi-byte UTF-8 sequences stay
// intact); everything else separates.
class BasicTokenizer : public Tokenizer {
public:
    std::vector<std::string> tokenize(std::string_view text) const override;
};

// Token -> dense id map with reserved control tokens at fixed positions.
class Vocabulary {
public:
    static constexpr int kPad = 0;
    static constexpr int kUnk = 1;
    static constexpr int kCls = 2;
    static constexpr int kSep = 3;
    static constexpr int kReserved = 4;

    // Vocabulary over tokens occurring >= min_count times across all text
    // fields of the corpus (title, abstract, venue, authors), ordered by
    // descending count then lexicographically. Ids are dense from 0 with the
    // reserved tokens first.
    static Vocabulary build(const Corpus& corpus, const Tokenizer& tokenizer, size_t min_count);

    // One token per line, line number = id (reserved tokens included).
    static Vocabulary load(const std::string& path);
    void save(const std::string& path) const;

    // Unknown tokens map to kUnk.
    int id_of(const std::string& token) const {
        auto it = ids_.find(token);
        return it == ids_.end() ? kUnk : it->second;
    }

    size_t size() const { return tokens_.size(); }
    const std::vector<std::string>& tokens() const { return tokens_; }

    // Testing hook: swaps the ids of two non-reserved tokens.
    void swap_token_ids(const std::string& a, const std::string& b);

private:
    explicit Vocabulary(std::vector<std::string> tokens);

    std::vector<std::string> tokens_;      // id -> token
    std::map<std::string, int> ids_;       // token -> id
};

}  // namespace citembed
