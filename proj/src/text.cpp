#include "citembed/text.hpp"

#include <algorithm>
#include <fstream>

#include "citembed/error.hpp"
#include "citembed/jsonl.hpp"

namespace citembed {

std::vector<std::string> BasicTokenizer::tokenize(std::string_view text) const {
    std::vector<std::string> tokens;
    std::string current;
    for (char ch : text) {
        unsigned char c = static_cast<unsigned char>(ch);
        bool word_char = (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c >= 0x80;
        if (c >= 'A' && c <= 'Z') {
            c = static_cast<unsigned char>(c - 'A' + 'a');
            word_char = true;
        }
        if (word_char) {
            current.push_back(static_cast<char>(c));
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) {
        tokens.push_back(std::move(current));
    }
    return tokens;
}

namespace {

const std::vector<std::string>& reserved_tokens() {
    static const std::vector<std::string> reserved = {"[PAD]", "[UNK]", "[CLS]", "[SEP]"};
    return reserved;
}

}  // namespace

Vocabulary::Vocabulary(std::vector<std::string> tokens) : tokens_(std::move(tokens)) {
    for (size_t i = 0; i < tokens_.size(); ++i) {
        auto [it, inserted] = ids_.emplace(tokens_[i], static_cast<int>(i));
        (void)it;
        if (!inserted) {
            throw_data("vocabulary contains duplicate token '" + tokens_[i] + "'");
        }
    }
    const auto& reserved = reserved_tokens();
    if (tokens_.size() < reserved.size()) {
        throw_data("vocabulary is missing reserved tokens");
    }
    for (size_t i = 0; i < reserved.size(); ++i) {
        if (tokens_[i] != reserved[i]) {
            throw_data("vocabulary reserved token mismatch at id " + std::to_string(i) +
                       ": expected '" + reserved[i] + "', got '" + tokens_[i] + "'");
        }
    }
}

Vocabulary Vocabulary::build(const Corpus& corpus, const Tokenizer& tokenizer, size_t min_count) {
    if (corpus.size() == 0) {
        throw_data("cannot build a vocabulary from an empty corpus");
    }
    std::map<std::string, size_t> counts;
    auto count_text = [&](const std::string& text) {
        for (auto& tok : tokenizer.tokenize(text)) {
            ++counts[tok];
        }
    };
    for (const auto& [id, paper] : corpus.papers()) {
        (void)id;
        count_text(paper.title);
        count_text(paper.abstract);
        if (paper.venue) {
            count_text(*paper.venue);
        }
        if (paper.authors) {
            for (const auto& a : *paper.authors) {
                count_text(a);
            }
        }
    }
    std::vector<std::pair<std::string, size_t>> kept;
    for (const auto& [tok, n] : counts) {
        if (n >= min_count) {
            kept.emplace_back(tok, n);
        }
    }
    std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) {
            return a.second > b.second;
        }
        return a.first < b.first;
    });
    std::vector<std::string> tokens = reserved_tokens();
    tokens.reserve(tokens.size() + kept.size());
    for (auto& [tok, n] : kept) {
        (void)n;
        tokens.push_back(std::move(tok));
    }
    return Vocabulary(std::move(tokens));
}

Vocabulary Vocabulary::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw_data("cannot open vocabulary file: " + path);
    }
    std::vector<std::string> tokens;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        tokens.push_back(line);
    }
    return Vocabulary(std::move(tokens));
}

void Vocabulary::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw_data("cannot open file for writing: " + path);
    }
    for (const auto& tok : tokens_) {
        out << tok << "\n";
    }
    if (!out) {
        throw_data("write failed: " + path);
    }
}

void Vocabulary::swap_token_ids(const std::string& a, const std::string& b) {
    auto ia = ids_.find(a);
    auto ib = ids_.find(b);
    if (ia == ids_.end() || ib == ids_.end()) {
        throw_data("swap_token_ids: token not in vocabulary");
    }
    if (ia->second < kReserved || ib->second < kReserved) {
        throw_data("swap_token_ids: cannot swap reserved tokens");
    }
    std::swap(tokens_[ia->second], tokens_[ib->second]);
    std::swap(ia->second, ib->second);
}

}  // namespace citembed
