#include "citembed/sampler.hpp"

#include <algorithm>
#include <fstream>

#include <json.hpp>

#include "citembed/error.hpp"
#include "citembed/jsonl.hpp"
#include "citembed/rng.hpp"

namespace citembed {

void SamplerConfig::validate() const {
    if (max_triplets_per_query < 1) {
        throw_config("sampler: max_triplets_per_query must be >= 1");
    }
    if (hard_per_query < 0 || easy_per_query < 0) {
        throw_config("sampler: negative counts must be non-negative");
    }
    if (hard_per_query + easy_per_query != max_triplets_per_query) {
        throw_config("sampler: hard_per_query + easy_per_query must equal max_triplets_per_query");
    }
}

std::set<std::string> hard_negative_pool(const Corpus& corpus, const std::string& query) {
    const auto& cited = corpus.out_citations(query);  // throws on unknown query
    std::set<std::string> pool;
    for (const auto& c : cited) {
        const auto& second_hop = corpus.out_citations(c);
        pool.insert(second_hop.begin(), second_hop.end());
    }
    for (const auto& c : cited) {
        pool.erase(c);
    }
    pool.erase(query);
    return pool;
}

namespace {

// Draws `want` items uniformly without replacement from the corpus id
// universe minus `excluded`. Rejection sampling against the sorted id list;
// falls back to materializing the complement when the exclusion set is
// dense.
std::vector<std::string> sample_easy(const std::vector<std::string>& all_ids,
                                     const std::set<std::string>& excluded, size_t want,
                                     Rng& rng) {
    std::vector<std::string> picked;
    if (want == 0 || all_ids.size() <= excluded.size()) {
        return picked;
    }
    std::set<std::string> taken;
    size_t attempts = 0;
    const size_t max_attempts = 64 * want + 64;
    while (picked.size() < want && attempts < max_attempts) {
        ++attempts;
        const std::string& id = all_ids[rng.next_index(all_ids.size())];
        if (excluded.count(id) || taken.count(id)) {
            continue;
        }
        taken.insert(id);
        picked.push_back(id);
    }
    if (picked.size() < want) {
        std::vector<std::string> complement;
        for (const auto& id : all_ids) {
            if (!excluded.count(id) && !taken.count(id)) {
                complement.push_back(id);
            }
        }
        rng.shuffle(complement);
        for (const auto& id : complement) {
            if (picked.size() == want) {
                break;
            }
            picked.push_back(id);
        }
    }
    return picked;
}

}  // namespace

std::vector<TrainingTriplet> build_triplets(const Corpus& corpus, const SamplerConfig& cfg,
                                            SamplerReport* report) {
    cfg.validate();
    SamplerReport local;
    SamplerReport& rep = report ? *report : local;
    rep = SamplerReport{};

    std::vector<std::string> all_ids;
    all_ids.reserve(corpus.size());
    for (const auto& [id, paper] : corpus.papers()) {
        (void)paper;
        all_ids.push_back(id);
    }

    std::vector<TrainingTriplet> out;
    for (const auto& query : all_ids) {
        ++rep.queries_seen;
        const auto& cited = corpus.out_citations(query);
        if (cited.empty()) {
            ++rep.queries_without_citations;
            continue;
        }
        Rng rng = Rng::stream(cfg.seed, "sampler", query);

        std::vector<std::string> positives(cited.begin(), cited.end());
        rng.shuffle(positives);

        std::vector<std::string> hard_pool_ids;
        if (cfg.hard_per_query > 0) {
            auto pool = hard_negative_pool(corpus, query);
            hard_pool_ids.assign(pool.begin(), pool.end());
            rng.shuffle(hard_pool_ids);
        }
        const size_t hard_take =
            std::min<size_t>(static_cast<size_t>(cfg.hard_per_query), hard_pool_ids.size());
        rep.hard_fallbacks += static_cast<size_t>(cfg.hard_per_query) - hard_take;

        std::set<std::string> excluded(cited.begin(), cited.end());
        excluded.insert(query);
        std::vector<std::string> negatives(hard_pool_ids.begin(),
                                           hard_pool_ids.begin() + hard_take);
        for (const auto& h : negatives) {
            excluded.insert(h);  // no repeated negatives within a query
        }
        const size_t easy_want = static_cast<size_t>(cfg.max_triplets_per_query) - hard_take;
        auto easy = sample_easy(all_ids, excluded, easy_want, rng);
        negatives.insert(negatives.end(), easy.begin(), easy.end());

        if (negatives.empty()) {
            ++rep.queries_exhausted;
            continue;
        }
        for (size_t i = 0; i < negatives.size(); ++i) {
            TrainingTriplet t;
            t.query = query;
            t.positive = positives[i % positives.size()];
            t.negative = negatives[i];
            t.kind = i < hard_take ? NegativeKind::hard : NegativeKind::easy;
            out.push_back(std::move(t));
        }
        rep.triplets_emitted += negatives.size();
    }
    return out;
}

void write_triplets(const std::string& path, const std::vector<TrainingTriplet>& triplets) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw_data("cannot open file for writing: " + path);
    }
    for (const auto& t : triplets) {
        nlohmann::ordered_json record;
        record["query"] = t.query;
        record["positive"] = t.positive;
        record["negative"] = t.negative;
        record["kind"] = t.kind == NegativeKind::hard ? "hard" : "easy";
        out << record.dump() << "\n";
    }
    if (!out) {
        throw_data("write failed: " + path);
    }
}

std::vector<TrainingTriplet> read_triplets(const std::string& path) {
    std::vector<TrainingTriplet> triplets;
    for_each_jsonl_record(path, [&](size_t line_no, const nlohmann::json& record) {
        const std::string where = path + ":" + std::to_string(line_no);
        TrainingTriplet t;
        for (const char* key : {"query", "positive", "negative", "kind"}) {
            if (!record.contains(key) || !record[key].is_string()) {
                throw_data(where + ": triplet record missing string field \"" +
                           std::string(key) + "\"");
            }
        }
        t.query = record["query"].get<std::string>();
        t.positive = record["positive"].get<std::string>();
        t.negative = record["negative"].get<std::string>();
        const std::string kind = record["kind"].get<std::string>();
        if (kind == "hard") {
            t.kind = NegativeKind::hard;
        } else if (kind == "easy") {
            t.kind = NegativeKind::easy;
        } else {
            throw_data(where + ": unknown negative kind '" + kind + "'");
        }
        triplets.push_back(std::move(t));
    });
    return triplets;
}

}  // namespace citembed
