// Command-line front end. All real work happens behind the C API; this
// file only merges configuration (flags > environment > config file) and
// forwards the result to ce_run_stage.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "citembed.h"

namespace {

using nlohmann::json;

int fail_config(const std::string& msg) {
    std::fprintf(stderr, "error: %s\n", msg.c_str());
    return CE_CONFIG_ERROR;
}

bool parse_u64(const std::string& text, uint64_t& out) {
    try {
        size_t pos = 0;
        out = std::stoull(text, &pos);
        return pos == text.size();
    } catch (const std::exception&) {
        return false;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"citation-informed document embeddings: train, embed, evaluate"};
    app.require_subcommand(1);

    std::string config_path;
    std::string output_dir;
    std::string corpus_path;
    std::string seed_text;
    app.add_option("--config", config_path, "JSON run-config file")->configurable(false);
    app.add_option("--output-dir", output_dir, "artifact directory (overrides config)");
    app.add_option("--corpus", corpus_path, "corpus JSONL path (overrides config)");
    app.add_option("--seed", seed_text, "global seed (overrides config)");
    app.fallthrough();

    const char* stages[] = {"ingest", "gen-synth", "sample",  "train",  "embed",
                            "embed-baseline", "eval", "analyze", "report"};
    for (const char* s : stages) app.add_subcommand(s)->fallthrough();

    int clusters = 0, papers = 0;
    CLI::App* gen = app.get_subcommand("gen-synth");
    gen->add_option("--clusters", clusters, "number of topical clusters");
    gen->add_option("--papers", papers, "corpus size");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help and friends
        app.exit(e);
        return CE_CONFIG_ERROR;
    }

    json doc = json::object();
    if (!config_path.empty()) {
        std::ifstream in(config_path);
        if (!in) return fail_config("cannot open config file: " + config_path);
        std::ostringstream buf;
        buf << in.rdbuf();
        doc = json::parse(buf.str(), nullptr, false);
        if (doc.is_discarded())
            return fail_config("config file is not valid JSON: " + config_path);
    }

    // environment overrides the file...
    if (const char* v = std::getenv("CITEMBED_SEED")) {
        uint64_t seed = 0;
        if (!parse_u64(v, seed))
            return fail_config(std::string("CITEMBED_SEED is not an unsigned integer: ") + v);
        doc["seed"] = seed;
    }
    if (const char* v = std::getenv("CITEMBED_OUTPUT_DIR")) doc["output_dir"] = v;
    if (const char* v = std::getenv("CITEMBED_CORPUS")) doc["corpus"] = v;

    // ...and flags override both
    if (!seed_text.empty()) {
        uint64_t seed = 0;
        if (!parse_u64(seed_text, seed))
            return fail_config("--seed is not an unsigned integer: " + seed_text);
        doc["seed"] = seed;
    }
    if (!output_dir.empty()) doc["output_dir"] = output_dir;
    if (!corpus_path.empty()) doc["corpus"] = corpus_path;
    if (clusters > 0) doc["synth"]["clusters"] = clusters;
    if (papers > 0) doc["synth"]["papers"] = papers;

    const std::string stage = app.get_subcommands().front()->get_name();
    const std::string payload = doc.dump();
    const ce_status rc = ce_run_stage(stage.c_str(), payload.c_str());
    if (rc != CE_OK) std::fprintf(stderr, "error: %s\n", ce_last_error());
    return rc;
}
