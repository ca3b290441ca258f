#include "citembed/jsonl.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "citembed/error.hpp"

namespace citembed {

void for_each_jsonl_record(const std::string& path,
                           const std::function<void(size_t, const nlohmann::json&)>& fn) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw_data("cannot open file: " + path);
    }
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line_no == 1 && line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) {
            throw_data(path + ":1: UTF-8 BOM is not allowed");
        }
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.find_first_not_of(" \t") == std::string::npos) {
            continue;
        }
        nlohmann::json record = nlohmann::json::parse(line, nullptr, false);
        if (record.is_discarded()) {
            throw_data(path + ":" + std::to_string(line_no) + ": malformed JSON record");
        }
        fn(line_no, record);
    }
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw_data("cannot open file for writing: " + path);
    }
    out << text;
    if (!out) {
        throw_data("write failed: " + path);
    }
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw_data("cannot open file: " + path);
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_json_file(const std::string& path, const nlohmann::json& doc) {
    write_text_file(path, doc.dump(2) + "\n");
}

void write_json_file(const std::string& path, const nlohmann::ordered_json& doc) {
    write_text_file(path, doc.dump(2) + "\n");
}

nlohmann::json read_json_file(const std::string& path) {
    nlohmann::json doc = nlohmann::json::parse(read_text_file(path), nullptr, false);
    if (doc.is_discarded()) {
        throw_data("malformed JSON document: " + path);
    }
    return doc;
}

}  // namespace citembed
