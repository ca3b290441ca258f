#pragma once

#include <functional>
#include <string>

#include <json.hpp>

namespace citembed {

// Calls fn(line_number, record) for every non-blank line of a JSONL file.
// Line numbers are 1-based. Parse failures are reported as data errors
// naming the offending line. A UTF-8 BOM is rejected.
void for_each_jsonl_record(const std::string& path,
                           const std::function<void(size_t, const nlohmann::json&)>& fn);

// Shortest exact representation of a double (up to 17 significant digits).
std::string format_double(double v);

// Writes `text` to `path`, errors as data errors.
void write_text_file(const std::string& path, const std::string& text);

std::string read_text_file(const std::string& path);

// Serializes a JSON document with trailing newline.
void write_json_file(const std::string& path, const nlohmann::json& doc);
void write_json_file(const std::string& path, const nlohmann::ordered_json& doc);

nlohmann::json read_json_file(const std::string& path);

}  // namespace citembed
