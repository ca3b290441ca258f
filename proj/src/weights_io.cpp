#include "citembed/weights_io.hpp"

#include <cstring>
#include <fstream>
#include <vector>

#include <json.hpp>

#include "citembed/error.hpp"

namespace citembed {

namespace {

using nlohmann::json;

constexpr char kWeightsMagic[8] = {'C', 'E', 'W', 'G', 'T', '0', '0', '1'};
constexpr char kCheckpointMagic[8] = {'C', 'E', 'C', 'K', 'P', '0', '0', '1'};

json config_to_json(const EncoderConfig& c) {
    return json{{"layers", c.layers},
                {"heads", c.heads},
                {"hidden_dim", c.hidden_dim},
                {"feedforward_dim", c.feedforward_dim},
                {"max_sequence_length", c.max_sequence_length},
                {"vocab_size", c.vocab_size},
                {"init_seed", c.init_seed}};
}

EncoderConfig config_from_json(const json& j, const std::string& path) {
    try {
        EncoderConfig c;
        c.layers = j.at("layers").get<int>();
        c.heads = j.at("heads").get<int>();
        c.hidden_dim = j.at("hidden_dim").get<int>();
        c.feedforward_dim = j.at("feedforward_dim").get<int>();
        c.max_sequence_length = j.at("max_sequence_length").get<int>();
        c.vocab_size = j.at("vocab_size").get<int>();
        c.init_seed = j.at("init_seed").get<uint64_t>();
        c.validate();
        return c;
    } catch (const json::exception& e) {
        throw_data("invalid encoder config in " + path + ": " + e.what());
    }
}

void write_u64_le(std::ofstream& out, uint64_t v) {
    unsigned char buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = (unsigned char)((v >> (8 * i)) & 0xff);
    out.write(reinterpret_cast<const char*>(buf), 8);
}

uint64_t read_u64_le(std::ifstream& in, const std::string& path) {
    unsigned char buf[8];
    in.read(reinterpret_cast<char*>(buf), 8);
    if (!in) throw_data("truncated weight file: " + path);
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= uint64_t(buf[i]) << (8 * i);
    return v;
}

// Collects a group's tensor table and payload. The group prefix keeps the
// weight, adam-m and adam-v entries distinct inside a checkpoint.
void append_group(json& tensors, std::vector<double>& payload, const std::string& prefix,
                  const EncoderWeights& w) {
    const_cast<EncoderWeights&>(w).for_each_tensor(
        [&](const std::string& name, Eigen::Index rows, Eigen::Index cols, double* data) {
            tensors.push_back(json{{"name", prefix + name},
                                   {"rows", rows},
                                   {"cols", cols},
                                   {"offset", payload.size()}});
            payload.insert(payload.end(), data, data + rows * cols);
        });
}

void write_file(const std::string& path, const char magic[8], const json& header,
                const std::vector<double>& payload) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw_data("cannot open weight file for writing: " + path);
    out.write(magic, 8);
    const std::string h = header.dump();
    write_u64_le(out, h.size());
    out.write(h.data(), std::streamsize(h.size()));
    // host is little-endian; doubles go out verbatim
    out.write(reinterpret_cast<const char*>(payload.data()),
              std::streamsize(payload.size() * sizeof(double)));
    if (!out) throw_data("failed writing weight file: " + path);
}

json read_file(const std::string& path, const char magic[8], std::vector<double>& payload) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw_data("cannot open weight file: " + path);
    char got[8];
    in.read(got, 8);
    if (!in || std::memcmp(got, magic, 8) != 0)
        throw_data("unrecognized weight file format: " + path);
    const uint64_t hlen = read_u64_le(in, path);
    std::string htext(hlen, '\0');
    in.read(htext.data(), std::streamsize(hlen));
    if (!in) throw_data("truncated weight file: " + path);
    json header = json::parse(htext, nullptr, false);
    if (header.is_discarded()) throw_data("corrupt weight file header: " + path);

    uint64_t total = 0;
    for (const auto& t : header.at("tensors"))
        total += t.at("rows").get<uint64_t>() * t.at("cols").get<uint64_t>();
    payload.resize(total);
    in.read(reinterpret_cast<char*>(payload.data()), std::streamsize(total * sizeof(double)));
    if (!in) throw_data("truncated weight file payload: " + path);
    return header;
}

// Copies payload slices back into the weights struct, verifying that the
// stored tensor table matches the shapes implied by the config.
void fill_group(const json& tensors, const std::vector<double>& payload, const std::string& prefix,
                EncoderWeights& w, const std::string& path) {
    size_t cursor = 0;
    w.for_each_tensor([&](const std::string& name, Eigen::Index rows, Eigen::Index cols,
                          double* data) {
        if (cursor >= tensors.size()) throw_data("weight file missing tensors: " + path);
        const auto& t = tensors.at(cursor++);
        if (t.at("name").get<std::string>() != prefix + name ||
            t.at("rows").get<Eigen::Index>() != rows || t.at("cols").get<Eigen::Index>() != cols)
            throw_data("weight file tensor mismatch at " + prefix + name + ": " + path);
        const size_t off = t.at("offset").get<size_t>();
        if (off + size_t(rows * cols) > payload.size())
            throw_data("weight file tensor out of bounds: " + path);
        std::memcpy(data, payload.data() + off, size_t(rows * cols) * sizeof(double));
    });
}

}  // namespace

AdamState AdamState::zeros_like(const EncoderConfig& cfg) {
    AdamState s;
    s.m = EncoderWeights::zeros_like(cfg);
    s.v = EncoderWeights::zeros_like(cfg);
    s.step = 0;
    return s;
}

void save_weights(const std::string& path, const EncoderWeights& weights) {
    json tensors = json::array();
    std::vector<double> payload;
    append_group(tensors, payload, "", weights);
    json header{{"config", config_to_json(weights.config)}, {"tensors", tensors}};
    write_file(path, kWeightsMagic, header, payload);
}

EncoderWeights load_weights(const std::string& path) {
    std::vector<double> payload;
    json header = read_file(path, kWeightsMagic, payload);
    EncoderConfig cfg = config_from_json(header.at("config"), path);
    EncoderWeights w = EncoderWeights::zeros_like(cfg);
    fill_group(header.at("tensors"), payload, "", w, path);
    return w;
}

void save_checkpoint(const std::string& path, const EncoderWeights& weights,
                     const AdamState& adam) {
    json tensors = json::array();
    std::vector<double> payload;
    append_group(tensors, payload, "w:", weights);
    append_group(tensors, payload, "m:", adam.m);
    append_group(tensors, payload, "v:", adam.v);
    json header{{"config", config_to_json(weights.config)},
                {"step", adam.step},
                {"tensors", tensors}};
    write_file(path, kCheckpointMagic, header, payload);
}

EncoderWeights load_checkpoint(const std::string& path, AdamState& adam) {
    std::vector<double> payload;
    json header = read_file(path, kCheckpointMagic, payload);
    EncoderConfig cfg = config_from_json(header.at("config"), path);
    EncoderWeights w = EncoderWeights::zeros_like(cfg);
    adam = AdamState::zeros_like(cfg);
    const auto& tensors = header.at("tensors");
    // groups were appended in order w, m, v; split the table accordingly
    if (!tensors.is_array() || tensors.size() % 3 != 0)
        throw_data("corrupt checkpoint tensor table: " + path);
    const size_t third = tensors.size() / 3;
    json wt = json::array(), mt = json::array(), vt = json::array();
    for (size_t i = 0; i < third; ++i) wt.push_back(tensors.at(i));
    for (size_t i = third; i < 2 * third; ++i) mt.push_back(tensors.at(i));
    for (size_t i = 2 * third; i < tensors.size(); ++i) vt.push_back(tensors.at(i));
    fill_group(wt, payload, "w:", w, path);
    fill_group(mt, payload, "m:", adam.m, path);
    fill_group(vt, payload, "v:", adam.v, path);
    adam.step = header.at("step").get<int64_t>();
    return w;
}

}  // namespace citembed
