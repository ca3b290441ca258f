#pragma once

#include <cstdint>
#include <string>

#include "citembed/encoder.hpp"

namespace citembed {

// First/second-moment accumulators for Adam, one slot per parameter, plus
// the number of optimizer steps taken so far.
struct AdamState {
    EncoderWeights m;
    EncoderWeights v;
    int64_t step = 0;

    static AdamState zeros_like(const EncoderConfig& cfg);
};

// Binary weight container: 8-byte magic, little-endian u64 header length,
// JSON header (config + tensor table), then raw little-endian f64 payload
// in the header's tensor order.
void save_weights(const std::string& path, const EncoderWeights& weights);
EncoderWeights load_weights(const std::string& path);

// Checkpoints additionally carry the Adam moments and step count so a run
// can resume mid-training with identical results.
void save_checkpoint(const std::string& path, const EncoderWeights& weights,
                     const AdamState& adam);
EncoderWeights load_checkpoint(const std::string& path, AdamState& adam);

}  // namespace citembed
