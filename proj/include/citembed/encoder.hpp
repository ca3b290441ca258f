#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "citembed/corpus.hpp"
#include "citembed/text.hpp"

namespace citembed {

struct EncoderConfig {
    int layers = 2;
    int heads = 4;
    int hidden_dim = 64;
    int feedforward_dim = 128;
    int max_sequence_length = 128;
    int vocab_size = 0;
    uint64_t init_seed = 0;

    int head_dim() const { return hidden_dim / heads; }
    void validate() const;
    bool same_shape(const EncoderConfig& other) const;
};

struct LayerWeights {
    Eigen::MatrixXd wq, wk, wv, wo;          // hidden x hidden
    Eigen::VectorXd bq, bk, bv, bo;          // hidden
    Eigen::VectorXd ln1_gain, ln1_bias;      // hidden
    Eigen::MatrixXd w1;                      // hidden x ff
    Eigen::VectorXd b1;                      // ff
    Eigen::MatrixXd w2;                      // ff x hidden
    Eigen::VectorXd b2;                      // hidden
    Eigen::VectorXd ln2_gain, ln2_bias;      // hidden
};

// All encoder parameters. Doubles throughout; gradients reuse the same
// structure (see zeros_like).
struct EncoderWeights {
    EncoderConfig config;
    Eigen::MatrixXd token_embedding;         // vocab x hidden
    Eigen::MatrixXd position_embedding;      // max_seq x hidden
    Eigen::VectorXd emb_ln_gain, emb_ln_bias;
    std::vector<LayerWeights> layers;

    // Seeded scaled-normal init (stddev 0.02) for matrices and embeddings,
    // ones for layer-norm gains, zeros for biases.
    static EncoderWeights random_init(const EncoderConfig& cfg);
    static EncoderWeights zeros_like(const EncoderConfig& cfg);

    void set_zero();
    bool all_finite() const;

    // Enumerates every parameter tensor in a fixed order as
    // f(name, rows, cols, data). Vectors enumerate as n x 1. The order is
    // the contract for the weight file layout and the optimizer state.
    template <class F>
    void for_each_tensor(F&& f);
    template <class F>
    void for_each_tensor(F&& f) const;

    size_t parameter_count() const;
};

// Layer-norm backward needs the normalized activations and the inverse
// standard deviation per row.
struct LayerNormCache {
    Eigen::MatrixXd xhat;
    Eigen::VectorXd inv_std;
};

struct LayerCache {
    Eigen::MatrixXd input;                   // T x H
    Eigen::MatrixXd q, k, v;                 // T x H
    std::vector<Eigen::MatrixXd> attn_probs; // per head, T x T
    Eigen::MatrixXd attn_concat;             // T x H
    Eigen::MatrixXd res1;                    // T x H
    LayerNormCache ln1;
    Eigen::MatrixXd n1;                      // T x H
    Eigen::MatrixXd ffn_pre;                 // T x F
    Eigen::MatrixXd ffn_act;                 // T x F
    Eigen::MatrixXd res2;                    // T x H
    LayerNormCache ln2;
};

struct ForwardCache {
    std::vector<int> token_ids;
    Eigen::MatrixXd embedded;                // T x H, before embedding layer norm
    LayerNormCache emb_ln;
    Eigen::MatrixXd emb_normed;              // T x H
    std::vector<LayerCache> layers;
    Eigen::MatrixXd output;                  // T x H, final hidden states
};

// Encoder input: [CLS] + title tokens, then one [SEP]-prefixed segment per
// additional selected field (abstract always when selected, even if empty;
// venue/authors only when the paper has them). Truncated to
// max_sequence_length, position 0 always [CLS].
std::vector<int> tokenize_paper(const Paper& paper, const Vocabulary& vocab,
                                const EncoderConfig& cfg, const FieldSet& fields,
                                const Tokenizer& tokenizer);

// Full forward pass over one unpadded sequence; returns T x H final hidden
// states. Pass a cache to keep intermediates for the backward pass.
Eigen::MatrixXd encoder_forward(const std::vector<int>& token_ids, const EncoderWeights& weights,
                                ForwardCache* cache = nullptr);

// Accumulates parameter gradients into `grads` given d(loss)/d(output).
void encoder_backward(const ForwardCache& cache, const EncoderWeights& weights,
                      const Eigen::MatrixXd& d_output, EncoderWeights& grads);

// Final hidden state at the [CLS] position.
Eigen::VectorXd encode(const Paper& paper, const EncoderWeights& weights, const Vocabulary& vocab,
                       const FieldSet& fields, const Tokenizer& tokenizer);

// Batched forward with [PAD] padding and key masking; returns each
// sequence's [CLS] vector. Padding must not change any sequence's output
// relative to encoding it alone.
std::vector<Eigen::VectorXd> encode_batch(const std::vector<std::vector<int>>& sequences,
                                          const EncoderWeights& weights);

// --- template member definitions ---

template <class F>
void EncoderWeights::for_each_tensor(F&& f) {
    auto mat = [&](const std::string& name, Eigen::MatrixXd& m) {
        f(name, m.rows(), m.cols(), m.data());
    };
    auto vec = [&](const std::string& name, Eigen::VectorXd& v) {
        f(name, v.rows(), Eigen::Index(1), v.data());
    };
    mat("token_embedding", token_embedding);
    mat("position_embedding", position_embedding);
    vec("emb_ln_gain", emb_ln_gain);
    vec("emb_ln_bias", emb_ln_bias);
    for (size_t i = 0; i < layers.size(); ++i) {
        const std::string p = "layer" + std::to_string(i) + ".";
        LayerWeights& l = layers[i];
        mat(p + "wq", l.wq);
        vec(p + "bq", l.bq);
        mat(p + "wk", l.wk);
        vec(p + "bk", l.bk);
        mat(p + "wv", l.wv);
        vec(p + "bv", l.bv);
        mat(p + "wo", l.wo);
        vec(p + "bo", l.bo);
        vec(p + "ln1_gain", l.ln1_gain);
        vec(p + "ln1_bias", l.ln1_bias);
        mat(p + "w1", l.w1);
        vec(p + "b1", l.b1);
        mat(p + "w2", l.w2);
        vec(p + "b2", l.b2);
        vec(p + "ln2_gain", l.ln2_gain);
        vec(p + "ln2_bias", l.ln2_bias);
    }
}

template <class F>
void EncoderWeights::for_each_tensor(F&& f) const {
    const_cast<EncoderWeights*>(this)->for_each_tensor(
        [&](const std::string& name, Eigen::Index rows, Eigen::Index cols, double* data) {
            f(name, rows, cols, const_cast<const double*>(data));
        });
}

}  // namespace citembed
