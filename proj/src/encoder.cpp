#include "citembed/encoder.hpp"

#include <cmath>
#include <cstddef>

#include "citembed/error.hpp"
#include "citembed/rng.hpp"

namespace citembed {

namespace {

constexpr double kLnEps = 1e-5;
constexpr double kInitStd = 0.02;

double gelu(double x) { return 0.5 * x * (1.0 + std::erf(x / std::sqrt(2.0))); }

// d/dx gelu(x) = Phi(x) + x * phi(x)
double gelu_grad(double x) {
    const double phi = std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI);
    const double Phi = 0.5 * (1.0 + std::erf(x / std::sqrt(2.0)));
    return Phi + x * phi;
}

Eigen::MatrixXd layer_norm(const Eigen::MatrixXd& x, const Eigen::VectorXd& gain,
                           const Eigen::VectorXd& bias, LayerNormCache* cache) {
    const Eigen::Index T = x.rows(), H = x.cols();
    Eigen::MatrixXd xhat(T, H);
    Eigen::VectorXd inv_std(T);
    for (Eigen::Index t = 0; t < T; ++t) {
        const double mean = x.row(t).mean();
        const double var = (x.row(t).array() - mean).square().mean();
        const double inv = 1.0 / std::sqrt(var + kLnEps);
        xhat.row(t) = (x.row(t).array() - mean) * inv;
        inv_std(t) = inv;
    }
    Eigen::MatrixXd y =
        (xhat.array().rowwise() * gain.transpose().array()).rowwise() + bias.transpose().array();
    if (cache) {
        cache->xhat = std::move(xhat);
        cache->inv_std = std::move(inv_std);
    }
    return y;
}

// Given d(loss)/dy, recovers d(loss)/dx and accumulates gain/bias grads.
Eigen::MatrixXd layer_norm_backward(const Eigen::MatrixXd& dy, const LayerNormCache& cache,
                                    const Eigen::VectorXd& gain, Eigen::VectorXd& d_gain,
                                    Eigen::VectorXd& d_bias) {
    const Eigen::Index T = dy.rows(), H = dy.cols();
    d_gain += (dy.array() * cache.xhat.array()).colwise().sum().matrix().transpose();
    d_bias += dy.colwise().sum().transpose();
    Eigen::MatrixXd dxhat = dy.array().rowwise() * gain.transpose().array();
    Eigen::MatrixXd dx(T, H);
    for (Eigen::Index t = 0; t < T; ++t) {
        const double m1 = dxhat.row(t).mean();
        const double m2 = (dxhat.row(t).array() * cache.xhat.row(t).array()).mean();
        dx.row(t) =
            cache.inv_std(t) * (dxhat.row(t).array() - m1 - cache.xhat.row(t).array() * m2);
    }
    return dx;
}

// Row-wise softmax with max subtraction; `mask_from` marks the first padded
// key column (scores there are excluded), or cols for no masking.
Eigen::MatrixXd softmax_rows(const Eigen::MatrixXd& scores, Eigen::Index mask_from) {
    Eigen::MatrixXd probs = Eigen::MatrixXd::Zero(scores.rows(), scores.cols());
    for (Eigen::Index r = 0; r < scores.rows(); ++r) {
        const double mx = scores.row(r).head(mask_from).maxCoeff();
        Eigen::ArrayXd e = (scores.row(r).head(mask_from).array() - mx).exp();
        probs.row(r).head(mask_from) = e / e.sum();
    }
    return probs;
}

// One transformer layer. `valid` limits attention keys (for padded batches);
// pass T for unpadded input.
Eigen::MatrixXd layer_forward(const Eigen::MatrixXd& x, const LayerWeights& w, int heads,
                              Eigen::Index valid, LayerCache* cache) {
    const Eigen::Index T = x.rows(), H = x.cols();
    const Eigen::Index dh = H / heads;
    const double scale = 1.0 / std::sqrt(double(dh));

    Eigen::MatrixXd q = (x * w.wq).rowwise() + w.bq.transpose();
    Eigen::MatrixXd k = (x * w.wk).rowwise() + w.bk.transpose();
    Eigen::MatrixXd v = (x * w.wv).rowwise() + w.bv.transpose();

    Eigen::MatrixXd concat(T, H);
    std::vector<Eigen::MatrixXd> probs;
    probs.reserve(size_t(heads));
    for (int h = 0; h < heads; ++h) {
        auto qh = q.middleCols(h * dh, dh);
        auto kh = k.middleCols(h * dh, dh);
        auto vh = v.middleCols(h * dh, dh);
        Eigen::MatrixXd scores = qh * kh.transpose() * scale;
        Eigen::MatrixXd p = softmax_rows(scores, valid);
        concat.middleCols(h * dh, dh) = p * vh;
        probs.push_back(std::move(p));
    }
    Eigen::MatrixXd attn_out = (concat * w.wo).rowwise() + w.bo.transpose();
    Eigen::MatrixXd res1 = x + attn_out;
    LayerNormCache ln1;
    Eigen::MatrixXd n1 = layer_norm(res1, w.ln1_gain, w.ln1_bias, cache ? &ln1 : nullptr);

    Eigen::MatrixXd pre = (n1 * w.w1).rowwise() + w.b1.transpose();
    Eigen::MatrixXd act = pre.unaryExpr([](double v2) { return gelu(v2); });
    Eigen::MatrixXd ffn = (act * w.w2).rowwise() + w.b2.transpose();
    Eigen::MatrixXd res2 = n1 + ffn;
    LayerNormCache ln2;
    Eigen::MatrixXd out = layer_norm(res2, w.ln2_gain, w.ln2_bias, cache ? &ln2 : nullptr);

    if (cache) {
        cache->input = x;
        cache->q = std::move(q);
        cache->k = std::move(k);
        cache->v = std::move(v);
        cache->attn_probs = std::move(probs);
        cache->attn_concat = std::move(concat);
        cache->res1 = std::move(res1);
        cache->ln1 = std::move(ln1);
        cache->n1 = std::move(n1);
        cache->ffn_pre = std::move(pre);
        cache->ffn_act = std::move(act);
        cache->res2 = std::move(res2);
        cache->ln2 = std::move(ln2);
    }
    return out;
}

Eigen::MatrixXd layer_backward(const Eigen::MatrixXd& d_out, const LayerCache& c,
                               const LayerWeights& w, int heads, LayerWeights& g) {
    const Eigen::Index T = c.input.rows(), H = c.input.cols();
    const Eigen::Index dh = H / heads;
    const double scale = 1.0 / std::sqrt(double(dh));

    Eigen::MatrixXd d_res2 = layer_norm_backward(d_out, c.ln2, w.ln2_gain, g.ln2_gain, g.ln2_bias);
    Eigen::MatrixXd d_n1 = d_res2;  // residual branch

    // FFN
    g.w2 += c.ffn_act.transpose() * d_res2;
    g.b2 += d_res2.colwise().sum().transpose();
    Eigen::MatrixXd d_act = d_res2 * w.w2.transpose();
    Eigen::MatrixXd d_pre =
        d_act.array() * c.ffn_pre.unaryExpr([](double v) { return gelu_grad(v); }).array();
    g.w1 += c.n1.transpose() * d_pre;
    g.b1 += d_pre.colwise().sum().transpose();
    d_n1 += d_pre * w.w1.transpose();

    Eigen::MatrixXd d_res1 = layer_norm_backward(d_n1, c.ln1, w.ln1_gain, g.ln1_gain, g.ln1_bias);
    Eigen::MatrixXd d_x = d_res1;  // residual branch
    const Eigen::MatrixXd& d_attn_out = d_res1;

    g.wo += c.attn_concat.transpose() * d_attn_out;
    g.bo += d_attn_out.colwise().sum().transpose();
    Eigen::MatrixXd d_concat = d_attn_out * w.wo.transpose();

    Eigen::MatrixXd dq(T, H), dk(T, H), dv(T, H);
    for (int h = 0; h < heads; ++h) {
        auto d_ctx = d_concat.middleCols(h * dh, dh);
        const Eigen::MatrixXd& p = c.attn_probs[size_t(h)];
        auto qh = c.q.middleCols(h * dh, dh);
        auto kh = c.k.middleCols(h * dh, dh);
        auto vh = c.v.middleCols(h * dh, dh);

        dv.middleCols(h * dh, dh) = p.transpose() * d_ctx;
        Eigen::MatrixXd dp = d_ctx * vh.transpose();
        // softmax backward, row-wise: ds = p .* (dp - rowsum(dp .* p))
        Eigen::MatrixXd ds(T, T);
        for (Eigen::Index r = 0; r < T; ++r) {
            const double dot = (dp.row(r).array() * p.row(r).array()).sum();
            ds.row(r) = p.row(r).array() * (dp.row(r).array() - dot);
        }
        dq.middleCols(h * dh, dh) = ds * kh * scale;
        dk.middleCols(h * dh, dh) = ds.transpose() * qh * scale;
    }

    g.wq += c.input.transpose() * dq;
    g.bq += dq.colwise().sum().transpose();
    g.wk += c.input.transpose() * dk;
    g.bk += dk.colwise().sum().transpose();
    g.wv += c.input.transpose() * dv;
    g.bv += dv.colwise().sum().transpose();
    d_x += dq * w.wq.transpose() + dk * w.wk.transpose() + dv * w.wv.transpose();
    return d_x;
}

void check_token_ids(const std::vector<int>& ids, const EncoderConfig& cfg) {
    if (ids.empty()) throw_data("encoder input is empty");
    if (Eigen::Index(ids.size()) > cfg.max_sequence_length)
        throw_data("encoder input longer than max_sequence_length");
    for (int id : ids) {
        if (id < 0 || id >= cfg.vocab_size)
            throw_data("token id " + std::to_string(id) + " outside vocabulary of size " +
                       std::to_string(cfg.vocab_size));
    }
}

}  // namespace

void EncoderConfig::validate() const {
    if (layers < 1) throw_config("encoder layers must be >= 1");
    if (heads < 1) throw_config("encoder heads must be >= 1");
    if (hidden_dim < 1) throw_config("encoder hidden_dim must be >= 1");
    if (hidden_dim % heads != 0) throw_config("encoder hidden_dim must be divisible by heads");
    if (feedforward_dim < 1) throw_config("encoder feedforward_dim must be >= 1");
    if (max_sequence_length < 4) throw_config("encoder max_sequence_length must be >= 4");
    if (vocab_size < int(Vocabulary::kReserved))
        throw_config("encoder vocab_size must cover the reserved tokens");
}

bool EncoderConfig::same_shape(const EncoderConfig& o) const {
    return layers == o.layers && heads == o.heads && hidden_dim == o.hidden_dim &&
           feedforward_dim == o.feedforward_dim && max_sequence_length == o.max_sequence_length &&
           vocab_size == o.vocab_size;
}

EncoderWeights EncoderWeights::zeros_like(const EncoderConfig& cfg) {
    cfg.validate();
    EncoderWeights w;
    w.config = cfg;
    const int H = cfg.hidden_dim, F = cfg.feedforward_dim;
    w.token_embedding = Eigen::MatrixXd::Zero(cfg.vocab_size, H);
    w.position_embedding = Eigen::MatrixXd::Zero(cfg.max_sequence_length, H);
    w.emb_ln_gain = Eigen::VectorXd::Zero(H);
    w.emb_ln_bias = Eigen::VectorXd::Zero(H);
    w.layers.resize(size_t(cfg.layers));
    for (auto& l : w.layers) {
        l.wq = Eigen::MatrixXd::Zero(H, H);
        l.wk = Eigen::MatrixXd::Zero(H, H);
        l.wv = Eigen::MatrixXd::Zero(H, H);
        l.wo = Eigen::MatrixXd::Zero(H, H);
        l.bq = Eigen::VectorXd::Zero(H);
        l.bk = Eigen::VectorXd::Zero(H);
        l.bv = Eigen::VectorXd::Zero(H);
        l.bo = Eigen::VectorXd::Zero(H);
        l.ln1_gain = Eigen::VectorXd::Zero(H);
        l.ln1_bias = Eigen::VectorXd::Zero(H);
        l.w1 = Eigen::MatrixXd::Zero(H, F);
        l.b1 = Eigen::VectorXd::Zero(F);
        l.w2 = Eigen::MatrixXd::Zero(F, H);
        l.b2 = Eigen::VectorXd::Zero(H);
        l.ln2_gain = Eigen::VectorXd::Zero(H);
        l.ln2_bias = Eigen::VectorXd::Zero(H);
    }
    return w;
}

EncoderWeights EncoderWeights::random_init(const EncoderConfig& cfg) {
    EncoderWeights w = zeros_like(cfg);
    Rng rng = Rng::stream(cfg.init_seed, "encoder-init");
    w.for_each_tensor([&](const std::string& name, Eigen::Index rows, Eigen::Index cols,
                          double* data) {
        if (cols == 1) {
            // vectors are layer-norm gains (ones) or biases (zeros)
            if (name.find("gain") != std::string::npos)
                for (Eigen::Index i = 0; i < rows; ++i) data[i] = 1.0;
        } else {
            for (Eigen::Index i = 0; i < rows * cols; ++i) data[i] = kInitStd * rng.next_normal();
        }
    });
    return w;
}

void EncoderWeights::set_zero() {
    for_each_tensor([](const std::string&, Eigen::Index rows, Eigen::Index cols, double* data) {
        for (Eigen::Index i = 0; i < rows * cols; ++i) data[i] = 0.0;
    });
}

bool EncoderWeights::all_finite() const {
    bool ok = true;
    for_each_tensor([&](const std::string&, Eigen::Index rows, Eigen::Index cols,
                        const double* data) {
        for (Eigen::Index i = 0; i < rows * cols; ++i)
            if (!std::isfinite(data[i])) ok = false;
    });
    return ok;
}

size_t EncoderWeights::parameter_count() const {
    size_t n = 0;
    for_each_tensor([&](const std::string&, Eigen::Index rows, Eigen::Index cols, const double*) {
        n += size_t(rows) * size_t(cols);
    });
    return n;
}

std::vector<int> tokenize_paper(const Paper& paper, const Vocabulary& vocab,
                                const EncoderConfig& cfg, const FieldSet& fields,
                                const Tokenizer& tokenizer) {
    std::vector<int> ids;
    ids.push_back(Vocabulary::kCls);
    auto append_tokens = [&](const std::string& text) {
        for (const auto& tok : tokenizer.tokenize(text)) ids.push_back(vocab.id_of(tok));
    };
    append_tokens(paper.title);
    if (fields.abstract) {
        ids.push_back(Vocabulary::kSep);
        append_tokens(paper.abstract);
    }
    if (fields.venue && paper.venue) {
        ids.push_back(Vocabulary::kSep);
        append_tokens(*paper.venue);
    }
    if (fields.authors && paper.authors && !paper.authors->empty()) {
        ids.push_back(Vocabulary::kSep);
        for (const auto& a : *paper.authors) append_tokens(a);
    }
    if (Eigen::Index(ids.size()) > cfg.max_sequence_length)
        ids.resize(size_t(cfg.max_sequence_length));
    return ids;
}

Eigen::MatrixXd encoder_forward(const std::vector<int>& token_ids, const EncoderWeights& weights,
                                ForwardCache* cache) {
    const EncoderConfig& cfg = weights.config;
    check_token_ids(token_ids, cfg);
    const Eigen::Index T = Eigen::Index(token_ids.size());
    const Eigen::Index H = cfg.hidden_dim;

    Eigen::MatrixXd x(T, H);
    for (Eigen::Index t = 0; t < T; ++t)
        x.row(t) =
            weights.token_embedding.row(token_ids[size_t(t)]) + weights.position_embedding.row(t);

    LayerNormCache emb_ln;
    Eigen::MatrixXd h = layer_norm(x, weights.emb_ln_gain, weights.emb_ln_bias,
                                   cache ? &emb_ln : nullptr);
    if (cache) {
        cache->token_ids = token_ids;
        cache->embedded = x;
        cache->emb_ln = std::move(emb_ln);
        cache->emb_normed = h;
        cache->layers.clear();
        cache->layers.reserve(weights.layers.size());
    }
    for (const auto& lw : weights.layers) {
        LayerCache lc;
        h = layer_forward(h, lw, cfg.heads, T, cache ? &lc : nullptr);
        if (cache) cache->layers.push_back(std::move(lc));
    }
    if (cache) cache->output = h;
    return h;
}

void encoder_backward(const ForwardCache& cache, const EncoderWeights& weights,
                      const Eigen::MatrixXd& d_output, EncoderWeights& grads) {
    if (!weights.config.same_shape(grads.config))
        throw_config("gradient container shape does not match weights");
    Eigen::MatrixXd d = d_output;
    for (size_t i = weights.layers.size(); i-- > 0;) {
        d = layer_backward(d, cache.layers[i], weights.layers[i], weights.config.heads,
                           grads.layers[i]);
    }
    Eigen::MatrixXd d_emb =
        layer_norm_backward(d, cache.emb_ln, weights.emb_ln_gain, grads.emb_ln_gain,
                            grads.emb_ln_bias);
    for (Eigen::Index t = 0; t < d_emb.rows(); ++t) {
        grads.token_embedding.row(cache.token_ids[size_t(t)]) += d_emb.row(t);
        grads.position_embedding.row(t) += d_emb.row(t);
    }
}

Eigen::VectorXd encode(const Paper& paper, const EncoderWeights& weights, const Vocabulary& vocab,
                       const FieldSet& fields, const Tokenizer& tokenizer) {
    const std::vector<int> ids =
        tokenize_paper(paper, vocab, weights.config, fields, tokenizer);
    Eigen::MatrixXd out = encoder_forward(ids, weights, nullptr);
    return out.row(0).transpose();
}

std::vector<Eigen::VectorXd> encode_batch(const std::vector<std::vector<int>>& sequences,
                                          const EncoderWeights& weights) {
    const EncoderConfig& cfg = weights.config;
    std::vector<Eigen::VectorXd> result;
    result.reserve(sequences.size());
    if (sequences.empty()) return result;

    Eigen::Index max_len = 0;
    for (const auto& s : sequences) {
        check_token_ids(s, cfg);
        max_len = std::max(max_len, Eigen::Index(s.size()));
    }

    for (const auto& seq : sequences) {
        const Eigen::Index T = Eigen::Index(seq.size());
        std::vector<int> padded = seq;
        padded.resize(size_t(max_len), Vocabulary::kPad);

        Eigen::MatrixXd x(max_len, cfg.hidden_dim);
        for (Eigen::Index t = 0; t < max_len; ++t)
            x.row(t) = weights.token_embedding.row(padded[size_t(t)]) +
                       weights.position_embedding.row(t);
        Eigen::MatrixXd h = layer_norm(x, weights.emb_ln_gain, weights.emb_ln_bias, nullptr);
        // Key masking confines attention to the first T positions, so the
        // padded tail cannot leak into real rows (all other ops are row-wise).
        for (const auto& lw : weights.layers) h = layer_forward(h, lw, cfg.heads, T, nullptr);
        result.push_back(h.row(0).transpose());
    }
    return result;
}

}  // namespace citembed
