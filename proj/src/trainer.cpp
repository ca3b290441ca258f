#include "citembed/trainer.hpp"

#include <cmath>
#include <fstream>
#include <unordered_map>

#include <json.hpp>

#include "citembed/error.hpp"
#include "citembed/jsonl.hpp"
#include "citembed/rng.hpp"

namespace citembed {

namespace {

// d/dv ||q - v|| terms for the active hinge; the subgradient at zero
// distance is zero, keeping the loss defined when embeddings coincide.
void triplet_grads(const Eigen::VectorXd& vq, const Eigen::VectorXd& vp,
                   const Eigen::VectorXd& vn, Eigen::VectorXd& dq, Eigen::VectorXd& dp,
                   Eigen::VectorXd& dn) {
    dq = Eigen::VectorXd::Zero(vq.size());
    dp = Eigen::VectorXd::Zero(vq.size());
    dn = Eigen::VectorXd::Zero(vq.size());
    const Eigen::VectorXd qp = vq - vp;
    const Eigen::VectorXd qn = vq - vn;
    const double d_pos = qp.norm();
    const double d_neg = qn.norm();
    if (d_pos > 0.0) {
        dq += qp / d_pos;
        dp -= qp / d_pos;
    }
    if (d_neg > 0.0) {
        dq -= qn / d_neg;
        dn += qn / d_neg;
    }
}

struct AdamUpdater {
    const TrainerConfig& cfg;
    AdamState& state;

    void apply(EncoderWeights& weights, const EncoderWeights& grads, double lr) {
        state.step += 1;
        const double b1 = cfg.adam_beta1, b2 = cfg.adam_beta2;
        const double bc1 = 1.0 - std::pow(b1, double(state.step));
        const double bc2 = 1.0 - std::pow(b2, double(state.step));

        // walk the three containers in lockstep; for_each_tensor guarantees a
        // fixed enumeration order
        std::vector<double*> wp, mp, vp;
        std::vector<const double*> gp;
        std::vector<Eigen::Index> sizes;
        weights.for_each_tensor([&](const std::string&, Eigen::Index r, Eigen::Index c,
                                    double* d) {
            wp.push_back(d);
            sizes.push_back(r * c);
        });
        state.m.for_each_tensor(
            [&](const std::string&, Eigen::Index, Eigen::Index, double* d) { mp.push_back(d); });
        state.v.for_each_tensor(
            [&](const std::string&, Eigen::Index, Eigen::Index, double* d) { vp.push_back(d); });
        const_cast<EncoderWeights&>(grads).for_each_tensor(
            [&](const std::string&, Eigen::Index, Eigen::Index, double* d) { gp.push_back(d); });

        for (size_t t = 0; t < wp.size(); ++t) {
            double* w = wp[t];
            double* m = mp[t];
            double* v = vp[t];
            const double* g = gp[t];
            for (Eigen::Index i = 0; i < sizes[t]; ++i) {
                m[i] = b1 * m[i] + (1.0 - b1) * g[i];
                v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
                const double mhat = m[i] / bc1;
                const double vhat = v[i] / bc2;
                w[i] -= lr * mhat / (std::sqrt(vhat) + cfg.adam_eps);
            }
        }
    }
};

}  // namespace

void TrainerConfig::validate() const {
    if (!(margin > 0.0)) throw_config("trainer margin must be > 0");
    if (!(peak_lr > 0.0)) throw_config("trainer peak_lr must be > 0");
    if (!(warmup_cut_fraction > 0.0 && warmup_cut_fraction < 1.0))
        throw_config("trainer warmup_cut_fraction must lie in (0, 1)");
    if (epochs < 1) throw_config("trainer epochs must be >= 1");
    if (micro_batch < 1 || grad_accumulation < 1 || effective_batch() < 1)
        throw_config("trainer effective batch must be >= 1");
    if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0) || !(adam_beta2 >= 0.0 && adam_beta2 < 1.0))
        throw_config("trainer Adam betas must lie in [0, 1)");
    if (!(adam_eps > 0.0)) throw_config("trainer Adam epsilon must be > 0");
}

double l2_distance(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    if (a.size() != b.size())
        throw_data("dimension mismatch: " + std::to_string(a.size()) + " vs " +
                   std::to_string(b.size()));
    return (a - b).norm();
}

double triplet_loss(const Eigen::VectorXd& vq, const Eigen::VectorXd& vp,
                    const Eigen::VectorXd& vn, double margin) {
    if (!(margin > 0.0)) throw_config("triplet margin must be > 0");
    const double d_pos = l2_distance(vq, vp);
    const double d_neg = l2_distance(vq, vn);
    return std::max(d_pos - d_neg + margin, 0.0);
}

double lr_at(int64_t step, int64_t total_steps, const TrainerConfig& cfg) {
    if (total_steps < 1) throw_config("lr schedule needs total_steps >= 1");
    if (step < 0 || step > total_steps)
        throw_config("lr schedule step " + std::to_string(step) + " outside [0, " +
                     std::to_string(total_steps) + "]");
    if (step == total_steps) return 0.0;
    const int64_t warmup =
        int64_t(std::ceil(cfg.warmup_cut_fraction * double(total_steps)));
    if (step <= warmup) return cfg.peak_lr * double(step) / double(warmup);
    return cfg.peak_lr * double(total_steps - step) / double(total_steps - warmup);
}

double triplet_forward_backward(const std::vector<int>& query, const std::vector<int>& positive,
                                const std::vector<int>& negative, const EncoderWeights& weights,
                                double margin, EncoderWeights& grads) {
    ForwardCache cq, cp, cn;
    encoder_forward(query, weights, &cq);
    encoder_forward(positive, weights, &cp);
    encoder_forward(negative, weights, &cn);
    const Eigen::VectorXd vq = cq.output.row(0).transpose();
    const Eigen::VectorXd vp = cp.output.row(0).transpose();
    const Eigen::VectorXd vn = cn.output.row(0).transpose();

    const double loss = triplet_loss(vq, vp, vn, margin);
    if (loss <= 0.0) return loss;  // hinge inactive: subgradient 0

    Eigen::VectorXd dq, dp, dn;
    triplet_grads(vq, vp, vn, dq, dp, dn);

    auto backprop = [&](const ForwardCache& cache, const Eigen::VectorXd& d_cls) {
        Eigen::MatrixXd d_out =
            Eigen::MatrixXd::Zero(cache.output.rows(), cache.output.cols());
        d_out.row(0) = d_cls.transpose();
        encoder_backward(cache, weights, d_out, grads);
    };
    backprop(cq, dq);
    backprop(cp, dp);
    backprop(cn, dn);
    return loss;
}

TrainResult train(const Corpus& corpus, const std::vector<TrainingTriplet>& triplets,
                  const EncoderConfig& enc_cfg, const TrainerConfig& tr_cfg,
                  const Vocabulary& vocab, const FieldSet& fields, const Tokenizer& tokenizer,
                  const EncoderWeights* init, const std::string& checkpoint_path) {
    enc_cfg.validate();
    tr_cfg.validate();
    if (triplets.empty()) throw_data("training requires a non-empty triplet list");

    // tokenize each distinct paper once
    std::unordered_map<std::string, std::vector<int>> token_cache;
    auto tokens_of = [&](const std::string& id) -> const std::vector<int>& {
        auto it = token_cache.find(id);
        if (it != token_cache.end()) return it->second;
        const Paper& p = corpus.paper(id);  // throws on unresolvable id
        return token_cache.emplace(id, tokenize_paper(p, vocab, enc_cfg, fields, tokenizer))
            .first->second;
    };
    for (const auto& t : triplets) {
        tokens_of(t.query);
        tokens_of(t.positive);
        tokens_of(t.negative);
    }

    EncoderWeights weights;
    if (init) {
        if (!init->config.same_shape(enc_cfg))
            throw_config("initial weights do not match the encoder config");
        weights = *init;
    } else {
        weights = EncoderWeights::random_init(enc_cfg);
    }

    const int64_t n = int64_t(triplets.size());
    const int64_t eff = tr_cfg.effective_batch();
    const int64_t steps_per_epoch = (n + eff - 1) / eff;
    const int64_t total_steps = steps_per_epoch * tr_cfg.epochs;

    AdamState adam = AdamState::zeros_like(enc_cfg);
    AdamUpdater updater{tr_cfg, adam};
    EncoderWeights grads = EncoderWeights::zeros_like(enc_cfg);

    TrainResult result;
    result.log.steps.reserve(size_t(total_steps));

    std::vector<size_t> order(static_cast<size_t>(n));
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;

    int64_t step_index = 0;  // 0-based; lr evaluated at step_index + 1
    for (int epoch = 0; epoch < tr_cfg.epochs; ++epoch) {
        Rng shuffle_rng = Rng::stream(tr_cfg.seed, "shuffle", uint64_t(epoch));
        shuffle_rng.shuffle(order);

        double epoch_loss_sum = 0.0;
        int64_t cursor = 0;
        while (cursor < n) {
            const int64_t batch_n = std::min(eff, n - cursor);
            grads.set_zero();
            double batch_loss_sum = 0.0;
            // micro-batches exist for memory shaping only; gradients
            // accumulate across all of them before the optimizer step
            for (int64_t i = 0; i < batch_n; ++i) {
                const TrainingTriplet& t = triplets[order[size_t(cursor + i)]];
                const double loss =
                    triplet_forward_backward(tokens_of(t.query), tokens_of(t.positive),
                                             tokens_of(t.negative), weights, tr_cfg.margin, grads);
                if (!std::isfinite(loss))
                    throw_numeric("non-finite loss at step " + std::to_string(step_index + 1) +
                                  " on triplet (" + t.query + ", " + t.positive + ", " +
                                  t.negative + ")");
                batch_loss_sum += loss;
            }
            // mean aggregation keeps lr meaningful for ragged final batches
            const double scale = 1.0 / double(batch_n);
            grads.for_each_tensor(
                [&](const std::string&, Eigen::Index r, Eigen::Index c, double* d) {
                    for (Eigen::Index i = 0; i < r * c; ++i) d[i] *= scale;
                });
            if (!grads.all_finite()) {
                const TrainingTriplet& t0 = triplets[order[size_t(cursor)]];
                throw_numeric("non-finite gradient at step " + std::to_string(step_index + 1) +
                              " (batch starting at triplet (" + t0.query + ", " + t0.positive +
                              ", " + t0.negative + "))");
            }

            const double lr = lr_at(step_index + 1, total_steps, tr_cfg);
            updater.apply(weights, grads, lr);
            result.log.steps.push_back(
                StepRecord{step_index + 1, lr, batch_loss_sum / double(batch_n)});
            epoch_loss_sum += batch_loss_sum;
            cursor += batch_n;
            ++step_index;
        }
        result.log.epoch_mean_loss.push_back(epoch_loss_sum / double(n));
        if (!checkpoint_path.empty()) save_checkpoint(checkpoint_path, weights, adam);
    }

    if (!weights.all_finite()) throw_numeric("trained weights contain non-finite values");
    result.weights = std::move(weights);
    return result;
}

void write_train_log(const std::string& path, const TrainLog& log) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw_data("cannot open training log for writing: " + path);
    for (const auto& s : log.steps) {
        nlohmann::ordered_json j{{"step", s.step}, {"lr", s.lr}, {"loss", s.loss}};
        out << j.dump() << "\n";
    }
    for (size_t e = 0; e < log.epoch_mean_loss.size(); ++e) {
        nlohmann::ordered_json j{{"epoch", e + 1}, {"epoch_mean_loss", log.epoch_mean_loss[e]}};
        out << j.dump() << "\n";
    }
    if (!out) throw_data("failed writing training log: " + path);
}

}  // namespace citembed
