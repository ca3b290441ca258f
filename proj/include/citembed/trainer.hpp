#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "citembed/corpus.hpp"
#include "citembed/encoder.hpp"
#include "citembed/sampler.hpp"
#include "citembed/text.hpp"
#include "citembed/weights_io.hpp"

namespace citembed {

struct TrainerConfig {
    double margin = 1.0;
    double peak_lr = 2e-5;
    double warmup_cut_fraction = 0.1;
    int epochs = 2;
    int micro_batch = 8;
    int grad_accumulation = 4;  // effective batch = micro_batch * grad_accumulation
    double adam_beta1 = 0.9;    // Adam defaults are assumptions, surfaced as config
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    uint64_t seed = 0;

    int effective_batch() const { return micro_batch * grad_accumulation; }
    void validate() const;
};

struct StepRecord {
    int64_t step = 0;  // 1-based optimizer step
    double lr = 0.0;
    double loss = 0.0;  // mean triplet loss over the effective batch
};

struct TrainLog {
    std::vector<StepRecord> steps;
    std::vector<double> epoch_mean_loss;  // mean per-triplet loss, one entry per epoch
};

struct TrainResult {
    EncoderWeights weights;
    TrainLog log;
};

double l2_distance(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

// max(d(vq,vp) - d(vq,vn) + m, 0)
double triplet_loss(const Eigen::VectorXd& vq, const Eigen::VectorXd& vp,
                    const Eigen::VectorXd& vn, double margin);

// Slanted-triangular schedule: linear 0 -> peak over the first
// ceil(warmup_cut_fraction * total_steps) steps, then linear decay to 0 at
// total_steps. step == total_steps always yields 0.
double lr_at(int64_t step, int64_t total_steps, const TrainerConfig& cfg);

// Forward + backward for one triplet of token sequences. Returns the loss
// and accumulates parameter gradients into `grads` (no-op when the hinge is
// inactive).
double triplet_forward_backward(const std::vector<int>& query, const std::vector<int>& positive,
                                const std::vector<int>& negative, const EncoderWeights& weights,
                                double margin, EncoderWeights& grads);

// Full training loop: seeded shuffle per epoch, gradient accumulation over
// micro-batches, Adam with the slanted-triangular schedule. Deterministic on
// one thread. Starts from `init` when given, otherwise from
// EncoderWeights::random_init(enc_cfg). Writes a checkpoint after each epoch
// when checkpoint_path is non-empty.
TrainResult train(const Corpus& corpus, const std::vector<TrainingTriplet>& triplets,
                  const EncoderConfig& enc_cfg, const TrainerConfig& tr_cfg,
                  const Vocabulary& vocab, const FieldSet& fields, const Tokenizer& tokenizer,
                  const EncoderWeights* init = nullptr, const std::string& checkpoint_path = "");

void write_train_log(const std::string& path, const TrainLog& log);

}  // namespace citembed
