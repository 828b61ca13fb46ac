#pragma once

#include <iosfwd>
#include <memory>

#include "madegan/beats.hpp"
#include "madegan/metrics.hpp"
#include "madegan/nets.hpp"

namespace madegan {

struct TrainConfig {
    ArchConfig arch;
    double lr = 2e-4;
    double beta1 = 0.5;
    double beta2 = 0.999;
    std::size_t epochs = 50;
    std::size_t batch_size = 32;
    double lambda_rec = 1.0;
    double lambda_sparsity = 2e-4;
    double lambda_fm = 1.0;
    double lambda_adv = 1.0;
    bool memory_enabled = true;       // off: plain AE latent path
    bool adversarial_enabled = true;  // off: MemAE (reconstruction + sparsity only)
    std::uint64_t seed = 0;

    void validate() const;
};

// Per-beat z-normalization, clip to [-4, 4], map to [-1, 1]; returns
// [n, 1, 320] ready for the tanh-output generator.
Tensor beats_to_model_input(const std::vector<BeatRecord>& beats);

// Mean over the batch of the per-beat squared reconstruction error.
Tensor reconstruction_loss(const Tensor& x, const Tensor& xhat);

// (loss_D, loss_G_adv): loss_D = -mean[log D(x) + log(1 - D(xhat_detached))],
// loss_G_adv = -mean log D(xhat) (non-saturating form).
struct AdversarialLosses {
    Tensor loss_d;
    Tensor loss_g;
};
AdversarialLosses adversarial_losses(const Tensor& x, const Tensor& xhat, DiscriminatorNet& d,
                                     bool training);

// Mean over the batch of || h_D(x) - h_D(xhat) ||_2.
Tensor feature_matching_loss(const Tensor& x, const Tensor& xhat, DiscriminatorNet& d,
                             bool training);

struct StepLosses {
    double rec = 0.0, sparsity = 0.0, fm = 0.0, adv_g = 0.0, d = 0.0;
    double total_g() const { return rec + sparsity + fm + adv_g; }
};

// One discriminator update followed by one generator update on a batch of
// normal beats; with adversarial_enabled=false only reconstruction and
// sparsity train (the discriminator is untouched).
StepLosses train_step(const Tensor& batch, GeneratorNet& g, DiscriminatorNet& d, Adam& opt_g,
                      Adam& opt_d, const TrainConfig& cfg, std::mt19937_64& rng);

// || x - G(x) ||_2 per beat on the model-input scale, inference mode.
std::vector<double> anomaly_scores(const std::vector<BeatRecord>& beats, GeneratorNet& g,
                                   bool memory_enabled = true);

// Min-max rescale into [0, 1]; requires at least two distinct values.
std::vector<double> scale_scores(const std::vector<double>& scores);

struct Level1Model {
    std::unique_ptr<GeneratorNet> generator;
    std::unique_ptr<DiscriminatorNet> discriminator;
    ParamSet checkpoint_params();  // gen.* + disc.* handles
};

struct EpochLog {
    std::size_t epoch;
    StepLosses losses;  // epoch means
    double auroc = -1.0, auprc = -1.0;  // -1 when no eval set supplied
};

// Trains on normal beats; when eval is non-null its scaled scores are
// evaluated per epoch (per-epoch AUROC/AUPRC columns of the training log).
struct Level1EvalSet {
    std::vector<BeatRecord> beats;
    std::vector<int> labels;  // 1 = abnormal
};
Level1Model train_level1(const std::vector<BeatRecord>& normal_beats, const TrainConfig& cfg,
                         const Level1EvalSet* eval = nullptr, std::ostream* log_csv = nullptr);

// Fig-style protocol split: train_frac of the normal beats train level 1,
// the held-out normals plus all abnormal beats form the scored test pool.
struct Level1Split {
    std::vector<BeatRecord> train_normals;
    Level1EvalSet test;
};
Level1Split make_level1_split(const std::vector<BeatRecord>& all, double train_frac,
                              std::mt19937_64& rng);

}  // namespace madegan
