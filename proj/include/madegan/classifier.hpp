#pragma once

#include <iosfwd>
#include <memory>

#include "madegan/beats.hpp"
#include "madegan/metrics.hpp"
#include "madegan/nets.hpp"

namespace madegan {

// Second-level classes: the abnormal beat types, indexed densely.
inline constexpr std::size_t kAbnormalClasses = 3;
int abnormal_class_index(BeatClass c);  // S=0, V=1, F=2; Normal -> -1
BeatClass abnormal_class_from_index(int idx);

// N_b index sets over a labeled dataset, each with every class down-sampled
// (without replacement, independent draws per set) to the smallest class size.
struct BalancedSubsets {
    std::vector<std::vector<std::size_t>> subsets;
    std::size_t per_class = 0;
};
BalancedSubsets build_balanced_subsets(const std::vector<int>& labels, std::size_t n_b,
                                       std::mt19937_64& rng);

// Frozen truncated discriminator: the trained stack minus its last conv and
// fully connected layers, run with inference-mode batch norm.
class FeatureExtractor {
public:
    // Random-initialized extractor of the same shape (transfer baseline).
    FeatureExtractor(const ArchConfig& arch, std::mt19937_64& rng);
    // Loads disc.* values from a level-1 checkpoint parameter set.
    FeatureExtractor(const ArchConfig& arch, const ParamSet& checkpoint);

    // [n, 1, 320] -> [n, 16C, 10]; never tracks gradients.
    Tensor features(const Tensor& x);
    double checksum() const { return net_->params().checksum(); }
    const ArchConfig& arch() const { return net_->arch(); }

private:
    std::unique_ptr<DiscriminatorNet> net_;
};

// Shared shallow conv stage (32 channels, kernel 1, stride 2) feeding n_b
// branch output layers, each a fully connected softmax over the classes.
class BranchHead {
public:
    BranchHead(const ArchConfig& arch, std::size_t n_branches, std::size_t n_classes,
               std::mt19937_64& rng);

    std::size_t branches() const { return branch_w_.size(); }
    std::size_t classes() const { return n_classes_; }

    Tensor shared(const Tensor& features, bool training);         // [n, 32, 5]
    Tensor branch_logits(const Tensor& shared_flat, std::size_t branch);  // [n, M]
    // Mean of the per-branch softmax outputs; stays on the simplex.
    Tensor predict_probs(const Tensor& features);

    ParamSet& params() { return params_; }

private:
    std::size_t n_classes_;
    ParamSet params_;
    Tensor shared_kernel_;  // [32, 16C, 1]
    ops::BatchNormState shared_bn_;
    double leaky_slope_;
    std::vector<Tensor> branch_w_;  // [M, 32*5]
    std::vector<Tensor> branch_b_;  // [M]
};

// Indicator-gated multi-branch cross-entropy: branch i sums -log p_i(y) over
// the samples belonging to subset i. Samples in no subset are skipped and
// counted.
struct MbLossResult {
    Tensor loss;
    std::size_t contributions = 0;  // gated (sample, branch) pairs
    std::size_t skipped = 0;        // samples in no subset
};
MbLossResult mb_loss(const Tensor& features, const std::vector<int>& labels,
                     const std::vector<std::vector<bool>>& membership, BranchHead& head,
                     bool training);

// Branch-averaged class probabilities and argmax labels (ties go to the
// smaller class index).
std::vector<std::vector<double>> predict_probs(const std::vector<BeatRecord>& beats,
                                               BranchHead& head, FeatureExtractor& extractor);
std::vector<int> argmax_labels(const std::vector<std::vector<double>>& probs);

struct SecondLevelConfig {
    std::size_t n_branches = 4;
    bool multi_branch = true;  // off: one output head on the unbalanced data
    double lr = 2e-4;
    double beta1 = 0.5;
    double beta2 = 0.999;
    std::size_t epochs = 30;
    std::size_t batch_size = 32;
    double test_fraction = 0.1;
    std::uint64_t seed = 0;
};

struct SecondLevelReport {
    std::vector<std::vector<std::size_t>> confusion_matrix;
    double accuracy = 0.0;
    double macro_recall = 0.0;
    double macro_f1 = 0.0;
    std::size_t skipped_samples = 0;
    std::vector<std::size_t> test_indices;   // into the abnormal input list
    std::vector<int> test_truth;             // class indices
    std::vector<int> test_predicted;
    std::vector<std::vector<double>> test_probs;
};

struct SecondLevelModel {
    std::unique_ptr<BranchHead> head;
    SecondLevelReport report;
};

// Stratified 90/10 split of the abnormal beats, Adam on the head only; the
// extractor checksum is asserted unchanged. Errors if a class is missing
// from the training split.
SecondLevelModel train_second_level(const std::vector<BeatRecord>& abnormal_beats,
                                    FeatureExtractor& extractor, const SecondLevelConfig& cfg,
                                    std::ostream* log_csv = nullptr);

// beat id, per-class probabilities, predicted and true class symbols.
void write_predictions_csv(std::ostream& os, const SecondLevelReport& report);

}  // namespace madegan
