#include "madegan/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <ostream>

#include "madegan/train.hpp"

namespace madegan {

int abnormal_class_index(BeatClass c) {
    int i = static_cast<int>(c) - 1;
    return i >= 0 && i < static_cast<int>(kAbnormalClasses) ? i : -1;
}

BeatClass abnormal_class_from_index(int idx) {
    if (idx < 0 || idx >= static_cast<int>(kAbnormalClasses))
        throw BeatIoError("abnormal_class_from_index: index out of range");
    return static_cast<BeatClass>(idx + 1);
}

BalancedSubsets build_balanced_subsets(const std::vector<int>& labels, std::size_t n_b,
                                       std::mt19937_64& rng) {
    if (n_b < 1) throw MetricError("build_balanced_subsets: need at least one subset");
    int max_label = -1;
    for (int l : labels) max_label = std::max(max_label, l);
    std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(max_label + 1));
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] < 0) throw MetricError("build_balanced_subsets: negative label");
        by_class[static_cast<std::size_t>(labels[i])].push_back(i);
    }
    by_class.erase(std::remove_if(by_class.begin(), by_class.end(),
                                  [](const auto& v) { return v.empty(); }),
                   by_class.end());
    if (by_class.size() < 2)
        throw MetricError("build_balanced_subsets: need at least two nonempty classes");

    BalancedSubsets out;
    out.per_class = by_class[0].size();
    for (auto& cls : by_class) out.per_class = std::min(out.per_class, cls.size());
    for (std::size_t s = 0; s < n_b; ++s) {
        std::vector<std::size_t> subset;
        for (auto cls : by_class) {
            std::shuffle(cls.begin(), cls.end(), rng);
            subset.insert(subset.end(), cls.begin(),
                          cls.begin() + static_cast<long>(out.per_class));
        }
        std::sort(subset.begin(), subset.end());
        out.subsets.push_back(std::move(subset));
    }
    return out;
}

FeatureExtractor::FeatureExtractor(const ArchConfig& arch, std::mt19937_64& rng)
    : net_(std::make_unique<DiscriminatorNet>(arch, rng, false)) {}

FeatureExtractor::FeatureExtractor(const ArchConfig& arch, const ParamSet& checkpoint) {
    std::mt19937_64 rng(0);
    net_ = std::make_unique<DiscriminatorNet>(arch, rng, false);
    for (auto& name : net_->params().names()) {
        if (!checkpoint.has(name))
            throw TensorError("FeatureExtractor: checkpoint missing parameter '" + name + "'");
        const Tensor& src = checkpoint.at(name);
        Tensor& dst = net_->params().at(name);
        if (src.shape() != dst.shape())
            throw TensorError("FeatureExtractor: shape mismatch for '" + name + "'");
        std::copy(src.data(), src.data() + src.numel(), dst.data());
    }
}

Tensor FeatureExtractor::features(const Tensor& x) { return net_->extract_features(x); }

BranchHead::BranchHead(const ArchConfig& arch, std::size_t n_branches, std::size_t n_classes,
                       std::mt19937_64& rng)
    : n_classes_(n_classes), leaky_slope_(arch.leaky_slope) {
    if (n_branches < 1) throw TensorError("BranchHead: need at least one branch");
    if (n_classes < 2) throw TensorError("BranchHead: need at least two classes");
    std::size_t c_in = 16 * arch.channel_base;
    shared_kernel_ =
        params_.add("head.shared.kernel", Tensor::randn({32, c_in, 1}, rng, 0.02, true));
    shared_bn_ = ops::make_batchnorm(32);
    params_.add("head.shared.bn.gamma", shared_bn_.gamma);
    params_.add("head.shared.bn.beta", shared_bn_.beta);
    params_.add("head.shared.bn.running_mean", shared_bn_.running_mean);
    params_.add("head.shared.bn.running_var", shared_bn_.running_var);
    for (std::size_t b = 0; b < n_branches; ++b) {
        std::string base = "head.branch." + std::to_string(b);
        branch_w_.push_back(
            params_.add(base + ".weight", Tensor::randn({n_classes, 32 * 5}, rng, 0.02, true)));
        branch_b_.push_back(params_.add(base + ".bias", Tensor::zeros({n_classes}, true)));
    }
}

Tensor BranchHead::shared(const Tensor& features, bool training) {
    Tensor h = ops::conv1d(features, shared_kernel_, 2, 0);  // [n, 32, 5]
    h = ops::batchnorm1d(h, shared_bn_, training);
    return ops::leaky_relu(h, leaky_slope_);
}

Tensor BranchHead::branch_logits(const Tensor& shared_flat, std::size_t branch) {
    return ops::linear(shared_flat, branch_w_.at(branch), branch_b_.at(branch));
}

Tensor BranchHead::predict_probs(const Tensor& features) {
    Tensor h = shared(features, false);
    Tensor flat = ops::reshape(h, {h.dim(0), 32 * 5});
    Tensor acc;
    for (std::size_t b = 0; b < branches(); ++b) {
        Tensor p = ops::softmax_rows(branch_logits(flat, b));
        acc = b == 0 ? p : ops::add(acc, p);
    }
    return ops::scalar_mul(acc, 1.0 / static_cast<double>(branches()));
}

MbLossResult mb_loss(const Tensor& features, const std::vector<int>& labels,
                     const std::vector<std::vector<bool>>& membership, BranchHead& head,
                     bool training) {
    std::size_t n = features.dim(0);
    if (labels.size() != n || membership.size() != n)
        throw TensorError("mb_loss: label/membership count mismatch");
    MbLossResult out;
    for (std::size_t i = 0; i < n; ++i) {
        if (membership[i].size() != head.branches())
            throw TensorError("mb_loss: membership width != branch count");
        bool any = false;
        for (bool m : membership[i]) any = any || m;
        if (!any) ++out.skipped;
    }
    Tensor h = head.shared(features, training);
    Tensor flat = ops::reshape(h, {n, 32 * 5});
    Tensor total = Tensor::scalar(0.0);
    for (std::size_t b = 0; b < head.branches(); ++b) {
        std::vector<double> w(n, 0.0);
        std::size_t gated = 0;
        for (std::size_t i = 0; i < n; ++i)
            if (membership[i][b]) {
                w[i] = 1.0;
                ++gated;
            }
        if (!gated) continue;
        out.contributions += gated;
        Tensor logits = head.branch_logits(flat, b);
        total = ops::add(total, ops::cross_entropy_rows_weighted(logits, labels, w));
    }
    out.loss = total;
    return out;
}

std::vector<std::vector<double>> predict_probs(const std::vector<BeatRecord>& beats,
                                               BranchHead& head, FeatureExtractor& extractor) {
    std::vector<std::vector<double>> out;
    out.reserve(beats.size());
    const std::size_t chunk = 256;
    for (std::size_t start = 0; start < beats.size(); start += chunk) {
        std::size_t end = std::min(beats.size(), start + chunk);
        std::vector<BeatRecord> slice(beats.begin() + static_cast<long>(start),
                                      beats.begin() + static_cast<long>(end));
        Tensor x = beats_to_model_input(slice);
        Tensor p = head.predict_probs(extractor.features(x));
        std::size_t m = p.dim(1);
        for (std::size_t i = 0; i < slice.size(); ++i)
            out.emplace_back(p.data() + i * m, p.data() + (i + 1) * m);
    }
    return out;
}

std::vector<int> argmax_labels(const std::vector<std::vector<double>>& probs) {
    std::vector<int> out;
    out.reserve(probs.size());
    for (auto& row : probs) {
        std::size_t best = 0;
        for (std::size_t j = 1; j < row.size(); ++j)
            if (row[j] > row[best]) best = j;
        out.push_back(static_cast<int>(best));
    }
    return out;
}

SecondLevelModel train_second_level(const std::vector<BeatRecord>& abnormal_beats,
                                    FeatureExtractor& extractor, const SecondLevelConfig& cfg,
                                    std::ostream* log_csv) {
    std::vector<int> labels;
    labels.reserve(abnormal_beats.size());
    for (auto& b : abnormal_beats) {
        int idx = abnormal_class_index(b.label);
        if (idx < 0)
            throw BeatIoError("train_second_level: normal beat in the abnormal dataset");
        labels.push_back(idx);
    }
    if (abnormal_beats.size() < 2 * kAbnormalClasses)
        throw BeatIoError("train_second_level: too few beats");

    std::mt19937_64 rng(cfg.seed);
    double extractor_checksum = extractor.checksum();

    // stratified split: one fold of round(1/test_fraction) as the test set
    std::size_t k = std::max<std::size_t>(
        2, static_cast<std::size_t>(std::llround(1.0 / cfg.test_fraction)));
    auto folds = kfold_stratified(labels, k, rng);
    std::vector<std::size_t> train_idx = folds[0].train;
    std::vector<std::size_t> test_idx = folds[0].test;

    std::vector<int> train_labels;
    std::vector<BeatRecord> train_beats;
    for (auto i : train_idx) {
        train_labels.push_back(labels[i]);
        train_beats.push_back(abnormal_beats[i]);
    }
    std::array<bool, kAbnormalClasses> present{};
    for (int l : train_labels) present[static_cast<std::size_t>(l)] = true;
    for (std::size_t c = 0; c < kAbnormalClasses; ++c)
        if (!present[c])
            throw BeatIoError(std::string("train_second_level: class ") +
                              beat_class_symbol(abnormal_class_from_index(static_cast<int>(c))) +
                              " absent from the training split");

    std::size_t n_branches = cfg.multi_branch ? cfg.n_branches : 1;
    SecondLevelModel model;
    model.head = std::make_unique<BranchHead>(extractor.arch(), n_branches, kAbnormalClasses, rng);
    Adam opt(cfg.lr, cfg.beta1, cfg.beta2);

    // per-sample branch membership over the training subset
    std::vector<std::vector<bool>> membership(train_beats.size(),
                                              std::vector<bool>(n_branches, false));
    if (cfg.multi_branch) {
        BalancedSubsets subs = build_balanced_subsets(train_labels, n_branches, rng);
        for (std::size_t b = 0; b < n_branches; ++b)
            for (auto i : subs.subsets[b]) membership[i][b] = true;
    } else {
        for (auto& row : membership) row[0] = true;
    }

    std::size_t skipped_total = 0;
    if (log_csv) *log_csv << "epoch,loss\n";
    std::vector<std::size_t> order(train_beats.size());
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        double epoch_loss = 0.0;
        std::size_t epoch_contrib = 0;
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            std::size_t end = std::min(order.size(), start + cfg.batch_size);
            if (end - start < 2) break;  // batch norm needs >= 2 samples
            std::vector<BeatRecord> slice;
            std::vector<int> slice_labels;
            std::vector<std::vector<bool>> slice_membership;
            for (std::size_t i = start; i < end; ++i) {
                slice.push_back(train_beats[order[i]]);
                slice_labels.push_back(train_labels[order[i]]);
                slice_membership.push_back(membership[order[i]]);
            }
            Tensor feats = extractor.features(beats_to_model_input(slice));
            MbLossResult r = mb_loss(feats, slice_labels, slice_membership, *model.head, true);
            skipped_total += r.skipped;
            if (!r.contributions) continue;
            epoch_loss += r.loss.item();
            epoch_contrib += r.contributions;
            Tensor step_loss =
                ops::scalar_mul(r.loss, 1.0 / static_cast<double>(r.contributions));
            model.head->params().zero_grad();
            step_loss.backward();
            opt.step(model.head->params());
        }
        if (log_csv)
            *log_csv << epoch << "," << std::setprecision(8)
                     << (epoch_contrib ? epoch_loss / static_cast<double>(epoch_contrib) : 0.0)
                     << "\n";
    }

    if (extractor.checksum() != extractor_checksum)
        throw TensorError("train_second_level: frozen extractor parameters changed");

    SecondLevelReport& rep = model.report;
    rep.skipped_samples = skipped_total;
    rep.test_indices = test_idx;
    std::vector<BeatRecord> test_beats;
    for (auto i : test_idx) {
        test_beats.push_back(abnormal_beats[i]);
        rep.test_truth.push_back(labels[i]);
    }
    rep.test_probs = predict_probs(test_beats, *model.head, extractor);
    rep.test_predicted = argmax_labels(rep.test_probs);
    rep.confusion_matrix = confusion(rep.test_truth, rep.test_predicted, kAbnormalClasses);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < rep.test_truth.size(); ++i)
        if (rep.test_truth[i] == rep.test_predicted[i]) ++correct;
    rep.accuracy = rep.test_truth.empty()
                       ? 0.0
                       : static_cast<double>(correct) / static_cast<double>(rep.test_truth.size());
    rep.macro_recall = macro_recall(rep.confusion_matrix);
    rep.macro_f1 = macro_f1(rep.confusion_matrix);
    return model;
}

void write_predictions_csv(std::ostream& os, const SecondLevelReport& report) {
    os << "beat_index";
    for (std::size_t c = 0; c < kAbnormalClasses; ++c)
        os << ",p_" << beat_class_symbol(abnormal_class_from_index(static_cast<int>(c)));
    os << ",predicted,truth\n";
    os << std::setprecision(8);
    for (std::size_t i = 0; i < report.test_indices.size(); ++i) {
        os << report.test_indices[i];
        for (double p : report.test_probs[i]) os << "," << p;
        os << "," << beat_class_symbol(abnormal_class_from_index(report.test_predicted[i])) << ","
           << beat_class_symbol(abnormal_class_from_index(report.test_truth[i])) << "\n";
    }
}

}  // namespace madegan
