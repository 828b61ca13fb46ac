#include "madegan/train.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <ostream>

namespace madegan {

void TrainConfig::validate() const {
    if (lambda_rec < 0 || lambda_sparsity < 0 || lambda_fm < 0 || lambda_adv < 0)
        throw TensorError("TrainConfig: loss weights must be nonnegative");
    if (batch_size < 2) throw TensorError("TrainConfig: batch size must be >= 2");
    if (epochs < 1) throw TensorError("TrainConfig: epochs must be >= 1");
    if (arch.channel_base < 1 || arch.latent_dim < 1 || arch.memory_slots < 1)
        throw TensorError("TrainConfig: architecture extents must be positive");
}

Tensor beats_to_model_input(const std::vector<BeatRecord>& beats) {
    std::vector<double> v;
    v.reserve(beats.size() * kBeatLength);
    for (auto& b : beats) {
        BeatRecord nb = normalize_beat(b);
        for (double x : nb.waveform) v.push_back(std::clamp(x, -4.0, 4.0) / 4.0);
    }
    return Tensor({beats.size(), 1, kBeatLength}, std::move(v), false);
}

Tensor reconstruction_loss(const Tensor& x, const Tensor& xhat) {
    Tensor diff = ops::sub(xhat, x);
    Tensor per_beat = ops::sum_rows(ops::square(diff));  // [n]
    return ops::mean(per_beat);
}

AdversarialLosses adversarial_losses(const Tensor& x, const Tensor& xhat, DiscriminatorNet& d,
                                     bool training) {
    AdversarialLosses out;
    auto d_real = d.forward(x, training);
    auto d_fake_det = d.forward(xhat.detach(), training);
    Tensor ld = ops::scalar_mul(
        ops::add(ops::mean(ops::log_sigmoid(d_real.logit)),
                 ops::mean(ops::log_sigmoid(ops::scalar_mul(d_fake_det.logit, -1.0)))),
        -1.0);
    auto d_fake = d.forward(xhat, training);
    Tensor lg = ops::scalar_mul(ops::mean(ops::log_sigmoid(d_fake.logit)), -1.0);
    out.loss_d = ld;
    out.loss_g = lg;
    return out;
}

namespace {

Tensor batch_l2_mean(const Tensor& diff) {
    // sqrt guarded away from zero; the epsilon is invisible at test
    // tolerances but keeps the gradient finite at exact equality
    Tensor ss = ops::add_scalar(ops::sum_rows(ops::square(diff)), 1e-24);
    return ops::mean(ops::sqrt_op(ss));
}

}  // namespace

Tensor feature_matching_loss(const Tensor& x, const Tensor& xhat, DiscriminatorNet& d,
                             bool training) {
    auto h_real = d.forward(x, training).features;
    auto h_fake = d.forward(xhat, training).features;
    return batch_l2_mean(ops::sub(h_real, h_fake));
}

StepLosses train_step(const Tensor& batch, GeneratorNet& g, DiscriminatorNet& d, Adam& opt_g,
                      Adam& opt_d, const TrainConfig& cfg, std::mt19937_64& rng) {
    if (batch.dim(0) < 2) throw TensorError("train_step: batch must be >= 2");
    StepLosses losses;

    auto gen = g.forward(batch, true, cfg.memory_enabled);

    if (cfg.adversarial_enabled) {
        // discriminator update on the detached reconstruction
        auto d_real = d.forward(batch, true);
        auto d_fake = d.forward(gen.reconstruction.detach(), true);
        Tensor loss_d = ops::scalar_mul(
            ops::add(ops::mean(ops::log_sigmoid(d_real.logit)),
                     ops::mean(ops::log_sigmoid(ops::scalar_mul(d_fake.logit, -1.0)))),
            -1.0);
        losses.d = loss_d.item();
        if (!std::isfinite(losses.d)) throw TensorError("train_step: discriminator loss is NaN");
        d.params().zero_grad();
        loss_d.backward();
        opt_d.step(d.params());
    }

    // generator update
    Tensor rec = reconstruction_loss(batch, gen.reconstruction);
    losses.rec = rec.item();
    Tensor total = ops::scalar_mul(rec, cfg.lambda_rec);
    if (cfg.memory_enabled) {
        Tensor sp = sparsity_loss(gen.weights);
        losses.sparsity = sp.item();
        total = ops::add(total, ops::scalar_mul(sp, cfg.lambda_sparsity));
    }
    if (cfg.adversarial_enabled) {
        auto h_real = d.forward(batch, true).features;
        auto d_fake = d.forward(gen.reconstruction, true);
        Tensor fm = batch_l2_mean(ops::sub(h_real.detach(), d_fake.features));
        Tensor adv = ops::scalar_mul(ops::mean(ops::log_sigmoid(d_fake.logit)), -1.0);
        losses.fm = fm.item();
        losses.adv_g = adv.item();
        total = ops::add(total, ops::add(ops::scalar_mul(fm, cfg.lambda_fm),
                                         ops::scalar_mul(adv, cfg.lambda_adv)));
    }
    if (!std::isfinite(total.item()))
        throw TensorError("train_step: generator loss is NaN (rec=" + std::to_string(losses.rec) +
                          ")");
    g.params().zero_grad();
    d.params().zero_grad();  // discard adversarial spillover into D
    total.backward();
    if (!cfg.memory_enabled) {
        // the prototype bank sits outside the graph in the plain-AE ablation;
        // give it an explicit zero gradient so the optimizer can iterate it
        Tensor& omega = g.params().at("gen.memory.omega");
        if (omega.requires_grad()) omega.grad();
    }
    opt_g.step(g.params());
    d.params().zero_grad();
    if (cfg.memory_enabled) g.memory().reinit_dead_rows(rng);
    return losses;
}

std::vector<double> anomaly_scores(const std::vector<BeatRecord>& beats, GeneratorNet& g,
                                   bool memory_enabled) {
    std::vector<double> scores;
    scores.reserve(beats.size());
    const std::size_t chunk = 256;
    for (std::size_t start = 0; start < beats.size(); start += chunk) {
        std::size_t end = std::min(beats.size(), start + chunk);
        std::vector<BeatRecord> slice(beats.begin() + static_cast<long>(start),
                                      beats.begin() + static_cast<long>(end));
        Tensor x = beats_to_model_input(slice);
        auto out = g.forward(x, false, memory_enabled);
        for (std::size_t i = 0; i < slice.size(); ++i) {
            double ss = 0.0;
            const double* xv = x.data() + i * kBeatLength;
            const double* rv = out.reconstruction.data() + i * kBeatLength;
            for (std::size_t t = 0; t < kBeatLength; ++t) {
                double dd = xv[t] - rv[t];
                ss += dd * dd;
            }
            scores.push_back(std::sqrt(ss));
        }
    }
    return scores;
}

std::vector<double> scale_scores(const std::vector<double>& scores) {
    if (scores.size() < 2) throw MetricError("scale_scores: need at least two scores");
    auto [mn_it, mx_it] = std::minmax_element(scores.begin(), scores.end());
    double mn = *mn_it, mx = *mx_it;
    if (mx == mn) throw MetricError("scale_scores: zero score range");
    std::vector<double> out;
    out.reserve(scores.size());
    for (double s : scores) out.push_back((s - mn) / (mx - mn));
    return out;
}

ParamSet Level1Model::checkpoint_params() {
    ParamSet ps;
    merge_params(ps, "", generator->params());
    merge_params(ps, "", discriminator->params());
    return ps;
}

Level1Model train_level1(const std::vector<BeatRecord>& normal_beats, const TrainConfig& cfg,
                         const Level1EvalSet* eval, std::ostream* log_csv) {
    cfg.validate();
    if (normal_beats.size() < cfg.batch_size)
        throw TensorError("train_level1: fewer beats than one batch");

    std::mt19937_64 rng(cfg.seed);
    Level1Model model;
    model.generator = std::make_unique<GeneratorNet>(cfg.arch, rng);
    model.discriminator = std::make_unique<DiscriminatorNet>(cfg.arch, rng);
    Adam opt_g(cfg.lr, cfg.beta1, cfg.beta2);
    Adam opt_d(cfg.lr, cfg.beta1, cfg.beta2);

    if (log_csv)
        *log_csv << "epoch,loss_rec,loss_sparsity,loss_fm,loss_adv_g,loss_d,auroc,auprc\n";

    std::vector<std::size_t> order(normal_beats.size());
    std::iota(order.begin(), order.end(), 0);

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        StepLosses acc;
        std::size_t steps = 0;
        for (std::size_t start = 0; start + cfg.batch_size <= order.size();
             start += cfg.batch_size) {
            std::vector<BeatRecord> slice;
            slice.reserve(cfg.batch_size);
            for (std::size_t i = 0; i < cfg.batch_size; ++i)
                slice.push_back(normal_beats[order[start + i]]);
            Tensor batch = beats_to_model_input(slice);
            StepLosses l = train_step(batch, *model.generator, *model.discriminator, opt_g, opt_d,
                                      cfg, rng);
            acc.rec += l.rec;
            acc.sparsity += l.sparsity;
            acc.fm += l.fm;
            acc.adv_g += l.adv_g;
            acc.d += l.d;
            ++steps;
        }
        if (steps) {
            acc.rec /= steps;
            acc.sparsity /= steps;
            acc.fm /= steps;
            acc.adv_g /= steps;
            acc.d /= steps;
        }
        double au_roc = -1.0, au_prc = -1.0;
        if (eval && !eval->beats.empty()) {
            auto scores = scale_scores(
                anomaly_scores(eval->beats, *model.generator, cfg.memory_enabled));
            ScoredSet set{scores, eval->labels};
            au_roc = auroc(set);
            au_prc = auprc(set);
        }
        if (log_csv) {
            *log_csv << epoch << "," << std::setprecision(8) << acc.rec << "," << acc.sparsity
                     << "," << acc.fm << "," << acc.adv_g << "," << acc.d;
            if (au_roc >= 0.0) *log_csv << "," << au_roc << "," << au_prc;
            else *log_csv << ",,";
            *log_csv << "\n";
        }
    }
    return model;
}

Level1Split make_level1_split(const std::vector<BeatRecord>& all, double train_frac,
                              std::mt19937_64& rng) {
    Level1Split split;
    std::vector<std::size_t> normal_idx;
    for (std::size_t i = 0; i < all.size(); ++i)
        if (all[i].label == BeatClass::Normal) normal_idx.push_back(i);
        else {
            split.test.beats.push_back(all[i]);
            split.test.labels.push_back(1);
        }
    std::shuffle(normal_idx.begin(), normal_idx.end(), rng);
    std::size_t n_train = static_cast<std::size_t>(
        std::llround(train_frac * static_cast<double>(normal_idx.size())));
    for (std::size_t i = 0; i < normal_idx.size(); ++i) {
        if (i < n_train) split.train_normals.push_back(all[normal_idx[i]]);
        else {
            split.test.beats.push_back(all[normal_idx[i]]);
            split.test.labels.push_back(0);
        }
    }
    return split;
}

}  // namespace madegan
