#include "madegan/nets.hpp"

#include <cmath>

namespace madegan {

namespace {

constexpr double kInitStd = 0.02;

Tensor register_kernel(ParamSet& ps, const std::string& name, Shape shape,
                       std::mt19937_64& rng, bool trainable) {
    return ps.add(name, Tensor::randn(std::move(shape), rng, kInitStd, trainable));
}

ConvStage make_stage(ParamSet& ps, const std::string& name, std::size_t co, std::size_t ci,
                     std::size_t k, std::mt19937_64& rng, bool trainable, bool with_bn,
                     std::size_t bn_channels) {
    ConvStage st;
    st.kernel = register_kernel(ps, name + ".kernel", {co, ci, k}, rng, trainable);
    st.has_bn = with_bn;
    if (with_bn) {
        st.bn = ops::make_batchnorm(bn_channels);
        st.bn.gamma.set_requires_grad(trainable);
        st.bn.beta.set_requires_grad(trainable);
        ps.add(name + ".bn.gamma", st.bn.gamma);
        ps.add(name + ".bn.beta", st.bn.beta);
        ps.add(name + ".bn.running_mean", st.bn.running_mean);
        ps.add(name + ".bn.running_var", st.bn.running_var);
    }
    return st;
}

}  // namespace

void merge_params(ParamSet& dst, const std::string& prefix, ParamSet& src) {
    for (auto& name : src.names()) dst.add(prefix + name, src.at(name));
}

GeneratorNet::GeneratorNet(const ArchConfig& arch, std::mt19937_64& rng, bool trainable)
    : arch_(arch) {
    std::size_t C = arch.channel_base;
    std::size_t chans[kConvStages + 1] = {1, C, 2 * C, 4 * C, 8 * C, 16 * C};
    for (std::size_t i = 0; i < kConvStages; ++i)
        enc_.push_back(make_stage(params_, "gen.enc." + std::to_string(i), chans[i + 1], chans[i],
                                  4, rng, trainable, true, chans[i + 1]));
    enc_proj_ = register_kernel(params_, "gen.enc.proj.kernel",
                                {arch.latent_dim, 16 * C, kEncodedLen}, rng, trainable);

    Tensor omega = params_.add("gen.memory.omega", [&] {
        double bound = 1.0 / std::sqrt(static_cast<double>(arch.latent_dim));
        return Tensor::uniform({arch.memory_slots, arch.latent_dim}, rng, -bound, bound, trainable);
    }());
    memory_.emplace(omega);

    dec_proj_ = register_kernel(params_, "gen.dec.proj.kernel",
                                {arch.latent_dim, 16 * C, kEncodedLen}, rng, trainable);
    dec_proj_bn_ = ops::make_batchnorm(16 * C);
    dec_proj_bn_.gamma.set_requires_grad(trainable);
    dec_proj_bn_.beta.set_requires_grad(trainable);
    params_.add("gen.dec.proj.bn.gamma", dec_proj_bn_.gamma);
    params_.add("gen.dec.proj.bn.beta", dec_proj_bn_.beta);
    params_.add("gen.dec.proj.bn.running_mean", dec_proj_bn_.running_mean);
    params_.add("gen.dec.proj.bn.running_var", dec_proj_bn_.running_var);

    // decoder stages mirror the encoder; transpose kernels are laid out
    // [in, out, k]; the last stage has no batch norm (tanh output)
    for (std::size_t i = 0; i < kConvStages; ++i) {
        std::size_t ci = chans[kConvStages - i];      // 16C, 8C, ..., C
        std::size_t co = chans[kConvStages - i - 1];  // 8C, ..., 1
        bool last = i + 1 == kConvStages;
        dec_.push_back(make_stage(params_, "gen.dec." + std::to_string(i), ci, co, 4, rng,
                                  trainable, !last, co));
    }
}

Tensor GeneratorNet::encode(const Tensor& x, bool training) {
    Tensor h = x;
    for (auto& st : enc_) {
        h = ops::conv1d(h, st.kernel, 2, 1);
        h = ops::batchnorm1d(h, st.bn, training);
        h = ops::leaky_relu(h, arch_.leaky_slope);
    }
    h = ops::conv1d(h, enc_proj_, 1, 0);  // [n, d_z, 1]
    return ops::reshape(h, {h.dim(0), arch_.latent_dim});
}

GeneratorOutput GeneratorNet::forward(const Tensor& x, bool training, bool memory_enabled) {
    GeneratorOutput out;
    out.latent = encode(x, training);

    Tensor zhat;
    if (memory_enabled) {
        out.weights = memory_->address(out.latent);
        zhat = memory_->retrieve(out.weights);
    } else {
        zhat = out.latent;
    }

    Tensor h = ops::reshape(zhat, {zhat.dim(0), arch_.latent_dim, 1});
    h = ops::conv1d_transpose(h, dec_proj_, 1, 0);  // [n, 16C, 10]
    h = ops::batchnorm1d(h, dec_proj_bn_, training);
    h = ops::leaky_relu(h, arch_.leaky_slope);
    for (auto& st : dec_) {
        h = ops::conv1d_transpose(h, st.kernel, 2, 1);
        if (st.has_bn) {
            h = ops::batchnorm1d(h, st.bn, training);
            h = ops::leaky_relu(h, arch_.leaky_slope);
        } else {
            h = ops::tanh_op(h);
        }
    }
    out.reconstruction = h;
    return out;
}

DiscriminatorNet::DiscriminatorNet(const ArchConfig& arch, std::mt19937_64& rng, bool trainable)
    : arch_(arch) {
    std::size_t C = arch.channel_base;
    std::size_t chans[kConvStages + 1] = {1, C, 2 * C, 4 * C, 8 * C, 16 * C};
    for (std::size_t i = 0; i < kConvStages; ++i)
        stages_.push_back(make_stage(params_, "disc.stage." + std::to_string(i), chans[i + 1],
                                     chans[i], 4, rng, trainable, true, chans[i + 1]));
    // extra stage: 16C x 10 -> C x 5
    extra_ = make_stage(params_, "disc.extra", C, 16 * C, 4, rng, trainable, true, C);
    fc_weight_ = register_kernel(params_, "disc.fc.weight", {1, C * 5}, rng, trainable);
    fc_bias_ = params_.add("disc.fc.bias", Tensor::zeros({1}, trainable));
}

Tensor DiscriminatorNet::extract_features(const Tensor& x) {
    Tensor h = x;
    for (auto& st : stages_) {
        h = ops::conv1d(h, st.kernel, 2, 1);
        h = ops::batchnorm1d(h, st.bn, false);
        h = ops::leaky_relu(h, arch_.leaky_slope);
    }
    return h;
}

DiscriminatorOutput DiscriminatorNet::forward(const Tensor& x, bool training) {
    DiscriminatorOutput out;
    Tensor h = x;
    for (auto& st : stages_) {
        h = ops::conv1d(h, st.kernel, 2, 1);
        h = ops::batchnorm1d(h, st.bn, training);
        h = ops::leaky_relu(h, arch_.leaky_slope);
    }
    out.features = h;
    h = ops::conv1d(h, extra_.kernel, 2, 1);
    h = ops::batchnorm1d(h, extra_.bn, training);
    h = ops::leaky_relu(h, arch_.leaky_slope);
    h = ops::reshape(h, {h.dim(0), arch_.channel_base * 5});
    out.logit = ops::linear(h, fc_weight_, fc_bias_);
    out.prob = ops::sigmoid(out.logit);
    return out;
}

}  // namespace madegan
