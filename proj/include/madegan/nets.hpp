#pragma once

#include <optional>

#include "madegan/memory_bank.hpp"
#include "madegan/ops.hpp"
#include "madegan/optim.hpp"

namespace madegan {

// Architecture knobs. The five-stage conv stack doubles channels per stage
// (base, 2x, 4x, 8x, 16x) with kernel 4, stride 2, padding 1, halving the
// length 320 -> 160 -> 80 -> 40 -> 20 -> 10. channel_base=32 gives the
// full-size 32..512 stack; smaller bases give desk-scale models.
struct ArchConfig {
    std::size_t channel_base = 32;
    std::size_t latent_dim = 50;
    std::size_t memory_slots = 2000;
    double leaky_slope = 0.2;
};

inline constexpr std::size_t kConvStages = 5;
inline constexpr std::size_t kEncodedLen = 10;  // 320 / 2^5

struct ConvStage {
    Tensor kernel;
    ops::BatchNormState bn;
    bool has_bn = true;
};

struct GeneratorOutput {
    Tensor reconstruction;  // [n, 1, 320]
    Tensor latent;          // [n, d_z]
    Tensor weights;         // [n, slots]; undefined when memory is disabled
};

// Encoder -> memory -> decoder. With memory disabled the decoder consumes
// the raw latent (plain autoencoder ablation).
class GeneratorNet {
public:
    GeneratorNet(const ArchConfig& arch, std::mt19937_64& rng, bool trainable = true);

    GeneratorOutput forward(const Tensor& x, bool training, bool memory_enabled = true);
    Tensor encode(const Tensor& x, bool training);

    ParamSet& params() { return params_; }
    const ArchConfig& arch() const { return arch_; }
    MemoryBank& memory() { return *memory_; }

private:
    ArchConfig arch_;
    ParamSet params_;
    std::vector<ConvStage> enc_;
    Tensor enc_proj_;  // [d_z, 16C, 10]
    std::optional<MemoryBank> memory_;
    Tensor dec_proj_;  // [d_z, 16C, 10] transpose kernel
    ops::BatchNormState dec_proj_bn_;
    std::vector<ConvStage> dec_;
};

struct DiscriminatorOutput {
    Tensor logit;     // [n, 1]
    Tensor prob;      // [n, 1], sigmoid(logit)
    Tensor features;  // [n, 16C, 10], fifth conv stage output (h_D)
};

// Same five-stage core as the encoder, one extra conv stage and a fully
// connected real/fake output. The fifth-stage feature map doubles as the
// feature-matching target and the level-2 transfer features.
class DiscriminatorNet {
public:
    DiscriminatorNet(const ArchConfig& arch, std::mt19937_64& rng, bool trainable = true);

    DiscriminatorOutput forward(const Tensor& x, bool training);
    // Truncated forward: the frozen feature-extractor path (inference-mode
    // batch norm, stops at the fifth conv stage).
    Tensor extract_features(const Tensor& x);

    ParamSet& params() { return params_; }
    const ArchConfig& arch() const { return arch_; }

private:
    ArchConfig arch_;
    ParamSet params_;
    std::vector<ConvStage> stages_;
    ConvStage extra_;
    Tensor fc_weight_;
    Tensor fc_bias_;
};

// Copies every tensor handle of src into dst under "<prefix><name>".
void merge_params(ParamSet& dst, const std::string& prefix, ParamSet& src);

}  // namespace madegan
