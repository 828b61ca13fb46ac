#pragma once

#include "madegan/ops.hpp"
#include "madegan/tensor.hpp"

namespace madegan {

// Prototype memory between encoder and decoder: each latent query is
// re-expressed as a convex combination of learned prototype rows, weighted
// by a softmax over cosine similarities.
class MemoryBank {
public:
    MemoryBank(std::size_t slots, std::size_t latent_dim, std::mt19937_64& rng);
    explicit MemoryBank(Tensor prototypes);  // [slots, latent_dim]

    std::size_t slots() const { return prototypes_.dim(0); }
    std::size_t latent_dim() const { return prototypes_.dim(1); }
    Tensor& prototypes() { return prototypes_; }
    const Tensor& prototypes() const { return prototypes_; }

    // z [n, d_z] -> weights [n, slots]; softmax over cosine similarities.
    // Differentiable w.r.t. z and the prototype matrix. Rejects zero rows.
    Tensor address(const Tensor& z) const;

    // weights [n, slots] -> [n, d_z], rows are convex combinations of
    // prototypes.
    Tensor retrieve(const Tensor& weights) const;

    // Hard shrinkage alternative: zero out weights below the threshold and
    // renormalize (non-differentiable through the cut).
    Tensor shrink(const Tensor& weights, double threshold) const;

    // Rows whose norm collapsed below 1e-8 are re-initialized so cosine
    // addressing stays defined. Call after each optimizer step.
    void reinit_dead_rows(std::mt19937_64& rng);

private:
    Tensor prototypes_;
};

// Entropy surrogate for addressing sparsity: -sum w log(w + 1e-12), averaged
// over the batch. Zero at one-hot, log(slots) at uniform.
Tensor sparsity_loss(const Tensor& weights);

}  // namespace madegan
