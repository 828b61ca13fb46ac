#include "madegan/memory_bank.hpp"

#include <cmath>

#include "madegan/kernels.hpp"

namespace madegan {

MemoryBank::MemoryBank(std::size_t slots, std::size_t latent_dim, std::mt19937_64& rng) {
    double bound = 1.0 / std::sqrt(static_cast<double>(latent_dim));
    prototypes_ = Tensor::uniform({slots, latent_dim}, rng, -bound, bound, true);
    reinit_dead_rows(rng);
}

MemoryBank::MemoryBank(Tensor prototypes) : prototypes_(std::move(prototypes)) {
    if (prototypes_.rank() != 2) throw TensorError("MemoryBank: prototypes must be [slots, d]");
}

Tensor MemoryBank::address(const Tensor& z) const {
    return ops::cosine_softmax(z, prototypes_);
}

Tensor MemoryBank::retrieve(const Tensor& weights) const {
    return ops::weighted_retrieve(weights, prototypes_);
}

Tensor MemoryBank::shrink(const Tensor& weights, double threshold) const {
    if (weights.rank() != 2) throw TensorError("shrink: expected [n, slots]");
    std::size_t n = weights.dim(0), m = weights.dim(1);
    std::vector<double> v(weights.values().begin(), weights.values().end());
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < m; ++j) {
            if (v[i * m + j] < threshold) v[i * m + j] = 0.0;
            s += v[i * m + j];
        }
        if (s <= 0.0) {
            // everything below threshold: keep the original row
            for (std::size_t j = 0; j < m; ++j) v[i * m + j] = weights.values()[i * m + j];
            continue;
        }
        for (std::size_t j = 0; j < m; ++j) v[i * m + j] /= s;
    }
    return Tensor({n, m}, std::move(v), false);
}

void MemoryBank::reinit_dead_rows(std::mt19937_64& rng) {
    std::size_t d = latent_dim();
    double bound = 1.0 / std::sqrt(static_cast<double>(d));
    std::uniform_real_distribution<double> dist(-bound, bound);
    auto vals = prototypes_.values();
    for (std::size_t j = 0; j < slots(); ++j) {
        double norm = std::sqrt(kernels::dot(vals.data() + j * d, vals.data() + j * d, d));
        if (norm < 1e-8) {
            bool ok = false;
            while (!ok) {
                double s = 0.0;
                for (std::size_t i = 0; i < d; ++i) {
                    vals[j * d + i] = dist(rng);
                    s += vals[j * d + i] * vals[j * d + i];
                }
                ok = std::sqrt(s) >= 1e-8;
            }
        }
    }
}

Tensor sparsity_loss(const Tensor& weights) { return ops::entropy_mean(weights); }

}  // namespace madegan
