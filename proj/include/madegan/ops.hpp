#pragma once

#include "madegan/tensor.hpp"

namespace madegan::ops {

// ---- elementwise / arithmetic ----
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scalar_mul(const Tensor& a, double s);
Tensor add_scalar(const Tensor& a, double s);
Tensor square(const Tensor& a);
Tensor sqrt_op(const Tensor& a);          // requires strictly positive input
Tensor log_op(const Tensor& a);           // requires strictly positive input
Tensor tanh_op(const Tensor& a);
Tensor sigmoid(const Tensor& a);
Tensor log_sigmoid(const Tensor& a);      // log(sigmoid(x)), stable
Tensor leaky_relu(const Tensor& a, double slope);
Tensor clip(const Tensor& a, double lo, double hi);  // hard clip, zero grad outside

// ---- reductions / shaping ----
Tensor sum(const Tensor& a);
Tensor mean(const Tensor& a);
// Reduce all axes except the first: [n, ...] -> [n].
Tensor sum_rows(const Tensor& a);
Tensor reshape(const Tensor& a, Shape shape);

// ---- linear algebra layers ----
// input [n, in] x weight [out, in] + bias [out] -> [n, out]
Tensor linear(const Tensor& input, const Tensor& weight, const Tensor& bias);

// input [n, c_in, len], kernel [c_out, c_in, k]; cross-correlation.
// len_out = (len + 2*padding - k)/stride + 1.
Tensor conv1d(const Tensor& input, const Tensor& kernel, std::size_t stride, std::size_t padding);

// Adjoint of conv1d with the same kernel layout: input [n, c_out, len],
// kernel [c_out, c_in, k] -> [n, c_in, (len-1)*stride - 2*padding + k].
Tensor conv1d_transpose(const Tensor& input, const Tensor& kernel, std::size_t stride, std::size_t padding);

// ---- batch norm ----
struct BatchNormState {
    Tensor gamma;         // [c], trainable
    Tensor beta;          // [c], trainable
    Tensor running_mean;  // [c], not trainable
    Tensor running_var;   // [c], not trainable
    double eps = 1e-5;
    double momentum = 0.1;
};
BatchNormState make_batchnorm(std::size_t channels);

// input [n, c, len] (or [n, c]); training mode uses batch statistics over
// n*len per channel and updates the running buffers in place.
Tensor batchnorm1d(const Tensor& input, BatchNormState& bn, bool training);

// ---- memory addressing primitives ----
// z [n, d] vs omega [slots, d] -> softmax over cosine similarities [n, slots].
// Throws on zero rows in either argument.
Tensor cosine_softmax(const Tensor& z, const Tensor& omega);
// w [n, slots] x omega [slots, d] -> [n, d].
Tensor weighted_retrieve(const Tensor& w, const Tensor& omega);
// Mean over rows of -sum_j w_j log(max(w_j, 1e-12)); exact 0 at one-hot and
// log(slots) at uniform.
Tensor entropy_mean(const Tensor& w);

// ---- classification heads ----
Tensor softmax_rows(const Tensor& logits);  // [n, m] -> [n, m]
// Mean over rows of -log softmax(logits)[label]; fused backward.
Tensor cross_entropy_rows(const Tensor& logits, const std::vector<int>& labels);
// Sum over rows of weight_i * (-log softmax(logits_i)[label_i]); rows with
// zero weight contribute nothing to the value or the gradient.
Tensor cross_entropy_rows_weighted(const Tensor& logits, const std::vector<int>& labels,
                                   const std::vector<double>& weights);

}  // namespace madegan::ops
