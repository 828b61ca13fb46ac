#include "madegan/ops.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>

#include "madegan/kernels.hpp"

namespace madegan::ops {

using detail::Node;
namespace k = madegan::kernels;

namespace {

bool tracked(const std::shared_ptr<Node>& n) {
    return n->requires_grad || static_cast<bool>(n->backward_fn);
}

std::shared_ptr<Node> make_node(Shape shape) {
    auto n = std::make_shared<Node>();
    n->values.assign(shape_numel(shape), 0.0);
    n->shape = std::move(shape);
    return n;
}

// Wire the graph edges if any input is tracked; otherwise the output is a
// plain constant and carries no history.
Tensor finish(std::shared_ptr<Node> out, std::vector<std::shared_ptr<Node>> parents,
              std::function<void(Node&)> bwd) {
    check_finite(out->values, "op output");
    bool any = false;
    for (auto& p : parents)
        if (tracked(p)) any = true;
    if (any) {
        out->requires_grad = true;
        out->parents = std::move(parents);
        out->backward_fn = std::move(bwd);
    }
    return Tensor::from_node(std::move(out));
}

// Gradient buffer of a parent, or nullptr when nothing flows into it.
double* gbuf(const std::shared_ptr<Node>& p) {
    if (!tracked(p)) return nullptr;
    p->ensure_grad();
    return p->grad.data();
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
    if (a.shape() != b.shape())
        throw TensorError(std::string(op) + ": shape mismatch " + shape_str(a.shape()) +
                          " vs " + shape_str(b.shape()));
}

template <typename F, typename G>
Tensor unary(const Tensor& a, F fval, G fgrad) {
    auto out = make_node(a.shape());
    const double* x = a.data();
    double* y = out->values.data();
    std::size_t n = a.numel();
    for (std::size_t i = 0; i < n; ++i) y[i] = fval(x[i]);
    auto pa = a.node_;
    return finish(out, {pa}, [pa, fgrad](Node& self) {
        if (double* ga = gbuf(pa)) {
            const double* x = pa->values.data();
            const double* y = self.values.data();
            const double* gy = self.grad.data();
            for (std::size_t i = 0; i < self.numel(); ++i) ga[i] += gy[i] * fgrad(x[i], y[i]);
        }
    });
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "add");
    auto out = make_node(a.shape());
    k::add(a.data(), b.data(), out->values.data(), a.numel());
    auto pa = a.node_, pb = b.node_;
    return finish(out, {pa, pb}, [pa, pb](Node& self) {
        if (double* g = gbuf(pa)) k::axpy(1.0, self.grad.data(), g, self.numel());
        if (double* g = gbuf(pb)) k::axpy(1.0, self.grad.data(), g, self.numel());
    });
}

Tensor sub(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "sub");
    auto out = make_node(a.shape());
    k::sub(a.data(), b.data(), out->values.data(), a.numel());
    auto pa = a.node_, pb = b.node_;
    return finish(out, {pa, pb}, [pa, pb](Node& self) {
        if (double* g = gbuf(pa)) k::axpy(1.0, self.grad.data(), g, self.numel());
        if (double* g = gbuf(pb)) k::axpy(-1.0, self.grad.data(), g, self.numel());
    });
}

Tensor mul(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "mul");
    auto out = make_node(a.shape());
    k::mul(a.data(), b.data(), out->values.data(), a.numel());
    auto pa = a.node_, pb = b.node_;
    return finish(out, {pa, pb}, [pa, pb](Node& self) {
        const double* gy = self.grad.data();
        std::size_t n = self.numel();
        if (double* g = gbuf(pa)) {
            const double* bv = pb->values.data();
            for (std::size_t i = 0; i < n; ++i) g[i] += gy[i] * bv[i];
        }
        if (double* g = gbuf(pb)) {
            const double* av = pa->values.data();
            for (std::size_t i = 0; i < n; ++i) g[i] += gy[i] * av[i];
        }
    });
}

Tensor scalar_mul(const Tensor& a, double s) {
    return unary(a, [s](double x) { return s * x; }, [s](double, double) { return s; });
}

Tensor add_scalar(const Tensor& a, double s) {
    return unary(a, [s](double x) { return x + s; }, [](double, double) { return 1.0; });
}

Tensor square(const Tensor& a) {
    return unary(a, [](double x) { return x * x; }, [](double x, double) { return 2.0 * x; });
}

Tensor sqrt_op(const Tensor& a) {
    for (double x : a.values())
        if (x <= 0.0) throw TensorError("sqrt: non-positive input");
    return unary(a, [](double x) { return std::sqrt(x); },
                 [](double, double y) { return 0.5 / y; });
}

Tensor log_op(const Tensor& a) {
    for (double x : a.values())
        if (x <= 0.0) throw TensorError("log: non-positive input");
    return unary(a, [](double x) { return std::log(x); },
                 [](double x, double) { return 1.0 / x; });
}

Tensor tanh_op(const Tensor& a) {
    return unary(a, [](double x) { return std::tanh(x); },
                 [](double, double y) { return 1.0 - y * y; });
}

Tensor sigmoid(const Tensor& a) {
    return unary(a, [](double x) { return x >= 0 ? 1.0 / (1.0 + std::exp(-x))
                                                 : std::exp(x) / (1.0 + std::exp(x)); },
                 [](double, double y) { return y * (1.0 - y); });
}

Tensor log_sigmoid(const Tensor& a) {
    // log(sigmoid(x)) = -log1p(exp(-x)), derivative sigmoid(-x)
    return unary(a,
                 [](double x) { return x >= 0 ? -std::log1p(std::exp(-x))
                                              : x - std::log1p(std::exp(x)); },
                 [](double x, double) {
                     return x >= 0 ? std::exp(-x) / (1.0 + std::exp(-x))
                                   : 1.0 / (1.0 + std::exp(x));
                 });
}

Tensor leaky_relu(const Tensor& a, double slope) {
    if (slope < 0.0 || slope >= 1.0) throw TensorError("leaky_relu: slope outside [0,1)");
    // subgradient at 0 taken as 1
    return unary(a, [slope](double x) { return x >= 0 ? x : slope * x; },
                 [slope](double x, double) { return x >= 0 ? 1.0 : slope; });
}

Tensor clip(const Tensor& a, double lo, double hi) {
    return unary(a, [lo, hi](double x) { return std::clamp(x, lo, hi); },
                 [lo, hi](double x, double) { return (x >= lo && x <= hi) ? 1.0 : 0.0; });
}

Tensor sum(const Tensor& a) {
    auto out = make_node(Shape{});
    out->values[0] = k::sum(a.data(), a.numel());
    auto pa = a.node_;
    return finish(out, {pa}, [pa](Node& self) {
        if (double* g = gbuf(pa)) {
            double gy = self.grad[0];
            for (std::size_t i = 0; i < pa->numel(); ++i) g[i] += gy;
        }
    });
}

Tensor mean(const Tensor& a) {
    return scalar_mul(sum(a), 1.0 / static_cast<double>(a.numel()));
}

Tensor sum_rows(const Tensor& a) {
    if (a.rank() < 1) throw TensorError("sum_rows: rank-0 input");
    std::size_t n = a.dim(0);
    std::size_t row = a.numel() / n;
    auto out = make_node(Shape{n});
    for (std::size_t i = 0; i < n; ++i)
        out->values[i] = k::sum(a.data() + i * row, row);
    auto pa = a.node_;
    return finish(out, {pa, }, [pa, row](Node& self) {
        if (double* g = gbuf(pa)) {
            const double* gy = self.grad.data();
            for (std::size_t i = 0; i < self.numel(); ++i)
                for (std::size_t j = 0; j < row; ++j) g[i * row + j] += gy[i];
        }
    });
}

Tensor reshape(const Tensor& a, Shape shape) {
    if (shape_numel(shape) != a.numel())
        throw TensorError("reshape: cannot view " + shape_str(a.shape()) + " as " + shape_str(shape));
    auto out = make_node(std::move(shape));
    out->values = std::vector<double>(a.values().begin(), a.values().end());
    auto pa = a.node_;
    return finish(out, {pa}, [pa](Node& self) {
        if (double* g = gbuf(pa)) k::axpy(1.0, self.grad.data(), g, self.numel());
    });
}

Tensor linear(const Tensor& input, const Tensor& weight, const Tensor& bias) {
    if (input.rank() != 2 || weight.rank() != 2 || bias.rank() != 1)
        throw TensorError("linear: expected input [n,in], weight [out,in], bias [out]");
    std::size_t n = input.dim(0), in = input.dim(1);
    std::size_t outdim = weight.dim(0);
    if (weight.dim(1) != in)
        throw TensorError("linear: inner dimension mismatch, input axis 1 is " +
                          std::to_string(in) + " but weight axis 1 is " +
                          std::to_string(weight.dim(1)));
    if (bias.dim(0) != outdim)
        throw TensorError("linear: bias axis 0 mismatch");
    auto out = make_node(Shape{n, outdim});
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t o = 0; o < outdim; ++o)
            out->values[i * outdim + o] =
                k::dot(input.data() + i * in, weight.data() + o * in, in) + bias.data()[o];
    auto pi = input.node_, pw = weight.node_, pb = bias.node_;
    return finish(out, {pi, pw, pb}, [pi, pw, pb, n, in, outdim](Node& self) {
        const double* gy = self.grad.data();
        if (double* g = gbuf(pi))
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t o = 0; o < outdim; ++o)
                    k::axpy(gy[i * outdim + o], pw->values.data() + o * in, g + i * in, in);
        if (double* g = gbuf(pw))
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t o = 0; o < outdim; ++o)
                    k::axpy(gy[i * outdim + o], pi->values.data() + i * in, g + o * in, in);
        if (double* g = gbuf(pb))
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t o = 0; o < outdim; ++o) g[o] += gy[i * outdim + o];
    });
}

// ---------------------------------------------------------------------------
// conv1d core. Patch layout: [c_in * k] matching a kernel row, so the inner
// loops are contiguous dot/axpy kernels.

namespace {

struct ConvDims {
    std::size_t n, ci, li, co, kk, stride, pad, lo;
};

ConvDims conv_dims(const Tensor& input, const Tensor& kernel, std::size_t stride, std::size_t pad) {
    if (input.rank() != 3) throw TensorError("conv1d: input must be [n, ch, len], got " + shape_str(input.shape()));
    if (kernel.rank() != 3) throw TensorError("conv1d: kernel must be [out, in, k], got " + shape_str(kernel.shape()));
    if (stride < 1) throw TensorError("conv1d: stride must be >= 1");
    ConvDims d;
    d.n = input.dim(0);
    d.ci = input.dim(1);
    d.li = input.dim(2);
    d.co = kernel.dim(0);
    d.kk = kernel.dim(2);
    d.stride = stride;
    d.pad = pad;
    if (kernel.dim(1) != d.ci)
        throw TensorError("conv1d: channel mismatch on axis 1, input has " + std::to_string(d.ci) +
                          " channels but kernel expects " + std::to_string(kernel.dim(1)));
    if (d.kk > d.li + 2 * pad)
        throw TensorError("conv1d: kernel size exceeds padded length on axis 2");
    d.lo = (d.li + 2 * pad - d.kk) / stride + 1;
    return d;
}

void gather_patch(const double* in, double* patch, const ConvDims& d, std::size_t t) {
    // signed window start relative to the unpadded signal
    long start = static_cast<long>(t * d.stride) - static_cast<long>(d.pad);
    for (std::size_t c = 0; c < d.ci; ++c) {
        const double* row = in + c * d.li;
        double* p = patch + c * d.kk;
        for (std::size_t j = 0; j < d.kk; ++j) {
            long idx = start + static_cast<long>(j);
            p[j] = (idx >= 0 && idx < static_cast<long>(d.li)) ? row[idx] : 0.0;
        }
    }
}

void scatter_patch(double* in_grad, const double* patch, const ConvDims& d, std::size_t t) {
    long start = static_cast<long>(t * d.stride) - static_cast<long>(d.pad);
    for (std::size_t c = 0; c < d.ci; ++c) {
        double* row = in_grad + c * d.li;
        const double* p = patch + c * d.kk;
        for (std::size_t j = 0; j < d.kk; ++j) {
            long idx = start + static_cast<long>(j);
            if (idx >= 0 && idx < static_cast<long>(d.li)) row[idx] += p[j];
        }
    }
}

void conv_forward(const double* in, const double* ker, double* out, const ConvDims& d) {
    std::vector<double> patch(d.ci * d.kk);
    std::size_t psz = patch.size();
    for (std::size_t b = 0; b < d.n; ++b) {
        const double* ib = in + b * d.ci * d.li;
        double* ob = out + b * d.co * d.lo;
        for (std::size_t t = 0; t < d.lo; ++t) {
            gather_patch(ib, patch.data(), d, t);
            for (std::size_t o = 0; o < d.co; ++o)
                ob[o * d.lo + t] += k::dot(ker + o * psz, patch.data(), psz);
        }
    }
}

// accumulates into in_grad
void conv_backward_input(double* in_grad, const double* ker, const double* out_grad, const ConvDims& d) {
    std::vector<double> patch(d.ci * d.kk);
    std::size_t psz = patch.size();
    for (std::size_t b = 0; b < d.n; ++b) {
        double* ib = in_grad + b * d.ci * d.li;
        const double* ob = out_grad + b * d.co * d.lo;
        for (std::size_t t = 0; t < d.lo; ++t) {
            std::fill(patch.begin(), patch.end(), 0.0);
            for (std::size_t o = 0; o < d.co; ++o)
                k::axpy(ob[o * d.lo + t], ker + o * psz, patch.data(), psz);
            scatter_patch(ib, patch.data(), d, t);
        }
    }
}

// accumulates into ker_grad
void conv_backward_kernel(double* ker_grad, const double* in, const double* out_grad, const ConvDims& d) {
    std::vector<double> patch(d.ci * d.kk);
    std::size_t psz = patch.size();
    for (std::size_t b = 0; b < d.n; ++b) {
        const double* ib = in + b * d.ci * d.li;
        const double* ob = out_grad + b * d.co * d.lo;
        for (std::size_t t = 0; t < d.lo; ++t) {
            gather_patch(ib, patch.data(), d, t);
            for (std::size_t o = 0; o < d.co; ++o)
                k::axpy(ob[o * d.lo + t], patch.data(), ker_grad + o * psz, psz);
        }
    }
}

}  // namespace

Tensor conv1d(const Tensor& input, const Tensor& kernel, std::size_t stride, std::size_t padding) {
    ConvDims d = conv_dims(input, kernel, stride, padding);
    auto out = make_node(Shape{d.n, d.co, d.lo});
    conv_forward(input.data(), kernel.data(), out->values.data(), d);
    auto pi = input.node_, pk = kernel.node_;
    return finish(out, {pi, pk}, [pi, pk, d](Node& self) {
        if (double* g = gbuf(pi)) conv_backward_input(g, pk->values.data(), self.grad.data(), d);
        if (double* g = gbuf(pk)) conv_backward_kernel(g, pi->values.data(), self.grad.data(), d);
    });
}

Tensor conv1d_transpose(const Tensor& input, const Tensor& kernel, std::size_t stride, std::size_t padding) {
    if (input.rank() != 3) throw TensorError("conv1d_transpose: input must be [n, ch, len]");
    if (kernel.rank() != 3) throw TensorError("conv1d_transpose: kernel must be [out, in, k]");
    if (stride < 1) throw TensorError("conv1d_transpose: stride must be >= 1");
    if (input.dim(1) != kernel.dim(0))
        throw TensorError("conv1d_transpose: channel mismatch on axis 1, input has " +
                          std::to_string(input.dim(1)) + " channels but kernel expects " +
                          std::to_string(kernel.dim(0)));
    std::size_t li = input.dim(2);
    long lo_signed = static_cast<long>((li - 1) * stride + kernel.dim(2)) - 2 * static_cast<long>(padding);
    if (lo_signed < 1) throw TensorError("conv1d_transpose: output length not positive on axis 2");

    // The transpose is the adjoint of the matching forward conv, so its
    // forward pass is conv_backward_input and vice versa.
    ConvDims d;
    d.n = input.dim(0);
    d.ci = kernel.dim(1);
    d.li = static_cast<std::size_t>(lo_signed);
    d.co = kernel.dim(0);
    d.kk = kernel.dim(2);
    d.stride = stride;
    d.pad = padding;
    d.lo = li;

    auto out = make_node(Shape{d.n, d.ci, d.li});
    conv_backward_input(out->values.data(), kernel.data(), input.data(), d);
    auto pi = input.node_, pk = kernel.node_;
    return finish(out, {pi, pk}, [pi, pk, d](Node& self) {
        if (double* g = gbuf(pi)) conv_forward(self.grad.data(), pk->values.data(), g, d);
        if (double* g = gbuf(pk)) conv_backward_kernel(g, self.grad.data(), pi->values.data(), d);
    });
}

// ---------------------------------------------------------------------------

BatchNormState make_batchnorm(std::size_t channels) {
    BatchNormState bn;
    bn.gamma = Tensor::full({channels}, 1.0, true);
    bn.beta = Tensor::zeros({channels}, true);
    bn.running_mean = Tensor::zeros({channels}, false);
    bn.running_var = Tensor::full({channels}, 1.0, false);
    return bn;
}

Tensor batchnorm1d(const Tensor& input, BatchNormState& bn, bool training) {
    if (input.rank() != 2 && input.rank() != 3)
        throw TensorError("batchnorm1d: input must be [n, c] or [n, c, len]");
    std::size_t n = input.dim(0), c = input.dim(1);
    std::size_t len = input.rank() == 3 ? input.dim(2) : 1;
    if (c != bn.gamma.dim(0)) throw TensorError("batchnorm1d: channel count mismatch on axis 1");
    if (training && n < 2)
        throw TensorError("batchnorm1d: batch of 1 in training mode has undefined variance");

    auto out = make_node(input.shape());
    const double* x = input.data();
    double* y = out->values.data();
    std::size_t m = n * len;
    double eps = bn.eps;

    std::vector<double> mean(c), invstd(c);
    if (training) {
        for (std::size_t ch = 0; ch < c; ++ch) {
            double s = 0.0;
            for (std::size_t b = 0; b < n; ++b)
                s += k::sum(x + (b * c + ch) * len, len);
            mean[ch] = s / static_cast<double>(m);
            double v = 0.0;
            for (std::size_t b = 0; b < n; ++b) {
                const double* row = x + (b * c + ch) * len;
                for (std::size_t t = 0; t < len; ++t) {
                    double dd = row[t] - mean[ch];
                    v += dd * dd;
                }
            }
            double var = v / static_cast<double>(m);
            invstd[ch] = 1.0 / std::sqrt(var + eps);
            // running stats use the unbiased variance
            double unbiased = m > 1 ? v / static_cast<double>(m - 1) : var;
            bn.running_mean.values()[ch] =
                (1.0 - bn.momentum) * bn.running_mean.values()[ch] + bn.momentum * mean[ch];
            bn.running_var.values()[ch] =
                (1.0 - bn.momentum) * bn.running_var.values()[ch] + bn.momentum * unbiased;
        }
    } else {
        for (std::size_t ch = 0; ch < c; ++ch) {
            mean[ch] = bn.running_mean.values()[ch];
            invstd[ch] = 1.0 / std::sqrt(bn.running_var.values()[ch] + eps);
        }
    }

    const double* gamma = bn.gamma.data();
    const double* beta = bn.beta.data();
    for (std::size_t b = 0; b < n; ++b)
        for (std::size_t ch = 0; ch < c; ++ch) {
            const double* row = x + (b * c + ch) * len;
            double* orow = y + (b * c + ch) * len;
            for (std::size_t t = 0; t < len; ++t)
                orow[t] = gamma[ch] * (row[t] - mean[ch]) * invstd[ch] + beta[ch];
        }

    auto pi = input.node_, pg = bn.gamma.node_, pb = bn.beta.node_;
    return finish(out, {pi, pg, pb},
                  [pi, pg, pb, n, c, len, mean, invstd, training](Node& self) {
        const double* gy = self.grad.data();
        const double* x = pi->values.data();
        const double* gamma = pg->values.data();
        std::size_t m = n * len;
        double* gx = gbuf(pi);
        double* gg = gbuf(pg);
        double* gb = gbuf(pb);
        for (std::size_t ch = 0; ch < c; ++ch) {
            double sum_gy = 0.0, sum_gy_xhat = 0.0;
            for (std::size_t b = 0; b < n; ++b) {
                const double* grow = gy + (b * c + ch) * len;
                const double* row = x + (b * c + ch) * len;
                for (std::size_t t = 0; t < len; ++t) {
                    sum_gy += grow[t];
                    sum_gy_xhat += grow[t] * (row[t] - mean[ch]) * invstd[ch];
                }
            }
            if (gg) gg[ch] += sum_gy_xhat;
            if (gb) gb[ch] += sum_gy;
            if (gx) {
                for (std::size_t b = 0; b < n; ++b) {
                    double* gxrow = gx + (b * c + ch) * len;
                    const double* grow = gy + (b * c + ch) * len;
                    const double* row = x + (b * c + ch) * len;
                    for (std::size_t t = 0; t < len; ++t) {
                        double xhat = (row[t] - mean[ch]) * invstd[ch];
                        if (training) {
                            gxrow[t] += gamma[ch] * invstd[ch] *
                                        (grow[t] - sum_gy / static_cast<double>(m) -
                                         xhat * sum_gy_xhat / static_cast<double>(m));
                        } else {
                            gxrow[t] += gamma[ch] * invstd[ch] * grow[t];
                        }
                    }
                }
            }
        }
    });
}

Tensor cosine_softmax(const Tensor& z, const Tensor& omega) {
    if (z.rank() != 2 || omega.rank() != 2 || z.dim(1) != omega.dim(1))
        throw TensorError("cosine_softmax: expected z [n,d] and omega [slots,d] with matching d");
    std::size_t n = z.dim(0), d = z.dim(1), slots = omega.dim(0);
    std::vector<double> znorm(n), onorm(slots);
    for (std::size_t i = 0; i < n; ++i) {
        znorm[i] = std::sqrt(k::dot(z.data() + i * d, z.data() + i * d, d));
        if (znorm[i] < 1e-12) throw TensorError("cosine_softmax: zero latent vector");
    }
    for (std::size_t j = 0; j < slots; ++j) {
        onorm[j] = std::sqrt(k::dot(omega.data() + j * d, omega.data() + j * d, d));
        if (onorm[j] < 1e-12) throw TensorError("cosine_softmax: zero prototype row");
    }
    // cosine similarities, then row softmax
    std::vector<double> cosv(n * slots);
    auto out = make_node(Shape{n, slots});
    for (std::size_t i = 0; i < n; ++i) {
        double* wrow = out->values.data() + i * slots;
        double mx = -2.0;
        for (std::size_t j = 0; j < slots; ++j) {
            double c = k::dot(z.data() + i * d, omega.data() + j * d, d) / (znorm[i] * onorm[j]);
            cosv[i * slots + j] = c;
            mx = std::max(mx, c);
        }
        double zsum = 0.0;
        for (std::size_t j = 0; j < slots; ++j)
            zsum += (wrow[j] = std::exp(cosv[i * slots + j] - mx));
        for (std::size_t j = 0; j < slots; ++j) wrow[j] /= zsum;
    }
    auto pz = z.node_, po = omega.node_;
    return finish(out, {pz, po},
                  [pz, po, n, d, slots, cosv = std::move(cosv), znorm = std::move(znorm),
                   onorm = std::move(onorm)](Node& self) {
        const double* w = self.values.data();
        const double* gw = self.grad.data();
        double* gz = gbuf(pz);
        double* go = gbuf(po);
        const double* zv = pz->values.data();
        const double* ov = po->values.data();
        std::vector<double> gc(slots);
        for (std::size_t i = 0; i < n; ++i) {
            const double* wrow = w + i * slots;
            const double* gwrow = gw + i * slots;
            double dotv = k::dot(gwrow, wrow, slots);
            for (std::size_t j = 0; j < slots; ++j) gc[j] = wrow[j] * (gwrow[j] - dotv);
            for (std::size_t j = 0; j < slots; ++j) {
                if (gc[j] == 0.0) continue;
                double c = cosv[i * slots + j];
                double inv = 1.0 / (znorm[i] * onorm[j]);
                if (gz) {
                    double* gzi = gz + i * d;
                    k::axpy(gc[j] * inv, ov + j * d, gzi, d);
                    k::axpy(-gc[j] * c / (znorm[i] * znorm[i]), zv + i * d, gzi, d);
                }
                if (go) {
                    double* goj = go + j * d;
                    k::axpy(gc[j] * inv, zv + i * d, goj, d);
                    k::axpy(-gc[j] * c / (onorm[j] * onorm[j]), ov + j * d, goj, d);
                }
            }
        }
    });
}

Tensor weighted_retrieve(const Tensor& w, const Tensor& omega) {
    if (w.rank() != 2 || omega.rank() != 2 || w.dim(1) != omega.dim(0))
        throw TensorError("weighted_retrieve: length mismatch, weights " + shape_str(w.shape()) +
                          " vs prototypes " + shape_str(omega.shape()));
    std::size_t n = w.dim(0), slots = omega.dim(0), d = omega.dim(1);
    auto out = make_node(Shape{n, d});
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < slots; ++j)
            k::axpy(w.data()[i * slots + j], omega.data() + j * d, out->values.data() + i * d, d);
    auto pw = w.node_, po = omega.node_;
    return finish(out, {pw, po}, [pw, po, n, slots, d](Node& self) {
        const double* gy = self.grad.data();
        if (double* g = gbuf(pw))
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < slots; ++j)
                    g[i * slots + j] += k::dot(gy + i * d, po->values.data() + j * d, d);
        if (double* g = gbuf(po))
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < slots; ++j)
                    k::axpy(pw->values.data()[i * slots + j], gy + i * d, g + j * d, d);
    });
}

namespace {
constexpr double kEntropyFloor = 1e-12;
}

Tensor entropy_mean(const Tensor& w) {
    if (w.rank() != 2) throw TensorError("entropy_mean: expected [n, slots]");
    std::size_t n = w.dim(0), slots = w.dim(1);
    auto out = make_node(Shape{});
    double acc = 0.0;
    const double* x = w.data();
    for (std::size_t i = 0; i < n * slots; ++i)
        acc -= x[i] * std::log(std::max(x[i], kEntropyFloor));
    out->values[0] = acc / static_cast<double>(n);
    auto pw = w.node_;
    return finish(out, {pw}, [pw, n, slots](Node& self) {
        if (double* g = gbuf(pw)) {
            double gy = self.grad[0] / static_cast<double>(n);
            const double* x = pw->values.data();
            for (std::size_t i = 0; i < n * slots; ++i) {
                double d = x[i] > kEntropyFloor ? -(std::log(x[i]) + 1.0) : -std::log(kEntropyFloor);
                g[i] += gy * d;
            }
        }
    });
}

Tensor softmax_rows(const Tensor& logits) {
    if (logits.rank() != 2) throw TensorError("softmax_rows: expected [n, m]");
    std::size_t n = logits.dim(0), m = logits.dim(1);
    auto out = make_node(logits.shape());
    const double* x = logits.data();
    double* y = out->values.data();
    for (std::size_t i = 0; i < n; ++i) {
        const double* row = x + i * m;
        double* orow = y + i * m;
        double mx = *std::max_element(row, row + m);
        double z = 0.0;
        for (std::size_t j = 0; j < m; ++j) z += (orow[j] = std::exp(row[j] - mx));
        for (std::size_t j = 0; j < m; ++j) orow[j] /= z;
    }
    auto pl = logits.node_;
    return finish(out, {pl}, [pl, n, m](Node& self) {
        if (double* g = gbuf(pl)) {
            const double* y = self.values.data();
            const double* gy = self.grad.data();
            for (std::size_t i = 0; i < n; ++i) {
                double dotv = k::dot(gy + i * m, y + i * m, m);
                for (std::size_t j = 0; j < m; ++j)
                    g[i * m + j] += y[i * m + j] * (gy[i * m + j] - dotv);
            }
        }
    });
}

Tensor cross_entropy_rows(const Tensor& logits, const std::vector<int>& labels) {
    if (logits.rank() != 2) throw TensorError("cross_entropy_rows: expected [n, m]");
    std::size_t n = logits.dim(0), m = logits.dim(1);
    if (labels.size() != n) throw TensorError("cross_entropy_rows: label count mismatch");
    for (int l : labels)
        if (l < 0 || static_cast<std::size_t>(l) >= m)
            throw TensorError("cross_entropy_rows: label out of range");
    auto out = make_node(Shape{});
    const double* x = logits.data();
    std::vector<double> probs(n * m);
    double loss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double* row = x + i * m;
        double mx = *std::max_element(row, row + m);
        double z = 0.0;
        for (std::size_t j = 0; j < m; ++j) z += (probs[i * m + j] = std::exp(row[j] - mx));
        for (std::size_t j = 0; j < m; ++j) probs[i * m + j] /= z;
        loss -= std::log(probs[i * m + labels[i]]);
    }
    out->values[0] = loss / static_cast<double>(n);
    auto pl = logits.node_;
    return finish(out, {pl}, [pl, probs = std::move(probs), labels, n, m](Node& self) {
        if (double* g = gbuf(pl)) {
            double gy = self.grad[0] / static_cast<double>(n);
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < m; ++j)
                    g[i * m + j] += gy * (probs[i * m + j] -
                                          (static_cast<std::size_t>(labels[i]) == j ? 1.0 : 0.0));
        }
    });
}

Tensor cross_entropy_rows_weighted(const Tensor& logits, const std::vector<int>& labels,
                                   const std::vector<double>& weights) {
    if (logits.rank() != 2) throw TensorError("cross_entropy_rows_weighted: expected [n, m]");
    std::size_t n = logits.dim(0), m = logits.dim(1);
    if (labels.size() != n || weights.size() != n)
        throw TensorError("cross_entropy_rows_weighted: label/weight count mismatch");
    for (int l : labels)
        if (l < 0 || static_cast<std::size_t>(l) >= m)
            throw TensorError("cross_entropy_rows_weighted: label out of range");
    auto out = make_node(Shape{});
    const double* x = logits.data();
    std::vector<double> probs(n * m);
    double loss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double* row = x + i * m;
        double mx = *std::max_element(row, row + m);
        double z = 0.0;
        for (std::size_t j = 0; j < m; ++j) z += (probs[i * m + j] = std::exp(row[j] - mx));
        for (std::size_t j = 0; j < m; ++j) probs[i * m + j] /= z;
        loss -= weights[i] * std::log(probs[i * m + labels[i]]);
    }
    out->values[0] = loss;
    auto pl = logits.node_;
    return finish(out, {pl}, [pl, probs = std::move(probs), labels, weights, n, m](Node& self) {
        if (double* g = gbuf(pl)) {
            double gy = self.grad[0];
            for (std::size_t i = 0; i < n; ++i) {
                double w = gy * weights[i];
                if (w == 0.0) continue;
                for (std::size_t j = 0; j < m; ++j)
                    g[i * m + j] += w * (probs[i * m + j] -
                                         (static_cast<std::size_t>(labels[i]) == j ? 1.0 : 0.0));
            }
        }
    });
}

}  // namespace madegan::ops
