#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <functional>
#include <random>

#include "madegan/ops.hpp"
#include "madegan/tensor.hpp"

using namespace madegan;

namespace {

// Central finite differences against reverse-mode gradients. The callable
// must rebuild the graph from the leaf values on every invocation.
void gradcheck(const std::vector<Tensor>& leaves, const std::function<Tensor()>& f,
               double h = 1e-5, double rel_tol = 1e-4) {
    for (auto leaf : leaves) leaf.zero_grad();
    Tensor out = f();
    REQUIRE(out.numel() == 1);
    out.backward();
    // absolute floor scaled to the loss magnitude: central differences lose
    // ~eps*|f|/h to cancellation, which swamps a pure relative test wherever
    // the true gradient is near zero
    double abs_tol = 1e-6 * std::max(1.0, std::abs(out.item()));
    for (auto leaf : leaves) {
        REQUIRE(leaf.has_grad());
        auto g = leaf.grad();
        for (std::size_t i = 0; i < leaf.numel(); ++i) {
            double saved = leaf.data()[i];
            leaf.data()[i] = saved + h;
            double fp = f().item();
            leaf.data()[i] = saved - h;
            double fm = f().item();
            leaf.data()[i] = saved;
            double numeric = (fp - fm) / (2.0 * h);
            CHECK(std::abs(numeric - g[i]) <=
                  rel_tol * std::max(std::abs(numeric), std::abs(g[i])) + abs_tol);
        }
    }
}

Tensor leaf_randn(Shape shape, std::mt19937_64& rng, double std = 1.0) {
    return Tensor::randn(std::move(shape), rng, std, true);
}

}  // namespace

TEST_CASE("elementwise op gradients match finite differences") {
    std::mt19937_64 rng(7);
    Tensor a = leaf_randn({2, 3}, rng);
    Tensor b = leaf_randn({2, 3}, rng);

    gradcheck({a, b}, [&] { return ops::sum(ops::mul(ops::add(a, b), ops::sub(a, b))); });
    gradcheck({a}, [&] { return ops::mean(ops::square(a)); });
    gradcheck({a}, [&] { return ops::sum(ops::tanh_op(a)); });
    gradcheck({a}, [&] { return ops::sum(ops::sigmoid(a)); });
    gradcheck({a}, [&] { return ops::sum(ops::log_sigmoid(a)); });
    gradcheck({a}, [&] { return ops::sum(ops::scalar_mul(ops::add_scalar(a, 3.0), -0.7)); });
    gradcheck({a}, [&] { return ops::sum(ops::leaky_relu(a, 0.2)); });

    Tensor pos = Tensor({4}, {0.5, 1.5, 2.5, 0.1}, true);
    gradcheck({pos}, [&] { return ops::sum(ops::sqrt_op(pos)); });
    gradcheck({pos}, [&] { return ops::sum(ops::log_op(pos)); });
}

TEST_CASE("leaky relu values and subgradient at zero") {
    Tensor x = Tensor({3}, {-1.0, 0.0, 2.0}, true);
    Tensor y = ops::leaky_relu(x, 0.2);
    CHECK(y.data()[0] == doctest::Approx(-0.2));
    CHECK(y.data()[1] == doctest::Approx(0.0));
    CHECK(y.data()[2] == doctest::Approx(2.0));
    ops::sum(y).backward();
    CHECK(x.grad()[0] == doctest::Approx(0.2));
    CHECK(x.grad()[1] == doctest::Approx(1.0));  // subgradient at 0 is the identity side
    CHECK(x.grad()[2] == doctest::Approx(1.0));
}

TEST_CASE("clip is hard with zero gradient outside the band") {
    Tensor x = Tensor({3}, {-5.0, 0.5, 7.0}, true);
    Tensor y = ops::clip(x, -4.0, 4.0);
    CHECK(y.data()[0] == doctest::Approx(-4.0));
    CHECK(y.data()[2] == doctest::Approx(4.0));
    ops::sum(y).backward();
    CHECK(x.grad()[0] == 0.0);
    CHECK(x.grad()[1] == 1.0);
    CHECK(x.grad()[2] == 0.0);
}

TEST_CASE("linear layer matches reference and gradchecks") {
    std::mt19937_64 rng(11);
    Tensor x = leaf_randn({3, 4}, rng);
    Tensor w = leaf_randn({2, 4}, rng);
    Tensor b = leaf_randn({2}, rng);
    Tensor y = ops::linear(x, w, b);
    REQUIRE(y.shape() == Shape{3, 2});
    double expect = b.data()[1];
    for (std::size_t j = 0; j < 4; ++j) expect += x.data()[4 + j] * w.data()[4 + j];
    CHECK(y.data()[3] == doctest::Approx(expect));
    gradcheck({x, w, b}, [&] { return ops::sum(ops::square(ops::linear(x, w, b))); });
}

TEST_CASE("conv1d worked example") {
    Tensor x({1, 1, 4}, {1, 2, 3, 4});
    Tensor k({1, 1, 3}, {1, 0, -1});
    Tensor y = ops::conv1d(x, k, 1, 0);
    REQUIRE(y.shape() == Shape{1, 1, 2});
    CHECK(y.data()[0] == doctest::Approx(-2.0));
    CHECK(y.data()[1] == doctest::Approx(-2.0));
}

TEST_CASE("conv1d output length formula with stride and padding") {
    std::mt19937_64 rng(3);
    Tensor x = leaf_randn({2, 3, 320}, rng);
    Tensor k = leaf_randn({5, 3, 4}, rng);
    Tensor y = ops::conv1d(x, k, 2, 1);
    CHECK(y.shape() == Shape{2, 5, 160});
    Tensor z = ops::conv1d_transpose(y, k, 2, 1);
    CHECK(z.shape() == Shape{2, 3, 320});
}

TEST_CASE("conv1d_transpose is the exact adjoint of conv1d") {
    std::mt19937_64 rng(5);
    // lengths chosen so (len + 2p - k) divides the stride evenly and the
    // transpose maps back onto the original extent
    for (auto [stride, padding, len] : std::vector<std::tuple<std::size_t, std::size_t,
                                                              std::size_t>>{
             {1, 0, 17}, {1, 1, 17}, {2, 1, 17}, {3, 2, 16}}) {
        Tensor x = leaf_randn({2, 3, len}, rng);
        Tensor k = leaf_randn({4, 3, 5}, rng);
        Tensor cx = ops::conv1d(x, k, stride, padding);
        Tensor y = leaf_randn(cx.shape(), rng);
        // <conv(x), y> == <x, conv_T(y)>
        double lhs = ops::sum(ops::mul(cx, y)).item();
        double rhs = ops::sum(ops::mul(x, ops::conv1d_transpose(y, k, stride, padding))).item();
        CHECK(std::abs(lhs - rhs) < 1e-10 * std::max(1.0, std::abs(lhs)));
    }
}

TEST_CASE("conv gradients match finite differences") {
    std::mt19937_64 rng(13);
    Tensor x = leaf_randn({2, 2, 9}, rng);
    Tensor k = leaf_randn({3, 2, 3}, rng);
    gradcheck({x, k}, [&] { return ops::sum(ops::square(ops::conv1d(x, k, 2, 1))); });
    Tensor xt = leaf_randn({2, 3, 5}, rng);
    gradcheck({xt, k}, [&] { return ops::sum(ops::square(ops::conv1d_transpose(xt, k, 2, 1))); });
}

TEST_CASE("batchnorm training normalizes per channel and gradchecks") {
    std::mt19937_64 rng(17);
    Tensor x = leaf_randn({4, 3, 6}, rng);
    auto bn = ops::make_batchnorm(3);
    Tensor y = ops::batchnorm1d(x, bn, true);
    for (std::size_t c = 0; c < 3; ++c) {
        double mean = 0.0, var = 0.0;
        std::size_t count = 0;
        for (std::size_t n = 0; n < 4; ++n)
            for (std::size_t t = 0; t < 6; ++t) {
                mean += y.data()[(n * 3 + c) * 6 + t];
                ++count;
            }
        mean /= static_cast<double>(count);
        for (std::size_t n = 0; n < 4; ++n)
            for (std::size_t t = 0; t < 6; ++t) {
                double d = y.data()[(n * 3 + c) * 6 + t] - mean;
                var += d * d;
            }
        var /= static_cast<double>(count);
        CHECK(mean == doctest::Approx(0.0).epsilon(1e-9));
        CHECK(var == doctest::Approx(1.0).epsilon(1e-3));
    }
    // running statistics moved away from the init after one training pass
    CHECK(bn.running_mean.data()[0] != 0.0);

    // training-mode output depends only on batch statistics, so the running
    // buffer updates inside the lambda do not disturb the finite differences
    auto bn2 = ops::make_batchnorm(3);
    gradcheck({x, bn2.gamma, bn2.beta},
              [&] { return ops::sum(ops::square(ops::batchnorm1d(x, bn2, true))); });
}

TEST_CASE("batchnorm inference uses running statistics") {
    std::mt19937_64 rng(19);
    Tensor x = leaf_randn({4, 2, 5}, rng);
    auto bn = ops::make_batchnorm(2);
    ops::batchnorm1d(x, bn, true);
    auto rm = std::vector<double>(bn.running_mean.data(), bn.running_mean.data() + 2);
    Tensor y1 = ops::batchnorm1d(x, bn, false);
    Tensor y2 = ops::batchnorm1d(x, bn, false);
    for (std::size_t i = 0; i < y1.numel(); ++i) CHECK(y1.data()[i] == y2.data()[i]);
    // inference does not drift the buffers
    CHECK(bn.running_mean.data()[0] == rm[0]);
    CHECK(bn.running_mean.data()[1] == rm[1]);
}

TEST_CASE("batchnorm training rejects batch of one") {
    Tensor x = Tensor::zeros({1, 2, 5});
    auto bn = ops::make_batchnorm(2);
    CHECK_THROWS_AS(ops::batchnorm1d(x, bn, true), TensorError);
}

TEST_CASE("softmax and cross entropy gradcheck") {
    std::mt19937_64 rng(23);
    Tensor logits = leaf_randn({4, 3}, rng);
    Tensor probs = ops::softmax_rows(logits);
    for (std::size_t i = 0; i < 4; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < 3; ++j) s += probs.data()[i * 3 + j];
        CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
    }
    std::vector<int> labels = {0, 2, 1, 2};
    gradcheck({logits}, [&] { return ops::cross_entropy_rows(logits, labels); });
    std::vector<double> weights = {1.0, 0.0, 1.0, 0.5};
    gradcheck({logits},
              [&] { return ops::cross_entropy_rows_weighted(logits, labels, weights); });
    gradcheck({logits}, [&] { return ops::sum(ops::square(ops::softmax_rows(logits))); });
}

TEST_CASE("weighted cross entropy ignores zero-weight rows") {
    Tensor logits({2, 3}, {5.0, 0.0, 0.0, 0.0, 5.0, 0.0}, true);
    std::vector<int> labels = {1, 1};  // first row badly wrong
    Tensor loss = ops::cross_entropy_rows_weighted(logits, labels, {0.0, 1.0});
    double only_second = -std::log(std::exp(5.0) / (std::exp(5.0) + 2.0));
    CHECK(loss.item() == doctest::Approx(only_second));
    loss.backward();
    for (std::size_t j = 0; j < 3; ++j) CHECK(logits.grad()[j] == 0.0);
}

TEST_CASE("detached tensors receive no gradient") {
    std::mt19937_64 rng(29);
    Tensor a = leaf_randn({3}, rng);
    Tensor d = ops::square(a).detach();
    Tensor out = ops::sum(ops::mul(d, a));
    out.backward();
    REQUIRE(a.has_grad());
    for (std::size_t i = 0; i < 3; ++i)
        CHECK(a.grad()[i] == doctest::Approx(d.data()[i]));  // only the direct path
}

TEST_CASE("backward accumulates over repeated calls and zero_grad resets") {
    Tensor a = Tensor({2}, {1.0, 2.0}, true);
    Tensor s = ops::sum(a);
    s.backward();
    s.backward();
    CHECK(a.grad()[0] == doctest::Approx(2.0));
    a.zero_grad();
    s.backward();
    CHECK(a.grad()[0] == doctest::Approx(1.0));
}

TEST_CASE("diamond-shaped graphs accumulate correctly") {
    Tensor a = Tensor({1}, {3.0}, true);
    Tensor b = ops::square(a);                    // a^2
    Tensor out = ops::sum(ops::mul(b, b));        // a^4, d/da = 4 a^3
    out.backward();
    CHECK(a.grad()[0] == doctest::Approx(4 * 27.0));
}

TEST_CASE("reshape preserves data and gradients") {
    std::mt19937_64 rng(31);
    Tensor a = leaf_randn({2, 6}, rng);
    Tensor r = ops::reshape(a, {3, 4});
    CHECK(r.shape() == Shape{3, 4});
    CHECK(r.data()[5] == a.data()[5]);
    gradcheck({a}, [&] { return ops::sum(ops::square(ops::reshape(a, {4, 3}))); });
    CHECK_THROWS_AS(ops::reshape(a, {5, 5}), TensorError);
}

TEST_CASE("sum_rows reduces all but the first axis") {
    Tensor a({2, 2, 2}, {1, 2, 3, 4, 5, 6, 7, 8}, true);
    Tensor r = ops::sum_rows(a);
    REQUIRE(r.shape() == Shape{2});
    CHECK(r.data()[0] == doctest::Approx(10.0));
    CHECK(r.data()[1] == doctest::Approx(26.0));
    gradcheck({a}, [&] { return ops::sum(ops::square(ops::sum_rows(a))); });
}

TEST_CASE("non-finite values are rejected") {
    CHECK_THROWS_AS(Tensor({2}, {1.0, std::nan("")}), TensorError);
    Tensor big = Tensor({1}, {1e308});
    CHECK_THROWS_AS(ops::square(big), TensorError);
}

TEST_CASE("composite loss shapes gradcheck end to end") {
    std::mt19937_64 rng(37);
    Tensor x = leaf_randn({2, 1, 8}, rng, 0.5);
    Tensor k1 = leaf_randn({2, 1, 4}, rng, 0.5);
    Tensor k2 = leaf_randn({2, 1, 4}, rng, 0.5);
    gradcheck({x, k1, k2}, [&] {
        Tensor h = ops::leaky_relu(ops::conv1d(x, k1, 2, 1), 0.2);
        Tensor y = ops::tanh_op(ops::conv1d_transpose(h, k2, 2, 1));
        return ops::mean(ops::sum_rows(ops::square(ops::sub(y, x))));
    });
}
