#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "madegan/ops.hpp"
#include "madegan/optim.hpp"

using namespace madegan;

TEST_CASE("param set keeps insertion order and rejects duplicates") {
    ParamSet ps;
    ps.add("b", Tensor::zeros({2}, true));
    ps.add("a", Tensor::zeros({3}, true));
    REQUIRE(ps.names() == std::vector<std::string>{"b", "a"});
    CHECK(ps.has("a"));
    CHECK(!ps.has("c"));
    CHECK_THROWS_AS(ps.add("a", Tensor::zeros({1}, true)), TensorError);
    CHECK_THROWS_AS(ps.at("missing"), TensorError);
}

TEST_CASE("checksum tracks values and load_values_from copies them") {
    ParamSet a, b;
    a.add("w", Tensor({2}, {1.0, -2.0}, true));
    b.add("w", Tensor({2}, {5.0, 5.0}, true));
    CHECK(a.checksum() == doctest::Approx(3.0));
    b.load_values_from(a);
    CHECK(b.at("w").data()[0] == 1.0);
    CHECK(b.checksum() == doctest::Approx(a.checksum()));
    ParamSet c;
    c.add("other", Tensor::zeros({2}, true));
    CHECK_THROWS_AS(c.load_values_from(a), TensorError);
}

TEST_CASE("adam defaults match the training recipe") {
    Adam opt;
    CHECK(opt.lr == doctest::Approx(2e-4));
    CHECK(opt.beta1 == doctest::Approx(0.5));
    CHECK(opt.beta2 == doctest::Approx(0.999));
    CHECK(opt.eps == doctest::Approx(1e-8));
}

TEST_CASE("first adam step moves by ~lr in the gradient direction") {
    ParamSet ps;
    Tensor w = ps.add("w", Tensor({3}, {1.0, 2.0, 3.0}, true));
    auto g = w.grad();
    g[0] = 0.5;
    g[1] = -2.0;
    g[2] = 1e-3;
    Adam opt(0.01);
    opt.step(ps);
    // bias-corrected first step is lr * g/(|g| + eps') ~= lr * sign(g)
    CHECK(w.data()[0] == doctest::Approx(1.0 - 0.01).epsilon(1e-3));
    CHECK(w.data()[1] == doctest::Approx(2.0 + 0.01).epsilon(1e-3));
    CHECK(w.data()[2] == doctest::Approx(3.0 - 0.01).epsilon(1e-2));
    CHECK(opt.step_count() == 1);
}

TEST_CASE("zero gradient leaves the parameter unchanged") {
    ParamSet ps;
    Tensor w = ps.add("w", Tensor({2}, {4.0, -4.0}, true));
    w.grad();  // allocate zeros
    Adam opt(0.1);
    opt.step(ps);
    CHECK(w.data()[0] == 4.0);
    CHECK(w.data()[1] == -4.0);
}

TEST_CASE("missing gradient names the parameter") {
    ParamSet ps;
    ps.add("encoder.weight", Tensor::zeros({2}, true));
    Adam opt;
    CHECK_THROWS_WITH_AS(opt.step(ps), doctest::Contains("encoder.weight"), TensorError);
}

TEST_CASE("non-trainable buffers are skipped") {
    ParamSet ps;
    Tensor buf = ps.add("bn.running_mean", Tensor({2}, {1.0, 1.0}, false));
    Tensor w = ps.add("w", Tensor({1}, {0.0}, true));
    w.grad()[0] = 1.0;
    Adam opt(0.1);
    opt.step(ps);  // must not demand a gradient for the buffer
    CHECK(buf.data()[0] == 1.0);
    CHECK(w.data()[0] < 0.0);
}

TEST_CASE("adam converges on a quadratic bowl") {
    ParamSet ps;
    Tensor w = ps.add("w", Tensor({2}, {5.0, -3.0}, true));
    Adam opt(0.05, 0.9, 0.999);
    for (int i = 0; i < 500; ++i) {
        ps.zero_grad();
        Tensor loss = ops::sum(ops::square(w));
        loss.backward();
        opt.step(ps);
    }
    CHECK(std::abs(w.data()[0]) < 1e-2);
    CHECK(std::abs(w.data()[1]) < 1e-2);
}

TEST_CASE("shared step counter across parameters") {
    ParamSet ps;
    Tensor a = ps.add("a", Tensor({1}, {1.0}, true));
    Tensor b = ps.add("b", Tensor({1}, {1.0}, true));
    Adam opt(0.01);
    a.grad()[0] = 1.0;
    b.grad()[0] = 1.0;
    opt.step(ps);
    opt.step(ps);
    CHECK(opt.step_count() == 2);
    CHECK(a.data()[0] == doctest::Approx(b.data()[0]));
}
