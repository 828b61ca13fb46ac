#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "madegan/memory_bank.hpp"
#include "madegan/ops.hpp"

using namespace madegan;

TEST_CASE("addressing weights live on the probability simplex") {
    std::mt19937_64 rng(1);
    MemoryBank bank(64, 16, rng);
    const std::size_t queries = 10000;
    const std::size_t batch = 250;
    for (std::size_t start = 0; start < queries; start += batch) {
        Tensor z = Tensor::randn({batch, 16}, rng, 1.0);
        Tensor w = bank.address(z);
        REQUIRE(w.shape() == Shape{batch, 64});
        for (std::size_t i = 0; i < batch; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < 64; ++j) {
                double wij = w.data()[i * 64 + j];
                REQUIRE(wij >= 0.0);
                s += wij;
            }
            REQUIRE(std::abs(s - 1.0) < 1e-9);
        }
    }
}

TEST_CASE("softmax of cosine 1 and 0 gives the textbook pair") {
    Tensor omega({2, 2}, {1.0, 0.0, 0.0, 1.0});
    MemoryBank bank(omega);
    Tensor z({1, 2}, {3.0, 0.0});  // aligned with slot 0, orthogonal to slot 1
    Tensor w = bank.address(z);
    CHECK(w.data()[0] == doctest::Approx(0.7311).epsilon(1e-4));
    CHECK(w.data()[1] == doctest::Approx(0.2689).epsilon(1e-4));
}

TEST_CASE("identical prototypes address uniformly") {
    Tensor omega({4, 3}, {1, 2, 3, 1, 2, 3, 1, 2, 3, 1, 2, 3});
    MemoryBank bank(omega);
    std::mt19937_64 rng(2);
    Tensor z = Tensor::randn({1, 3}, rng, 1.0);
    Tensor w = bank.address(z);
    for (std::size_t j = 0; j < 4; ++j) CHECK(w.data()[j] == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("addressing is scale invariant in the query") {
    std::mt19937_64 rng(3);
    MemoryBank bank(8, 5, rng);
    Tensor z = Tensor::randn({2, 5}, rng, 1.0);
    Tensor z_scaled({2, 5}, std::vector<double>(z.data(), z.data() + 10));
    for (auto& v : z_scaled.values()) v *= 37.5;
    Tensor w1 = bank.address(z);
    Tensor w2 = bank.address(z_scaled);
    for (std::size_t i = 0; i < w1.numel(); ++i)
        CHECK(std::abs(w1.data()[i] - w2.data()[i]) < 1e-12);
}

TEST_CASE("zero query is rejected") {
    std::mt19937_64 rng(4);
    MemoryBank bank(8, 5, rng);
    CHECK_THROWS_AS(bank.address(Tensor::zeros({1, 5})), TensorError);
}

TEST_CASE("retrieval is the convex combination of prototypes") {
    Tensor omega({2, 3}, {1, 0, 0, 0, 2, 0});
    MemoryBank bank(omega);

    Tensor onehot({1, 2}, {0.0, 1.0});
    Tensor z1 = bank.retrieve(onehot);
    CHECK(z1.data()[0] == 0.0);
    CHECK(z1.data()[1] == 2.0);

    Tensor uniform({1, 2}, {0.5, 0.5});
    Tensor z2 = bank.retrieve(uniform);
    CHECK(z2.data()[0] == doctest::Approx(0.5));
    CHECK(z2.data()[1] == doctest::Approx(1.0));

    // norm bounded by the largest prototype norm
    double norm = std::sqrt(z2.data()[0] * z2.data()[0] + z2.data()[1] * z2.data()[1] +
                            z2.data()[2] * z2.data()[2]);
    CHECK(norm <= 2.0 + 1e-12);

    CHECK_THROWS_AS(bank.retrieve(Tensor::zeros({1, 3})), TensorError);
}

TEST_CASE("memorized patterns survive the address-retrieve round trip") {
    // orthogonal prototypes: each is far from the others in cosine
    Tensor omega({4, 4}, {2, 0, 0, 0, 0, 2, 0, 0, 0, 0, 2, 0, 0, 0, 0, 2});
    MemoryBank bank(omega);
    for (std::size_t j = 0; j < 4; ++j) {
        std::vector<double> q(4, 0.0);
        q[j] = 2.0;
        Tensor z({1, 4}, q);
        // shrinkage at the 1/N threshold concentrates the addressing on the
        // memorized slot; raw softmax over cosine keeps too much mass on the
        // orthogonal slots to restore the pattern
        Tensor zhat = bank.retrieve(bank.shrink(bank.address(z), 1.0 / 4.0));
        double dot = 0.0, nz = 0.0, nh = 0.0;
        for (std::size_t i = 0; i < 4; ++i) {
            dot += zhat.data()[i] * q[i];
            nz += q[i] * q[i];
            nh += zhat.data()[i] * zhat.data()[i];
        }
        CHECK(dot / std::sqrt(nz * nh) > 0.95);
    }
}

TEST_CASE("entropy sparsity endpoints") {
    Tensor onehot({1, 2000}, [] {
        std::vector<double> v(2000, 0.0);
        v[7] = 1.0;
        return v;
    }());
    CHECK(sparsity_loss(onehot).item() == doctest::Approx(0.0).epsilon(1e-12));

    Tensor uniform2000 = Tensor::full({1, 2000}, 1.0 / 2000.0);
    CHECK(std::abs(sparsity_loss(uniform2000).item() - std::log(2000.0)) < 1e-9);
    CHECK(sparsity_loss(uniform2000).item() == doctest::Approx(7.601).epsilon(1e-4));

    Tensor uniform2 = Tensor::full({1, 2}, 0.5);
    CHECK(sparsity_loss(uniform2).item() == doctest::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("addressing, retrieval and sparsity gradients match finite differences") {
    std::mt19937_64 rng(5);
    Tensor omega = Tensor::randn({6, 4}, rng, 1.0, true);
    Tensor z = Tensor::randn({3, 4}, rng, 1.0, true);

    auto gradcheck = [](std::vector<Tensor> leaves, auto f) {
        for (auto& l : leaves) l.zero_grad();
        Tensor out = f();
        out.backward();
        double h = 1e-5;
        for (auto& leaf : leaves) {
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
                      1e-4 * std::max(std::abs(numeric), std::abs(g[i])) + 1e-7);
            }
        }
    };

    gradcheck({omega, z}, [&] {
        MemoryBank bank(omega);
        Tensor w = bank.address(z);
        Tensor zhat = bank.retrieve(w);
        return ops::add(ops::mean(ops::sum_rows(ops::square(ops::sub(zhat, z)))),
                        ops::scalar_mul(sparsity_loss(w), 0.1));
    });
}

TEST_CASE("hard shrinkage zeroes small weights and renormalizes") {
    std::mt19937_64 rng(6);
    MemoryBank bank(4, 3, rng);
    Tensor w({1, 4}, {0.5, 0.3, 0.15, 0.05});
    Tensor s = bank.shrink(w, 0.1);
    CHECK(s.data()[3] == 0.0);
    double sum = 0.0;
    for (std::size_t j = 0; j < 4; ++j) sum += s.data()[j];
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(s.data()[0] == doctest::Approx(0.5 / 0.95));
}

TEST_CASE("dead prototype rows are reinitialized") {
    Tensor omega({3, 4}, {1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 1, 0}, true);
    MemoryBank bank(omega);
    std::mt19937_64 rng(7);
    bank.reinit_dead_rows(rng);
    double norm1 = 0.0;
    for (std::size_t i = 0; i < 4; ++i) {
        double v = bank.prototypes().data()[4 + i];
        norm1 += v * v;
    }
    CHECK(norm1 > 1e-8);
    // live rows untouched
    CHECK(bank.prototypes().data()[0] == 1.0);
    CHECK(bank.prototypes().data()[10] == 1.0);
}
