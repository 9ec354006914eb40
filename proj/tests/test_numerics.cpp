#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "infdds/fdiff.hpp"
#include "infdds/matrix.hpp"
#include "infdds/optimizer.hpp"
#include "infdds/rng.hpp"

using namespace infdds;

namespace {

Matrix random_matrix(size_t r, size_t c, Rng& rng, double scale = 1.0) {
    Matrix m(r, c);
    for (double& v : m.data) v = scale * rng.normal();
    return m;
}

// scalar-loop Adam reference, kept independent of the implementation
struct ScalarAdam {
    double beta1, beta2, eps;
    std::vector<double> m, v;
    long t = 0;

    void step(std::vector<double>& p, const std::vector<double>& g, double lr) {
        if (m.empty()) {
            m.assign(p.size(), 0.0);
            v.assign(p.size(), 0.0);
        }
        ++t;
        for (size_t i = 0; i < p.size(); ++i) {
            m[i] = beta1 * m[i] + (1 - beta1) * g[i];
            v[i] = beta2 * v[i] + (1 - beta2) * g[i] * g[i];
            const double mhat = m[i] / (1 - std::pow(beta1, (double)t));
            const double vhat = v[i] / (1 - std::pow(beta2, (double)t));
            p[i] -= lr * mhat / (std::sqrt(vhat) + eps);
        }
    }
};

}  // namespace

TEST_SUITE("numerics") {

TEST_CASE("rng: identical seeds give identical streams") {
    Rng a(42), b(42);
    for (int i = 0; i < 1000; ++i) CHECK(a.next_u64() == b.next_u64());
    Rng c(42), d(43);
    bool same = true;
    for (int i = 0; i < 10; ++i) same = same && (c.next_u64() == d.next_u64());
    CHECK_FALSE(same);
}

TEST_CASE("rng: split streams are independent of parent consumption") {
    Rng parent(7);
    Rng child_before = parent.split(3);
    parent.next_u64();
    parent.next_u64();
    Rng child_after = parent.split(3);
    for (int i = 0; i < 100; ++i) CHECK(child_before.next_u64() == child_after.next_u64());
}

TEST_CASE("rng: uniform below bounds and coverage") {
    Rng rng(5);
    std::vector<int> counts(4, 0);
    for (int i = 0; i < 100000; ++i) {
        const double u = rng.uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        ++counts[rng.below(4)];
    }
    // 3-sigma binomial bound around 25000
    for (int c : counts) CHECK(std::abs(c - 25000) < 3 * std::sqrt(100000 * 0.25 * 0.75));
}

TEST_CASE("lr schedule: warmup then linear decay to zero") {
    LrSchedule s{1.0, 10, 110};
    CHECK(s.at(0) == doctest::Approx(0.1));
    CHECK(s.at(9) == doctest::Approx(1.0));
    CHECK(s.at(10) == doctest::Approx(1.0));
    CHECK(s.at(60) == doctest::Approx(0.5));
    CHECK(s.at(110) == doctest::Approx(0.0));
    CHECK(s.at(200) == 0.0);
    LrSchedule flat{0.5, 0, 0};
    CHECK(flat.at(0) == 0.5);
    CHECK(flat.at(1000) == 0.5);
}

TEST_CASE("optimizer_step: one SGD step") {
    std::vector<Matrix> params = {Matrix(1, 1)};
    params[0](0, 0) = 1.0;
    std::vector<Matrix> grads = {Matrix(1, 1)};
    grads[0](0, 0) = 2.0;
    auto st = OptimizerState::sgd({0.1, 0, 0}, 0.0, params);
    const double eta = optimizer_step(params, grads, st);
    CHECK(eta == doctest::Approx(0.1));
    CHECK(params[0](0, 0) == doctest::Approx(0.8));
    CHECK(st.step_count == 1);
}

TEST_CASE("optimizer_step: zero gradient leaves params unchanged (SGD) and within eps bias (Adam)") {
    Rng rng(11);
    std::vector<Matrix> params = {random_matrix(3, 3, rng)};
    const Matrix before = params[0];
    std::vector<Matrix> zeros = {Matrix(3, 3)};

    auto sgd = OptimizerState::sgd({0.1, 0, 0}, 0.9, params);
    optimizer_step(params, zeros, sgd);
    for (size_t i = 0; i < before.data.size(); ++i) CHECK(params[0].data[i] == before.data[i]);

    auto adam = OptimizerState::adam({0.1, 0, 0}, 0.9, 0.999, 1e-8, params);
    optimizer_step(params, zeros, adam);
    for (size_t i = 0; i < before.data.size(); ++i)
        CHECK(params[0].data[i] == doctest::Approx(before.data[i]).epsilon(1e-9));
}

TEST_CASE("optimizer_step: Adam matches scalar-loop oracle to 1e-12") {
    Rng rng(99);
    std::vector<Matrix> params = {random_matrix(3, 3, rng)};
    std::vector<double> ref(params[0].data.begin(), params[0].data.end());
    auto st = OptimizerState::adam({0.05, 0, 0}, 0.9, 0.999, 1e-8, params);
    ScalarAdam oracle{0.9, 0.999, 1e-8, {}, {}, 0};

    for (int step = 0; step < 5; ++step) {
        std::vector<Matrix> grads = {random_matrix(3, 3, rng)};
        std::vector<double> gflat(grads[0].data.begin(), grads[0].data.end());
        optimizer_step(params, grads, st);
        oracle.step(ref, gflat, 0.05);
        for (size_t i = 0; i < ref.size(); ++i)
            CHECK(params[0].data[i] == doctest::Approx(ref[i]).epsilon(1e-12));
    }
}

TEST_CASE("optimizer_step: rejects shape mismatch and non-finite grads by name") {
    Rng rng(1);
    std::vector<Matrix> params = {random_matrix(2, 2, rng)};
    std::vector<Matrix> bad_shape = {Matrix(3, 2)};
    auto st = OptimizerState::sgd({0.1, 0, 0}, 0.0, params);
    const std::vector<std::string> names = {"E"};
    CHECK_THROWS_WITH_AS(optimizer_step(params, bad_shape, st, names),
                         doctest::Contains("E"), std::invalid_argument);

    std::vector<Matrix> nan_grad = {Matrix(2, 2)};
    nan_grad[0](0, 1) = std::nan("");
    CHECK_THROWS_WITH_AS(optimizer_step(params, nan_grad, st, names), doctest::Contains("E"),
                         std::runtime_error);
}

TEST_CASE("optimizer_state_update: SGD momentum 0 changes only step_count") {
    Rng rng(3);
    std::vector<Matrix> params = {random_matrix(2, 2, rng)};
    auto st = OptimizerState::sgd({0.1, 0, 0}, 0.0, params);
    const Matrix m1 = st.moment1[0];
    std::vector<Matrix> pseudo = {random_matrix(2, 2, rng)};
    optimizer_state_update(st, pseudo);
    CHECK(st.step_count == 1);
    for (size_t i = 0; i < m1.data.size(); ++i) CHECK(st.moment1[0].data[i] == m1.data[i]);
}

TEST_CASE("optimizer_state_update: Adam moments follow beta recursions elementwise") {
    Rng rng(4);
    std::vector<Matrix> params = {random_matrix(2, 3, rng)};
    auto st = OptimizerState::adam({0.1, 0, 0}, 0.9, 0.999, 1e-8, params);
    std::vector<Matrix> g1 = {random_matrix(2, 3, rng)};
    optimizer_state_update(st, g1);
    for (size_t i = 0; i < g1[0].data.size(); ++i) {
        CHECK(st.moment1[0].data[i] == doctest::Approx(0.1 * g1[0].data[i]).epsilon(1e-12));
        CHECK(st.moment2[0].data[i] ==
              doctest::Approx(0.001 * g1[0].data[i] * g1[0].data[i]).epsilon(1e-12));
    }
    // params must not move
    CHECK(st.step_count == 1);

    // zero pseudo-grad decays moments by the betas
    const Matrix m_before = st.moment1[0], v_before = st.moment2[0];
    std::vector<Matrix> zeros = {Matrix(2, 3)};
    optimizer_state_update(st, zeros);
    for (size_t i = 0; i < m_before.data.size(); ++i) {
        CHECK(st.moment1[0].data[i] == doctest::Approx(0.9 * m_before.data[i]).epsilon(1e-12));
        CHECK(st.moment2[0].data[i] == doctest::Approx(0.999 * v_before.data[i]).epsilon(1e-12));
    }
}

TEST_CASE("optimizer descent: 100 SGD steps on a convex quadratic strictly decrease it") {
    // f(x) = |x|^2, grad = 2x
    std::vector<Matrix> params = {Matrix(1, 4)};
    for (size_t j = 0; j < 4; ++j) params[0](0, j) = 1.0 + static_cast<double>(j);
    auto st = OptimizerState::sgd({0.1, 0, 0}, 0.0, params);
    double prev = dot_flat(params[0], params[0]);
    for (int i = 0; i < 100; ++i) {
        std::vector<Matrix> grads = {params[0]};
        scale(grads[0], 2.0);
        optimizer_step(params, grads, st);
        const double f = dot_flat(params[0], params[0]);
        CHECK(f < prev);
        prev = f;
    }
}

TEST_CASE("adam bias correction: first step equals -lr * g/(|g|+eps)") {
    Rng rng(8);
    std::vector<Matrix> params = {random_matrix(2, 2, rng)};
    const Matrix before = params[0];
    std::vector<Matrix> grads = {random_matrix(2, 2, rng)};
    auto st = OptimizerState::adam({0.01, 0, 0}, 0.9, 0.999, 1e-8, params);
    optimizer_step(params, grads, st);
    for (size_t i = 0; i < before.data.size(); ++i) {
        const double g = grads[0].data[i];
        const double expected = before.data[i] - 0.01 * g / (std::fabs(g) + 1e-8);
        CHECK(params[0].data[i] == doctest::Approx(expected).epsilon(1e-9));
    }
}

TEST_CASE("finite_diff_grad: quadratic, constant, and error on non-finite") {
    auto square = [](std::span<const double> x) { return x[0] * x[0]; };
    std::vector<double> x = {3.0};
    const auto g = finite_diff_grad(square, x, 1e-5);
    CHECK(g[0] == doctest::Approx(6.0).epsilon(1e-6));

    auto constant = [](std::span<const double>) { return 2.5; };
    std::vector<double> y = {1.0, -2.0, 0.5};
    for (double gi : finite_diff_grad(constant, y, 1e-5)) CHECK(gi == 0.0);

    auto bad = [](std::span<const double> v) { return std::log(v[0]); };
    std::vector<double> z = {1e-9};
    CHECK_THROWS_AS(finite_diff_grad(bad, z, 1e-3), std::runtime_error);
}

TEST_CASE("determinism: fixed operation sequence reproduces bit-identical matrices") {
    auto build = [] {
        Rng rng(2024);
        Matrix a = random_matrix(4, 5, rng);
        Matrix b = random_matrix(5, 3, rng);
        Matrix c = matmul(a, b);
        add_scaled(c, matmul(a, b), 0.25);
        return c;
    };
    const Matrix c1 = build(), c2 = build();
    REQUIRE(c1.data.size() == c2.data.size());
    for (size_t i = 0; i < c1.data.size(); ++i) CHECK(c1.data[i] == c2.data[i]);
}

}  // TEST_SUITE
