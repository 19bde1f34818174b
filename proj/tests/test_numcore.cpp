#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "pixkit/rng.hpp"
#include "pixkit/tensor.hpp"
#include "pixkit/tsr.hpp"

using namespace pixkit;

TEST_SUITE_BEGIN("numcore");

TEST_CASE("softmax: uniform input gives uniform output") {
    Tensor out = softmax(Tensor::vec({0.0, 0.0, 0.0, 0.0}));
    for (double v : out.data) CHECK(v == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("softmax: hand-computed exp/sum oracle on [1,2,3]") {
    Tensor out = softmax(Tensor::vec({1.0, 2.0, 3.0}));
    // independent route: raw exponentials normalized
    const double e1 = std::exp(1.0), e2 = std::exp(2.0), e3 = std::exp(3.0);
    const double z = e1 + e2 + e3;
    CHECK(out.data[0] == doctest::Approx(e1 / z).epsilon(1e-12));
    CHECK(out.data[1] == doctest::Approx(e2 / z).epsilon(1e-12));
    CHECK(out.data[2] == doctest::Approx(e3 / z).epsilon(1e-12));
    CHECK(out.data[0] == doctest::Approx(0.09003057).epsilon(1e-7));
    CHECK(out.data[1] == doctest::Approx(0.24472847).epsilon(1e-7));
    CHECK(out.data[2] == doctest::Approx(0.66524096).epsilon(1e-7));
}

TEST_CASE("softmax: shift invariance and probability-vector property") {
    RngState rng{7, 0};
    for (int trial = 0; trial < 50; ++trial) {
        Tensor v = sample_gaussian(rng, {8});
        Tensor a = softmax(v);
        const double c = (rng.next_uniform() - 0.5) * 200.0;
        Tensor shifted = v;
        for (double& x : shifted.data) x += c;
        Tensor b = softmax(shifted);
        double sum = 0.0;
        for (size_t i = 0; i < a.numel(); ++i) {
            CHECK(a.data[i] == doctest::Approx(b.data[i]).epsilon(1e-9));
            CHECK(a.data[i] >= 0.0);
            sum += a.data[i];
        }
        CHECK(std::abs(sum - 1.0) <= 1e-12);
    }
}

TEST_CASE("softmax: empty input is an error") {
    CHECK_THROWS(softmax(Tensor()));
}

TEST_CASE("softmax: stays finite on extreme inputs") {
    Tensor out = softmax(Tensor::vec({1e308, -1e308, 0.0}));
    CHECK(out.all_finite());
    CHECK(out.data[0] == doctest::Approx(1.0));
}

TEST_CASE("rng: identical (seed, stream) gives identical sequences") {
    RngState a{42, 0}, b{42, 0};
    Tensor ta = sample_gaussian(a, {64});
    Tensor tb = sample_gaussian(b, {64});
    CHECK(ta.data == tb.data);
    CHECK(a.stream == b.stream);

    RngState c{42, 0};
    Tensor tg1 = sample_gumbel(c, {32});
    RngState d{42, 0};
    Tensor tg2 = sample_gumbel(d, {32});
    CHECK(tg1.data == tg2.data);
}

TEST_CASE("rng: different seeds diverge") {
    RngState a{1, 0}, b{2, 0};
    CHECK(a.next_u64() != b.next_u64());
}

TEST_CASE("sample_gaussian: CLT mean and variance over 1e5 draws") {
    RngState rng{123, 0};
    Tensor draws = sample_gaussian(rng, {100000});
    double mean = 0.0;
    for (double v : draws.data) mean += v;
    mean /= static_cast<double>(draws.numel());
    double var = 0.0;
    for (double v : draws.data) var += (v - mean) * (v - mean);
    var /= static_cast<double>(draws.numel());
    CHECK(std::abs(mean) < 0.02);
    CHECK(std::abs(var - 1.0) < 0.03);
}

TEST_CASE("sample_gumbel: finite and Euler-Mascheroni mean") {
    RngState rng{9, 0};
    Tensor draws = sample_gumbel(rng, {100000});
    CHECK(draws.all_finite());
    double mean = 0.0;
    for (double v : draws.data) mean += v;
    mean /= static_cast<double>(draws.numel());
    CHECK(std::abs(mean - 0.57721566) < 0.02);
}

TEST_CASE("finite differences: quadratic is exact") {
    auto f = [](const Tensor& x) { return x.data[0] * x.data[0]; };
    Tensor g = finite_difference_gradient(f, Tensor::vec({3.0}), 1e-5);
    CHECK(g.data[0] == doctest::Approx(6.0).epsilon(1e-7));
}

TEST_CASE("finite differences: constant function has zero gradient") {
    auto f = [](const Tensor&) { return 4.25; };
    Tensor g = finite_difference_gradient(f, Tensor::vec({1.0, -2.0, 0.5}), 1e-5);
    for (double v : g.data) CHECK(v == 0.0);
}

TEST_CASE("finite differences: sum(sin) matches cos") {
    auto f = [](const Tensor& x) {
        double s = 0.0;
        for (double v : x.data) s += std::sin(v);
        return s;
    };
    RngState rng{5, 0};
    Tensor x = sample_gaussian(rng, {6});
    Tensor g = finite_difference_gradient(f, x, 1e-5);
    for (size_t i = 0; i < x.numel(); ++i) {
        CHECK(std::abs(g.data[i] - std::cos(x.data[i])) < 1e-8);
    }
}

TEST_CASE("finite differences: degree-2 polynomials exact to 1e-8") {
    RngState rng{17, 0};
    Tensor a = sample_gaussian(rng, {4});
    Tensor b = sample_gaussian(rng, {4});
    auto f = [&](const Tensor& x) {
        double s = 1.5;
        for (size_t i = 0; i < 4; ++i) s += a.data[i] * x.data[i] * x.data[i] + b.data[i] * x.data[i];
        return s;
    };
    Tensor x = sample_gaussian(rng, {4});
    Tensor g = finite_difference_gradient(f, x, 1e-5);
    for (size_t i = 0; i < 4; ++i) {
        CHECK(std::abs(g.data[i] - (2.0 * a.data[i] * x.data[i] + b.data[i])) < 1e-8);
    }
}

TEST_CASE("finite differences: non-finite f is an error") {
    auto f = [](const Tensor& x) { return 1.0 / (x.data[0] - x.data[0]); };
    CHECK_THROWS(finite_difference_gradient(f, Tensor::vec({1.0}), 1e-5));
}

TEST_CASE("tsr: roundtrip preserves shape and bits") {
    RngState rng{31, 0};
    Tensor t = sample_gaussian(rng, {3, 5});
    const auto path = std::filesystem::temp_directory_path() / "pixkit_test_roundtrip.tsr";
    save_tsr(t, path);
    Tensor back = load_tsr(path);
    CHECK(back.shape == t.shape);
    CHECK(back.data == t.data);
    std::filesystem::remove(path);
}

TEST_SUITE_END();
