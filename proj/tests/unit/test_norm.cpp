#include <doctest.h>

#include <cmath>
#include <random>

#include "tempo/norm.hpp"

using namespace tempo::norm;

TEST_CASE("hand-evaluated normalization") {
    const std::vector<double> x{1, 2, 3};
    auto [y, st] = instance_normalize(x, {1.0, 0.0}, 0.0);
    CHECK(st.mean == 2.0);
    CHECK(st.var == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK(y[0] == doctest::Approx(-1.224744871391589).epsilon(1e-12));
    CHECK(y[1] == 0.0);
    CHECK(y[2] == doctest::Approx(1.224744871391589).epsilon(1e-12));
}

TEST_CASE("constant input maps to beta") {
    const std::vector<double> x(7, 4.5);
    auto [y, st] = instance_normalize(x, {1.7, -0.3}, 1e-5);
    for (double v : y) CHECK(v == -0.3);
}

TEST_CASE("affine on standardized input") {
    const std::vector<double> z{-1, 1};  // mean 0, population var 1
    auto [y, st] = instance_normalize(z, {2.0, 1.0}, 0.0);
    CHECK(y[0] == doctest::Approx(-1.0));
    CHECK(y[1] == doctest::Approx(3.0));
}

TEST_CASE("denormalize") {
    const std::vector<double> beta_only(5, 0.25);
    InstanceStats st{3.0, 2.0, 1e-5};
    for (double v : instance_denormalize(beta_only, st, {1.5, 0.25})) CHECK(v == 3.0);
    const std::vector<double> one{1.0};
    CHECK(instance_denormalize(one, {5.0, 0.0, 1.0}, {1.0, 0.0})[0] == 6.0);
    CHECK_THROWS(instance_denormalize(one, st, {0.0, 0.0}));
}

TEST_CASE("roundtrip and moments") {
    std::mt19937_64 rng(1);
    std::normal_distribution<double> nd(2.0, 3.0);
    std::uniform_real_distribution<double> ug(0.5, 2.0), ub(-1.0, 1.0);
    for (int rep = 0; rep < 200; ++rep) {
        std::vector<double> x(16);
        for (auto& v : x) v = nd(rng);
        const AffinePair a{ug(rng), ub(rng)};
        auto [y, st] = instance_normalize(x, a, 1e-5);
        const auto back = instance_denormalize(y, st, a);
        for (std::size_t i = 0; i < x.size(); ++i) CHECK(std::abs(back[i] - x[i]) <= 1e-12);

        auto [z, s0] = instance_normalize(x, {}, 0.0);
        double m = 0.0, v = 0.0;
        for (double e : z) m += e;
        m /= static_cast<double>(z.size());
        for (double e : z) v += (e - m) * (e - m);
        v /= static_cast<double>(z.size());
        CHECK(std::abs(m) <= 1e-12);
        CHECK(std::abs(v - 1.0) <= 1e-9);
    }
}

TEST_CASE("clamp_gamma") {
    CHECK(clamp_gamma(0.0) == kMinAbsGamma);
    CHECK(clamp_gamma(-1e-9) == -kMinAbsGamma);
    CHECK(clamp_gamma(0.3) == 0.3);
}
