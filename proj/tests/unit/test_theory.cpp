#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "tempo/theory.hpp"

using namespace tempo::theory;

namespace {

constexpr double kPi = std::numbers::pi;

// Direct evaluation, independent of the library's angle reduction.
std::vector<cplx> dft_ref(const std::vector<cplx>& f) {
    const std::size_t n = f.size();
    std::vector<cplx> out(n);
    for (std::size_t u = 0; u < n; ++u) {
        cplx acc = 0.0;
        for (std::size_t x = 0; x < n; ++x)
            acc += f[x] * std::polar(1.0, -2.0 * kPi * double(u) * double(x) / double(n));
        out[u] = acc / double(n);
    }
    return out;
}

} // namespace

TEST_CASE("dft of small signals") {
    const std::vector<double> one{5.0};
    const auto F1 = dft(one);
    CHECK(std::abs(F1[0] - cplx(5.0)) < 1e-15);
    const std::vector<double> imp{1, 0, 0, 0};
    for (const auto& c : dft(imp)) CHECK(std::abs(c - cplx(0.25)) < 1e-15);
    const std::vector<double> alt{1, -1, 1, -1};
    const auto Fa = dft(alt);
    CHECK(std::abs(Fa[2] - cplx(1.0)) < 1e-15);
    CHECK(std::abs(Fa[0]) < 1e-15);
}

TEST_CASE("dft matches direct sum and round trips") {
    std::mt19937_64 rng(1);
    std::normal_distribution<double> nd;
    for (std::size_t n : {1u, 2u, 3u, 7u, 16u, 31u}) {
        std::vector<cplx> f(n);
        for (auto& v : f) v = {nd(rng), nd(rng)};
        const auto F = dft(f);
        const auto R = dft_ref(f);
        for (std::size_t u = 0; u < n; ++u) CHECK(std::abs(F[u] - R[u]) < 1e-12);
        const auto back = idft(F);
        for (std::size_t x = 0; x < n; ++x) CHECK(std::abs(back[x] - f[x]) < 1e-12);
    }
}

TEST_CASE("frequency extension recovers the next sample and spectrum") {
    std::mt19937_64 rng(2);
    std::normal_distribution<double> nd;
    for (std::size_t n : {1u, 2u, 5u, 12u, 24u}) {
        std::vector<cplx> full(n + 1);
        for (auto& v : full) v = {nd(rng), nd(rng)};
        const auto Fp = dft_ref(full);
        const std::vector<cplx> head(full.begin(), full.end() - 1);
        const auto ext = freq_extend(head, Fp[n]);
        CHECK(std::abs(ext.f_N - full[n]) < 1e-11);
        REQUIRE(ext.F_prime.size() == n);
        for (std::size_t u = 0; u < n; ++u) CHECK(std::abs(ext.F_prime[u] - Fp[u]) < 1e-11);
    }
}

TEST_CASE("frequency extension of a real ramp") {
    const std::vector<double> f{0, 1, 2, 3};
    std::vector<cplx> full{0, 1, 2, 3, 4};
    const auto Fp = dft_ref(full);
    const auto ext = freq_extend(f, Fp[4]);
    CHECK(std::abs(ext.f_N - cplx(4.0)) < 1e-12);
    CHECK(ext.A.size() == 4);
}

TEST_CASE("spectrum support") {
    const std::size_t n = 32;
    std::vector<double> c(n);
    for (std::size_t t = 0; t < n; ++t) c[t] = std::cos(2 * kPi * 3 * double(t) / n);
    const auto sp = spectrum_support(c);
    REQUIRE(sp.support.size() == 2);
    CHECK(sp.support[0] == 3);
    CHECK(sp.support[1] == n - 3);
    CHECK_THROWS(spectrum_support(c, 0.0));
}

TEST_CASE("disentangle diagnostic") {
    const std::size_t n = 32;
    std::vector<double> c(n), s(n), line(n), sin_off(n);
    for (std::size_t t = 0; t < n; ++t) {
        c[t] = std::cos(2 * kPi * 2 * double(t) / n);
        s[t] = std::sin(2 * kPi * 5 * double(t) / n);
        line[t] = double(t) / n;
        sin_off[t] = std::sin(2 * kPi * 4 * double(t) / n) + 0.3;
    }
    const auto ortho = disentangle_diagnostic(c, s);
    CHECK(std::abs(ortho.inner_product) < 1e-12);
    CHECK(ortho.overlap.empty());
    CHECK(ortho.theorem_consistent);

    // both carry a DC term, so the supports overlap and the product is nonzero
    const auto shared = disentangle_diagnostic(line, sin_off);
    CHECK(std::abs(shared.inner_product) > 1.0);
    CHECK(!shared.overlap.empty());
    CHECK(shared.overlap[0] == 0);
    CHECK(shared.theorem_consistent);
}

TEST_CASE("built-in suites pass") {
    const auto d = check_dft();
    CHECK(d.passed);
    CHECK(d.max_error <= 1e-10);
    const auto e = check_extend(0, 200);
    CHECK(e.passed);
    CHECK(e.cases == 200);
    CHECK(e.max_error <= 1e-8);
    const auto g = check_disentangle(0, 100);
    CHECK(g.passed);
    CHECK(g.cases == 100);
    CHECK(g.violations == 0);
}
