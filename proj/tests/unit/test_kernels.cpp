#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "tempo/kernels/kernels.hpp"

using namespace tempo::kernels;

namespace {

std::vector<double> randv(std::size_t n, std::mt19937_64& rng) {
    std::normal_distribution<double> nd;
    std::vector<double> v(n);
    for (auto& x : v) x = nd(rng);
    return v;
}

double max_rel(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]) / (1.0 + std::abs(a[i])));
    return m;
}

} // namespace

TEST_CASE("scalar kernels match naive loops") {
    std::mt19937_64 rng(1);
    const auto& s = scalar_table();
    const std::size_t m = 3, k = 5, n = 4;
    auto a = randv(m * k, rng), b = randv(k * n, rng), bt = randv(n * k, rng), at = randv(k * m, rng);
    std::vector<double> c(m * n, 0.0), want(m * n, 0.0);
    s.gemm_nn(a.data(), b.data(), c.data(), m, k, n);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t p = 0; p < k; ++p) want[i * n + j] += a[i * k + p] * b[p * n + j];
    CHECK(max_rel(c, want) < 1e-14);

    std::fill(c.begin(), c.end(), 0.0);
    std::fill(want.begin(), want.end(), 0.0);
    s.gemm_nt(a.data(), bt.data(), c.data(), m, k, n);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t p = 0; p < k; ++p) want[i * n + j] += a[i * k + p] * bt[j * k + p];
    CHECK(max_rel(c, want) < 1e-14);

    std::fill(c.begin(), c.end(), 0.0);
    std::fill(want.begin(), want.end(), 0.0);
    s.gemm_tn(at.data(), b.data(), c.data(), m, k, n);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t p = 0; p < k; ++p) want[i * n + j] += at[p * m + i] * b[p * n + j];
    CHECK(max_rel(c, want) < 1e-14);
}

TEST_CASE("avx2 kernels agree with the scalar reference") {
    const KernelTable* v = avx2_table();
    if (!v) {
        MESSAGE("AVX2 variant unavailable on this machine; skipped");
        return;
    }
    const auto& s = scalar_table();
    std::mt19937_64 rng(7);
    for (std::size_t n : {0, 1, 3, 4, 7, 8, 15, 16, 33, 100}) {
        auto a = randv(n, rng), b = randv(n, rng);
        const double ds = s.dot(a.data(), b.data(), n), dv = v->dot(a.data(), b.data(), n);
        CHECK(std::abs(ds - dv) <= 1e-12 * (1.0 + std::abs(ds)));
        auto y1 = b, y2 = b;
        s.axpy(0.37, a.data(), y1.data(), n);
        v->axpy(0.37, a.data(), y2.data(), n);
        CHECK(max_rel(y1, y2) <= 1e-14);
    }
    const std::size_t shapes[][3] = {{1, 1, 1}, {3, 5, 7}, {8, 8, 8}, {13, 21, 9}, {2, 64, 17}};
    for (const auto& sh : shapes) {
        const std::size_t m = sh[0], k = sh[1], n = sh[2];
        auto a = randv(m * k, rng), b = randv(k * n, rng), bt = randv(n * k, rng), at = randv(k * m, rng);
        auto c0 = randv(m * n, rng);
        auto c1 = c0, c2 = c0;
        s.gemm_nn(a.data(), b.data(), c1.data(), m, k, n);
        v->gemm_nn(a.data(), b.data(), c2.data(), m, k, n);
        CHECK(max_rel(c1, c2) <= 1e-12);
        c1 = c0, c2 = c0;
        s.gemm_nt(a.data(), bt.data(), c1.data(), m, k, n);
        v->gemm_nt(a.data(), bt.data(), c2.data(), m, k, n);
        CHECK(max_rel(c1, c2) <= 1e-12);
        c1 = c0, c2 = c0;
        s.gemm_tn(at.data(), b.data(), c1.data(), m, k, n);
        v->gemm_tn(at.data(), b.data(), c2.data(), m, k, n);
        CHECK(max_rel(c1, c2) <= 1e-12);
    }
}

TEST_CASE("active table is one of the compiled variants") {
    const auto& t = active();
    CHECK((t.isa == Isa::scalar || t.isa == Isa::avx2));
    CHECK(isa_name(Isa::scalar) == "scalar");
}
