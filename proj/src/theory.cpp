#include "tempo/theory.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace tempo::theory {
namespace {

// e^{i 2 pi num / den} with num reduced mod den first to keep the angle small.
cplx unit(std::int64_t num, std::int64_t den) {
    std::int64_t r = num % den;
    if (r < 0) r += den;
    const double a = 2.0 * std::numbers::pi * static_cast<double>(r) / static_cast<double>(den);
    return {std::cos(a), std::sin(a)};
}

std::vector<cplx> to_complex(std::span<const double> x) { return {x.begin(), x.end()}; }

double max_abs(const std::vector<cplx>& v) {
    double m = 0.0;
    for (const auto& c : v) m = std::max(m, std::abs(c));
    return m;
}

} // namespace

std::vector<cplx> dft(std::span<const cplx> f) {
    const auto N = static_cast<std::int64_t>(f.size());
    if (N < 1) throw std::invalid_argument("dft: empty input");
    std::vector<cplx> F(f.size());
    for (std::int64_t u = 0; u < N; ++u) {
        cplx s = 0.0;
        for (std::int64_t x = 0; x < N; ++x) s += f[x] * unit(-u * x, N);
        F[u] = s / static_cast<double>(N);
    }
    return F;
}

std::vector<cplx> dft(std::span<const double> f) {
    const auto c = to_complex(f);
    return dft(std::span<const cplx>(c));
}

std::vector<cplx> idft(std::span<const cplx> F) {
    const auto N = static_cast<std::int64_t>(F.size());
    if (N < 1) throw std::invalid_argument("idft: empty input");
    std::vector<cplx> f(F.size());
    for (std::int64_t x = 0; x < N; ++x) {
        cplx s = 0.0;
        for (std::int64_t u = 0; u < N; ++u) s += F[u] * unit(u * x, N);
        f[x] = s;
    }
    return f;
}

FreqExtension freq_extend(std::span<const cplx> f, cplx F_prime_N) {
    const auto N = static_cast<std::int64_t>(f.size());
    if (N < 1) throw std::invalid_argument("freq_extend: empty input");
    const double n = static_cast<double>(N), n1 = n + 1.0;
    FreqExtension e;
    e.F = dft(f);
    e.F_prime_N = F_prime_N;
    e.A.resize(f.size());
    for (std::int64_t u = 0; u < N; ++u) {
        cplx s = 0.0;
        for (std::int64_t x = 0; x < N; ++x) s += f[x] * (unit(-u * x, N) / n - unit(-u * x, N + 1) / n1);
        e.A[u] = s;
    }
    e.B = 0.0;
    for (std::int64_t x = 0; x < N; ++x) e.B += f[x] * unit(-N * x, N + 1);
    e.B /= n1;
    const cplx d = F_prime_N - e.B;
    e.f_N = n1 * d * unit(N * N, N + 1);
    e.F_prime.resize(f.size());
    for (std::int64_t u = 0; u < N; ++u) e.F_prime[u] = e.F[u] - e.A[u] + d * unit((N - u) * N, N + 1);
    return e;
}

FreqExtension freq_extend(std::span<const double> f, cplx F_prime_N) {
    const auto c = to_complex(f);
    return freq_extend(std::span<const cplx>(c), F_prime_N);
}

SpectrumSupport spectrum_support(std::span<const double> x, double tol_rel) {
    if (!(tol_rel > 0.0)) throw std::invalid_argument("spectrum_support: tol must be > 0");
    SpectrumSupport s;
    s.coefficients = dft(x);
    s.tol = tol_rel * max_abs(s.coefficients);
    for (std::size_t u = 0; u < s.coefficients.size(); ++u)
        if (std::abs(s.coefficients[u]) > s.tol) s.support.push_back(u);
    return s;
}

DisentangleReport disentangle_diagnostic(std::span<const double> x_T, std::span<const double> x_S, double tol_rel) {
    if (x_T.size() != x_S.size()) throw std::invalid_argument("disentangle: length mismatch");
    DisentangleReport r;
    for (std::size_t t = 0; t < x_T.size(); ++t) r.inner_product += x_T[t] * x_S[t];
    r.support_T = spectrum_support(x_T, tol_rel);
    r.support_S = spectrum_support(x_S, tol_rel);
    std::set_intersection(r.support_T.support.begin(), r.support_T.support.end(), r.support_S.support.begin(),
                          r.support_S.support.end(), std::back_inserter(r.overlap));
    // <x_T, x_S> = n sum_u X_T(u) conj(X_S(u)); off the overlap one factor is
    // below its threshold at every u.
    const double n = static_cast<double>(x_T.size());
    const double mT = max_abs(r.support_T.coefficients), mS = max_abs(r.support_S.coefficients);
    r.bound = n * n * (r.support_T.tol * mS + r.support_S.tol * mT);
    r.theorem_consistent = !(std::abs(r.inner_product) > r.bound && r.overlap.empty());
    return r;
}

SuiteResult check_dft(std::uint64_t seed) {
    SuiteResult res{"dft", false, 0, 0.0, 1e-9, 0};
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    auto note = [&](double err) {
        res.max_error = std::max(res.max_error, err);
        ++res.cases;
    };
    for (std::size_t N = 1; N <= 64; ++N) {
        std::vector<cplx> x(N);
        for (auto& v : x) v = {nd(rng), nd(rng)};
        const auto X = dft(std::span<const cplx>(x));
        const auto back = idft(std::span<const cplx>(X));
        double e = 0.0;
        for (std::size_t i = 0; i < N; ++i) e = std::max(e, std::abs(back[i] - x[i]));
        note(e);
        // Parseval: sum |f|^2 = N sum |F|^2
        double lhs = 0.0, rhs = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            lhs += std::norm(x[i]);
            rhs += std::norm(X[i]);
        }
        note(std::abs(lhs - static_cast<double>(N) * rhs) / std::max(1.0, lhs));
        // impulse
        std::vector<cplx> imp(N, 0.0);
        imp[0] = 1.0;
        const auto I = dft(std::span<const cplx>(imp));
        double ei = 0.0;
        for (const auto& c : I) ei = std::max(ei, std::abs(c - 1.0 / static_cast<double>(N)));
        note(ei);
    }
    res.passed = res.max_error <= res.tolerance;
    return res;
}

SuiteResult check_extend(std::uint64_t seed, std::size_t cases) {
    SuiteResult res{"extend", false, 0, 0.0, 1e-9, 0};
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    std::uniform_int_distribution<std::size_t> pickN(1, 32);
    for (std::size_t c = 0; c < cases; ++c) {
        const std::size_t N = pickN(rng);
        std::vector<double> g(N + 1);
        for (auto& v : g) v = nd(rng);
        const auto G = dft(std::span<const double>(g));
        const auto e = freq_extend(std::span<const double>(g).first(N), G[N]);
        double err = std::abs(e.f_N - g[N]);
        for (std::size_t u = 0; u < N; ++u) err = std::max(err, std::abs(e.F_prime[u] - G[u]));
        res.max_error = std::max(res.max_error, err);
        ++res.cases;
    }
    res.passed = res.max_error <= res.tolerance;
    return res;
}

namespace {

// Real signal whose spectrum is supported on a random subset of bins (kept
// conjugate-symmetric), optionally plus a line.
std::vector<double> sparse_signal(std::size_t n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> ud(-1.0, 1.0);
    std::bernoulli_distribution on(0.3);
    std::vector<double> x(n, 0.0);
    for (std::size_t u = 0; u <= n / 2; ++u) {
        if (!on(rng)) continue;
        const double a = ud(rng), b = ud(rng);
        for (std::size_t t = 0; t < n; ++t) {
            const double w = 2.0 * std::numbers::pi * static_cast<double>((u * t) % n) / static_cast<double>(n);
            x[t] += a * std::cos(w) + b * std::sin(w);
        }
    }
    if (on(rng)) {
        const double slope = ud(rng) * 0.1;
        for (std::size_t t = 0; t < n; ++t) x[t] += slope * static_cast<double>(t);
    }
    return x;
}

} // namespace

SuiteResult check_disentangle(std::uint64_t seed, std::size_t pairs) {
    SuiteResult res{"disentangle", false, 0, 0.0, 0.0, 0};
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pickN(8, 64);
    std::size_t attempts = 0;
    while (res.cases < pairs) {
        if (++attempts > 100 * pairs) throw std::runtime_error("disentangle suite: too few non-orthogonal pairs");
        const std::size_t n = pickN(rng);
        const auto xt = sparse_signal(n, rng);
        const auto xs = sparse_signal(n, rng);
        const auto r = disentangle_diagnostic(xt, xs);
        if (!r.theorem_consistent) ++res.violations;
        if (std::abs(r.inner_product) <= 1e-6 * static_cast<double>(n)) continue;
        ++res.cases;
        if (r.overlap.empty()) ++res.violations;
    }
    res.max_error = static_cast<double>(res.violations);
    res.passed = res.violations == 0;
    return res;
}

} // namespace tempo::theory
