#pragma once

// Dense double-precision kernels used by the autograd engine.
//
// Every kernel has a scalar reference implementation. On x86-64 an AVX2/FMA
// variant is compiled into a separate translation unit and selected at
// runtime when the CPU supports it. Set TEMPO_SIMD=scalar in the environment
// to force the reference path.

#include <cstddef>
#include <span>
#include <string_view>

namespace tempo::kernels {

enum class Isa { scalar, avx2 };

struct KernelTable {
    Isa isa;
    // sum_i a[i] * b[i]
    double (*dot)(const double* a, const double* b, std::size_t n);
    // y[i] += alpha * x[i]
    void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
    // C(m x n) += A(m x k) * B(k x n)
    void (*gemm_nn)(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
                    std::size_t n);
    // C(m x n) += A(m x k) * B(n x k)^T
    void (*gemm_nt)(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
                    std::size_t n);
    // C(m x n) += A(k x m)^T * B(k x n)
    void (*gemm_tn)(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
                    std::size_t n);
};

const KernelTable& scalar_table();

// nullptr when the variant was not compiled in or the CPU lacks the feature.
const KernelTable* avx2_table();

// The table chosen for this process. Resolved once on first use.
const KernelTable& active();

std::string_view isa_name(Isa isa);

inline double dot(std::span<const double> a, std::span<const double> b) {
    return active().dot(a.data(), b.data(), a.size());
}

inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
    active().axpy(alpha, x.data(), y.data(), x.size());
}

} // namespace tempo::kernels
