#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace tempo::theory {

using cplx = std::complex<double>;

/// F(u) = (1/N) sum_x f(x) e^{-i 2 pi u x / N}. Naive O(N^2).
std::vector<cplx> dft(std::span<const cplx> f);
std::vector<cplx> dft(std::span<const double> f);
/// f(x) = sum_u F(u) e^{i 2 pi u x / N}
std::vector<cplx> idft(std::span<const cplx> F);

/// Recovering the next sample and the (N+1)-point spectrum from f(0..N-1)
/// and the single new coefficient F'(N).
struct FreqExtension {
    std::vector<cplx> F;        // N-point DFT of f
    std::vector<cplx> A;        // A(u), u = 0..N-1
    cplx B;
    cplx F_prime_N;
    cplx f_N;
    std::vector<cplx> F_prime;  // F'(u), u = 0..N-1
};

/// With A(u) = sum_x f(x) (e^{-i2pi ux/N}/N - e^{-i2pi ux/(N+1)}/(N+1)) and
/// B = 1/(N+1) sum_x f(x) e^{-i2pi Nx/(N+1)}:
///   f(N)  = (N+1) (F'(N) - B) e^{+i2pi N^2/(N+1)}
///   F'(u) = F(u) - A(u) + (F'(N) - B) e^{i2pi (N-u) N/(N+1)}
FreqExtension freq_extend(std::span<const cplx> f, cplx F_prime_N);
FreqExtension freq_extend(std::span<const double> f, cplx F_prime_N);

struct SpectrumSupport {
    std::vector<cplx> coefficients;
    std::vector<std::size_t> support;  // |coef| > tol, ascending
    double tol = 0.0;
};

/// tol = tol_rel * max|coef| (tol_rel > 0).
SpectrumSupport spectrum_support(std::span<const double> x, double tol_rel = 1e-8);

struct DisentangleReport {
    double inner_product = 0.0;
    double bound = 0.0;  // largest |<x_T, x_S>| achievable with disjoint supports
    SpectrumSupport support_T, support_S;
    std::vector<std::size_t> overlap;
    bool theorem_consistent = true;
};

/// Flags a violation when |<x_T, x_S>| exceeds what sub-threshold
/// coefficients can produce (n^2 (tau_T max_S + tau_S max_T)) while the
/// supports are disjoint.
DisentangleReport disentangle_diagnostic(std::span<const double> x_T, std::span<const double> x_S,
                                         double tol_rel = 1e-8);

struct SuiteResult {
    std::string name;
    bool passed = false;
    std::size_t cases = 0;
    double max_error = 0.0;
    double tolerance = 0.0;
    std::size_t violations = 0;
};

SuiteResult check_dft(std::uint64_t seed = 0);
SuiteResult check_extend(std::uint64_t seed = 0, std::size_t cases = 200);
/// 100 non-orthogonal pairs built from random sparse spectra.
SuiteResult check_disentangle(std::uint64_t seed = 0, std::size_t pairs = 100);

} // namespace tempo::theory
