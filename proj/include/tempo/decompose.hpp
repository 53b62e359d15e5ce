#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace tempo::decompose {

/// Additive trend/season/residual split of one window or series.
/// residual is always x - trend - season.
struct ComponentTriple {
    std::vector<double> trend;
    std::vector<double> season;
    std::vector<double> residual;
    std::size_t period = 0;
    std::size_t k = 0;  // trend half-window, moving average width 2k+1

    std::size_t size() const { return trend.size(); }
    ComponentTriple slice(std::size_t begin, std::size_t end) const;
};

/// Per-timestep affine correction of the local trend and season. Starts as the
/// identity (scale 1, bias 0). The residual has no parameters of its own: it
/// is recomputed as the remainder so the triple stays additive.
struct LocalDecompParams {
    std::vector<double> scale_trend, bias_trend;
    std::vector<double> scale_season, bias_season;

    static LocalDecompParams identity(std::size_t length);
};

/// Centered moving average of width 2k+1 with k replicated values padded at
/// each end.
std::vector<double> moving_average(std::span<const double> x, std::size_t k);

/// Classical additive decomposition: moving-average trend, then the per-phase
/// mean of the detrended interior (indices k .. n-1-k) centered to zero mean
/// and tiled. A phase with no interior samples falls back to all its samples.
ComponentTriple global_decompose(std::span<const double> series, std::size_t period, std::size_t k);

/// Same procedure applied to a single lookback window.
ComponentTriple local_decompose(std::span<const double> window, std::size_t period, std::size_t k);

ComponentTriple corrected_local(std::span<const double> window, const ComponentTriple& raw,
                                const LocalDecompParams& params);

/// Mean over {trend, season, residual} of the elementwise MSE. Inputs are
/// expected to be instance-normalized already.
double decomposition_loss(const ComponentTriple& local, const ComponentTriple& global_slice);

/// max(0, 1 - Var(R) / (Var(S) + Var(R))), population variances. Returns 0
/// when Var(S) + Var(R) == 0.
double seasonality_strength(const ComponentTriple& triple);

double population_variance(std::span<const double> x);

} // namespace tempo::decompose
