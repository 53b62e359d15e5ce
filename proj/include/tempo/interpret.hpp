#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "tempo/train.hpp"

namespace tempo::interpret {

/// Coalition index: bit 0 trend, bit 1 season, bit 2 residual.
using Coalition = unsigned;
inline constexpr Coalition kEmpty = 0;
inline constexpr Coalition kFull = 0b111;

std::string coalition_name(Coalition s);  // "empty", "T", "S", "R", "T+S", ...

struct CoalitionTable {
    std::array<std::optional<metrics::Metrics>, 8> entries;

    bool complete() const;
    const metrics::Metrics& at(Coalition s) const;
};

/// Metrics of the model with only the streams in `subset` active.
metrics::Metrics coalition_eval(model::ModelParams& params, const std::vector<model::Sample>& samples,
                                Coalition subset, const model::EvalOptions& opts = {});

/// All 8 coalitions, one table per horizon prefix in `horizons` (0 = full).
std::vector<CoalitionTable> coalition_tables(model::ModelParams& params, const std::vector<model::Sample>& samples,
                                             const std::vector<std::size_t>& horizons,
                                             const model::EvalOptions& opts = {});

struct ShapleyReport {
    std::array<double, 3> phi{};  // trend, season, residual
    double value_full = 0.0;
    double value_empty = 0.0;
    std::string metric;
};

/// Exact 3-player Shapley values of an arbitrary game v indexed by coalition.
std::array<double, 3> shapley_values(const std::array<double, 8>& v);

/// v(S) = -error(S) for metric "mse" or "mae". Throws ValidationError on an
/// incomplete table.
ShapleyReport shapley(const CoalitionTable& table, const std::string& metric = "mse");

struct SobolIndices {
    std::array<double, 3> first_order{};
    double total_variance = 0.0;
};

/// Var(Y_c) / Var(sum_c Y_c) over every (window, horizon) point, normalized
/// space. Indices need not sum to 1 when components are correlated.
SobolIndices sobol_first_order(const std::vector<std::array<std::vector<double>, 3>>& components);
SobolIndices sobol_first_order(const std::vector<model::ForecastBundle>& bundles);

struct GamFit {
    std::vector<std::string> names;  // intercept, T, S, R[, TS, TR, SR]
    std::vector<double> coef;
    double r2 = 0.0;
    bool ridge = false;  // design was rank deficient
};

/// Least squares of target on [1, T, S, R] plus pairwise products when
/// `interactions` is set. Needs at least 10 points.
GamFit gam_fit(std::span<const double> t, std::span<const double> s, std::span<const double> r,
               std::span<const double> target, bool interactions = true);

/// Surrogate prediction with components outside `subset` set to zero.
std::vector<double> gam_predict(const GamFit& fit, std::span<const double> t, std::span<const double> s,
                                std::span<const double> r, Coalition subset = kFull);

/// Shapley values computed on the fitted surrogate, v(S) = -mse(surrogate_S, target).
ShapleyReport shapley_via_gam(const GamFit& fit, std::span<const double> t, std::span<const double> s,
                              std::span<const double> r, std::span<const double> target);

} // namespace tempo::interpret
