#include "tempo/decompose.hpp"

#include <stdexcept>
#include <string>

namespace tempo::decompose {
namespace {

void check_args(std::size_t n, std::size_t period, std::size_t k) {
    if (period < 2) throw std::invalid_argument("decompose: period must be >= 2");
    if (n < 2 * period)
        throw std::invalid_argument("decompose: length " + std::to_string(n) + " is shorter than 2 * period");
    if (k < 1 || 2 * k + 1 > n) throw std::invalid_argument("decompose: k must satisfy 1 <= k and 2k+1 <= length");
}

double mse(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return s / static_cast<double>(a.size());
}

} // namespace

ComponentTriple ComponentTriple::slice(std::size_t begin, std::size_t end) const {
    if (begin > end || end > size()) throw std::invalid_argument("ComponentTriple::slice: out of range");
    ComponentTriple out;
    out.trend.assign(trend.begin() + begin, trend.begin() + end);
    out.season.assign(season.begin() + begin, season.begin() + end);
    out.residual.assign(residual.begin() + begin, residual.begin() + end);
    out.period = period;
    out.k = k;
    return out;
}

LocalDecompParams LocalDecompParams::identity(std::size_t length) {
    return {std::vector<double>(length, 1.0), std::vector<double>(length, 0.0),
            std::vector<double>(length, 1.0), std::vector<double>(length, 0.0)};
}

std::vector<double> moving_average(std::span<const double> x, std::size_t k) {
    const std::size_t n = x.size();
    const auto at = [&](std::ptrdiff_t i) {
        if (i < 0) return x.front();
        if (i >= static_cast<std::ptrdiff_t>(n)) return x.back();
        return x[static_cast<std::size_t>(i)];
    };
    const double m = static_cast<double>(2 * k + 1);
    const auto kk = static_cast<std::ptrdiff_t>(k);
    std::vector<double> out(n);
    for (std::size_t t = 0; t < n; ++t) {
        double s = 0.0;
        const auto tt = static_cast<std::ptrdiff_t>(t);
        for (std::ptrdiff_t j = -kk; j <= kk; ++j) s += at(tt + j);
        out[t] = s / m;
    }
    return out;
}

ComponentTriple global_decompose(std::span<const double> series, std::size_t period, std::size_t k) {
    const std::size_t n = series.size();
    check_args(n, period, k);
    ComponentTriple out;
    out.period = period;
    out.k = k;
    out.trend = moving_average(series, k);

    std::vector<double> sum_in(period, 0.0), sum_all(period, 0.0);
    std::vector<std::size_t> cnt_in(period, 0), cnt_all(period, 0);
    for (std::size_t t = 0; t < n; ++t) {
        const double d = series[t] - out.trend[t];
        const std::size_t ph = t % period;
        sum_all[ph] += d;
        ++cnt_all[ph];
        if (t >= k && t + k < n) {
            sum_in[ph] += d;
            ++cnt_in[ph];
        }
    }
    std::vector<double> phase(period);
    double centre = 0.0;
    for (std::size_t p = 0; p < period; ++p) {
        phase[p] = cnt_in[p] > 0 ? sum_in[p] / static_cast<double>(cnt_in[p])
                                 : sum_all[p] / static_cast<double>(cnt_all[p]);
        centre += phase[p];
    }
    centre /= static_cast<double>(period);
    for (double& v : phase) v -= centre;

    out.season.resize(n);
    out.residual.resize(n);
    for (std::size_t t = 0; t < n; ++t) {
        out.season[t] = phase[t % period];
        out.residual[t] = series[t] - out.trend[t] - out.season[t];
    }
    return out;
}

ComponentTriple local_decompose(std::span<const double> window, std::size_t period, std::size_t k) {
    return global_decompose(window, period, k);
}

ComponentTriple corrected_local(std::span<const double> window, const ComponentTriple& raw,
                                const LocalDecompParams& p) {
    const std::size_t n = window.size();
    if (raw.size() != n || p.scale_trend.size() != n || p.bias_trend.size() != n ||
        p.scale_season.size() != n || p.bias_season.size() != n)
        throw std::invalid_argument("corrected_local: shape mismatch");
    ComponentTriple out;
    out.period = raw.period;
    out.k = raw.k;
    out.trend.resize(n);
    out.season.resize(n);
    out.residual.resize(n);
    for (std::size_t t = 0; t < n; ++t) {
        out.trend[t] = p.scale_trend[t] * raw.trend[t] + p.bias_trend[t];
        out.season[t] = p.scale_season[t] * raw.season[t] + p.bias_season[t];
        out.residual[t] = window[t] - out.trend[t] - out.season[t];
    }
    return out;
}

double decomposition_loss(const ComponentTriple& local, const ComponentTriple& global_slice) {
    if (local.size() != global_slice.size() || local.season.size() != global_slice.season.size() ||
        local.residual.size() != global_slice.residual.size() || local.size() == 0)
        throw std::invalid_argument("decomposition_loss: length mismatch");
    return (mse(local.trend, global_slice.trend) + mse(local.season, global_slice.season) +
            mse(local.residual, global_slice.residual)) /
           3.0;
}

double population_variance(std::span<const double> x) {
    if (x.empty()) return 0.0;
    double mu = 0.0;
    for (double v : x) mu += v;
    mu /= static_cast<double>(x.size());
    double s = 0.0;
    for (double v : x) s += (v - mu) * (v - mu);
    return s / static_cast<double>(x.size());
}

double seasonality_strength(const ComponentTriple& triple) {
    const double vs = population_variance(triple.season);
    const double vr = population_variance(triple.residual);
    if (vs + vr <= 0.0) return 0.0;
    return std::max(0.0, 1.0 - vr / (vs + vr));
}

} // namespace tempo::decompose
