#include "tempo/metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace tempo::metrics {
namespace {

double smape_term(double f, double a) {
    const double den = std::abs(f) + std::abs(a);
    return den == 0.0 ? 0.0 : std::abs(f - a) / den;
}

} // namespace

double abs_smape(std::span<const double> forecast, std::span<const double> actual) {
    if (forecast.size() != actual.size() || forecast.empty())
        throw std::invalid_argument("abs_smape: length mismatch or empty input");
    double s = 0.0;
    for (std::size_t i = 0; i < forecast.size(); ++i) s += smape_term(forecast[i], actual[i]);
    return 200.0 * s / static_cast<double>(forecast.size());
}

void Accumulator::add(std::span<const double> forecast, std::span<const double> actual) {
    if (forecast.size() != actual.size()) throw std::invalid_argument("metrics: length mismatch");
    for (std::size_t i = 0; i < forecast.size(); ++i) {
        const double e = forecast[i] - actual[i];
        se_ += e * e;
        ae_ += std::abs(e);
        const double term = smape_term(forecast[i], actual[i]);
        if (clip_ && 2.0 * term > *clip_) continue;
        smape_ += term;
        ++smape_n_;
    }
    n_ += forecast.size();
}

Metrics Accumulator::result() const {
    if (n_ == 0) throw std::invalid_argument("metrics: no points");
    const double n = static_cast<double>(n_);
    return {se_ / n, ae_ / n, smape_n_ ? 200.0 * smape_ / static_cast<double>(smape_n_) : 0.0, n_};
}

Metrics compute(std::span<const double> forecast, std::span<const double> actual, std::optional<double> smape_clip) {
    Accumulator acc(smape_clip);
    acc.add(forecast, actual);
    return acc.result();
}

} // namespace tempo::metrics
