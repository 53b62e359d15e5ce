#include "tempo/norm.hpp"

#include <cmath>
#include <stdexcept>

namespace tempo::norm {

double InstanceStats::scale() const { return std::sqrt(var + eps); }

InstanceStats compute_stats(std::span<const double> x, double eps) {
    if (x.empty()) throw std::invalid_argument("instance stats of an empty vector");
    if (eps < 0.0) throw std::invalid_argument("eps must be >= 0");
    const double n = static_cast<double>(x.size());
    double mu = 0.0;
    for (double v : x) mu += v;
    mu /= n;
    double var = 0.0;
    for (double v : x) var += (v - mu) * (v - mu);
    return {mu, var / n, eps};
}

std::pair<std::vector<double>, InstanceStats> instance_normalize(std::span<const double> x,
                                                                 AffinePair affine, double eps) {
    const InstanceStats st = compute_stats(x, eps);
    const double s = st.scale();
    std::vector<double> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = affine.gamma * ((x[i] - st.mean) / s) + affine.beta;
    return {std::move(out), st};
}

std::vector<double> instance_denormalize(std::span<const double> y, const InstanceStats& stats,
                                         AffinePair affine) {
    if (affine.gamma == 0.0) throw std::invalid_argument("instance_denormalize: gamma must be nonzero");
    const double s = stats.scale();
    std::vector<double> out(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) out[i] = s * ((y[i] - affine.beta) / affine.gamma) + stats.mean;
    return out;
}

double clamp_gamma(double gamma) {
    if (std::abs(gamma) >= kMinAbsGamma) return gamma;
    return gamma < 0.0 ? -kMinAbsGamma : kMinAbsGamma;
}

} // namespace tempo::norm
