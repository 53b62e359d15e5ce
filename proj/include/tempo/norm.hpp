#pragma once

#include <span>
#include <utility>
#include <vector>

namespace tempo::norm {

inline constexpr double kDefaultEps = 1e-5;
inline constexpr double kMinAbsGamma = 1e-6;

struct InstanceStats {
    double mean = 0.0;
    double var = 0.0;  // population variance
    double eps = kDefaultEps;

    double scale() const;  // sqrt(var + eps)
};

struct AffinePair {
    double gamma = 1.0;
    double beta = 0.0;
};

InstanceStats compute_stats(std::span<const double> x, double eps);

/// gamma * (x - mean) / sqrt(var + eps) + beta
std::pair<std::vector<double>, InstanceStats> instance_normalize(std::span<const double> x,
                                                                 AffinePair affine, double eps);

/// sqrt(var + eps) * ((y - beta) / gamma) + mean. Throws if gamma == 0.
std::vector<double> instance_denormalize(std::span<const double> y, const InstanceStats& stats,
                                         AffinePair affine);

/// Keeps |gamma| >= kMinAbsGamma, preserving sign (0 maps to +kMinAbsGamma).
double clamp_gamma(double gamma);

} // namespace tempo::norm
