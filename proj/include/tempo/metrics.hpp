#pragma once

#include <cstddef>
#include <optional>
#include <span>

namespace tempo::metrics {

struct Metrics {
    double mse = 0.0;
    double mae = 0.0;
    double abs_smape = 0.0;  // percent, in [0, 200]
    std::size_t points = 0;
};

/// (200 / n) * sum |F - A| / (|F| + |A|); terms with |F| + |A| == 0 count as 0.
double abs_smape(std::span<const double> forecast, std::span<const double> actual);

/// Running accumulator over many windows. With smape_clip set, SMAPE terms
/// whose per-point ratio 2|F-A|/(|F|+|A|) exceeds the clip are dropped from
/// the SMAPE average only.
class Accumulator {
public:
    explicit Accumulator(std::optional<double> smape_clip = std::nullopt) : clip_(smape_clip) {}

    void add(std::span<const double> forecast, std::span<const double> actual);
    Metrics result() const;

private:
    std::optional<double> clip_;
    double se_ = 0.0;
    double ae_ = 0.0;
    double smape_ = 0.0;
    std::size_t n_ = 0;
    std::size_t smape_n_ = 0;
};

Metrics compute(std::span<const double> forecast, std::span<const double> actual,
                std::optional<double> smape_clip = std::nullopt);

} // namespace tempo::metrics
