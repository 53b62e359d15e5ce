#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "tempo/metrics.hpp"
#include "tempo/model.hpp"

namespace tempo::model {

struct EpochRecord {
    std::size_t epoch = 0;
    double train_mse = 0.0;   // mean forecast MSE over the epoch's samples
    double train_loss = 0.0;  // including the weighted decomposition loss
    std::optional<double> val_mse;
};

struct TrainHistory {
    std::vector<EpochRecord> epochs;
    std::size_t best_epoch = 0;  // 1-based; 0 when no validation data
};

struct TrainResult {
    ModelParams params;  // best-validation snapshot (final params without validation data)
    TrainHistory history;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

/// Adam (beta1 0.9, beta2 0.999, eps 1e-8) over shuffled mini-batches.
/// Throws DivergenceError on a non-finite loss.
TrainResult train(ModelParams init, const std::vector<Sample>& train_set, const std::vector<Sample>& val_set,
                  const EpochCallback& on_epoch = {});

TrainResult train(const TempoConfig& config, const std::vector<Sample>& train_set,
                  const std::vector<Sample>& val_set, const EpochCallback& on_epoch = {});

struct EvalOptions {
    StreamMask active = kAllStreams;
    std::optional<double> smape_clip;
    std::size_t horizon_prefix = 0;  // 0 = full horizon
};

std::vector<ForecastBundle> predict(ModelParams& params, const std::vector<Sample>& samples,
                                    StreamMask active = kAllStreams);

metrics::Metrics evaluate(ModelParams& params, const std::vector<Sample>& samples, const EvalOptions& opts = {});

metrics::Metrics score(const std::vector<ForecastBundle>& predictions, const std::vector<Sample>& samples,
                       const EvalOptions& opts = {});

} // namespace tempo::model
