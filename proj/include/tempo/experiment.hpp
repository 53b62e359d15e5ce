#pragma once

#include <string>
#include <vector>

#include "tempo/data.hpp"
#include "tempo/train.hpp"

namespace tempo::experiment {

using model::Sample;
using model::TempoConfig;

/// One named dataset with its own seasonal period.
struct DomainSource {
    std::string id;
    data::SeriesFrame frame;
    std::size_t period = 0;   // 0 = config.period
    std::size_t trend_k = 0;  // 0 = period / 2
};

struct Experiment {
    std::vector<Sample> train;
    std::vector<Sample> val;
    std::vector<Sample> test;
};

/// Windows of one channel. With attach_global each sample carries the
/// matching slice of the whole-segment decomposition.
std::vector<Sample> channel_samples(std::span<const double> series, const TempoConfig& cfg, std::size_t period,
                                    std::size_t trend_k, std::size_t stride, bool attach_global,
                                    std::size_t channel_id, std::size_t origin_offset, const std::string& domain);

/// Chronological split of one dataset; train windows carry global slices
/// computed on the train segment only.
Experiment build_single(const DomainSource& src, const TempoConfig& cfg, const data::SplitSpec& split = {});

/// Pools train/val windows of every source (each capped at
/// cfg.samples_per_domain) and uses the target's test split only.
/// Throws ValidationError("leakage") when the target overlaps a source.
Experiment build_zero_shot(const std::vector<DomainSource>& sources, const DomainSource& target,
                           const TempoConfig& cfg, const data::SplitSpec& split = {});

void check_leakage(const std::vector<DomainSource>& sources, const DomainSource& target);

struct RunResult {
    model::ModelParams params;
    model::TrainHistory history;
    metrics::Metrics test;
};

RunResult train_and_evaluate(const TempoConfig& cfg, const Experiment& ex,
                             const model::EvalOptions& eval = {}, const model::EpochCallback& on_epoch = {});

RunResult zero_shot_run(const std::vector<DomainSource>& sources, const DomainSource& target,
                        const TempoConfig& cfg, const model::EvalOptions& eval = {});

struct AblationFlags {
    bool no_dec = true;
    bool no_prompt = true;
    bool no_dec_loss = true;
};

AblationFlags parse_ablation_flags(const std::string& csv);

struct AblationRow {
    std::string variant;  // full, no_dec, no_prompt, no_dec_loss
    metrics::Metrics metrics;
    std::size_t sequence_length = 0;
};

TempoConfig variant_config(const TempoConfig& cfg, const std::string& variant);

/// "full" first, then each flagged variant, all on the same data and seed.
std::vector<AblationRow> ablate(const TempoConfig& cfg, const Experiment& ex, const AblationFlags& flags,
                                const model::EvalOptions& eval = {});

} // namespace tempo::experiment
