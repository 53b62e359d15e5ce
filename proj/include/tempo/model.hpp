#pragma once

// The decomposition-prompted forecaster: local decomposition with a learnable
// correction, per-component instance normalization, patch embedding, prompt
// assembly, one shared backbone over the concatenated streams, per-component
// linear heads, additive recombination and de-normalization.

#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "tempo/autograd.hpp"
#include "tempo/backbone.hpp"
#include "tempo/data.hpp"
#include "tempo/decompose.hpp"
#include "tempo/norm.hpp"
#include "tempo/params.hpp"
#include "tempo/prompt.hpp"

namespace tempo::model {

using prompt::Component;
using prompt::PromptMode;

struct TempoConfig {
    std::size_t lookback = 96;   // L
    std::size_t horizon = 24;    // L_H
    std::size_t patch_len = 16;  // L_P
    std::size_t stride = 8;      // S
    std::size_t period = 24;
    std::size_t trend_k = 0;     // 0 = period / 2

    PromptMode prompt_mode = PromptMode::pool;
    std::size_t pool_size = 30;  // M
    std::size_t top_k = 3;       // K
    std::size_t prompt_len = 3;  // L_p
    prompt::QueryPool query_pool = prompt::QueryPool::mean;

    backbone::BackboneConfig backbone;  // embed_dim is L_E
    backbone::FreezePolicy freeze = backbone::FreezePolicy::from_scratch;

    bool decompose = true;
    bool embed_per_component = false;
    bool heads_include_prompt_positions = false;
    double lambda_dec = 0.01;
    double eps = norm::kDefaultEps;

    double lr = 1e-3;
    std::size_t epochs = 10;
    std::size_t batch = 32;
    std::uint64_t seed = 0;
    std::size_t window_stride = 1;
    std::size_t samples_per_domain = 0;  // 0 = no cap
    double grad_clip = 0.0;              // global L2 norm, 0 = off

    std::size_t embed_dim() const { return backbone.embed_dim; }
    std::size_t trend_k_for(std::size_t p) const;
    std::size_t patches() const;
    std::size_t prompt_rows() const;
    std::size_t stream_rows() const;  // prompt rows + patches
    std::size_t stream_count() const { return decompose ? 3 : 1; }
    std::size_t sequence_length() const { return stream_count() * stream_rows(); }

    void validate() const;
};

/// One training or evaluation example. `global` holds the slice of the
/// whole-series decomposition aligned with the lookback; it is only needed
/// for the decomposition loss.
struct Sample {
    data::WindowPair window;
    std::size_t period = 0;
    std::size_t trend_k = 0;
    std::optional<decompose::ComponentTriple> global;
    std::string domain;
};

/// Bit i set = stream i active (trend, season, residual).
using StreamMask = unsigned;
inline constexpr StreamMask kAllStreams = 0b111;

struct ForwardOptions {
    StreamMask active = kAllStreams;
    std::mt19937_64* dropout_rng = nullptr;
};

struct ForecastBundle {
    std::vector<double> y_hat;
    std::vector<double> y_hat_trend;     // normalized space
    std::vector<double> y_hat_season;    // normalized space
    std::vector<double> y_hat_residual;  // normalized space
    std::vector<double> y_norm_sum;      // sum of the component forecasts
    norm::InstanceStats stats;
    norm::AffinePair output_affine;
    std::vector<std::vector<std::size_t>> selected_prompts;  // per stream
    std::vector<Component> streams;
    double dec_loss = 0.0;
    std::size_t sequence_rows = 0;
};

/// All trainable tensors plus the configuration that shaped them.
struct ModelParams {
    TempoConfig config;
    ParamStore store;

    std::vector<Component> streams() const;
};

/// Builds and initializes every tensor for `config` and applies the freeze
/// policy (and the hard-prompt freeze).
ModelParams init_model(const TempoConfig& config);

/// Re-applies trainability flags from config (freeze policy, hard prompts).
void apply_trainability(ModelParams& params);

/// Symbolic forward pass recorded on `tape`.
struct ForwardGraph {
    ag::Var y_hat;                     // 1 x L_H, original scale
    std::vector<ag::Var> component;    // 1 x L_H per stream, normalized space
    ag::Var y_norm;                    // sum of components
    std::optional<ag::Var> dec_loss;   // present when sample.global is set
    norm::InstanceStats stats;
    std::vector<std::vector<std::size_t>> selected;
    std::size_t sequence_rows = 0;
};

ForwardGraph forward_graph(ag::Tape& tape, ModelParams& params, const Sample& sample,
                           const ForwardOptions& opts = {});

ForecastBundle forward_tempo(ModelParams& params, const Sample& sample, const ForwardOptions& opts = {});

/// MSE(y_hat, target) + lambda_dec * dec_loss
ag::Var total_loss_graph(const ForwardGraph& g, std::span<const double> target, double lambda_dec);
double total_loss(const ForecastBundle& bundle, std::span<const double> target, double lambda_dec);

/// Local decomposition plus the learnable correction, as plain values.
decompose::ComponentTriple local_components(const ModelParams& params, std::span<const double> lookback,
                                            std::size_t period, std::size_t trend_k);

} // namespace tempo::model
