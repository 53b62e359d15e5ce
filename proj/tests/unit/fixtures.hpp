#pragma once

#include <random>

#include "tempo/data.hpp"
#include "tempo/decompose.hpp"
#include "tempo/model.hpp"

namespace fixtures {

// Small enough for finite differences and quick training runs.
inline tempo::model::TempoConfig tiny_config() {
    tempo::model::TempoConfig c;
    c.lookback = 32;
    c.horizon = 8;
    c.patch_len = 8;
    c.stride = 4;
    c.period = 8;
    c.pool_size = 8;
    c.top_k = 2;
    c.prompt_len = 2;
    c.backbone.layers = 2;
    c.backbone.heads = 2;
    c.backbone.embed_dim = 16;
    c.backbone.lora_rank = 2;
    c.epochs = 3;
    c.batch = 4;
    c.seed = 3;
    c.backbone.seed = 3;
    return c;
}

// Sine plus line plus noise; every sample carries its global slice.
inline std::vector<tempo::model::Sample> samples(const tempo::model::TempoConfig& c, std::size_t count,
                                                 std::uint64_t seed = 1, std::size_t stride = 3) {
    const std::size_t len = c.lookback + c.horizon + stride * count;
    auto series = tempo::data::synth_generate({len, c.period, 0.02, 1.0, 0.1, seed}).channels[0].values;
    const std::size_t k = c.trend_k_for(c.period);
    const auto global = tempo::decompose::global_decompose(series, c.period, k);
    std::vector<tempo::model::Sample> out;
    for (auto& w : tempo::data::make_windows(series, c.lookback, c.horizon, stride)) {
        if (out.size() == count) break;
        tempo::model::Sample s;
        s.period = c.period;
        s.trend_k = k;
        s.global = global.slice(w.origin_t, w.origin_t + c.lookback);
        s.window = std::move(w);
        out.push_back(std::move(s));
    }
    return out;
}

// Random values in every tensor, including the zero-initialized LoRA B.
inline void perturb(tempo::model::ModelParams& mp, std::uint64_t seed, double sd = 0.1) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd(0.0, sd);
    for (auto& p : mp.store.all())
        for (double& v : p.value.data) v += nd(rng);
}

} // namespace fixtures
