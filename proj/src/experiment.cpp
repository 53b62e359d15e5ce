#include "tempo/experiment.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <sstream>

#include "tempo/decompose.hpp"
#include "tempo/errors.hpp"
#include "tempo/prompt.hpp"

namespace tempo::experiment {
namespace {

std::size_t period_of(const DomainSource& s, const TempoConfig& cfg) { return s.period ? s.period : cfg.period; }

std::size_t k_of(const DomainSource& s, const TempoConfig& cfg) {
    return s.trend_k ? s.trend_k : cfg.trend_k_for(period_of(s, cfg));
}

std::vector<Sample> split_samples(const data::SeriesFrame& seg, const TempoConfig& cfg, std::size_t period,
                                  std::size_t k, bool attach_global, std::size_t offset, const std::string& domain) {
    std::vector<Sample> out;
    for (std::size_t c = 0; c < seg.channels.size(); ++c) {
        auto part = channel_samples(seg.channels[c].values, cfg, period, k, cfg.window_stride, attach_global, c,
                                    offset, domain);
        out.insert(out.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
    }
    return out;
}

// Seeded subset that keeps chronological order.
void cap(std::vector<Sample>& v, std::size_t limit, std::uint64_t seed) {
    if (limit == 0 || v.size() <= limit) return;
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::mt19937_64 rng(seed);
    std::shuffle(idx.begin(), idx.end(), rng);
    idx.resize(limit);
    std::sort(idx.begin(), idx.end());
    std::vector<Sample> kept;
    kept.reserve(limit);
    for (std::size_t i : idx) kept.push_back(std::move(v[i]));
    v = std::move(kept);
}

} // namespace

std::vector<Sample> channel_samples(std::span<const double> series, const TempoConfig& cfg, std::size_t period,
                                    std::size_t trend_k, std::size_t stride, bool attach_global,
                                    std::size_t channel_id, std::size_t origin_offset, const std::string& domain) {
    std::vector<Sample> out;
    if (data::window_count(series.size(), cfg.lookback, cfg.horizon, stride) == 0) return out;
    std::optional<decompose::ComponentTriple> global;
    if (attach_global) global = decompose::global_decompose(series, period, trend_k);
    for (auto& w : data::make_windows(series, cfg.lookback, cfg.horizon, stride, channel_id, origin_offset)) {
        Sample s;
        const std::size_t start = w.origin_t - origin_offset;
        s.window = std::move(w);
        s.period = period;
        s.trend_k = trend_k;
        if (global) s.global = global->slice(start, start + cfg.lookback);
        s.domain = domain;
        out.push_back(std::move(s));
    }
    return out;
}

Experiment build_single(const DomainSource& src, const TempoConfig& cfg, const data::SplitSpec& split) {
    cfg.validate();
    src.frame.validate();
    const auto parts = data::split_chrono(src.frame, split);
    const std::size_t p = period_of(src, cfg), k = k_of(src, cfg);
    Experiment ex;
    ex.train = split_samples(parts.train, cfg, p, k, cfg.decompose, 0, src.id);
    ex.val = split_samples(parts.val, cfg, p, k, false, parts.val_offset, src.id);
    // Test windows always use stride 1 so every origin is scored.
    TempoConfig test_cfg = cfg;
    test_cfg.window_stride = 1;
    ex.test = split_samples(parts.test, test_cfg, p, k, false, parts.test_offset, src.id);
    if (ex.train.empty()) throw ValidationError("shape", "dataset " + src.id + " too short for one training window");
    if (ex.test.empty()) throw ValidationError("shape", "dataset " + src.id + " too short for one test window");
    return ex;
}

void check_leakage(const std::vector<DomainSource>& sources, const DomainSource& target) {
    for (const auto& s : sources) {
        if (s.id == target.id) throw ValidationError("leakage", "target " + target.id + " appears in sources");
        for (const auto& sc : s.frame.channels)
            for (const auto& tc : target.frame.channels)
                if (!tc.values.empty() && sc.values == tc.values)
                    throw ValidationError("leakage", "target channel " + tc.name + " duplicates a channel of source " + s.id);
    }
}

Experiment build_zero_shot(const std::vector<DomainSource>& sources, const DomainSource& target,
                           const TempoConfig& cfg, const data::SplitSpec& split) {
    if (sources.empty()) throw ConfigError("zero-shot needs at least one source");
    check_leakage(sources, target);
    Experiment ex;
    for (const auto& s : sources) {
        Experiment part = build_single(s, cfg, split);
        const std::uint64_t salt = prompt::fnv1a64(s.id);
        cap(part.train, cfg.samples_per_domain, cfg.seed ^ salt);
        cap(part.val, cfg.samples_per_domain, cfg.seed ^ salt ^ 0x9e3779b97f4a7c15ULL);
        for (auto& x : part.train) ex.train.push_back(std::move(x));
        for (auto& x : part.val) ex.val.push_back(std::move(x));
    }
    ex.test = build_single(target, cfg, split).test;
    return ex;
}

RunResult train_and_evaluate(const TempoConfig& cfg, const Experiment& ex, const model::EvalOptions& eval,
                             const model::EpochCallback& on_epoch) {
    auto tr = model::train(cfg, ex.train, ex.val, on_epoch);
    RunResult r{std::move(tr.params), std::move(tr.history), {}};
    r.test = model::evaluate(r.params, ex.test, eval);
    return r;
}

RunResult zero_shot_run(const std::vector<DomainSource>& sources, const DomainSource& target,
                        const TempoConfig& cfg, const model::EvalOptions& eval) {
    return train_and_evaluate(cfg, build_zero_shot(sources, target, cfg), eval);
}

AblationFlags parse_ablation_flags(const std::string& csv) {
    AblationFlags f{false, false, false};
    std::stringstream ss(csv);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok == "no_dec") f.no_dec = true;
        else if (tok == "no_prompt") f.no_prompt = true;
        else if (tok == "no_dec_loss") f.no_dec_loss = true;
        else if (!tok.empty()) throw ConfigError("unknown ablation flag: " + tok);
    }
    return f;
}

TempoConfig variant_config(const TempoConfig& cfg, const std::string& variant) {
    TempoConfig v = cfg;
    if (variant == "full") return v;
    if (variant == "no_dec") v.decompose = false;
    else if (variant == "no_prompt") v.prompt_mode = prompt::PromptMode::none;
    else if (variant == "no_dec_loss") v.lambda_dec = 0.0;
    else throw ConfigError("unknown ablation variant: " + variant);
    return v;
}

std::vector<AblationRow> ablate(const TempoConfig& cfg, const Experiment& ex, const AblationFlags& flags,
                                const model::EvalOptions& eval) {
    std::vector<std::string> variants{"full"};
    if (flags.no_dec) variants.push_back("no_dec");
    if (flags.no_prompt) variants.push_back("no_prompt");
    if (flags.no_dec_loss) variants.push_back("no_dec_loss");
    std::vector<AblationRow> rows;
    for (const auto& name : variants) {
        const TempoConfig vc = variant_config(cfg, name);
        vc.validate();
        RunResult r = train_and_evaluate(vc, ex, eval);
        rows.push_back({name, r.test, vc.sequence_length()});
    }
    return rows;
}

} // namespace tempo::experiment
