#include "tempo/model.hpp"

#include <cmath>
#include <stdexcept>

#include "tempo/embed.hpp"
#include "tempo/errors.hpp"

namespace tempo::model {
namespace {

constexpr std::array<Component, 3> kComponents{Component::trend, Component::season, Component::residual};

std::string cname(Component c) { return prompt::component_name(c); }

Matrix uniform(std::size_t r, std::size_t c, double bound, std::mt19937_64& rng) {
    Matrix m(r, c);
    std::uniform_real_distribution<double> u(-bound, bound);
    for (double& v : m.data) v = u(rng);
    return m;
}

std::vector<double> standardized(std::span<const double> x, double eps) {
    const auto st = norm::compute_stats(x, eps);
    const double is = 1.0 / std::sqrt(st.var + eps);
    std::vector<double> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = (x[i] - st.mean) * is;
    return out;
}

std::string embed_w_name(const TempoConfig& cfg, Component c) {
    return cfg.embed_per_component ? "embed.w_" + cname(c) : "embed.w";
}

std::string embed_b_name(const TempoConfig& cfg, Component c) {
    return cfg.embed_per_component ? "embed.b_" + cname(c) : "embed.b";
}

} // namespace

std::size_t TempoConfig::trend_k_for(std::size_t p) const {
    if (trend_k > 0) return trend_k;
    return std::max<std::size_t>(1, p / 2);
}

std::size_t TempoConfig::patches() const { return embed::patch_count(lookback, patch_len, stride); }

std::size_t TempoConfig::prompt_rows() const {
    switch (prompt_mode) {
    case PromptMode::pool: return top_k * prompt_len;
    case PromptMode::semi_soft:
    case PromptMode::hard: return prompt_len;
    case PromptMode::none: return 0;
    }
    return 0;
}

std::size_t TempoConfig::stream_rows() const { return prompt_rows() + patches(); }

void TempoConfig::validate() const {
    if (lookback < 1 || horizon < 1) throw ConfigError("lookback and horizon must be >= 1");
    if (patch_len < 1 || patch_len > lookback || stride < 1)
        throw ConfigError("need 1 <= patch_len <= lookback and stride >= 1");
    if (decompose) {
        if (period < 2) throw ConfigError("period must be >= 2");
        if (lookback < 2 * period) throw ConfigError("lookback must be at least 2 * period");
        if (2 * trend_k_for(period) + 1 > lookback) throw ConfigError("trend_k too large for the lookback");
    }
    if (prompt_mode == PromptMode::pool && (top_k < 1 || top_k > pool_size))
        throw ConfigError("prompt pool needs 1 <= top_k <= pool_size");
    if (prompt_mode != PromptMode::none && prompt_len < 1) throw ConfigError("prompt length must be >= 1");
    if (!(lambda_dec >= 0.0)) throw ConfigError("lambda_dec must be >= 0");
    if (!(lr >= 0.0)) throw ConfigError("lr must be >= 0");
    if (batch < 1) throw ConfigError("batch must be >= 1");
    if (!(eps > 0.0)) throw ConfigError("eps must be > 0");
    if (window_stride < 1) throw ConfigError("window_stride must be >= 1");
    if (!(grad_clip >= 0.0)) throw ConfigError("grad_clip must be >= 0");
    backbone.validate();
}

std::vector<Component> ModelParams::streams() const {
    if (config.decompose) return {kComponents.begin(), kComponents.end()};
    return {Component::series};
}

ModelParams init_model(const TempoConfig& config) {
    config.validate();
    ModelParams mp;
    mp.config = config;
    ParamStore& s = mp.store;
    std::mt19937_64 rng(config.seed ^ 0xbb67ae8584caa73bULL);
    const std::size_t L = config.lookback;
    const std::size_t d = config.embed_dim();
    const std::vector<Component> streams = mp.streams();

    if (config.decompose) {
        s.add("decomp.scale_trend", ParamGroup::local_decomp, Matrix(1, L, 1.0));
        s.add("decomp.bias_trend", ParamGroup::local_decomp, Matrix(1, L));
        s.add("decomp.scale_season", ParamGroup::local_decomp, Matrix(1, L, 1.0));
        s.add("decomp.bias_season", ParamGroup::local_decomp, Matrix(1, L));
        for (Component c : kComponents) {
            s.add("revin.gamma_" + cname(c), ParamGroup::revin_affine, Matrix(1, 1, 1.0));
            s.add("revin.beta_" + cname(c), ParamGroup::revin_affine, Matrix(1, 1));
        }
    }
    s.add("revin.gamma_out", ParamGroup::revin_affine, Matrix(1, 1, 1.0));
    s.add("revin.beta_out", ParamGroup::revin_affine, Matrix(1, 1));

    const double eb = 1.0 / std::sqrt(static_cast<double>(config.patch_len));
    if (config.embed_per_component) {
        for (Component c : streams) {
            s.add(embed_w_name(config, c), ParamGroup::embed, uniform(config.patch_len, d, eb, rng));
            s.add(embed_b_name(config, c), ParamGroup::embed, uniform(1, d, eb, rng));
        }
    } else {
        s.add("embed.w", ParamGroup::embed, uniform(config.patch_len, d, eb, rng));
        s.add("embed.b", ParamGroup::embed, uniform(1, d, eb, rng));
    }

    switch (config.prompt_mode) {
    case PromptMode::semi_soft:
    case PromptMode::hard:
        for (Component c : streams)
            s.add("prompt.semi_" + cname(c), ParamGroup::prompts,
                  prompt::init_semi_soft(c, config.prompt_len, d, config.seed).vectors);
        break;
    case PromptMode::pool: {
        auto pool = prompt::init_pool(config.pool_size, config.top_k, config.prompt_len, d, config.seed);
        s.add("prompt.pool_keys", ParamGroup::prompts, std::move(pool.keys));
        s.add("prompt.pool_values", ParamGroup::prompts, std::move(pool.values));
        break;
    }
    case PromptMode::none: break;
    }

    const std::size_t head_rows = config.heads_include_prompt_positions ? config.stream_rows() : config.patches();
    const double hb = 1.0 / std::sqrt(static_cast<double>(head_rows * d));
    for (Component c : streams) {
        s.add("head.w_" + cname(c), ParamGroup::heads, uniform(head_rows * d, config.horizon, hb, rng));
        s.add("head.b_" + cname(c), ParamGroup::heads, uniform(1, config.horizon, hb, rng));
    }

    backbone::BackboneConfig bc = config.backbone;
    bc.seed = config.seed;
    backbone::init_backbone(s, bc, config.sequence_length());
    apply_trainability(mp);
    return mp;
}

void apply_trainability(ModelParams& mp) {
    backbone::set_freeze_policy(mp.store, mp.config.freeze);
    if (mp.config.prompt_mode == PromptMode::hard)
        for (Parameter& p : mp.store.all())
            if (p.name.starts_with("prompt.semi_")) p.trainable = false;
}

decompose::ComponentTriple local_components(const ModelParams& mp, std::span<const double> lookback,
                                            std::size_t period, std::size_t trend_k) {
    const auto raw = decompose::local_decompose(lookback, period, trend_k);
    const ParamStore& s = mp.store;
    const auto vec = [&](const char* n) { return s.at(n).value.data; };
    const decompose::LocalDecompParams p{vec("decomp.scale_trend"), vec("decomp.bias_trend"),
                                         vec("decomp.scale_season"), vec("decomp.bias_season")};
    return decompose::corrected_local(lookback, raw, p);
}

ForwardGraph forward_graph(ag::Tape& t, ModelParams& mp, const Sample& sample, const ForwardOptions& opts) {
    const TempoConfig& cfg = mp.config;
    ParamStore& s = mp.store;
    const std::vector<double>& x = sample.window.lookback;
    if (x.size() != cfg.lookback)
        throw std::invalid_argument("forward: lookback length " + std::to_string(x.size()) + " != " +
                                    std::to_string(cfg.lookback));
    const std::size_t L = cfg.lookback;
    const std::size_t d = cfg.embed_dim();
    const std::size_t N = cfg.patches();
    const std::size_t P = cfg.prompt_rows();
    const std::vector<Component> streams = mp.streams();

    ForwardGraph g;
    g.stats = norm::compute_stats(x, cfg.eps);
    ag::Var gamma_out = t.param(s.at("revin.gamma_out"));
    ag::Var beta_out = t.param(s.at("revin.beta_out"));
    ag::Var xv = t.constant(Matrix::row(x));

    std::vector<ag::Var> normalized;
    if (cfg.decompose) {
        const std::size_t period = sample.period ? sample.period : cfg.period;
        const std::size_t k = sample.trend_k ? sample.trend_k : cfg.trend_k_for(period);
        const auto raw = decompose::local_decompose(x, period, k);
        ag::Var tr = ag::add(ag::mul(t.param(s.at("decomp.scale_trend")), t.constant(Matrix::row(raw.trend))),
                             t.param(s.at("decomp.bias_trend")));
        ag::Var se = ag::add(ag::mul(t.param(s.at("decomp.scale_season")), t.constant(Matrix::row(raw.season))),
                             t.param(s.at("decomp.bias_season")));
        ag::Var re = ag::sub(ag::sub(xv, tr), se);
        const std::array<ag::Var, 3> comps{tr, se, re};
        std::array<ag::Var, 3> unit{};
        for (std::size_t i = 0; i < 3; ++i) {
            const std::string n = cname(kComponents[i]);
            unit[i] = ag::standardize(comps[i], cfg.eps);
            normalized.push_back(ag::add_scalar(ag::scale_by(unit[i], t.param(s.at("revin.gamma_" + n))),
                                                t.param(s.at("revin.beta_" + n))));
        }
        if (sample.global) {
            const auto& gl = *sample.global;
            if (gl.size() != L) throw std::invalid_argument("forward: global slice length differs from lookback");
            const std::array<const std::vector<double>*, 3> gcomp{&gl.trend, &gl.season, &gl.residual};
            std::array<ag::Var, 3> terms{};
            for (std::size_t i = 0; i < 3; ++i)
                terms[i] = ag::mse(unit[i], t.constant(Matrix::row(standardized(*gcomp[i], cfg.eps))));
            g.dec_loss = ag::scale(ag::add(ag::add(terms[0], terms[1]), terms[2]), 1.0 / 3.0);
        }
    } else {
        normalized.push_back(ag::add_scalar(ag::scale_by(ag::standardize(xv, cfg.eps), gamma_out), beta_out));
    }

    const auto idx = embed::patch_indices(L, cfg.patch_len, cfg.stride);
    std::optional<ag::Var> pool_values;
    if (cfg.prompt_mode == PromptMode::pool) pool_values = t.param(s.at("prompt.pool_values"));

    std::vector<ag::Var> parts;
    g.selected.resize(streams.size());
    for (std::size_t i = 0; i < streams.size(); ++i) {
        const Component c = streams[i];
        ag::Var patches = ag::gather(normalized[i], idx, N, cfg.patch_len);
        ag::Var tokens = ag::add_row(ag::matmul(patches, t.param(s.at(embed_w_name(cfg, c)))),
                                     t.param(s.at(embed_b_name(cfg, c))));
        std::vector<ag::Var> rows;
        switch (cfg.prompt_mode) {
        case PromptMode::pool: {
            const auto q = prompt::pool_query(tokens.value(), cfg.query_pool);
            g.selected[i] = prompt::select_top_k(s.at("prompt.pool_keys").value, q, cfg.top_k);
            for (std::size_t m : g.selected[i])
                rows.push_back(ag::slice_rows(*pool_values, m * cfg.prompt_len, (m + 1) * cfg.prompt_len));
            break;
        }
        case PromptMode::semi_soft:
        case PromptMode::hard: rows.push_back(t.param(s.at("prompt.semi_" + cname(c)))); break;
        case PromptMode::none: break;
        }
        rows.push_back(tokens);
        ag::Var assembled = rows.size() == 1 ? tokens : ag::concat_rows(rows);
        if (!(opts.active & (1u << i))) assembled = t.constant(Matrix(P + N, d));
        parts.push_back(assembled);
    }
    ag::Var seq = parts.size() == 1 ? parts.front() : ag::concat_rows(parts);
    g.sequence_rows = seq.rows();

    backbone::BackboneConfig bc = cfg.backbone;
    ag::Var hidden = backbone::forward(t, seq, s, bc, opts.dropout_rng);

    const std::size_t first = cfg.heads_include_prompt_positions ? 0 : P;
    const std::size_t rows = P + N - first;
    for (std::size_t i = 0; i < streams.size(); ++i) {
        const std::string n = cname(streams[i]);
        ag::Var y;
        if (opts.active & (1u << i)) {
            const std::size_t a = i * (P + N) + first;
            ag::Var z = ag::reshape(ag::slice_rows(hidden, a, a + rows), 1, rows * d);
            y = ag::add_row(ag::matmul(z, t.param(s.at("head.w_" + n))), t.param(s.at("head.b_" + n)));
        } else {
            y = t.constant(Matrix(1, cfg.horizon));
        }
        g.component.push_back(y);
    }
    g.y_norm = g.component.front();
    for (std::size_t i = 1; i < g.component.size(); ++i) g.y_norm = ag::add(g.y_norm, g.component[i]);

    ag::Var centred = ag::add_scalar(g.y_norm, ag::scale(beta_out, -1.0));
    g.y_hat = ag::add_scalar(ag::scale(ag::div_by(centred, gamma_out), g.stats.scale()),
                             t.constant(Matrix(1, 1, g.stats.mean)));
    return g;
}

ForecastBundle forward_tempo(ModelParams& mp, const Sample& sample, const ForwardOptions& opts) {
    ag::Tape tape;
    ForwardGraph g = forward_graph(tape, mp, sample, opts);
    ForecastBundle b;
    b.y_hat = g.y_hat.value().data;
    b.y_norm_sum = g.y_norm.value().data;
    b.streams = mp.streams();
    if (mp.config.decompose) {
        b.y_hat_trend = g.component[0].value().data;
        b.y_hat_season = g.component[1].value().data;
        b.y_hat_residual = g.component[2].value().data;
    } else {
        b.y_hat_trend = g.component[0].value().data;
        b.y_hat_season.assign(mp.config.horizon, 0.0);
        b.y_hat_residual.assign(mp.config.horizon, 0.0);
    }
    b.stats = g.stats;
    b.output_affine = {mp.store.at("revin.gamma_out").value[0], mp.store.at("revin.beta_out").value[0]};
    b.selected_prompts = std::move(g.selected);
    b.dec_loss = g.dec_loss ? g.dec_loss->scalar() : 0.0;
    b.sequence_rows = g.sequence_rows;
    return b;
}

ag::Var total_loss_graph(const ForwardGraph& g, std::span<const double> target, double lambda_dec) {
    ag::Tape& t = *g.y_hat.tape;
    if (target.size() != g.y_hat.cols()) throw std::invalid_argument("total_loss: target length mismatch");
    ag::Var loss = ag::mse(g.y_hat, t.constant(Matrix::row(target)));
    if (g.dec_loss && lambda_dec > 0.0) loss = ag::add(loss, ag::scale(*g.dec_loss, lambda_dec));
    return loss;
}

double total_loss(const ForecastBundle& b, std::span<const double> target, double lambda_dec) {
    if (target.size() != b.y_hat.size()) throw std::invalid_argument("total_loss: target length mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < target.size(); ++i) s += (b.y_hat[i] - target[i]) * (b.y_hat[i] - target[i]);
    return s / static_cast<double>(target.size()) + lambda_dec * b.dec_loss;
}

} // namespace tempo::model
