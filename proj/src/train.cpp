#include "tempo/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "tempo/errors.hpp"

namespace tempo::model {
namespace {

struct Adam {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    std::size_t step = 0;
    std::vector<Matrix> m, v;

    void update(ParamStore& store, double lr) {
        auto& ps = store.all();
        if (m.empty()) {
            for (const Parameter& p : ps) {
                m.emplace_back(p.value.rows, p.value.cols);
                v.emplace_back(p.value.rows, p.value.cols);
            }
        }
        ++step;
        const double c1 = 1.0 - std::pow(beta1, static_cast<double>(step));
        const double c2 = 1.0 - std::pow(beta2, static_cast<double>(step));
        for (std::size_t k = 0; k < ps.size(); ++k) {
            Parameter& p = ps[k];
            if (!p.trainable) continue;
            for (std::size_t i = 0; i < p.value.size(); ++i) {
                const double g = p.grad[i];
                m[k][i] = beta1 * m[k][i] + (1.0 - beta1) * g;
                v[k][i] = beta2 * v[k][i] + (1.0 - beta2) * g * g;
                p.value[i] -= lr * (m[k][i] / c1) / (std::sqrt(v[k][i] / c2) + eps);
            }
        }
    }
};

void post_step(ModelParams& mp, std::uint64_t seed) {
    for (Parameter& p : mp.store.all())
        if (p.name.starts_with("revin.gamma"))
            for (double& g : p.value.data) g = norm::clamp_gamma(g);
    if (mp.store.contains("prompt.pool_keys"))
        prompt::reinit_degenerate_keys(mp.store.at("prompt.pool_keys").value, seed);
}

void clip_gradients(ParamStore& store, double max_norm) {
    if (max_norm <= 0.0) return;
    double n2 = 0.0;
    for (const Parameter& p : store.all())
        if (p.trainable)
            for (double g : p.grad.data) n2 += g * g;
    const double n = std::sqrt(n2);
    if (n <= max_norm) return;
    const double s = max_norm / n;
    for (Parameter& p : store.all())
        for (double& g : p.grad.data) g *= s;
}

std::vector<double> horizon_prefix(const std::vector<double>& v, std::size_t h) {
    if (h == 0 || h >= v.size()) return v;
    return {v.begin(), v.begin() + static_cast<std::ptrdiff_t>(h)};
}

} // namespace

TrainResult train(ModelParams mp, const std::vector<Sample>& train_set, const std::vector<Sample>& val_set,
                  const EpochCallback& on_epoch) {
    if (train_set.empty()) throw ValidationError("shape", "training set is empty");
    const TempoConfig& cfg = mp.config;
    TrainResult result;
    std::mt19937_64 shuffle_rng(cfg.seed ^ 0x3c6ef372fe94f82bULL);
    std::mt19937_64 dropout_rng(cfg.seed ^ 0xa54ff53a5f1d36f1ULL);
    Adam adam;
    std::vector<std::size_t> order(train_set.size());
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> sample_mse(train_set.size()), sample_loss(train_set.size());
    std::optional<double> best_val;
    std::optional<ModelParams> best;

    for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), shuffle_rng);
        for (std::size_t start = 0; start < order.size(); start += cfg.batch) {
            const std::size_t end = std::min(order.size(), start + cfg.batch);
            const double inv_b = 1.0 / static_cast<double>(end - start);
            mp.store.zero_grad();
            for (std::size_t j = start; j < end; ++j) {
                const Sample& smp = train_set[order[j]];
                ag::Tape tape;
                ForwardOptions fo;
                if (cfg.backbone.dropout > 0.0) fo.dropout_rng = &dropout_rng;
                ForwardGraph g = forward_graph(tape, mp, smp, fo);
                ag::Var fit = ag::mse(g.y_hat, tape.constant(Matrix::row(smp.window.horizon)));
                ag::Var loss = fit;
                if (g.dec_loss && cfg.lambda_dec > 0.0) loss = ag::add(loss, ag::scale(*g.dec_loss, cfg.lambda_dec));
                if (!std::isfinite(loss.scalar()))
                    throw DivergenceError("non-finite loss at epoch " + std::to_string(epoch));
                sample_mse[order[j]] = fit.scalar();
                sample_loss[order[j]] = loss.scalar();
                tape.backward(ag::scale(loss, inv_b));
            }
            clip_gradients(mp.store, cfg.grad_clip);
            adam.update(mp.store, cfg.lr);
            post_step(mp, cfg.seed + adam.step);
        }
        EpochRecord rec;
        rec.epoch = epoch;
        for (std::size_t i = 0; i < train_set.size(); ++i) {
            rec.train_mse += sample_mse[i];
            rec.train_loss += sample_loss[i];
        }
        rec.train_mse /= static_cast<double>(train_set.size());
        rec.train_loss /= static_cast<double>(train_set.size());
        if (!val_set.empty()) {
            rec.val_mse = evaluate(mp, val_set).mse;
            if (!std::isfinite(*rec.val_mse)) throw DivergenceError("non-finite validation error at epoch " + std::to_string(epoch));
            if (!best_val || *rec.val_mse < *best_val) {
                best_val = rec.val_mse;
                best = mp;
                result.history.best_epoch = epoch;
            }
        }
        result.history.epochs.push_back(rec);
        if (on_epoch) on_epoch(rec);
    }
    result.params = best ? std::move(*best) : std::move(mp);
    return result;
}

TrainResult train(const TempoConfig& config, const std::vector<Sample>& train_set, const std::vector<Sample>& val_set,
                  const EpochCallback& on_epoch) {
    return train(init_model(config), train_set, val_set, on_epoch);
}

std::vector<ForecastBundle> predict(ModelParams& params, const std::vector<Sample>& samples, StreamMask active) {
    std::vector<ForecastBundle> out;
    out.reserve(samples.size());
    ForwardOptions fo;
    fo.active = active;
    for (const Sample& s : samples) out.push_back(forward_tempo(params, s, fo));
    return out;
}

metrics::Metrics score(const std::vector<ForecastBundle>& predictions, const std::vector<Sample>& samples,
                       const EvalOptions& opts) {
    if (samples.empty()) throw ValidationError("shape", "no evaluation windows");
    metrics::Accumulator acc(opts.smape_clip);
    for (std::size_t i = 0; i < samples.size(); ++i)
        acc.add(horizon_prefix(predictions[i].y_hat, opts.horizon_prefix),
                horizon_prefix(samples[i].window.horizon, opts.horizon_prefix));
    return acc.result();
}

metrics::Metrics evaluate(ModelParams& params, const std::vector<Sample>& samples, const EvalOptions& opts) {
    if (samples.empty()) throw ValidationError("shape", "no evaluation windows");
    return score(predict(params, samples, opts.active), samples, opts);
}

} // namespace tempo::model
