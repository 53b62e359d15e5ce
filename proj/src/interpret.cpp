#include "tempo/interpret.hpp"

#include <Eigen/Dense>
#include <bit>
#include <cmath>

#include "tempo/errors.hpp"

namespace tempo::interpret {
namespace {

const char* kPlayer[3] = {"T", "S", "R"};

double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double var_of(const std::vector<double>& v) {
    const double m = mean_of(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return s / static_cast<double>(v.size());
}

double error_of(const metrics::Metrics& m, const std::string& metric) {
    if (metric == "mse") return m.mse;
    if (metric == "mae") return m.mae;
    throw ConfigError("unknown shapley metric '" + metric + "'");
}

} // namespace

std::string coalition_name(Coalition s) {
    if (s == kEmpty) return "empty";
    std::string out;
    for (int i = 0; i < 3; ++i)
        if (s & (1u << i)) out += (out.empty() ? "" : "+") + std::string(kPlayer[i]);
    return out;
}

bool CoalitionTable::complete() const {
    for (const auto& e : entries)
        if (!e) return false;
    return true;
}

const metrics::Metrics& CoalitionTable::at(Coalition s) const {
    if (s > 7 || !entries[s]) throw ValidationError("shape", "coalition table has no entry for " + coalition_name(s));
    return *entries[s];
}

metrics::Metrics coalition_eval(model::ModelParams& params, const std::vector<model::Sample>& samples,
                                Coalition subset, const model::EvalOptions& opts) {
    if (!params.config.decompose) throw ConfigError("coalitions need the decomposed model");
    model::EvalOptions o = opts;
    o.active = subset;
    return model::evaluate(params, samples, o);
}

std::vector<CoalitionTable> coalition_tables(model::ModelParams& params, const std::vector<model::Sample>& samples,
                                             const std::vector<std::size_t>& horizons,
                                             const model::EvalOptions& opts) {
    if (!params.config.decompose) throw ConfigError("coalitions need the decomposed model");
    std::vector<CoalitionTable> tables(horizons.size());
    for (Coalition s = 0; s < 8; ++s) {
        const auto preds = model::predict(params, samples, s);
        for (std::size_t h = 0; h < horizons.size(); ++h) {
            model::EvalOptions o = opts;
            o.horizon_prefix = horizons[h];
            tables[h].entries[s] = model::score(preds, samples, o);
        }
    }
    return tables;
}

std::array<double, 3> shapley_values(const std::array<double, 8>& v) {
    // weights |S|!(2-|S|)!/3! for |S| = 0, 1, 2
    static constexpr double w[3] = {2.0 / 6.0, 1.0 / 6.0, 2.0 / 6.0};
    std::array<double, 3> phi{};
    for (unsigned i = 0; i < 3; ++i) {
        const unsigned bit = 1u << i;
        for (unsigned s = 0; s < 8; ++s) {
            if (s & bit) continue;
            phi[i] += w[std::popcount(s)] * (v[s | bit] - v[s]);
        }
    }
    return phi;
}

ShapleyReport shapley(const CoalitionTable& table, const std::string& metric) {
    if (!table.complete()) throw ValidationError("shape", "incomplete coalition table");
    std::array<double, 8> v{};
    for (unsigned s = 0; s < 8; ++s) v[s] = -error_of(*table.entries[s], metric);
    ShapleyReport r;
    r.phi = shapley_values(v);
    r.value_full = v[kFull];
    r.value_empty = v[kEmpty];
    r.metric = metric;
    return r;
}

SobolIndices sobol_first_order(const std::vector<std::array<std::vector<double>, 3>>& components) {
    if (components.size() < 2) throw ValidationError("shape", "sobol: need at least 2 windows");
    std::array<std::vector<double>, 3> flat;
    std::vector<double> total;
    for (const auto& w : components) {
        const std::size_t n = w[0].size();
        for (std::size_t j = 0; j < n; ++j) {
            double sum = 0.0;
            for (int c = 0; c < 3; ++c) {
                flat[c].push_back(w[c][j]);
                sum += w[c][j];
            }
            total.push_back(sum);
        }
    }
    SobolIndices out;
    out.total_variance = var_of(total);
    if (!(out.total_variance > 0.0)) throw ValidationError("degenerate", "sobol: total prediction variance is zero");
    for (int c = 0; c < 3; ++c) out.first_order[c] = var_of(flat[c]) / out.total_variance;
    return out;
}

SobolIndices sobol_first_order(const std::vector<model::ForecastBundle>& bundles) {
    std::vector<std::array<std::vector<double>, 3>> comps;
    comps.reserve(bundles.size());
    for (const auto& b : bundles) comps.push_back({b.y_hat_trend, b.y_hat_season, b.y_hat_residual});
    return sobol_first_order(comps);
}

namespace {

Eigen::MatrixXd design(std::span<const double> t, std::span<const double> s, std::span<const double> r,
                       bool interactions, Coalition subset) {
    const auto n = static_cast<Eigen::Index>(t.size());
    Eigen::MatrixXd X(n, interactions ? 7 : 4);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double a = (subset & 1u) ? t[i] : 0.0;
        const double b = (subset & 2u) ? s[i] : 0.0;
        const double c = (subset & 4u) ? r[i] : 0.0;
        X(i, 0) = 1.0;
        X(i, 1) = a;
        X(i, 2) = b;
        X(i, 3) = c;
        if (interactions) {
            X(i, 4) = a * b;
            X(i, 5) = a * c;
            X(i, 6) = b * c;
        }
    }
    return X;
}

} // namespace

GamFit gam_fit(std::span<const double> t, std::span<const double> s, std::span<const double> r,
               std::span<const double> target, bool interactions) {
    const std::size_t n = target.size();
    if (t.size() != n || s.size() != n || r.size() != n) throw std::invalid_argument("gam_fit: length mismatch");
    if (n < 10) throw ValidationError("shape", "gam_fit: need at least 10 samples");
    const Eigen::MatrixXd X = design(t, s, r, interactions, kFull);
    const Eigen::Map<const Eigen::VectorXd> y(target.data(), static_cast<Eigen::Index>(n));
    GamFit fit;
    fit.names = {"intercept", "T", "S", "R"};
    if (interactions) fit.names.insert(fit.names.end(), {"TS", "TR", "SR"});

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    Eigen::VectorXd beta;
    if (qr.rank() == X.cols()) {
        beta = qr.solve(y);
    } else {
        fit.ridge = true;
        Eigen::MatrixXd A = X.transpose() * X;
        A.diagonal().array() += 1e-8;
        beta = A.ldlt().solve(X.transpose() * y);
    }
    fit.coef.assign(beta.data(), beta.data() + beta.size());

    const Eigen::VectorXd res = y - X * beta;
    const double ss_res = res.squaredNorm();
    const double ss_tot = (y.array() - y.mean()).square().sum();
    fit.r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : (ss_res <= 1e-24 * static_cast<double>(n) ? 1.0 : 0.0);
    return fit;
}

std::vector<double> gam_predict(const GamFit& fit, std::span<const double> t, std::span<const double> s,
                                std::span<const double> r, Coalition subset) {
    const Eigen::MatrixXd X = design(t, s, r, fit.coef.size() == 7, subset);
    const Eigen::Map<const Eigen::VectorXd> beta(fit.coef.data(), static_cast<Eigen::Index>(fit.coef.size()));
    const Eigen::VectorXd p = X * beta;
    return {p.data(), p.data() + p.size()};
}

ShapleyReport shapley_via_gam(const GamFit& fit, std::span<const double> t, std::span<const double> s,
                              std::span<const double> r, std::span<const double> target) {
    std::array<double, 8> v{};
    for (Coalition c = 0; c < 8; ++c) {
        const auto p = gam_predict(fit, t, s, r, c);
        double se = 0.0;
        for (std::size_t i = 0; i < p.size(); ++i) se += (p[i] - target[i]) * (p[i] - target[i]);
        v[c] = -se / static_cast<double>(p.size());
    }
    ShapleyReport rep;
    rep.phi = shapley_values(v);
    rep.value_full = v[kFull];
    rep.value_empty = v[kEmpty];
    rep.metric = "mse_gam";
    return rep;
}

} // namespace tempo::interpret
