// tempo: command-line driver. Every command resolves a RunConfig
// (defaults < --config file < flags), writes resolved.cfg into --out and
// reports failures as one line on stderr.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>

#include "tempo/checkpoint.hpp"
#include "tempo/config.hpp"
#include "tempo/errors.hpp"
#include "tempo/experiment.hpp"
#include "tempo/interpret.hpp"
#include "tempo/kernels/kernels.hpp"
#include "tempo/plot.hpp"
#include "tempo/theory.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace tempo;

namespace {

struct Cli {
    std::string run_dir;
    std::string config_file;
    std::vector<std::string> sets;  // key=value overrides
    std::map<std::string, std::string> flags;
};

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

json metrics_json(const metrics::Metrics& m) {
    return {{"mse", m.mse}, {"mae", m.mae}, {"abs_smape", m.abs_smape}, {"points", m.points}};
}

void write_text(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + p.string());
    out << text;
}

void write_json(const fs::path& p, const json& j) { write_text(p, j.dump(2) + "\n"); }

config::RunConfig resolve(const Cli& cli) {
    config::RunConfig rc;
    // a previous run directory supplies its resolved config and checkpoint
    if (!cli.run_dir.empty()) {
        config::apply_file(rc, fs::path(cli.run_dir) / "resolved.cfg");
        rc.ckpt = (fs::path(cli.run_dir) / "checkpoint").string();
        rc.out = cli.run_dir;
    }
    if (!cli.config_file.empty()) config::apply_file(rc, cli.config_file);
    for (const auto& [k, v] : cli.flags) config::set_key(rc, k, v);
    for (const auto& kv : cli.sets) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
        config::set_key(rc, kv.substr(0, eq), kv.substr(eq + 1));
    }
    return rc;
}

fs::path prepare_out(const config::RunConfig& rc) {
    const fs::path out = rc.out;
    fs::create_directories(out);
    write_text(out / "resolved.cfg", config::render(rc));
    return out;
}

data::SplitSpec split_of(const config::RunConfig& rc) { return {rc.split_train, rc.split_val, rc.split_test}; }

model::EvalOptions eval_of(const config::RunConfig& rc) {
    model::EvalOptions e;
    if (rc.smape_clip > 0.0) e.smape_clip = rc.smape_clip;
    return e;
}

data::MissingPolicy missing_of(const config::RunConfig& rc) {
    if (rc.interp == "none") return data::MissingPolicy::error;
    if (rc.interp == "linear") return data::MissingPolicy::linear;
    throw ConfigError("interp must be none or linear, got '" + rc.interp + "'");
}

experiment::DomainSource load_source(const config::RunConfig& rc, const std::string& path, std::size_t period) {
    if (path.empty()) throw ConfigError("missing required data path");
    return {fs::path(path).stem().string(), data::load_csv_auto(path, missing_of(rc)), period, 0};
}

json header(const config::RunConfig& rc, const std::string& command) {
    return {{"command", command}, {"seed", rc.model.seed}, {"config_hash", config::config_hash(rc)},
            {"kernels", std::string(kernels::isa_name(kernels::active().isa))}};
}

void write_predictions(const fs::path& p, const std::vector<model::Sample>& samples,
                       const std::vector<model::ForecastBundle>& preds) {
    std::string o = "origin_t,channel,h,y_true,y_hat,y_T,y_S,y_R\n";
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto& w = samples[i].window;
        const auto& b = preds[i];
        for (std::size_t h = 0; h < b.y_hat.size(); ++h)
            o += std::to_string(w.origin_t) + "," + std::to_string(w.channel_id) + "," + std::to_string(h) + "," +
                 num(w.horizon[h]) + "," + num(b.y_hat[h]) + "," + num(b.y_hat_trend[h]) + "," +
                 num(b.y_hat_season[h]) + "," + num(b.y_hat_residual[h]) + "\n";
    }
    write_text(p, o);
}

void write_selections(const fs::path& p, const std::vector<model::Sample>& samples,
                      const std::vector<model::ForecastBundle>& preds) {
    std::string o = "origin_t,channel,stream,rank,prompt\n";
    for (std::size_t i = 0; i < samples.size(); ++i)
        for (std::size_t s = 0; s < preds[i].selected_prompts.size(); ++s)
            for (std::size_t r = 0; r < preds[i].selected_prompts[s].size(); ++r)
                o += std::to_string(samples[i].window.origin_t) + "," + std::to_string(samples[i].window.channel_id) +
                     "," + prompt::component_name(preds[i].streams[s]) + "," + std::to_string(r) + "," +
                     std::to_string(preds[i].selected_prompts[s][r]) + "\n";
    write_text(p, o);
}

void write_forecast_plots(const fs::path& dir, const std::vector<model::Sample>& samples,
                          const std::vector<model::ForecastBundle>& preds, std::size_t count) {
    for (std::size_t i = 0; i < std::min(count, samples.size()); ++i) {
        const auto& w = samples[i].window;
        const std::size_t L = w.lookback.size();
        plot::emit_plot({{"lookback", w.lookback, 0}, {"y_true", w.horizon, L}, {"y_hat", preds[i].y_hat, L}},
                        dir / ("forecast_" + std::to_string(i) + ".svg"),
                        "channel " + std::to_string(w.channel_id) + " origin " + std::to_string(w.origin_t));
    }
}

json history_json(const model::TrainHistory& h) {
    json epochs = json::array();
    for (const auto& e : h.epochs) {
        json r = {{"epoch", e.epoch}, {"train_mse", e.train_mse}, {"train_loss", e.train_loss}};
        if (e.val_mse) r["val_mse"] = *e.val_mse;
        epochs.push_back(r);
    }
    return {{"epochs", epochs}, {"best_epoch", h.best_epoch}};
}

void report_run(const fs::path& out, const config::RunConfig& rc, const std::string& command,
                const experiment::RunResult& r, const std::vector<model::Sample>& test) {
    auto preds = model::predict(const_cast<model::ModelParams&>(r.params), test);
    json j = header(rc, command);
    j["variant"] = "full";
    j["test"] = metrics_json(r.test);
    j["history"] = history_json(r.history);
    write_json(out / "metrics.json", j);
    write_predictions(out / "predictions.csv", test, preds);
    write_selections(out / "selections.csv", test, preds);
    checkpoint::save(r.params, out / "checkpoint");
    write_forecast_plots(out / "plots", test, preds, rc.plot_windows);
    std::vector<double> tr, va;
    for (const auto& e : r.history.epochs) {
        tr.push_back(e.train_mse);
        if (e.val_mse) va.push_back(*e.val_mse);
    }
    std::vector<plot::Series> curves{{"train_mse", tr, 1}};
    if (!va.empty()) curves.push_back({"val_mse", va, 1});
    plot::emit_plot(curves, out / "plots" / "loss.svg", "training history");
}

void progress(const model::EpochRecord& e) {
    std::fprintf(stderr, "epoch %zu train_mse %.6g%s\n", e.epoch, e.train_mse,
                 e.val_mse ? (" val_mse " + num(*e.val_mse)).c_str() : "");
}

std::vector<experiment::DomainSource> load_sources(const config::RunConfig& rc) {
    const auto paths = config::split_list(rc.sources);
    const auto periods = config::split_list(rc.source_periods);
    if (paths.empty()) throw ConfigError("missing required --sources");
    if (!periods.empty() && periods.size() != paths.size())
        throw ConfigError("source_periods must list one period per source");
    std::vector<experiment::DomainSource> out;
    for (std::size_t i = 0; i < paths.size(); ++i) {
        std::size_t p = rc.model.period;
        if (!periods.empty()) {
            config::RunConfig tmp;
            config::set_key(tmp, "period", periods[i]);
            p = tmp.model.period;
        }
        out.push_back(load_source(rc, paths[i], p));
    }
    return out;
}

experiment::Experiment experiment_for(const config::RunConfig& rc) {
    if (!rc.sources.empty()) {
        const auto sources = load_sources(rc);
        const auto target = load_source(rc, rc.target, rc.target_period ? rc.target_period : rc.model.period);
        return experiment::build_zero_shot(sources, target, rc.model, split_of(rc));
    }
    return experiment::build_single(load_source(rc, rc.data, rc.model.period), rc.model, split_of(rc));
}

// Rebuilds the run config around a checkpoint's model config.
model::ModelParams load_ckpt(config::RunConfig& rc) {
    if (rc.ckpt.empty()) throw ConfigError("missing required --ckpt");
    model::ModelParams mp = checkpoint::load(rc.ckpt);
    rc.model = mp.config;
    return mp;
}

std::vector<model::Sample> test_samples(const config::RunConfig& rc) {
    return experiment::build_single(load_source(rc, rc.data, rc.model.period), rc.model, split_of(rc)).test;
}

int cmd_synth(const config::RunConfig& rc) {
    data::SynthSpec s{rc.synth_length, rc.synth_period, rc.synth_slope, rc.synth_amp, rc.synth_noise, rc.model.seed};
    const auto frame = data::synth_generate(s);
    const fs::path out = rc.data.empty() ? fs::path(rc.out) / "synth.csv" : fs::path(rc.data);
    if (out.has_parent_path()) fs::create_directories(out.parent_path());
    data::write_csv(frame, out);
    std::printf("%s\n", out.string().c_str());
    return 0;
}

int cmd_decompose(const config::RunConfig& rc) {
    const fs::path out = prepare_out(rc);
    const auto src = load_source(rc, rc.data, rc.model.period);
    const std::size_t k = rc.model.trend_k_for(rc.model.period);
    std::string csv = "t,channel,x,trend,season,residual\n";
    json strength = json::object();
    for (std::size_t c = 0; c < src.frame.channels.size(); ++c) {
        const auto& ch = src.frame.channels[c];
        const auto tr = decompose::global_decompose(ch.values, rc.model.period, k);
        for (std::size_t t = 0; t < ch.values.size(); ++t)
            csv += std::to_string(t) + "," + ch.name + "," + num(ch.values[t]) + "," + num(tr.trend[t]) + "," +
                   num(tr.season[t]) + "," + num(tr.residual[t]) + "\n";
        strength[ch.name] = decompose::seasonality_strength(tr);
        if (c == 0)
            plot::emit_plot({{"x", ch.values, 0}, {"trend", tr.trend, 0}, {"season", tr.season, 0},
                             {"residual", tr.residual, 0}},
                            out / "plots" / "decomposition.svg", ch.name);
    }
    write_text(out / "decomposition.csv", csv);
    json j = header(rc, "decompose");
    j["period"] = rc.model.period;
    j["trend_k"] = k;
    j["seasonality_strength"] = strength;
    write_json(out / "metrics.json", j);
    return 0;
}

int cmd_train(const config::RunConfig& rc, const std::string& command) {
    const fs::path out = prepare_out(rc);
    const auto ex = experiment_for(rc);
    const auto r = experiment::train_and_evaluate(rc.model, ex, eval_of(rc), progress);
    report_run(out, rc, command, r, ex.test);
    std::printf("%s\n", metrics_json(r.test).dump().c_str());
    return 0;
}

int cmd_eval(config::RunConfig rc) {
    auto mp = load_ckpt(rc);
    const fs::path out = prepare_out(rc);
    const auto test = test_samples(rc);
    const auto preds = model::predict(mp, test);
    const auto m = model::score(preds, test, eval_of(rc));
    json j = header(rc, "eval");
    j["test"] = metrics_json(m);
    write_json(out / "metrics.json", j);
    write_predictions(out / "predictions.csv", test, preds);
    write_selections(out / "selections.csv", test, preds);
    write_forecast_plots(out / "plots", test, preds, rc.plot_windows);
    std::printf("%s\n", metrics_json(m).dump().c_str());
    return 0;
}

int cmd_forecast(config::RunConfig rc) {
    auto mp = load_ckpt(rc);
    const fs::path out = prepare_out(rc);
    const auto src = load_source(rc, rc.data, rc.model.period);
    const std::size_t L = rc.model.lookback, n = src.frame.length();
    if (n < L) throw ValidationError("shape", "series shorter than the lookback");
    std::string csv = "channel,h,y_hat,y_T,y_S,y_R\n";
    for (std::size_t c = 0; c < src.frame.channels.size(); ++c) {
        const auto& v = src.frame.channels[c].values;
        model::Sample s;
        s.window.lookback.assign(v.end() - static_cast<std::ptrdiff_t>(L), v.end());
        s.window.horizon.assign(rc.model.horizon, 0.0);
        s.window.channel_id = c;
        s.window.origin_t = n - L;
        s.period = rc.model.period;
        s.trend_k = rc.model.trend_k_for(s.period);
        const auto b = model::forward_tempo(mp, s);
        for (std::size_t h = 0; h < b.y_hat.size(); ++h)
            csv += src.frame.channels[c].name + "," + std::to_string(h) + "," + num(b.y_hat[h]) + "," +
                   num(b.y_hat_trend[h]) + "," + num(b.y_hat_season[h]) + "," + num(b.y_hat_residual[h]) + "\n";
        if (c == 0)
            plot::emit_plot({{"history", s.window.lookback, 0}, {"forecast", b.y_hat, L}}, out / "plots" / "forecast.svg",
                            src.frame.channels[c].name);
    }
    write_text(out / "forecast.csv", csv);
    return 0;
}

int cmd_ablate(const config::RunConfig& rc) {
    const fs::path out = prepare_out(rc);
    const auto ex = experiment_for(rc);
    const auto rows = experiment::ablate(rc.model, ex, experiment::parse_ablation_flags(rc.ablate_flags), eval_of(rc));
    std::string csv = "variant,mse,mae,abs_smape,sequence_length\n";
    json arr = json::array();
    for (const auto& r : rows) {
        csv += r.variant + "," + num(r.metrics.mse) + "," + num(r.metrics.mae) + "," + num(r.metrics.abs_smape) + "," +
               std::to_string(r.sequence_length) + "\n";
        json m = metrics_json(r.metrics);
        m["variant"] = r.variant;
        m["seed"] = rc.model.seed;
        m["config_hash"] = config::config_hash(rc);
        arr.push_back(m);
    }
    write_text(out / "ablation.csv", csv);
    json j = header(rc, "ablate");
    j["variants"] = arr;
    write_json(out / "metrics.json", j);
    std::fputs(csv.c_str(), stdout);
    return 0;
}

std::vector<std::size_t> horizon_buckets(std::size_t H) {
    std::vector<std::size_t> b;
    for (std::size_t q = 1; q <= 4; ++q) {
        const std::size_t h = std::max<std::size_t>(1, H * q / 4);
        if (b.empty() || b.back() != h) b.push_back(h);
    }
    return b;
}

int cmd_shap(config::RunConfig rc) {
    auto mp = load_ckpt(rc);
    const fs::path out = prepare_out(rc);
    const auto test = test_samples(rc);
    const auto buckets = horizon_buckets(rc.model.horizon);
    const auto tables = interpret::coalition_tables(mp, test, buckets, eval_of(rc));

    std::string csv = "horizon,metric";
    for (interpret::Coalition s = 0; s < 8; ++s) csv += "," + interpret::coalition_name(s);
    csv += "\n";
    for (std::size_t i = 0; i < buckets.size(); ++i)
        for (const char* metric : {"mse", "mae"}) {
            csv += std::to_string(buckets[i]) + "," + metric;
            for (interpret::Coalition s = 0; s < 8; ++s) {
                const auto& m = tables[i].at(s);
                csv += "," + num(std::string(metric) == "mse" ? m.mse : m.mae);
            }
            csv += "\n";
        }
    write_text(out / "coalitions.csv", csv);

    // Component forecasts and targets in normalized space for the surrogate.
    const auto preds = model::predict(mp, test);
    std::vector<double> T, S, R, Y;
    for (std::size_t i = 0; i < test.size(); ++i) {
        const auto& b = preds[i];
        for (std::size_t h = 0; h < b.y_hat.size(); ++h) {
            T.push_back(b.y_hat_trend[h]);
            S.push_back(b.y_hat_season[h]);
            R.push_back(b.y_hat_residual[h]);
            Y.push_back((test[i].window.horizon[h] - b.stats.mean) / b.stats.scale() * b.output_affine.gamma +
                        b.output_affine.beta);
        }
    }
    const auto gam = interpret::gam_fit(T, S, R, Y, true);
    if (gam.ridge) std::fprintf(stderr, "warning: rank-deficient surrogate design, ridge fallback used\n");

    json j = header(rc, "shap");
    j["method"] = rc.via_gam ? "gam_surrogate" : "coalition";
    json reports = json::array();
    for (std::size_t i = 0; i < buckets.size(); ++i) {
        const auto rep = rc.via_gam ? interpret::shapley_via_gam(gam, T, S, R, Y) : interpret::shapley(tables[i], "mse");
        reports.push_back({{"horizon", buckets[i]}, {"metric", rep.metric}, {"phi_T", rep.phi[0]},
                           {"phi_S", rep.phi[1]}, {"phi_R", rep.phi[2]}, {"value_full", rep.value_full},
                           {"value_empty", rep.value_empty}});
        if (rc.via_gam) break;  // the surrogate is fit over the whole horizon
    }
    j["shapley"] = reports;
    try {
        const auto sob = interpret::sobol_first_order(preds);
        j["sobol"] = {{"S_T", sob.first_order[0]}, {"S_S", sob.first_order[1]}, {"S_R", sob.first_order[2]},
                      {"total_variance", sob.total_variance},
                      {"note", "first-order indices need not sum to 1 when components correlate"}};
    } catch (const ValidationError& e) {
        j["sobol"] = {{"error", e.what()}};
    }
    json coef = json::object();
    for (std::size_t i = 0; i < gam.names.size(); ++i) coef[gam.names[i]] = gam.coef[i];
    j["gam"] = {{"coefficients", coef}, {"r2", gam.r2}, {"ridge", gam.ridge}};
    write_json(out / "shapley.json", j);
    std::fputs(csv.c_str(), stdout);
    return 0;
}

int cmd_prompt_stats(config::RunConfig rc) {
    auto mp = load_ckpt(rc);
    const fs::path out = prepare_out(rc);
    const auto test = test_samples(rc);
    const auto preds = model::predict(mp, test);
    write_selections(out / "selections.csv", test, preds);
    json j = header(rc, "prompt-stats");
    j["prompt_mode"] = prompt::mode_name(rc.model.prompt_mode);
    std::string csv = "index,count,component\n";
    if (rc.model.prompt_mode == prompt::PromptMode::pool) {
        const auto streams = mp.streams();
        json hist = json::object();
        for (std::size_t s = 0; s < streams.size(); ++s) {
            std::vector<std::vector<std::size_t>> log;
            for (const auto& b : preds) log.push_back(b.selected_prompts[s]);
            const auto counts = prompt::selection_histogram(log, rc.model.pool_size);
            for (std::size_t m = 0; m < counts.size(); ++m)
                csv += std::to_string(m) + "," + std::to_string(counts[m]) + "," + prompt::component_name(streams[s]) + "\n";
            hist[prompt::component_name(streams[s])] = counts;
        }
        j["histogram"] = hist;
    }
    write_text(out / "prompt_stats.csv", csv);
    write_json(out / "metrics.json", j);
    std::fputs(csv.c_str(), stdout);
    return 0;
}

int cmd_theory(const config::RunConfig& rc) {
    std::vector<theory::SuiteResult> results;
    const std::string& s = rc.suite;
    if (s != "all" && s != "dft" && s != "extend" && s != "disentangle")
        throw ConfigError("unknown theory suite '" + s + "'");
    if (s == "all" || s == "dft") results.push_back(theory::check_dft(rc.model.seed));
    if (s == "all" || s == "extend") results.push_back(theory::check_extend(rc.model.seed));
    if (s == "all" || s == "disentangle") results.push_back(theory::check_disentangle(rc.model.seed));
    json arr = json::array();
    bool ok = true;
    for (const auto& r : results) {
        arr.push_back({{"suite", r.name}, {"passed", r.passed}, {"cases", r.cases}, {"max_error", r.max_error},
                       {"tolerance", r.tolerance}, {"violations", r.violations}});
        ok = ok && r.passed;
    }
    json j = {{"suites", arr}, {"passed", ok}};
    std::printf("%s\n", j.dump().c_str());
    const fs::path out = prepare_out(rc);
    write_json(out / "theory.json", j);
    if (!ok) throw ValidationError("theory", "theory check failed");
    return 0;
}

void add_common(CLI::App* sub, Cli& cli) {
    sub->add_option("--config", cli.config_file, "key=value config file");
    sub->add_option("--run", cli.run_dir, "previous run directory (resolved.cfg + checkpoint)");
    sub->add_option("--set", cli.sets, "override one key (key=value), repeatable");
    auto flag = [&](const std::string& name, const std::string& key, const std::string& help) {
        sub->add_option_function<std::string>(name, [&cli, key](const std::string& v) { cli.flags[key] = v; }, help);
    };
    flag("--data,--in", "data", "input CSV");
    flag("--sources", "sources", "comma-separated source CSVs");
    flag("--source-periods", "source_periods", "comma-separated source periods");
    flag("--target", "target", "held-out target CSV");
    flag("--target-period", "target_period", "target period");
    flag("--ckpt", "ckpt", "checkpoint file");
    flag("--out", "out", "output directory");
    flag("--seed", "seed", "global seed");
    flag("--period", "period", "seasonal period");
    flag("--k", "trend_k", "trend half-window (0 = period / 2)");
    flag("--interp", "interp", "missing values: none or linear");
    flag("--epochs", "epochs", "training epochs");
    flag("--flags", "ablate_flags", "ablation flags: no_dec,no_prompt,no_dec_loss");
    flag("--smape-clip", "smape_clip", "drop SMAPE terms above this ratio");
    flag("--suite", "suite", "theory suite: dft, extend, disentangle, all");
    sub->add_flag_callback("--via-gam", [&cli] { cli.flags["via_gam"] = "true"; }, "Shapley on the additive surrogate");
}

std::string one_line(std::string s) {
    for (char& c : s)
        if (c == '\n' || c == '\r') c = ' ';
    return s;
}

int fail(const std::string& kind, const std::string& msg, int code) {
    std::fprintf(stderr, "error %s: %s\n", kind.c_str(), one_line(msg).c_str());
    return code;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"decomposition-prompted transformer forecaster"};
    app.require_subcommand(1);
    Cli cli;
    const std::vector<std::string> names{"synth", "decompose", "train",  "eval",         "forecast",
                                         "zero-shot", "ablate", "shap", "prompt-stats", "theory-check"};
    std::map<std::string, CLI::App*> subs;
    for (const auto& n : names) {
        subs[n] = app.add_subcommand(n);
        add_common(subs[n], cli);
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return fail("usage", e.what(), 1);
    }
    try {
        config::RunConfig rc = resolve(cli);
        if (subs["synth"]->parsed()) return cmd_synth(rc);
        if (subs["decompose"]->parsed()) return cmd_decompose(rc);
        if (subs["train"]->parsed()) return cmd_train(rc, "train");
        if (subs["zero-shot"]->parsed()) {
            if (rc.sources.empty() || rc.target.empty()) throw ConfigError("zero-shot needs --sources and --target");
            return cmd_train(rc, "zero-shot");
        }
        if (subs["eval"]->parsed()) return cmd_eval(rc);
        if (subs["forecast"]->parsed()) return cmd_forecast(rc);
        if (subs["ablate"]->parsed()) return cmd_ablate(rc);
        if (subs["shap"]->parsed()) return cmd_shap(rc);
        if (subs["prompt-stats"]->parsed()) return cmd_prompt_stats(rc);
        if (subs["theory-check"]->parsed()) return cmd_theory(rc);
    } catch (const ConfigError& e) {
        return fail("config", e.what(), 1);
    } catch (const ValidationError& e) {
        return fail(e.kind, e.what(), 2);
    } catch (const DivergenceError& e) {
        return fail("divergence", e.what(), 3);
    } catch (const std::invalid_argument& e) {
        return fail("invalid", e.what(), 2);
    } catch (const std::exception& e) {
        return fail("internal", e.what(), 1);
    }
    return 1;
}
