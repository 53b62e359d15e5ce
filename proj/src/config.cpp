#include "tempo/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

#include "tempo/errors.hpp"

namespace tempo::config {
namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

[[noreturn]] void bad(const std::string& key, const std::string& type, const std::string& value) {
    throw ConfigError("config key '" + key + "' expects " + type + ", got '" + value + "'");
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
    std::uint64_t x = 0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
    if (v.empty() || ec != std::errc{} || p != v.data() + v.size()) bad(key, "a non-negative integer", v);
    return x;
}

double to_real(const std::string& key, const std::string& v) {
    double x = 0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
    if (v.empty() || ec != std::errc{} || p != v.data() + v.size()) bad(key, "a real number", v);
    return x;
}

bool to_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    bad(key, "true or false", v);
}

std::string real_text(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

template <class Cfg>
struct Field {
    std::string key;
    std::function<std::string(const Cfg&)> get;
    std::function<void(Cfg&, const std::string&)> set;
};

template <class Cfg, class T>
Field<Cfg> size_field(std::string key, T Cfg::*m) {
    return {key, [m](const Cfg& c) { return std::to_string(c.*m); },
            [m, key](Cfg& c, const std::string& v) { c.*m = static_cast<T>(to_u64(key, v)); }};
}

template <class Cfg>
Field<Cfg> real_field(std::string key, double Cfg::*m) {
    return {key, [m](const Cfg& c) { return real_text(c.*m); },
            [m, key](Cfg& c, const std::string& v) { c.*m = to_real(key, v); }};
}

template <class Cfg>
Field<Cfg> bool_field(std::string key, bool Cfg::*m) {
    return {key, [m](const Cfg& c) { return std::string(c.*m ? "true" : "false"); },
            [m, key](Cfg& c, const std::string& v) { c.*m = to_bool(key, v); }};
}

template <class Cfg>
Field<Cfg> string_field(std::string key, std::string Cfg::*m) {
    return {key, [m](const Cfg& c) { return c.*m; }, [m](Cfg& c, const std::string& v) { c.*m = v; }};
}

using model::TempoConfig;
using BB = backbone::BackboneConfig;

// Lifts a backbone field into TempoConfig.
Field<TempoConfig> bb(Field<BB> f) {
    return {"backbone." + f.key, [g = f.get](const TempoConfig& c) { return g(c.backbone); },
            [s = f.set](TempoConfig& c, const std::string& v) { s(c.backbone, v); }};
}

const std::vector<Field<TempoConfig>>& model_schema() {
    static const std::vector<Field<TempoConfig>> fields = [] {
        using C = TempoConfig;
        std::vector<Field<C>> f;
        f.push_back(size_field("lookback", &C::lookback));
        f.push_back(size_field("horizon", &C::horizon));
        f.push_back(size_field("patch_len", &C::patch_len));
        f.push_back(size_field("stride", &C::stride));
        f.push_back(size_field("period", &C::period));
        f.push_back(size_field("trend_k", &C::trend_k));
        f.push_back({"prompt_mode", [](const C& c) { return prompt::mode_name(c.prompt_mode); },
                     [](C& c, const std::string& v) { c.prompt_mode = prompt::parse_mode(v); }});
        f.push_back(size_field("pool_size", &C::pool_size));
        f.push_back(size_field("top_k", &C::top_k));
        f.push_back(size_field("prompt_len", &C::prompt_len));
        f.push_back({"query_pool", [](const C& c) { return prompt::query_pool_name(c.query_pool); },
                     [](C& c, const std::string& v) { c.query_pool = prompt::parse_query_pool(v); }});
        f.push_back(bb(size_field("layers", &BB::layers)));
        f.push_back(bb(size_field("heads", &BB::heads)));
        f.push_back(bb(size_field("embed_dim", &BB::embed_dim)));
        f.push_back(bb(size_field("mlp_mult", &BB::mlp_mult)));
        f.push_back(bb(real_field("dropout", &BB::dropout)));
        f.push_back(bb(bool_field("causal", &BB::causal)));
        f.push_back(bb(bool_field("lora", &BB::lora)));
        f.push_back(bb(size_field("lora_rank", &BB::lora_rank)));
        f.push_back(bb(real_field("lora_alpha", &BB::lora_alpha)));
        f.push_back({"freeze", [](const C& c) { return backbone::policy_name(c.freeze); },
                     [](C& c, const std::string& v) { c.freeze = backbone::parse_policy(v); }});
        f.push_back(bool_field("decompose", &C::decompose));
        f.push_back(bool_field("embed_per_component", &C::embed_per_component));
        f.push_back(bool_field("heads.include_prompt_positions", &C::heads_include_prompt_positions));
        f.push_back(real_field("lambda_dec", &C::lambda_dec));
        f.push_back(real_field("eps", &C::eps));
        f.push_back(real_field("lr", &C::lr));
        f.push_back(size_field("epochs", &C::epochs));
        f.push_back(size_field("batch", &C::batch));
        f.push_back({"seed", [](const C& c) { return std::to_string(c.seed); },
                     [](C& c, const std::string& v) {
                         c.seed = to_u64("seed", v);
                         c.backbone.seed = c.seed;
                     }});
        f.push_back(size_field("window_stride", &C::window_stride));
        f.push_back(size_field("samples_per_domain", &C::samples_per_domain));
        f.push_back(real_field("grad_clip", &C::grad_clip));
        return f;
    }();
    return fields;
}

const std::vector<Field<RunConfig>>& run_schema() {
    static const std::vector<Field<RunConfig>> fields = [] {
        using R = RunConfig;
        std::vector<Field<R>> f;
        f.push_back(string_field("data", &R::data));
        f.push_back(string_field("sources", &R::sources));
        f.push_back(string_field("source_periods", &R::source_periods));
        f.push_back(string_field("target", &R::target));
        f.push_back(size_field("target_period", &R::target_period));
        f.push_back(string_field("ckpt", &R::ckpt));
        f.push_back(string_field("out", &R::out));
        f.push_back(real_field("split_train", &R::split_train));
        f.push_back(real_field("split_val", &R::split_val));
        f.push_back(real_field("split_test", &R::split_test));
        f.push_back(string_field("ablate_flags", &R::ablate_flags));
        f.push_back(string_field("interp", &R::interp));
        f.push_back(real_field("smape_clip", &R::smape_clip));
        f.push_back(bool_field("via_gam", &R::via_gam));
        f.push_back(string_field("suite", &R::suite));
        f.push_back(size_field("plot_windows", &R::plot_windows));
        f.push_back(size_field("synth_length", &R::synth_length));
        f.push_back(size_field("synth_period", &R::synth_period));
        f.push_back(real_field("synth_slope", &R::synth_slope));
        f.push_back(real_field("synth_amp", &R::synth_amp));
        f.push_back(real_field("synth_noise", &R::synth_noise));
        return f;
    }();
    return fields;
}

} // namespace

void set_model_key(TempoConfig& cfg, const std::string& key_in, const std::string& value) {
    const std::string key = key_in == "embed.per_component" ? "embed_per_component" : key_in;
    for (const auto& f : model_schema())
        if (f.key == key) {
            try {
                f.set(cfg, value);
            } catch (const ConfigError&) {
                throw;
            } catch (const std::exception& e) {
                throw ConfigError("config key '" + key + "': " + e.what());
            }
            return;
        }
    throw ConfigError("unknown config key '" + key + "'");
}

void set_key(RunConfig& cfg, const std::string& key, const std::string& value) {
    for (const auto& f : run_schema())
        if (f.key == key) {
            f.set(cfg, value);
            return;
        }
    set_model_key(cfg.model, key, value);
}

void apply_text(RunConfig& cfg, const std::string& text, const std::string& origin) {
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected key=value");
        set_key(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
}

void apply_file(RunConfig& cfg, const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    apply_text(cfg, ss.str(), path.string());
}

KeyValues model_pairs(const TempoConfig& cfg) {
    KeyValues kv;
    for (const auto& f : model_schema()) kv.emplace_back(f.key, f.get(cfg));
    return kv;
}

KeyValues to_pairs(const RunConfig& cfg) {
    KeyValues kv = model_pairs(cfg.model);
    for (const auto& f : run_schema()) kv.emplace_back(f.key, f.get(cfg));
    return kv;
}

std::string render(const RunConfig& cfg) {
    std::string s;
    for (const auto& [k, v] : to_pairs(cfg)) s += k + "=" + v + "\n";
    return s;
}

std::string config_hash(const RunConfig& cfg) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(prompt::fnv1a64(render(cfg))));
    return buf;
}

std::vector<std::string> split_list(const std::string& csv) {
    std::vector<std::string> out;
    std::stringstream ss(csv);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        tok = trim(tok);
        if (!tok.empty()) out.push_back(tok);
    }
    return out;
}

} // namespace tempo::config
