#include "tempo/checkpoint.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "tempo/config.hpp"
#include "tempo/errors.hpp"

namespace tempo::checkpoint {
namespace {

constexpr const char* kTag = "TEMPO-CKPT-1";

[[noreturn]] void corrupt(const std::filesystem::path& p, const std::string& what) {
    throw ValidationError("checkpoint", "checkpoint " + p.string() + ": " + what);
}

} // namespace

void save(const model::ModelParams& params, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write checkpoint " + path.string());
    out << kTag << "\n";
    const auto kv = config::model_pairs(params.config);
    out << "config " << kv.size() << "\n";
    for (const auto& [k, v] : kv) out << k << "=" << v << "\n";
    out << "params " << params.store.size() << "\n";
    char buf[32];
    for (const Parameter& p : params.store.all()) {
        out << p.name << " " << group_name(p.group) << " " << (p.trainable ? 1 : 0) << " " << p.value.rows << " "
            << p.value.cols << "\n";
        for (std::size_t i = 0; i < p.value.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%.17g", p.value[i]);
            out << (i ? " " : "") << buf;
        }
        out << "\n";
    }
    if (!out) throw ConfigError("write failed for checkpoint " + path.string());
}

model::ModelParams load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read checkpoint " + path.string());
    std::string line;
    if (!std::getline(in, line) || line != kTag) corrupt(path, "missing format tag");
    std::string word;
    std::size_t n = 0;
    if (!(in >> word >> n) || word != "config") corrupt(path, "missing config section");
    std::getline(in, line);
    model::TempoConfig cfg;
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::getline(in, line)) corrupt(path, "truncated config section");
        const auto eq = line.find('=');
        if (eq == std::string::npos) corrupt(path, "bad config line '" + line + "'");
        config::set_model_key(cfg, line.substr(0, eq), line.substr(eq + 1));
    }
    model::ModelParams mp = model::init_model(cfg);
    if (!(in >> word >> n) || word != "params") corrupt(path, "missing params section");
    if (n != mp.store.size()) corrupt(path, "tensor count does not match config");
    for (std::size_t k = 0; k < n; ++k) {
        std::string name, group;
        int trainable = 0;
        std::size_t rows = 0, cols = 0;
        if (!(in >> name >> group >> trainable >> rows >> cols)) corrupt(path, "truncated tensor header");
        if (!mp.store.contains(name)) corrupt(path, "unexpected tensor " + name);
        Parameter& p = mp.store.at(name);
        if (p.value.rows != rows || p.value.cols != cols) corrupt(path, "shape mismatch for " + name);
        for (std::size_t i = 0; i < p.value.size(); ++i)
            if (!(in >> p.value[i])) corrupt(path, "truncated values for " + name);
        p.trainable = trainable != 0;
    }
    return mp;
}

} // namespace tempo::checkpoint
