#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "tempo/model.hpp"

namespace tempo::config {

/// Everything a command can be configured with. Model keys mirror
/// TempoConfig; the rest are paths and command options.
struct RunConfig {
    model::TempoConfig model;

    std::string data;
    std::string sources;         // comma-separated CSV paths
    std::string source_periods;  // comma-separated, empty = model period
    std::string target;
    std::size_t target_period = 0;  // 0 = model period
    std::string ckpt;
    std::string interp = "none";  // missing values: none (error) or linear
    std::string out = "out";

    double split_train = 0.7;
    double split_val = 0.1;
    double split_test = 0.2;

    std::string ablate_flags = "no_dec,no_prompt,no_dec_loss";
    double smape_clip = 0.0;  // 0 = off
    bool via_gam = false;
    std::string suite = "all";
    std::size_t plot_windows = 1;

    std::size_t synth_length = 2000;
    std::size_t synth_period = 24;
    double synth_slope = 0.0;
    double synth_amp = 1.0;
    double synth_noise = 0.05;
};

using KeyValues = std::vector<std::pair<std::string, std::string>>;

/// Sets one key. Throws ConfigError naming the key on unknown keys or
/// values that do not parse as the key's type.
void set_key(RunConfig& cfg, const std::string& key, const std::string& value);

/// Applies `key=value` lines; '#' starts a comment, blank lines are skipped.
void apply_text(RunConfig& cfg, const std::string& text, const std::string& origin = "config");
void apply_file(RunConfig& cfg, const std::filesystem::path& path);

/// All keys in schema order with canonical value text.
KeyValues to_pairs(const RunConfig& cfg);
/// Only the keys that shape the model.
KeyValues model_pairs(const model::TempoConfig& cfg);
void set_model_key(model::TempoConfig& cfg, const std::string& key, const std::string& value);

std::string render(const RunConfig& cfg);
/// 16 hex digits of FNV-1a over render(cfg).
std::string config_hash(const RunConfig& cfg);

std::vector<std::string> split_list(const std::string& csv);

} // namespace tempo::config
