#pragma once

#include <filesystem>

#include "tempo/model.hpp"

namespace tempo::checkpoint {

/// Plain-text format: a "TEMPO-CKPT-1" line, the model config as key=value
/// lines, then every tensor (name, group, trainable flag, shape, values at
/// full precision). Loading rebuilds the model from the config and checks
/// that names and shapes agree.
void save(const model::ModelParams& params, const std::filesystem::path& path);
model::ModelParams load(const std::filesystem::path& path);

} // namespace tempo::checkpoint
