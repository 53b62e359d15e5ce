#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "tempo/matrix.hpp"

namespace tempo::embed {

/// N x L_P matrix of overlapping patches of one (end-padded) window.
struct PatchGrid {
    Matrix patches;
    std::size_t patch_len = 0;
    std::size_t stride = 0;
    std::size_t count = 0;
};

struct PatchEmbedding {
    Matrix tokens;  // N x L_E
};

/// floor((L - L_P) / S) + 2
std::size_t patch_count(std::size_t length, std::size_t patch_len, std::size_t stride);

/// Flat indices into the unpadded window for every patch cell, row-major
/// N x L_P. Cells past the end of the window point at its last element, which
/// is the same as replicating the last value S times.
std::vector<std::size_t> patch_indices(std::size_t length, std::size_t patch_len, std::size_t stride);

PatchGrid patchify(std::span<const double> window, std::size_t patch_len, std::size_t stride);

/// tokens = patches * w + b, with w L_P x L_E and b 1 x L_E.
PatchEmbedding embed_patches(const PatchGrid& grid, const Matrix& w, const Matrix& b);

} // namespace tempo::embed
