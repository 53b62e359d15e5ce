#include "tempo/embed.hpp"

#include <algorithm>
#include <stdexcept>

#include "tempo/kernels/kernels.hpp"

namespace tempo::embed {

std::size_t patch_count(std::size_t length, std::size_t patch_len, std::size_t stride) {
    if (patch_len < 1 || patch_len > length || stride < 1)
        throw std::invalid_argument("patch_count: need 1 <= L_P <= L and S >= 1");
    return (length - patch_len) / stride + 2;
}

std::vector<std::size_t> patch_indices(std::size_t length, std::size_t patch_len, std::size_t stride) {
    const std::size_t n = patch_count(length, patch_len, stride);
    std::vector<std::size_t> idx(n * patch_len);
    for (std::size_t p = 0; p < n; ++p)
        for (std::size_t j = 0; j < patch_len; ++j) idx[p * patch_len + j] = std::min(p * stride + j, length - 1);
    return idx;
}

PatchGrid patchify(std::span<const double> window, std::size_t patch_len, std::size_t stride) {
    const std::size_t n = patch_count(window.size(), patch_len, stride);
    const auto idx = patch_indices(window.size(), patch_len, stride);
    PatchGrid g{Matrix(n, patch_len), patch_len, stride, n};
    for (std::size_t i = 0; i < idx.size(); ++i) g.patches[i] = window[idx[i]];
    return g;
}

PatchEmbedding embed_patches(const PatchGrid& grid, const Matrix& w, const Matrix& b) {
    if (w.rows != grid.patch_len || b.rows != 1 || b.cols != w.cols)
        throw std::invalid_argument("embed_patches: shape mismatch");
    Matrix tokens(grid.count, w.cols);
    for (std::size_t i = 0; i < grid.count; ++i) std::copy(b.data.begin(), b.data.end(), tokens.row_span(i).begin());
    kernels::active().gemm_nn(grid.patches.data.data(), w.data.data(), tokens.data.data(), grid.count,
                              grid.patch_len, w.cols);
    return {std::move(tokens)};
}

} // namespace tempo::embed
