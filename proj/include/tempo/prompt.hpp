#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "tempo/matrix.hpp"

namespace tempo::prompt {

/// Which stream a prompt or forecast belongs to. `series` is the single
/// undecomposed stream used when decomposition is switched off.
enum class Component { trend, season, residual, series };

std::string component_name(Component c);
Component parse_component(const std::string& name);

enum class PromptMode { semi_soft, pool, hard, none };
enum class QueryPool { mean, last };

std::string mode_name(PromptMode m);
PromptMode parse_mode(const std::string& name);
std::string query_pool_name(QueryPool q);
QueryPool parse_query_pool(const std::string& name);

/// "Predict the future time step given the <component>"
std::string template_text(Component c);

std::uint64_t fnv1a64(std::string_view text);

struct SemiSoftPrompt {
    Component component_tag = Component::trend;
    Matrix vectors;  // L_p x L_E
    std::uint64_t init_seed = 0;
};

/// Seeded Gaussian initialization; seed = fnv1a64(template) ^ global_seed.
SemiSoftPrompt init_semi_soft(Component tag, std::size_t prompt_len, std::size_t embed_dim,
                              std::uint64_t global_seed);

/// Shared key/value prompt pool. Value m occupies rows
/// [m * prompt_len, (m + 1) * prompt_len) of `values`.
struct PromptPool {
    Matrix keys;    // M x L_E
    Matrix values;  // (M * L_p) x L_E
    std::size_t size = 0;
    std::size_t top_k = 0;
    std::size_t prompt_len = 0;

    void validate() const;
};

PromptPool init_pool(std::size_t pool_size, std::size_t top_k, std::size_t prompt_len,
                     std::size_t embed_dim, std::uint64_t seed);

/// Query vector from N x L_E patch tokens.
std::vector<double> pool_query(const Matrix& tokens, QueryPool pooling = QueryPool::mean);

/// Cosine similarity; 0 when either vector has zero norm.
double match_score(std::span<const double> query, std::span<const double> key);

/// Indices of the top_k keys by descending score, ties by ascending index.
std::vector<std::size_t> select_top_k(const Matrix& keys, std::span<const double> query, std::size_t top_k);

/// Rows of `prompts` in order, then `tokens`.
Matrix assemble_input(std::span<const Matrix> prompts, const Matrix& tokens);

/// Count of every pool index over a log of selections.
std::vector<std::size_t> selection_histogram(const std::vector<std::vector<std::size_t>>& log,
                                             std::size_t pool_size);

/// Re-draws keys whose norm fell below 1e-12. Returns how many were reset.
std::size_t reinit_degenerate_keys(Matrix& keys, std::uint64_t seed);

} // namespace tempo::prompt
