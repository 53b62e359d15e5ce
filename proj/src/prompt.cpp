#include "tempo/prompt.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

#include "tempo/errors.hpp"

namespace tempo::prompt {

std::string component_name(Component c) {
    switch (c) {
    case Component::trend: return "trend";
    case Component::season: return "season";
    case Component::residual: return "residual";
    case Component::series: return "series";
    }
    return "unknown";
}

Component parse_component(const std::string& name) {
    for (Component c : {Component::trend, Component::season, Component::residual, Component::series})
        if (component_name(c) == name) return c;
    throw std::invalid_argument("unknown component '" + name + "'");
}

std::string mode_name(PromptMode m) {
    switch (m) {
    case PromptMode::semi_soft: return "semi_soft";
    case PromptMode::pool: return "pool";
    case PromptMode::hard: return "hard";
    case PromptMode::none: return "none";
    }
    return "unknown";
}

PromptMode parse_mode(const std::string& name) {
    for (PromptMode m : {PromptMode::semi_soft, PromptMode::pool, PromptMode::hard, PromptMode::none})
        if (mode_name(m) == name) return m;
    throw ConfigError("unknown prompt mode '" + name + "'");
}

std::string query_pool_name(QueryPool q) { return q == QueryPool::mean ? "mean" : "last"; }

QueryPool parse_query_pool(const std::string& name) {
    if (name == "mean") return QueryPool::mean;
    if (name == "last") return QueryPool::last;
    throw ConfigError("unknown query pooling '" + name + "'");
}

std::string template_text(Component c) {
    const std::string what = c == Component::series ? "time series" : component_name(c);
    return "Predict the future time step given the " + what;
}

std::uint64_t fnv1a64(std::string_view text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

SemiSoftPrompt init_semi_soft(Component tag, std::size_t prompt_len, std::size_t embed_dim,
                              std::uint64_t global_seed) {
    if (prompt_len < 1 || embed_dim < 1) throw std::invalid_argument("init_semi_soft: sizes must be >= 1");
    SemiSoftPrompt p;
    p.component_tag = tag;
    p.init_seed = fnv1a64(template_text(tag)) ^ global_seed;
    p.vectors = Matrix(prompt_len, embed_dim);
    std::mt19937_64 rng(p.init_seed);
    std::normal_distribution<double> g(0.0, 0.1);
    for (double& v : p.vectors.data) v = g(rng);
    return p;
}

void PromptPool::validate() const {
    if (top_k < 1 || top_k > size) throw std::invalid_argument("prompt pool: need 1 <= K <= M");
    if (prompt_len < 1) throw std::invalid_argument("prompt pool: prompt length must be >= 1");
    if (keys.rows != size || values.rows != size * prompt_len || values.cols != keys.cols)
        throw std::invalid_argument("prompt pool: shape mismatch");
}

PromptPool init_pool(std::size_t pool_size, std::size_t top_k, std::size_t prompt_len, std::size_t embed_dim,
                     std::uint64_t seed) {
    PromptPool pool;
    pool.size = pool_size;
    pool.top_k = top_k;
    pool.prompt_len = prompt_len;
    pool.keys = Matrix(pool_size, embed_dim);
    pool.values = Matrix(pool_size * prompt_len, embed_dim);
    pool.validate();
    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::normal_distribution<double> g(0.0, 0.1);
    for (double& v : pool.keys.data) v = u(rng);
    for (double& v : pool.values.data) v = g(rng);
    return pool;
}

std::vector<double> pool_query(const Matrix& tokens, QueryPool pooling) {
    if (tokens.rows == 0) throw std::invalid_argument("pool_query: no tokens");
    if (pooling == QueryPool::last) {
        auto r = tokens.row_span(tokens.rows - 1);
        return {r.begin(), r.end()};
    }
    std::vector<double> q(tokens.cols, 0.0);
    for (std::size_t i = 0; i < tokens.rows; ++i)
        for (std::size_t j = 0; j < tokens.cols; ++j) q[j] += tokens(i, j);
    for (double& v : q) v /= static_cast<double>(tokens.rows);
    return q;
}

double match_score(std::span<const double> query, std::span<const double> key) {
    if (query.size() != key.size()) throw std::invalid_argument("match_score: length mismatch");
    double dot = 0.0, nq = 0.0, nk = 0.0;
    for (std::size_t i = 0; i < query.size(); ++i) {
        dot += query[i] * key[i];
        nq += query[i] * query[i];
        nk += key[i] * key[i];
    }
    if (nq == 0.0 || nk == 0.0) return 0.0;
    return dot / (std::sqrt(nq) * std::sqrt(nk));
}

std::vector<std::size_t> select_top_k(const Matrix& keys, std::span<const double> query, std::size_t top_k) {
    if (top_k > keys.rows) throw std::invalid_argument("select_top_k: K exceeds pool size");
    std::vector<double> score(keys.rows);
    for (std::size_t m = 0; m < keys.rows; ++m) score[m] = match_score(query, keys.row_span(m));
    std::vector<std::size_t> idx(keys.rows);
    std::iota(idx.begin(), idx.end(), 0);
    std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(top_k), idx.end(),
                      [&](std::size_t a, std::size_t b) {
                          if (score[a] != score[b]) return score[a] > score[b];
                          return a < b;
                      });
    idx.resize(top_k);
    return idx;
}

Matrix assemble_input(std::span<const Matrix> prompts, const Matrix& tokens) {
    std::size_t rows = tokens.rows;
    for (const Matrix& p : prompts) {
        if (p.cols != tokens.cols) throw std::invalid_argument("assemble_input: width mismatch");
        rows += p.rows;
    }
    Matrix out(rows, tokens.cols);
    auto it = out.data.begin();
    for (const Matrix& p : prompts) it = std::copy(p.data.begin(), p.data.end(), it);
    std::copy(tokens.data.begin(), tokens.data.end(), it);
    return out;
}

std::vector<std::size_t> selection_histogram(const std::vector<std::vector<std::size_t>>& log,
                                             std::size_t pool_size) {
    std::vector<std::size_t> counts(pool_size, 0);
    for (const auto& sel : log)
        for (std::size_t i : sel) {
            if (i >= pool_size) throw std::invalid_argument("selection_histogram: index out of range");
            ++counts[i];
        }
    return counts;
}

std::size_t reinit_degenerate_keys(Matrix& keys, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::size_t reset = 0;
    for (std::size_t m = 0; m < keys.rows; ++m) {
        auto row = keys.row_span(m);
        double n2 = 0.0;
        for (double v : row) n2 += v * v;
        if (std::sqrt(n2) >= 1e-12) continue;
        for (double& v : row) v = u(rng);
        ++reset;
    }
    return reset;
}

} // namespace tempo::prompt
