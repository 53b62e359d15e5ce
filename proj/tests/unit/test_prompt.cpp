#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "tempo/prompt.hpp"

using namespace tempo;
using namespace tempo::prompt;

namespace {

std::vector<std::size_t> oracle_top_k(const Matrix& keys, std::span<const double> q, std::size_t k) {
    std::vector<std::size_t> idx(keys.rows);
    std::iota(idx.begin(), idx.end(), 0);
    std::vector<double> s(keys.rows);
    for (std::size_t m = 0; m < keys.rows; ++m) s[m] = match_score(q, keys.row_span(m));
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return s[a] > s[b]; });
    idx.resize(k);
    return idx;
}

} // namespace

TEST_CASE("semi-soft init") {
    const auto a = init_semi_soft(Component::trend, 3, 64, 5);
    const auto b = init_semi_soft(Component::trend, 3, 64, 5);
    const auto c = init_semi_soft(Component::season, 3, 64, 5);
    CHECK(a.vectors == b.vectors);
    CHECK(a.vectors.rows == 3);
    CHECK(a.vectors.cols == 64);
    double diff = 0.0;
    for (std::size_t i = 0; i < a.vectors.size(); ++i) diff = std::max(diff, std::abs(a.vectors[i] - c.vectors[i]));
    CHECK(diff > 0.0);
    CHECK(a.init_seed == (fnv1a64(template_text(Component::trend)) ^ 5));
    CHECK(template_text(Component::residual) == "Predict the future time step given the residual");
}

TEST_CASE("fnv1a64 reference values") {
    CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
    CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
}

TEST_CASE("pool_query") {
    Matrix one(1, 3, std::vector<double>{1, 2, 3});
    CHECK(pool_query(one) == std::vector<double>{1, 2, 3});
    Matrix sym(2, 2, std::vector<double>{1, -2, -1, 2});
    CHECK(pool_query(sym) == std::vector<double>{0, 0});
    Matrix three(3, 2, std::vector<double>{1, 2, 3, 4, 5, 9});
    const auto q = pool_query(three);
    CHECK(q[0] == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(q[1] == doctest::Approx(5.0).epsilon(1e-12));
    CHECK(pool_query(three, QueryPool::last) == std::vector<double>{5, 9});
}

TEST_CASE("match_score") {
    const std::vector<double> v{1, 2, -3}, w{2, -1, 0}, z{0, 0, 0}, neg{-1, -2, 3};
    CHECK(match_score(v, v) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(match_score(v, w) == 0.0);
    CHECK(match_score(v, neg) == doctest::Approx(-1.0).epsilon(1e-15));
    CHECK(match_score(z, v) == 0.0);
}

TEST_CASE("select_top_k") {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> nd;
    const auto pool = init_pool(30, 3, 3, 8, 1);
    std::vector<double> q(8);
    for (auto& v : q) v = nd(rng);
    CHECK(select_top_k(pool.keys, q, 3) == oracle_top_k(pool.keys, q, 3));
    CHECK(select_top_k(pool.keys, q, 30) == oracle_top_k(pool.keys, q, 30));

    Matrix same(5, 2, 1.0);
    CHECK(select_top_k(same, std::vector<double>{0.3, 0.1}, 3) == std::vector<std::size_t>{0, 1, 2});
    CHECK_THROWS(select_top_k(same, std::vector<double>{1, 1}, 6));

    for (int rep = 0; rep < 200; ++rep) {
        for (auto& v : q) v = nd(rng);
        std::vector<double> scaled = q;
        for (auto& v : scaled) v *= 3.7;
        CHECK(select_top_k(pool.keys, scaled, 3) == select_top_k(pool.keys, q, 3));
    }
}

TEST_CASE("assemble_input") {
    Matrix tokens(12, 4);
    for (std::size_t i = 0; i < tokens.size(); ++i) tokens[i] = static_cast<double>(i);
    CHECK(assemble_input({}, tokens) == tokens);
    const std::vector<Matrix> one{Matrix(1, 4, 9.0)};
    const auto a1 = assemble_input(one, tokens);
    CHECK(a1.rows == 13);
    CHECK(a1(0, 0) == 9.0);
    const std::vector<Matrix> three{Matrix(3, 4, 1.0), Matrix(3, 4, 2.0), Matrix(3, 4, 3.0)};
    const auto a = assemble_input(three, tokens);
    REQUIRE(a.rows == 21);
    for (std::size_t r = 9; r < 21; ++r)
        for (std::size_t c = 0; c < 4; ++c) CHECK(a(r, c) == tokens(r - 9, c));
    CHECK(a(3, 0) == 2.0);
    const std::vector<Matrix> bad{Matrix(1, 3)};
    CHECK_THROWS(assemble_input(bad, tokens));
}

TEST_CASE("selection_histogram") {
    CHECK(selection_histogram({}, 5) == std::vector<std::size_t>(5, 0));
    CHECK(selection_histogram({{1, 3, 4}}, 5) == std::vector<std::size_t>{0, 1, 0, 1, 1});
    const auto pool = init_pool(30, 3, 3, 8, 2);
    const std::vector<double> q{1, 0, 0.5, 0, -1, 2, 0, 0};
    std::vector<std::vector<std::size_t>> log;
    for (int i = 0; i < 10; ++i) log.push_back(select_top_k(pool.keys, q, 3));
    const auto h = selection_histogram(log, 30);
    CHECK(std::count(h.begin(), h.end(), 10u) == 3);
    CHECK(std::accumulate(h.begin(), h.end(), std::size_t{0}) == 30);
}

TEST_CASE("pool validation and degenerate keys") {
    CHECK_THROWS(init_pool(2, 3, 1, 4, 0));
    CHECK_THROWS(init_pool(4, 0, 1, 4, 0));
    auto pool = init_pool(4, 2, 2, 3, 0);
    CHECK(pool.values.rows == 8);
    for (std::size_t c = 0; c < 3; ++c) pool.keys(2, c) = 0.0;
    CHECK(reinit_degenerate_keys(pool.keys, 5) == 1);
    double n = 0.0;
    for (std::size_t c = 0; c < 3; ++c) n += pool.keys(2, c) * pool.keys(2, c);
    CHECK(n > 1e-12);
}

TEST_CASE("mode names round trip") {
    for (auto m : {PromptMode::semi_soft, PromptMode::pool, PromptMode::hard, PromptMode::none})
        CHECK(parse_mode(mode_name(m)) == m);
    CHECK_THROWS(parse_mode("soft"));
}
