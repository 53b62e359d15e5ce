#include <doctest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "tempo/backbone.hpp"
#include "tempo/errors.hpp"

using namespace tempo;
using namespace tempo::backbone;

namespace {

BackboneConfig small() {
    BackboneConfig c;
    c.layers = 2;
    c.heads = 2;
    c.embed_dim = 8;
    c.lora_rank = 2;
    c.seed = 5;
    return c;
}

Matrix randm(std::size_t r, std::size_t c, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    Matrix m(r, c);
    for (auto& v : m.data) v = nd(rng);
    return m;
}

Matrix run(ParamStore& s, const BackboneConfig& c, const Matrix& x) {
    ag::Tape t;
    return forward(t, t.constant(x), s, c).value();
}

} // namespace

TEST_CASE("config validation") {
    BackboneConfig c = small();
    c.heads = 3;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = small();
    c.layers = 0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = small();
    c.dropout = 1.0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("single token is unaffected by the causal mask") {
    auto c = small();
    ParamStore s;
    init_backbone(s, c, 4);
    const Matrix x = randm(1, 8, 1);
    const Matrix a = run(s, c, x);
    c.causal = false;
    CHECK(run(s, c, x) == a);
}

TEST_CASE("zero input with zero output projections yields the positional contribution") {
    auto c = small();
    ParamStore s;
    init_backbone(s, c, 6);
    for (auto& p : s.all())
        if (p.name.ends_with(".wo") || p.name.ends_with(".w2")) p.value.fill(0.0);
    const Matrix out = run(s, c, Matrix(5, 8));
    ag::Tape t;
    ag::Var wpe = ag::slice_rows(t.param(s.at("backbone.wpe")), 0, 5);
    const Matrix want =
        ag::layer_norm(wpe, t.param(s.at("backbone.lnf_g")), t.param(s.at("backbone.lnf_b")), 1e-5).value();
    for (std::size_t i = 0; i < out.size(); ++i) CHECK(out[i] == doctest::Approx(want[i]).epsilon(1e-12));
}

TEST_CASE("causality: future tokens do not affect earlier positions") {
    auto c = small();
    ParamStore s;
    init_backbone(s, c, 8);
    Matrix x = randm(6, 8, 2);
    const Matrix a = run(s, c, x);
    for (std::size_t j = 0; j < 8; ++j) std::swap(x(4, j), x(5, j));
    for (std::size_t j = 0; j < 8; ++j) x(3, j) += 1.0;
    const Matrix b = run(s, c, x);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 8; ++j) CHECK(a(i, j) == b(i, j));
}

TEST_CASE("sequence longer than the positional table is an error") {
    auto c = small();
    ParamStore s;
    init_backbone(s, c, 4);
    CHECK_THROWS(run(s, c, Matrix(5, 8)));
}

TEST_CASE("fresh LoRA adapters leave the forward pass unchanged") {
    auto with = small();
    auto without = small();
    without.lora = false;
    ParamStore a, b;
    init_backbone(a, with, 8);
    init_backbone(b, without, 8);
    const Matrix x = randm(7, 8, 3);
    CHECK(run(a, with, x) == run(b, without, x));
}

TEST_CASE("apply_lora") {
    const Matrix w = randm(4, 4, 1), a = randm(2, 4, 2);
    CHECK(apply_lora(w, a, Matrix(4, 2), 8.0, 2) == w);
    const Matrix u(1, 4, std::vector<double>{1, 2, 3, 4}), v(4, 1, std::vector<double>{-1, 0, 2, 1});
    const Matrix r = apply_lora(w, u, v, 1.0, 1);
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j) CHECK(r(i, j) == doctest::Approx(w(i, j) + v[i] * u[j]).epsilon(1e-15));
    const Matrix b = randm(4, 2, 3);
    const Matrix d1 = apply_lora(w, a, b, 1.0, 2), d2 = apply_lora(w, a, b, 2.0, 2);
    for (std::size_t i = 0; i < 16; ++i) CHECK((d2[i] - w[i]) == doctest::Approx(2.0 * (d1[i] - w[i])).epsilon(1e-12));
    CHECK_THROWS(apply_lora(w, a, Matrix(3, 2), 1.0, 2));
}

TEST_CASE("freeze policies") {
    ParamStore s;
    init_backbone(s, small(), 4);
    set_freeze_policy(s, FreezePolicy::gpt_style);
    for (const auto& p : s.all()) {
        const bool core = p.group == ParamGroup::attention_core || p.group == ParamGroup::mlp_core;
        CHECK(p.trainable == !core);
    }
    set_freeze_policy(s, FreezePolicy::from_scratch);
    for (const auto& p : s.all()) CHECK(p.trainable);
    CHECK(parse_policy("gpt_style") == FreezePolicy::gpt_style);
    CHECK_THROWS(parse_policy("frozen"));
}

TEST_CASE("grad_check on a linear loss") {
    ParamStore s;
    s.add("p", ParamGroup::heads, randm(3, 5, 4));
    const Matrix w = randm(3, 5, 5);
    auto loss = [&](ag::Tape& t) { return ag::sum(ag::mul(t.param(s.at("p")), t.constant(w))); };
    const auto r = grad_check(s, loss, 1e-5, 15, 1);
    CHECK(r.max_rel_error <= 1e-10);
    CHECK(r.groups.at(ParamGroup::heads).samples == 15);
}

TEST_CASE("grad_check detects a scaled analytic gradient") {
    auto cfg = fixtures::tiny_config();
    auto mp = model::init_model(cfg);
    fixtures::perturb(mp, 9);
    const auto smp = fixtures::samples(cfg, 1);
    auto loss = [&](ag::Tape& t) {
        auto g = model::forward_graph(t, mp, smp[0]);
        return model::total_loss_graph(g, smp[0].window.horizon, cfg.lambda_dec);
    };
    const auto r = grad_check(mp.store, loss, 1e-5, 6, 2, 1.01);
    CHECK(r.max_rel_error >= 4e-3);
}

TEST_CASE("gradients are deterministic") {
    auto cfg = fixtures::tiny_config();
    auto mp = model::init_model(cfg);
    fixtures::perturb(mp, 4);
    const auto smp = fixtures::samples(cfg, 1);
    auto loss = [&](ag::Tape& t) {
        auto g = model::forward_graph(t, mp, smp[0]);
        return model::total_loss_graph(g, smp[0].window.horizon, cfg.lambda_dec);
    };
    compute_gradients(mp.store, loss);
    std::vector<Matrix> first;
    for (const auto& p : mp.store.all()) first.push_back(p.grad);
    compute_gradients(mp.store, loss);
    for (std::size_t i = 0; i < first.size(); ++i) CHECK(mp.store.all()[i].grad == first[i]);
}
