#include <doctest.h>

#include <cmath>
#include <limits>

#include "fixtures.hpp"
#include "tempo/errors.hpp"
#include "tempo/metrics.hpp"
#include "tempo/train.hpp"

using namespace tempo;
using namespace tempo::model;

TEST_CASE("metric identities") {
    const std::vector<double> f{1}, a{3};
    const auto m = metrics::compute(f, a);
    CHECK(m.mse == 4.0);
    CHECK(m.mae == 2.0);
    CHECK(m.abs_smape == 100.0);
    CHECK(metrics::abs_smape(std::vector<double>{2}, std::vector<double>{-2}) == 200.0);
    CHECK(metrics::abs_smape(std::vector<double>{0, 1}, std::vector<double>{0, 1}) == 0.0);
    const std::vector<double> x{0.5, -1, 3};
    const auto p = metrics::compute(x, x);
    CHECK(p.mse == 0.0);
    CHECK(p.mae == 0.0);
    CHECK(p.abs_smape == 0.0);
    CHECK_THROWS(metrics::abs_smape(std::vector<double>{}, std::vector<double>{}));
}

TEST_CASE("smape clip drops outlier terms") {
    const std::vector<double> f{1, 2}, a{1.1, -2};
    const auto all = metrics::compute(f, a);
    const auto clipped = metrics::compute(f, a, 1.0);
    CHECK(all.abs_smape > 100.0);
    CHECK(clipped.abs_smape == doctest::Approx(200.0 * 0.1 / 2.1));
    CHECK(clipped.mse == all.mse);
}

TEST_CASE("metric ranges on random forecasts") {
    std::mt19937_64 rng(2);
    std::normal_distribution<double> nd;
    for (int rep = 0; rep < 100; ++rep) {
        std::vector<double> f(10), a(10);
        for (auto& v : f) v = nd(rng);
        for (auto& v : a) v = nd(rng);
        const auto m = metrics::compute(f, a);
        CHECK(m.mse >= 0.0);
        CHECK(m.mae >= 0.0);
        CHECK(m.abs_smape >= 0.0);
        CHECK(m.abs_smape <= 200.0);
    }
}

TEST_CASE("lr = 0 leaves parameters unchanged and history flat") {
    auto c = fixtures::tiny_config();
    c.lr = 0.0;
    const auto s = fixtures::samples(c, 6);
    const auto init = init_model(c);
    const auto r = train(c, s, {});
    for (std::size_t i = 0; i < init.store.size(); ++i) CHECK(r.params.store.all()[i].value == init.store.all()[i].value);
    for (const auto& e : r.history.epochs) CHECK(e.train_mse == r.history.epochs[0].train_mse);
}

TEST_CASE("single-window overfit") {
    auto c = fixtures::tiny_config();
    c.epochs = 10;
    c.lr = 3e-4;
    c.batch = 1;
    const auto s = fixtures::samples(c, 1);
    const auto r = train(c, s, {});
    const auto& h = r.history.epochs;
    for (std::size_t i = 3; i < h.size(); ++i) CHECK(h[i].train_mse < h[i - 1].train_mse);
    CHECK(h.back().train_mse < 0.1 * h.front().train_mse);
}

TEST_CASE("training is deterministic for a fixed seed") {
    auto c = fixtures::tiny_config();
    const auto s = fixtures::samples(c, 8);
    const auto v = fixtures::samples(c, 3, 7);
    const auto a = train(c, s, v), b = train(c, s, v);
    REQUIRE(a.history.epochs.size() == b.history.epochs.size());
    for (std::size_t i = 0; i < a.history.epochs.size(); ++i) {
        CHECK(a.history.epochs[i].train_mse == b.history.epochs[i].train_mse);
        CHECK(*a.history.epochs[i].val_mse == *b.history.epochs[i].val_mse);
    }
    CHECK(a.history.best_epoch >= 1);
}

TEST_CASE("best validation snapshot is returned") {
    auto c = fixtures::tiny_config();
    c.epochs = 4;
    const auto s = fixtures::samples(c, 8);
    const auto v = fixtures::samples(c, 3, 7);
    auto r = train(c, s, v);
    const auto& best = r.history.epochs[r.history.best_epoch - 1];
    for (const auto& e : r.history.epochs) CHECK(*best.val_mse <= *e.val_mse);
    CHECK(evaluate(r.params, v).mse == *best.val_mse);
}

TEST_CASE("gpt_style keeps frozen tensors bit-identical") {
    auto c = fixtures::tiny_config();
    c.freeze = backbone::FreezePolicy::gpt_style;
    c.epochs = 1;
    const auto s = fixtures::samples(c, 4);
    const auto init = init_model(c);
    const auto r = train(c, s, {});
    bool some_changed = false;
    for (std::size_t i = 0; i < init.store.size(); ++i) {
        const auto& before = init.store.all()[i];
        const auto& after = r.params.store.all()[i];
        if (!before.trainable) CHECK(after.value == before.value);
        else if (!(after.value == before.value)) some_changed = true;
    }
    CHECK(some_changed);
}

TEST_CASE("non-finite loss aborts training") {
    auto c = fixtures::tiny_config();
    auto s = fixtures::samples(c, 2);
    s[1].window.horizon[0] = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(train(c, s, {}), DivergenceError);
}

TEST_CASE("evaluate matches hand-computed metrics") {
    auto c = fixtures::tiny_config();
    auto mp = init_model(c);
    const auto s = fixtures::samples(c, 3);
    const auto preds = predict(mp, s);
    double se = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < s.size(); ++i)
        for (std::size_t h = 0; h < c.horizon; ++h, ++n) {
            const double e = preds[i].y_hat[h] - s[i].window.horizon[h];
            se += e * e;
        }
    CHECK(evaluate(mp, s).mse == doctest::Approx(se / static_cast<double>(n)).epsilon(1e-14));
    EvalOptions o;
    o.horizon_prefix = 2;
    CHECK(evaluate(mp, s, o).points == 2 * s.size());
    CHECK_THROWS(evaluate(mp, {}));
}
