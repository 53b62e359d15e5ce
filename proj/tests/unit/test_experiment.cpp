#include <doctest.h>

#include "fixtures.hpp"
#include "tempo/errors.hpp"
#include "tempo/experiment.hpp"

using namespace tempo;
using namespace tempo::experiment;

namespace {

DomainSource source(const std::string& id, std::size_t len, std::size_t period, std::uint64_t seed) {
    DomainSource d;
    d.id = id;
    d.frame = data::synth_generate({len, period, 0.01, 1.0, 0.1, seed});
    d.period = period;
    return d;
}

} // namespace

TEST_CASE("single dataset split keeps test windows out of training") {
    auto c = fixtures::tiny_config();
    const auto ex = build_single(source("a", 400, 8, 1), c);
    REQUIRE(!ex.train.empty());
    REQUIRE(!ex.test.empty());
    for (const auto& s : ex.train) {
        CHECK(s.global.has_value());
        CHECK(s.window.origin_t + c.lookback + c.horizon <= 280);
    }
    for (const auto& s : ex.test) CHECK(s.window.origin_t >= 320);
    // stride 1 on test
    CHECK(ex.test[1].window.origin_t == ex.test[0].window.origin_t + 1);
}

TEST_CASE("zero-shot leakage guard") {
    auto c = fixtures::tiny_config();
    const auto a = source("a", 300, 8, 1), b = source("b", 300, 12, 2);
    CHECK_NOTHROW(check_leakage({a}, b));
    auto same_id = source("a", 300, 12, 9);
    CHECK_THROWS_AS(check_leakage({a, b}, same_id), ValidationError);
    auto same_values = b;
    same_values.id = "copy";
    try {
        check_leakage({a, b}, same_values);
        FAIL("expected leakage");
    } catch (const ValidationError& e) {
        CHECK(e.kind == "leakage");
    }
    CHECK_THROWS_AS(build_zero_shot({a, b}, same_id, c), ValidationError);
}

TEST_CASE("per-domain cap is deterministic") {
    auto c = fixtures::tiny_config();
    c.samples_per_domain = 5;
    const std::vector<DomainSource> srcs{source("a", 400, 8, 1), source("b", 400, 12, 2)};
    const auto t = source("t", 300, 16, 3);
    const auto x = build_zero_shot(srcs, t, c), y = build_zero_shot(srcs, t, c);
    CHECK(x.train.size() == 10);
    REQUIRE(x.train.size() == y.train.size());
    for (std::size_t i = 0; i < x.train.size(); ++i) {
        CHECK(x.train[i].domain == y.train[i].domain);
        CHECK(x.train[i].window.origin_t == y.train[i].window.origin_t);
    }
    for (const auto& s : x.test) CHECK(s.domain == "t");
    for (const auto& s : x.test) CHECK(s.period == 16);
}

TEST_CASE("ablation flags parse") {
    const auto f = parse_ablation_flags("no_dec");
    CHECK(f.no_dec);
    CHECK(!f.no_prompt);
    CHECK(!f.no_dec_loss);
    CHECK_THROWS(parse_ablation_flags("no_dec,bogus"));
}

TEST_CASE("ablate reproduces the full run and shrinks the sequence") {
    auto c = fixtures::tiny_config();
    c.epochs = 1;
    const auto ex = build_single(source("a", 300, 8, 1), c);
    const auto rows = ablate(c, ex, {});
    REQUIRE(rows.size() == 4);
    CHECK(rows[0].variant == "full");
    CHECK(rows[1].variant == "no_dec");
    CHECK(rows[2].variant == "no_prompt");
    CHECK(rows[3].variant == "no_dec_loss");
    const auto direct = train_and_evaluate(c, ex);
    CHECK(rows[0].metrics.mse == direct.test.mse);
    CHECK(rows[0].metrics.mae == direct.test.mae);
    CHECK(rows[1].sequence_length * 3 == rows[0].sequence_length);
    CHECK(rows[2].sequence_length < rows[0].sequence_length);
    CHECK(variant_config(c, "no_dec_loss").lambda_dec == 0.0);
    CHECK_THROWS(variant_config(c, "nope"));
}
