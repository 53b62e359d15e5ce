#include <doctest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "tempo/errors.hpp"
#include "tempo/interpret.hpp"

using namespace tempo;
using namespace tempo::interpret;

namespace {

// Brute-force Shapley over all 3! orderings.
std::array<double, 3> by_permutation(const std::array<double, 8>& v) {
    std::array<double, 3> phi{};
    int order[3] = {0, 1, 2};
    int count = 0;
    do {
        unsigned s = 0;
        for (int p : order) {
            phi[p] += v[s | (1u << p)] - v[s];
            s |= 1u << p;
        }
        ++count;
    } while (std::next_permutation(order, order + 3));
    for (double& x : phi) x /= count;
    return phi;
}

} // namespace

TEST_CASE("coalition names") {
    CHECK(coalition_name(kEmpty) == "empty");
    CHECK(coalition_name(0b001) == "T");
    CHECK(coalition_name(0b011) == "T+S");
    CHECK(coalition_name(kFull) == "T+S+R");
}

TEST_CASE("shapley matches permutation average and the axioms") {
    std::mt19937_64 rng(4);
    std::normal_distribution<double> nd;
    for (int rep = 0; rep < 200; ++rep) {
        std::array<double, 8> v{};
        for (auto& x : v) x = nd(rng);
        const auto phi = shapley_values(v);
        const auto ref = by_permutation(v);
        for (int i = 0; i < 3; ++i) CHECK(phi[i] == doctest::Approx(ref[i]).epsilon(1e-12));
        CHECK(phi[0] + phi[1] + phi[2] == doctest::Approx(v[7] - v[0]).epsilon(1e-12));
    }
    // additive game
    const double w[3] = {0.5, -2.0, 3.0};
    std::array<double, 8> add{};
    for (unsigned s = 0; s < 8; ++s)
        for (int i = 0; i < 3; ++i)
            if (s & (1u << i)) add[s] += w[i];
    const auto pa = shapley_values(add);
    for (int i = 0; i < 3; ++i) CHECK(pa[i] == doctest::Approx(w[i]));
    // R is a dummy, T and S symmetric
    std::array<double, 8> g{};
    for (unsigned s = 0; s < 8; ++s) g[s] = (s & 1) && (s & 2) ? 3.0 : 0.0;
    const auto pg = shapley_values(g);
    CHECK(pg[0] == doctest::Approx(1.5));
    CHECK(pg[1] == doctest::Approx(1.5));
    CHECK(pg[2] == doctest::Approx(0.0));
}

TEST_CASE("coalition table from a model") {
    auto c = fixtures::tiny_config();
    auto mp = model::init_model(c);
    fixtures::perturb(mp, 5, 0.05);
    const auto s = fixtures::samples(c, 4);
    const auto tables = coalition_tables(mp, s, {0, 4});
    REQUIRE(tables.size() == 2);
    CHECK(tables[0].complete());
    CHECK(tables[0].at(kFull).mse == model::evaluate(mp, s).mse);
    CHECK(std::isfinite(tables[0].at(kEmpty).mse));
    CHECK(tables[1].at(kFull).points == 4 * s.size());
    const auto rep = shapley(tables[0], "mse");
    CHECK(rep.phi[0] + rep.phi[1] + rep.phi[2] ==
          doctest::Approx(rep.value_full - rep.value_empty).epsilon(1e-12));
    CHECK_THROWS(shapley(tables[0], "r2"));
    CoalitionTable partial;
    partial.entries[kFull] = tables[0].at(kFull);
    CHECK(!partial.complete());
    CHECK_THROWS_AS(shapley(partial), ValidationError);

    auto flat = c;
    flat.decompose = false;
    auto fp = model::init_model(flat);
    CHECK_THROWS(coalition_tables(fp, s, {0}));
}

TEST_CASE("sobol first order") {
    using Win = std::array<std::vector<double>, 3>;
    const std::vector<double> z(2, 0.0);
    const std::vector<Win> only_t{Win{std::vector<double>{1, 2}, z, z}, Win{std::vector<double>{3, 4}, z, z}};
    const auto a = sobol_first_order(only_t);
    CHECK(a.first_order[0] == doctest::Approx(1.0));
    CHECK(a.first_order[1] == 0.0);
    const std::vector<double> u{1, -1}, w{2, 0};
    const std::vector<Win> twin{Win{u, u, z}, Win{w, w, z}};
    const auto b = sobol_first_order(twin);
    CHECK(b.first_order[0] == doctest::Approx(0.25));
    CHECK(b.first_order[1] == doctest::Approx(0.25));
    const std::vector<double> one(2, 1.0), two(2, 2.0);
    const std::vector<Win> flat{Win{one, two, z}, Win{one, two, z}};
    CHECK_THROWS_AS(sobol_first_order(flat), ValidationError);
    CHECK_THROWS_AS(sobol_first_order(std::vector<Win>{Win{u, u, z}}), ValidationError);
}

TEST_CASE("gam surrogate") {
    std::mt19937_64 rng(8);
    std::normal_distribution<double> nd;
    const std::size_t n = 200;
    std::vector<double> t(n), s(n), r(n), y(n), prod(n), k(n, 2.5);
    for (std::size_t i = 0; i < n; ++i) {
        t[i] = nd(rng);
        s[i] = nd(rng);
        r[i] = nd(rng);
        y[i] = t[i] + s[i] + r[i];
        prod[i] = t[i] * s[i];
    }
    const auto fit = gam_fit(t, s, r, y, false);
    REQUIRE(fit.coef.size() == 4);
    CHECK(fit.coef[0] == doctest::Approx(0.0).epsilon(1e-10));
    for (int i = 1; i < 4; ++i) CHECK(fit.coef[i] == doctest::Approx(1.0));
    CHECK(fit.r2 == doctest::Approx(1.0));
    CHECK(!fit.ridge);

    const auto pf = gam_fit(t, s, r, prod, true);
    CHECK(pf.r2 >= 0.99);
    CHECK(pf.names.size() == 7);

    const auto cf = gam_fit(t, s, r, k, false);
    CHECK(cf.coef[0] == doctest::Approx(2.5));

    const auto dup = gam_fit(t, t, r, y, false);
    CHECK(dup.ridge);
    for (double v : dup.coef) CHECK(std::isfinite(v));

    const std::vector<double> few(5, 1.0);
    CHECK_THROWS(gam_fit(few, few, few, few));

    const auto only_t = gam_predict(fit, t, s, r, 0b001);
    CHECK(only_t[3] == doctest::Approx(fit.coef[0] + fit.coef[1] * t[3]));
    const auto rep = shapley_via_gam(fit, t, s, r, y);
    CHECK(rep.phi[0] + rep.phi[1] + rep.phi[2] == doctest::Approx(rep.value_full - rep.value_empty));
    CHECK(rep.phi[0] == doctest::Approx(rep.phi[1]).epsilon(0.3));
}
