#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "gen.hpp"
#include "ltlab/interaction.hpp"

using namespace ltlab;
using namespace ltlab::interaction;
using geometry::Point;
using states::GridSpec;
using states::ManyBodyState;

namespace {

ManyBodyState bumps(const GridSpec& g, const std::vector<double>& centers, double r) {
    std::vector<states::GridField> fs;
    for (double c : centers) fs.push_back(states::cos2_bump(g, {c}, r));
    return ManyBodyState::product(fs);
}

}  // namespace

TEST_CASE("nearest-neighbour distances") {
    auto d = nn_distances({{0.0}, {1.0}, {3.0}});
    CHECK(d == std::vector<double>{1.0, 1.0, 2.0});
    CHECK(nn_distances({{0.0, 0.0}, {3.0, 4.0}}) == std::vector<double>{5.0, 5.0});
    CHECK_THROWS_AS(nn_distances({{0.0}}), InputError);
    CHECK_THROWS_AS(nn_distances({{0.0}, {1.0}, {0.0}}), InputError);
    std::vector<Point> many(100, Point{0.0});
    for (int i = 0; i < 100; ++i) many[i][0] = i;
    many[70][0] = 3.0;
    CHECK_THROWS_AS(nn_distances_indexed(many), InputError);
}

TEST_CASE("property: indexed and brute force agree bitwise") {
    gen::Rng r(77);
    for (int t = 0; t < 60; ++t) {
        const int d = r.integer(1, 3);
        auto pts = gen::points(r, r.integer(2, 300), d, r.uniform(0.5, 50));
        CHECK(nn_distances_brute(pts) == nn_distances_indexed(pts));
    }
}

TEST_CASE("property: interaction symmetries") {
    gen::Rng r(5);
    for (int t = 0; t < 40; ++t) {
        const int d = r.integer(1, 3);
        auto pts = gen::points(r, r.integer(2, 30), d, 3.0);
        const double s = r.uniform(0.1, 1.5);
        const double e = config_interaction(pts, s);
        auto perm = pts;
        std::reverse(perm.begin(), perm.end());
        CHECK(config_interaction(perm, s) == doctest::Approx(e).epsilon(1e-13));
        auto moved = pts, wide = pts;
        const double shift = r.uniform(-5, 5), c = r.uniform(1.1, 3);
        for (auto& p : moved)
            for (auto& x : p) x += shift;
        for (auto& p : wide)
            for (auto& x : p) x *= c;
        CHECK(config_interaction(moved, s) == doctest::Approx(e).epsilon(1e-9));
        CHECK(config_interaction(wide, s) == doctest::Approx(e * std::pow(c, -2 * s)).epsilon(1e-12));
        CHECK(config_interaction(wide, s) < e);
    }
}

TEST_CASE("two point-like bumps") {
    GridSpec g{1, 16.0, 2048};
    const double ell = 5.0, rad = 0.1;
    auto st = bumps(g, {-ell / 2, ell / 2}, rad);
    auto batch = states::sample_configurations(st, 20000, 3);
    for (size_t k = 0; k < batch.count; ++k) {
        const double v = config_interaction(batch.points(k), 1.0);
        CHECK(v >= 2 * std::pow(ell + 2 * rad, -2));
        CHECK(v <= 2 * std::pow(ell - 2 * rad, -2));
    }
    auto e = batch_interaction(batch, 1.0);
    CHECK(e.mean == doctest::Approx(2 / (ell * ell)).epsilon(1e-3));
    CHECK(e.samples == 20000);
    auto again = interaction_energy(st, 1.0, 20000, 3);
    CHECK(again.mean == e.mean);
}

TEST_CASE("three evenly spaced bumps") {
    GridSpec g{1, 16.0, 2048};
    const double h = 3.0;
    auto e = interaction_energy(bumps(g, {-h, 0.0, h}, 0.05), 1.0, 10000, 9);
    CHECK(e.mean == doctest::Approx(3 / (h * h)).epsilon(1e-3));
}

TEST_CASE("dilation scaling of the estimate") {
    for (double c : {0.5, 2.0}) {
        GridSpec g{1, 12.0, 256}, gc{1, 12.0 * c, 256};
        auto a = bumps(g, {-1.0, 0.5, 2.0}, 1.2);
        auto b = bumps(gc, {-c, 0.5 * c, 2.0 * c}, 1.2 * c);
        const double s = 0.25;
        auto ea = interaction_energy(a, s, 4000, 17), eb = interaction_energy(b, s, 4000, 17);
        CHECK(eb.mean == doctest::Approx(ea.mean * std::pow(c, -2 * s)).epsilon(1e-9));
    }
}

TEST_CASE("exclusion ledger") {
    SUBCASE("no class2 level") {
        geometry::UniformDensity rho(1, 0.4);
        auto cov = geometry::build_covering(rho, 0.5, geometry::Ratio{2}, 10);
        auto l = layered_lower_bound(cov, rho, 0.5, 0.5);
        CHECK(l.per_level.empty());
        CHECK(l.total_lower_bound == 0.0);
        CHECK_THROWS_AS(layered_lower_bound(cov, rho, 0.5, 0.3), InputError);
    }
    SUBCASE("one ball of mass 1 + delta") {
        const double delta = 0.5;
        geometry::Covering cov;
        cov.dim = 1;
        cov.epsilon = geometry::Ratio{2};
        cov.delta = delta;
        cov.levels.resize(2);
        cov.levels[1].n = 1;
        geometry::Cluster k;
        k.level = 1;
        k.klass = 2;
        k.members.push_back({1, {0}, 0.5, 0.75});
        cov.levels[1].class2.push_back(k);
        geometry::UniformDensity rho(1, 1 + delta);
        for (double s : {0.25, 1.0}) {
            auto l = layered_lower_bound(cov, rho, s, delta);
            REQUIRE(l.per_level.size() == 1);
            CHECK(l.per_level[0].overlap == 1);
            CHECK(l.per_level[0].covered_mass == doctest::Approx(1 + delta).epsilon(1e-15));
            CHECK(l.total_lower_bound == doctest::Approx(0.5 * std::pow(20.0, -2 * s) * delta).epsilon(1e-14));
        }
    }
    SUBCASE("uniform mass 3: recomputation script values") {
        geometry::UniformDensity rho(1, 3.0);
        auto cov = geometry::build_covering(rho, 0.5, geometry::Ratio{2}, 20);
        // tests/oracles/uniform3_ledger.py
        struct Row {
            double s, total, simplified, term1, term2;
        };
        for (auto row : {Row{0.25, 0.31622776601683794, 0.158113883008419, 0.22360679774997896, 0.09262096826685898},
                         Row{0.5, 0.1, 0.05, 0.05, 0.05}, Row{1.0, 0.01, 0.005, 0.0025, 0.0075}}) {
            auto l = layered_lower_bound(cov, rho, row.s, 0.5);
            REQUIRE(l.per_level.size() == 2);
            CHECK(l.per_level[0].Rn == 20.0);
            CHECK(l.per_level[1].Rn == 10.0);
            CHECK(l.per_level[0].term_value == doctest::Approx(row.term1).epsilon(1e-13));
            CHECK(l.per_level[1].term_value == doctest::Approx(row.term2).epsilon(1e-13));
            CHECK(l.total_lower_bound == doctest::Approx(row.total).epsilon(1e-13));
            CHECK(l.simplified_total == doctest::Approx(row.simplified).epsilon(1e-13));
        }
    }
}

TEST_CASE("per-sample audits and verification") {
    GridSpec g{1, 8.0, 256};
    gen::Rng r(12);
    for (int t = 0; t < 6; ++t) {
        const int N = r.integer(2, 4);
        std::vector<double> cs;
        for (int i = 0; i < N; ++i) cs.push_back(r.uniform(-2.0, 2.0));
        auto st = bumps(g, cs, r.uniform(0.3, 1.2));
        auto rho = states::density_of(st);
        auto cov = geometry::build_covering(rho, 0.5, geometry::Ratio{2}, 20);
        REQUIRE(cov.terminated);
        auto rep = verify_exclusion(st, cov, 0.25, 0.5, 2000, 40 + t);
        CHECK(rep.audit.samples == 2000);
        CHECK(rep.audit.layer_violations == 0);
        CHECK(rep.audit.ball_violations == 0);
        CHECK(rep.pass);
        CHECK(rep.ratio > 0);
    }
}

TEST_CASE("class2-free state: zero bound, pass") {
    GridSpec g{1, 64.0, 1024};
    auto st = bumps(g, {-20.0, 20.0}, 1.0);
    // with eps 1/3 the middle cube separates the bumps at level 1
    auto cov = geometry::build_covering(states::density_of(st), 0.5, geometry::Ratio{3}, 20);
    CHECK(cov.levels.size() == 2);
    CHECK(cov.levels[1].class1.size() == 2);
    auto rep = verify_exclusion(st, cov, 0.25, 0.5, 1000, 1);
    CHECK(rep.ledger.per_level.empty());
    CHECK(rep.lower_bound == 0.0);
    CHECK(rep.pass);
}

TEST_CASE("exclusion ratio is dilation invariant") {
    const double s = 0.25;
    std::vector<double> ratios;
    for (double c : {1.0, 2.0}) {
        GridSpec g{1, 8.0 * c, 256};
        auto st = bumps(g, {-0.6 * c, 0.0, 0.7 * c}, 0.8 * c);
        auto cov = geometry::build_covering(states::density_of(st), 0.5, geometry::Ratio{2}, 20);
        ratios.push_back(verify_exclusion(st, cov, s, 0.5, 4000, 5).ratio);
    }
    CHECK(ratios[1] == doctest::Approx(ratios[0]).epsilon(1e-9));
}
