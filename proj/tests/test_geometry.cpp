#include <doctest.h>

#include <cmath>

#include "gen.hpp"
#include "ltlab/geometry.hpp"

using namespace ltlab;
using namespace ltlab::geometry;

namespace {

Cluster line_cluster(int level, std::vector<std::int64_t> idx, Ratio eps) {
    Cluster k;
    k.level = level;
    for (auto i : idx) k.members.push_back(Cube{level, {i}, eps.side(level), 0.0});
    return k;
}

}  // namespace

TEST_CASE("uniform mass 3, eps 1/2, delta 1/2") {
    UniformDensity rho(1, 3.0);
    auto cov = build_covering(rho, 0.5, Ratio{2}, 20);
    REQUIRE(cov.terminated);
    REQUIRE(cov.levels.size() == 4);
    for (int n : {1, 2}) {
        CHECK(cov.levels[n].class0.empty());
        CHECK(cov.levels[n].class1.empty());
        CHECK(cov.class2_cubes(n).size() == size_t(1) << n);
    }
    CHECK(cov.levels[3].class0.size() == 8);
    for (auto& c : cov.levels[3].class0) CHECK(c.mass == doctest::Approx(0.375).epsilon(1e-14));
    CHECK(cov.levels[3].class2.empty());
    CHECK(check_covering(cov, rho).empty());
}

TEST_CASE("total mass at most delta: one level of class0") {
    for (int den : {2, 3})
        for (int d : {1, 2}) {
            UniformDensity rho(d, 0.4);
            auto cov = build_covering(rho, 0.45, Ratio{den}, 10);
            CHECK(cov.terminated);
            REQUIRE(cov.levels.size() == 2);
            CHECK(cov.levels[1].class0.size() == static_cast<size_t>(std::pow(den, d)));
            CHECK(cov.levels[1].class1.empty());
            CHECK(cov.levels[1].class2.empty());
        }
}

TEST_CASE("two corner bumps in 2D, eps 1/3, delta 0.3") {
    GaussianMixture rho({{{-0.3, -0.3}, 0.05, 1.0}, {{0.3, 0.3}, 0.05, 1.0}});
    auto cov = build_covering(rho, 0.3, Ratio{3}, 12);
    // values from tests/oracles/two_gaussians_covering.py
    REQUIRE(cov.terminated);
    REQUIRE(cov.levels.size() == 2);
    auto& k1 = cov.levels[1].class1;
    REQUIRE(k1.size() == 2);
    CHECK(k1[0].members.size() == 1);
    CHECK(k1[1].members.size() == 1);
    CHECK(k1[0].members[0].index == Index{0, 0});
    CHECK(k1[1].members[0].index == Index{2, 2});
    CHECK(k1[0].enlarged_mass == doctest::Approx(0.999999761686760).epsilon(1e-9));
    CHECK(k1[1].enlarged_mass == doctest::Approx(0.999999761686760).epsilon(1e-9));
    CHECK(cov.levels[1].class2.empty());
    CHECK(enlarged_regions_disjoint(k1, cov.tau, cov.epsilon));
    CHECK(check_covering(cov, rho).empty());
}

TEST_CASE("detect_clusters") {
    Ratio e{2};
    SUBCASE("1D indices 0 1 3") {
        auto ks = detect_clusters(line_cluster(3, {0, 1, 3}, e).members);
        REQUIRE(ks.size() == 2);
        CHECK(ks[0].members.size() == 2);
        CHECK(ks[1].members.size() == 1);
        CHECK(ks[1].members[0].index == Index{3});
    }
    SUBCASE("corner contact") {
        std::vector<Cube> cs{{2, {0, 0}, 0.25, 0}, {2, {1, 1}, 0.25, 0}};
        CHECK(detect_clusters(cs).size() == 1);
    }
    SUBCASE("empty") { CHECK(detect_clusters({}).empty()); }
    SUBCASE("mixed levels") {
        std::vector<Cube> cs{{2, {0}, 0.25, 0}, {3, {5}, 0.125, 0}};
        CHECK_THROWS_AS(detect_clusters(cs), InputError);
    }
}

TEST_CASE("enlarge") {
    Ratio e{2};
    SUBCASE("single cube") {
        auto r = enlarge(line_cluster(1, {1}, e), 0.375, e);
        REQUIRE(r.boxes().size() == 1);
        CHECK(r.boxes()[0].lo[0] == -3.0 / 16);
        CHECK(r.boxes()[0].hi[0] == 11.0 / 16);
    }
    SUBCASE("adjacent cubes give one interval") {
        // index 2 lies past the root box; enlarge does not clip
        Cluster k = line_cluster(1, {1, 2}, e);
        auto r = enlarge(k, 0.375, e);
        double lo = 1e9, hi = -1e9, len = 0;
        for (auto& b : r.disjoint_pieces()) {
            lo = std::min(lo, b.lo[0]);
            hi = std::max(hi, b.hi[0]);
            len += b.volume();
        }
        CHECK(lo == -3.0 / 16);
        CHECK(hi == 19.0 / 16);
        CHECK(len == doctest::Approx(hi - lo).epsilon(1e-15));
    }
    SUBCASE("boundary is excluded") {
        auto r = enlarge(line_cluster(1, {1}, e), 0.375, e);
        CHECK_FALSE(r.contains({-3.0 / 16}));
        CHECK_FALSE(r.contains({11.0 / 16}));
        CHECK(r.contains({-3.0 / 16 + 1e-12}));
    }
    SUBCASE("tau range") { CHECK_THROWS_AS(enlarge(line_cluster(1, {1}, e), 0.6, e), InputError); }
}

TEST_CASE("ball cover radius and single ball") {
    CHECK(rn_radius(1, 0.5, Ratio{2}, 1) == doctest::Approx(20.0));
    UniformDensity rho(1, 3.0);
    auto cov = build_covering(rho, 0.5, Ratio{2}, 20);
    auto bc = build_ball_cover(cov, 1, 0.5, rho);
    CHECK(bc.radius == doctest::Approx(10.0));
    CHECK(bc.centers.size() == 1);
    CHECK(bc.audited_coverage == 1.0);
    CHECK_THROWS_AS(build_ball_cover(cov, 3, 0.5, rho), EmptyCoverError);
    CHECK_THROWS_AS(build_ball_cover(cov, 1, 0.4, rho), InputError);

    Covering one;
    one.dim = 1;
    one.epsilon = Ratio{2};
    one.delta = 0.5;
    one.levels.resize(3);
    one.levels[2].n = 2;
    one.levels[2].class2.push_back(line_cluster(2, {1}, one.epsilon));
    auto b1 = build_ball_cover(one, 2, 0.5, rho);
    REQUIRE(b1.centers.size() == 1);
    CHECK(b1.centers[0][0] == doctest::Approx(-0.125));
}

TEST_CASE("forty consecutive class2 cubes") {
    Covering cov;
    cov.dim = 1;
    cov.epsilon = Ratio{2};
    cov.delta = 0.5;
    cov.levels.resize(8);
    std::vector<std::int64_t> idx;
    for (int i = 0; i < 40; ++i) idx.push_back(i);
    cov.levels[7].n = 7;
    cov.levels[7].class2.push_back(line_cluster(7, idx, cov.epsilon));
    UniformDensity rho(1, 100.0);
    auto bc = build_ball_cover(cov, 7, 0.5, rho, 9);
    const double R = rn_radius(1, 0.5, cov.epsilon, 7);
    const double extent = 40.0 / 128;
    CHECK(bc.centers.size() == static_cast<size_t>(std::ceil(extent / (R / 4))));
    CHECK(bc.audited_coverage == 1.0);
    // measured 4; closed balls give at most 5 in 1D
    CHECK(bc.overlap_bound == 4);
    CHECK(bc.audited_multiplicity <= bc.overlap_bound);
    CHECK(bc.overlap_bound <= 5);
}

TEST_CASE("multiplicity brute force agreement") {
    gen::Rng r(7);
    for (int t = 0; t < 40; ++t) {
        const int d = r.integer(1, 2);
        auto cs = gen::points(r, r.integer(1, 12), d, 1.0);
        const double rad = r.uniform(0.1, 0.8);
        int brute = 0;
        for (auto& x : gen::points(r, 4000, d, 1.8)) brute = std::max(brute, multiplicity_at(cs, rad, x));
        for (auto& c : cs) brute = std::max(brute, multiplicity_at(cs, rad, c));
        CHECK(max_multiplicity(cs, rad) >= brute);
    }
}

TEST_CASE("json round trip and determinism") {
    GaussianMixture rho({{{-0.2}, 0.03, 2.0}, {{0.25}, 0.1, 1.0}});
    auto a = build_covering(rho, 0.3, Ratio{3}, 12);
    auto b = build_covering(rho, 0.3, Ratio{3}, 12);
    CHECK(a == b);
    CHECK(covering_from_json(covering_to_json(a)) == a);
    CHECK(covering_to_json(a).dump() == covering_to_json(b).dump());
    CHECK_THROWS_AS(covering_from_json(nlohmann::ordered_json::parse("{\"dim\": 1}")), InputError);
}

TEST_CASE("input errors") {
    UniformDensity rho(1, 1.0);
    CHECK_THROWS_AS(build_covering(rho, 1.2, Ratio{2}, 5), InputError);
    CHECK_THROWS_AS(build_covering(rho, 0.5, Ratio{4}, 5), InputError);
    CHECK_THROWS_AS(Ratio::parse("1/5"), InputError);
    CHECK(Ratio::parse("1/3") == Ratio{3});
}

TEST_CASE("depth cap leaves the covering unterminated") {
    GaussianMixture rho({{{0.0}, 1e-4, 3.0}});
    auto cov = build_covering(rho, 0.5, Ratio{2}, 3);
    CHECK_FALSE(cov.terminated);
    CHECK(cov.levels.size() == 4);
}

TEST_CASE("property: covering invariants on random mixtures") {
    gen::Rng r(20240601);
    for (int t = 0; t < 60; ++t) {
        const int d = r.integer(1, 2);
        auto rho = gen::mixture(r, d);
        const double delta = r.uniform(0.15, 0.9);
        const Ratio eps{r.coin() ? 2 : 3};
        auto cov = build_covering(rho, delta, eps, 14);
        INFO("trial " << t << " d=" << d << " delta=" << delta << " eps=" << eps.str());
        CHECK(check_covering(cov, rho).empty());
        CHECK(build_covering(rho, delta, eps, 14) == cov);
        const size_t cap = static_cast<size_t>(std::floor(1.0 / delta)) + 2;
        for (size_t n = 1; n < cov.levels.size(); ++n) {
            auto& lev = cov.levels[n];
            for (auto& c : lev.class0) CHECK(c.mass <= delta);
            std::vector<Cluster> all;
            for (auto& k : lev.class1) {
                CHECK(k.enlarged_mass < 1 + delta);
                CHECK(k.members.size() <= cap);
                all.push_back(k);
            }
            for (auto& k : lev.class2) {
                CHECK(k.enlarged_mass >= 1 + delta);
                all.push_back(k);
            }
            for (auto& k : all) {
                for (auto& c : k.members) CHECK(c.mass > delta);
            }
            CHECK(enlarged_regions_disjoint(all, cov.tau, eps));
            // sandwich between the 1/4 and 1/2 dilations
            for (auto& k : all) {
                auto lo = enlarge(k, 0.25, eps), mid = enlarge(k, cov.tau, eps), hi = enlarge(k, 0.5, eps);
                for (auto& x : gen::points(r, 50, d, 0.6)) {
                    if (lo.contains(x)) CHECK(mid.contains(x));
                    if (mid.contains(x)) CHECK(hi.contains(x));
                }
            }
        }
    }
}
