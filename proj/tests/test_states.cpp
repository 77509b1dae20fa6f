#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <numbers>

#include "gen.hpp"
#include "ltlab/states.hpp"

using namespace ltlab;
using namespace ltlab::states;

namespace {

GridField constant(const GridSpec& g) {
    return GridField::sample(g, [](const Point&) { return cplx(1.0, 0.0); }).normalized();
}

}  // namespace

TEST_CASE("slater of two orthonormal orbitals has mass 2") {
    GridSpec g{1, 16.0, 256};
    auto fs = orthonormalize({gaussian(g, {-1.0}, 0.8), gaussian(g, {0.7}, 1.1)});
    auto rho = density_of(ManyBodyState::slater(fs));
    CHECK(rho.total_mass() == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(rho.physical_box_mass(g.domain()) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK_THROWS_AS(ManyBodyState::slater({gaussian(g, {0.0}, 1.0), gaussian(g, {0.1}, 1.0)}), InputError);
}

TEST_CASE("product of N identical orbitals has density N|u|^2") {
    GridSpec g{1, 12.0, 128};
    auto u = gaussian(g, {0.5}, 0.9);
    for (int N : {1, 2, 5}) {
        auto rho = density_of(ManyBodyState::product(std::vector<GridField>(N, u)));
        for (size_t j = 0; j < g.size(); ++j)
            CHECK(rho.values()[j] == doctest::Approx(N * std::norm(u.values()[j])).epsilon(1e-12));
    }
}

TEST_CASE("disjoint bumps: box mass over one support is 1") {
    GridSpec g{1, 16.0, 512};
    auto a = cos2_bump(g, {-4.0}, 1.5), b = cos2_bump(g, {4.0}, 1.5);
    CHECK(std::abs(inner(a, b)) < 1e-14);
    auto rho = density_of(ManyBodyState::slater({a, b}));
    CHECK(rho.physical_box_mass({{-5.5}, {-2.5}}) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(rho.physical_box_mass({{2.5}, {5.5}}) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("power integrals") {
    SUBCASE("uniform N on the unit box") {
        GridSpec g{1, 1.0, 64};
        for (int N : {1, 2, 3}) {
            auto rho = density_of(ManyBodyState::product(std::vector<GridField>(N, constant(g))));
            CHECK(density_power_integral(rho, 1.0) == doctest::Approx(std::pow(N, 3)).epsilon(1e-12));
        }
    }
    SUBCASE("gaussian closed form") {
        for (double sigma : {0.5, 1.0, 2.0}) {
            GridSpec g{1, 24.0 * sigma, 512};
            auto u = gaussian(g, {0.0}, sigma);
            for (int N : {1, 3}) {
                auto rho = density_of(ManyBodyState::product(std::vector<GridField>(N, u)));
                const double exact = std::pow(N, 3) / (std::numbers::pi * sigma * sigma) / std::sqrt(3.0);
                CHECK(density_power_integral(rho, 1.0) == doctest::Approx(exact).epsilon(1e-6));
            }
        }
    }
    SUBCASE("zero-density region") {
        GridSpec g{1, 16.0, 256};
        auto rho = density_of(cos2_bump(g, {0.0}, 1.0));
        CHECK(density_power_integral(rho, 1.0, {{{4.0}, {6.0}}}) == 0.0);
        CHECK_THROWS_AS(density_power_integral(rho, 1.0, {{{-1.0}, {0.5}}, {{0.0}, {1.0}}}), InputError);
    }
    SUBCASE("oracle without pointwise values") {
        geometry::GaussianMixture m({{{0.0}, 0.1, 1.0}});
        CHECK_THROWS_AS(density_power_integral(m, 1.0, {}), CapabilityError);
    }
    SUBCASE("root frame matches physical frame up to L^{d(p-1)}") {
        GridSpec g{1, 10.0, 200};
        auto rho = density_of(gaussian(g, {0.3}, 0.7));
        const double p = 3.0;
        CHECK(rho.box_power_integral(geometry::root_box(1), p) ==
              doctest::Approx(std::pow(10.0, p - 1) * density_power_integral(rho, 1.0)).epsilon(1e-12));
    }
}

TEST_CASE("sampling") {
    GridSpec g{1, 20.0, 400};
    SUBCASE("narrow bumps") {
        auto st = ManyBodyState::product({cos2_bump(g, {-5.0}, 0.3), cos2_bump(g, {6.0}, 0.3)});
        auto c = sample_configurations(st, 2000, 11);
        for (size_t k = 0; k < c.count; ++k) {
            CHECK(std::abs(c.point(k, 0)[0] + 5.0) <= 0.3 + g.dx());
            CHECK(std::abs(c.point(k, 1)[0] - 6.0) <= 0.3 + g.dx());
        }
    }
    SUBCASE("same seed, same output; threads do not matter") {
        gen::Rng r(3);
        auto st = gen::slater1d(r, g, 3);
        SamplingOptions one, four;
        four.threads = 4;
        auto a = sample_configurations(st, 3000, 99, one);
        auto b = sample_configurations(st, 3000, 99, four);
        CHECK(a.coords == b.coords);
        CHECK(sample_configurations(st, 3000, 100).coords != a.coords);
    }
    SUBCASE("uniform orbitals: CLT bound on the mean") {
        auto u = constant(g);
        auto st = ManyBodyState::product({u, u, u});
        const size_t count = 20000;
        auto c = sample_configurations(st, count, 5);
        for (int i = 0; i < 3; ++i) {
            double m = 0;
            for (size_t k = 0; k < count; ++k) m += c.point(k, i)[0];
            m /= count;
            CHECK(std::abs(m) <= 3.0 * g.box_side / std::sqrt(12.0 * count));
        }
    }
    SUBCASE("empirical box masses within 4 standard errors") {
        gen::Rng r(8);
        for (int t = 0; t < 5; ++t) {
            auto st = gen::slater1d(r, g, r.integer(2, 3));
            auto rho = density_of(st);
            const size_t count = 8000;
            auto c = sample_configurations(st, count, 100 + t);
            const double a = r.uniform(-6, 0), b = a + r.uniform(1, 6);
            double hits = 0;
            for (size_t k = 0; k < count; ++k)
                for (int i = 0; i < st.particles(); ++i) {
                    const double x = c.point(k, i)[0];
                    if (x >= a && x < b) hits += 1;
                }
            const double expect = rho.physical_box_mass({{a}, {b}});
            // per configuration the count lies in [0, N]; variance at most N^2/4
            const double se = st.particles() / 2.0 / std::sqrt(double(count));
            CHECK(std::abs(hits / count - expect) <= 4 * se);
        }
    }
    SUBCASE("slater cap") {
        gen::Rng r(1);
        auto st = gen::slater1d(r, g, 3);
        SamplingOptions o;
        o.slater_cap = 2;
        CHECK_THROWS_AS(sample_configurations(st, 10, 1, o), CapabilityError);
    }
}

TEST_CASE("orbital file round trip") {
    GridSpec g{2, 8.0, 32};
    auto u = GridField::sample(g, [](const Point& x) { return cplx(std::exp(-x[0] * x[0]), x[1] * 0.1); });
    const auto path = (std::filesystem::temp_directory_path() / "ltlab_orbital_test.bin").string();
    write_orbital(path, u);
    auto v = read_orbital(path);
    CHECK(v.grid() == u.grid());
    CHECK(v.values() == u.values());
    std::filesystem::remove(path);
    CHECK_THROWS_AS(read_orbital(path), InputError);
}

TEST_CASE("property: box masses are additive and bounded") {
    gen::Rng r(42);
    GridSpec g{1, 16.0, 256};
    for (int t = 0; t < 30; ++t) {
        auto rho = density_of(gen::slater1d(r, g, r.integer(1, 3)));
        const double a = r.uniform(-8, 8), b = r.uniform(-8, 8);
        const double lo = std::min(a, b), hi = std::max(a, b), mid = r.uniform(lo, hi);
        const double whole = rho.physical_box_mass({{lo}, {hi}});
        CHECK(whole >= 0);
        CHECK(whole <= rho.total_mass() * (1 + 1e-12));
        CHECK(rho.physical_box_mass({{lo}, {mid}}) + rho.physical_box_mass({{mid}, {hi}}) ==
              doctest::Approx(whole).epsilon(1e-12));
    }
}
