#include <doctest.h>

#include <cmath>
#include <numbers>

#include "gen.hpp"
#include "ltlab/energy.hpp"

using namespace ltlab;
using namespace ltlab::energy;
using states::cplx;
using states::GridSpec;

namespace {

const double pi = std::numbers::pi;

GridField plane_wave(const GridSpec& g, int n) {
    return GridField::sample(g, [&](const geometry::Point& x) {
        return std::exp(cplx(0.0, 2 * pi * n * x[0] / g.box_side)) / std::sqrt(g.box_side);
    });
}

DensityProfile indicator(const GridSpec& g, double a, double b) {
    std::vector<double> v(g.size());
    for (size_t j = 0; j < g.size(); ++j) {
        const double x = g.coord(static_cast<int>(j));
        v[j] = (x > a && x < b) ? 1.0 : 0.0;
    }
    return DensityProfile(g, v, "indicator");
}

}  // namespace

TEST_CASE("hardy constant closed forms") {
    CHECK(hardy_constant(3, 0.5) == doctest::Approx(2.0 / pi).epsilon(1e-12));
    CHECK(hardy_constant(3, 1.0) == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(hardy_constant(2, 1e-9) == doctest::Approx(1.0).epsilon(1e-6));
    // classical (d-2)^2/4 at s=1
    for (int d : {3, 4, 5, 7}) CHECK(hardy_constant(d, 1.0) == doctest::Approx((d - 2) * (d - 2) / 4.0).epsilon(1e-12));
    CHECK_THROWS_AS(hardy_constant(1, 0.5), DomainError);
    CHECK_THROWS_AS(hardy_constant(3, 2.0), DomainError);
}

TEST_CASE("parameter table") {
    for (int d : {1, 2, 3}) {
        auto p = param_table(d, 1.0);
        CHECK(p.t0 == 0.0);
        CHECK(p.t1 == 0.0);
        CHECK(p.eta1 == 0.0);
        CHECK(p.k1 == doctest::Approx(std::min(1.0 / 3, 2.0 / (3 * d))).epsilon(1e-15));
        if (d >= 3) {
            CHECK(p.hardy_defined);
            CHECK(p.eta2 == 1.0);
            CHECK(p.k2 == doctest::Approx(1.0 / (2 * d)).epsilon(1e-15));
        } else {
            CHECK_FALSE(p.hardy_defined);
        }
    }
    auto p = param_table(1, 1.5);
    CHECK(p.s.m == 1);
    CHECK(p.s.sigma == 0.5);
    CHECK(p.t0 == 1.375);
    CHECK(p.t1 == 1.4375);
    auto q = param_table(2, 2.0);
    CHECK(q.s.sigma == 0.0);
    CHECK(q.t0 == 1.0);
    CHECK(q.t1 == 1.0);
    CHECK(q.weight_c == 1.0);
}

TEST_CASE("kinetic energy") {
    SUBCASE("plane waves are eigenfunctions") {
        GridSpec g{1, 10.0, 128};
        for (double s : {0.25, 0.5, 1.0, 1.5})
            for (int n : {1, 3, 7}) {
                const double k = 2 * pi * n / g.box_side;
                CHECK(kinetic_energy(plane_wave(g, n), s) == doctest::Approx(std::pow(k, 2 * s)).epsilon(1e-12));
            }
    }
    SUBCASE("constant field") {
        GridSpec g{2, 6.0, 32};
        auto u = GridField::sample(g, [](const geometry::Point&) { return cplx(0.3, 0.0); });
        CHECK(std::abs(kinetic_energy(u, 0.7)) < 1e-14);
    }
    SUBCASE("gaussian") {
        for (double sigma : {0.5, 1.0}) {
            GridSpec g{1, 12.0 * sigma, 256};
            CHECK(kinetic_energy(states::gaussian(g, {0.0}, sigma), 1.0) ==
                  doctest::Approx(1.0 / (2 * sigma * sigma)).epsilon(1e-6));
        }
    }
    SUBCASE("spectral derivative of a plane wave") {
        GridSpec g{1, 10.0, 64};
        auto u = plane_wave(g, 2);
        auto du = spectral_derivative(u, {1});
        const cplx ik(0.0, 2 * pi * 2 / g.box_side);
        for (size_t j = 0; j < g.size(); ++j) CHECK(std::abs(du.values()[j] - ik * u.values()[j]) < 1e-12);
    }
    SUBCASE("property: quadratic form") {
        gen::Rng r(3);
        GridSpec g{1, 16.0, 128};
        for (int t = 0; t < 20; ++t) {
            auto u = states::gaussian(g, {r.uniform(-3, 3)}, r.uniform(0.5, 2));
            auto v = states::cos2_bump(g, {r.uniform(-3, 3)}, r.uniform(1, 4));
            const double s = r.uniform(0.1, 2.0), c = r.uniform(-3, 3);
            const double Tu = kinetic_energy(u, s), Tv = kinetic_energy(v, s);
            CHECK(kinetic_energy(u.scaled(c), s) == doctest::Approx(c * c * Tu).epsilon(1e-10));
            std::vector<cplx> p(g.size()), m(g.size());
            for (size_t j = 0; j < g.size(); ++j) {
                p[j] = u.values()[j] + v.values()[j];
                m[j] = u.values()[j] - v.values()[j];
            }
            const double lhs = kinetic_energy(GridField(g, p), s) + kinetic_energy(GridField(g, m), s);
            CHECK(lhs == doctest::Approx(2 * (Tu + Tv)).epsilon(1e-10));
            CHECK(Tu >= 0);
        }
    }
}

TEST_CASE("local seminorm") {
    CHECK(unit_cell_integral(1, 0.5) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(unit_cell_integral(1, 0.25) == doctest::Approx(2 * (1 / 1.5 - 1 / 2.5)).epsilon(1e-10));

    SUBCASE("constant field") {
        GridSpec g{1, 8.0, 64};
        auto u = GridField::sample(g, [](const geometry::Point&) { return cplx(1.0, 0.0); });
        CHECK(local_seminorm(u, Region{}, 0.5) == doctest::Approx(0.0).epsilon(1e-14));
        CHECK(local_seminorm(u, Region{{{-1.0}, {2.0}}}, 0.3) == doctest::Approx(0.0).epsilon(1e-14));
    }
    SUBCASE("whole box approaches the kinetic energy") {
        double prev = 1e9;
        for (int M : {64, 128, 256}) {
            GridSpec g{1, 16.0, M};
            auto u = states::gaussian(g, {0.0}, 1.0);
            const double gap = std::abs(local_seminorm(u, Region{}, 0.5) / kinetic_energy(u, 0.5) - 1);
            CHECK(gap < prev);
            prev = gap;
        }
        CHECK(prev < 0.02);
    }
    SUBCASE("monotone in the region") {
        GridSpec g{1, 16.0, 128};
        auto u = states::gaussian(g, {0.4}, 1.2);
        const double a = local_seminorm(u, Region{{{-1.0}, {1.0}}}, 0.5);
        const double b = local_seminorm(u, Region{{{-2.0}, {1.5}}}, 0.5);
        const double c = local_seminorm(u, Region{}, 0.5);
        CHECK(a <= b);
        CHECK(b <= c);
    }
    SUBCASE("integer order") {
        GridSpec g{1, 16.0, 256};
        auto u = states::gaussian(g, {0.0}, 1.0);
        CHECK(local_seminorm(u, Region{}, 1.0) == doctest::Approx(kinetic_energy(u, 1.0)).epsilon(1e-3));
    }
}

TEST_CASE("hardy energy") {
    const double C = hardy_constant(1, 0.25);
    SUBCASE("indicator of [1,2]") {
        GridSpec g{1, 8.0, 800};
        auto rho = indicator(g, 1.0, 2.0);
        CHECK(hardy_energy(rho, Region{}, 1, 0.25) == doctest::Approx(C * 2 * (std::sqrt(2.0) - 1)).epsilon(1e-9));
    }
    SUBCASE("symmetric density") {
        GridSpec g{1, 12.0, 240};
        auto rho = states::density_of(states::gaussian(g, {0.0}, 1.3));
        const double whole = hardy_energy(rho, Region{}, 1, 0.25);
        const double half = hardy_energy(rho, Region{{{0.0}, {6.0}}}, 1, 0.25);
        CHECK(std::abs(whole - 2 * half) <= 1e-10 * whole);
    }
    SUBCASE("support away from the origin") {
        GridSpec g{1, 12.0, 240};
        auto rho = states::density_of(states::cos2_bump(g, {3.5}, 1.0));
        CHECK(hardy_energy(rho, Region{}, 1, 0.25) <= C * std::pow(2.5, -0.5) * rho.total_mass());
    }
    SUBCASE("below the kinetic energy") {
        GridSpec g{1, 24.0, 512};
        for (double w : {0.5, 1.0, 2.0}) {
            auto u = states::gaussian(g, {0.0}, w);
            CHECK(hardy_energy(u, Region{}, 1, 0.25) <= kinetic_energy(u, 0.25));
        }
    }
    CHECK_THROWS_AS(hardy_energy(indicator(GridSpec{1, 4.0, 40}, 1, 2), Region{}, 1, 0.5), DomainError);
}
