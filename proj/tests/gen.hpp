#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "ltlab/geometry.hpp"
#include "ltlab/states.hpp"

// small seeded generators for the property tests
namespace gen {

struct Rng {
    std::mt19937_64 eng;
    explicit Rng(std::uint64_t seed) : eng(seed) {}
    double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(eng); }
    int integer(int a, int b) { return std::uniform_int_distribution<int>(a, b)(eng); }
    bool coin() { return integer(0, 1) == 1; }
};

inline ltlab::geometry::GaussianMixture mixture(Rng& r, int d) {
    std::vector<ltlab::geometry::GaussianMixture::Bump> bumps;
    const int k = r.integer(1, 4);
    for (int i = 0; i < k; ++i) {
        ltlab::geometry::Point c(d);
        for (auto& x : c) x = r.uniform(-0.45, 0.45);
        bumps.push_back({c, r.uniform(0.02, 0.3), r.uniform(0.2, 2.5)});
    }
    return ltlab::geometry::GaussianMixture(bumps);
}

inline std::vector<ltlab::geometry::Point> points(Rng& r, int n, int d, double half) {
    std::vector<ltlab::geometry::Point> out(n, ltlab::geometry::Point(d));
    for (auto& p : out)
        for (auto& x : p) x = r.uniform(-half, half);
    return out;
}

// random 1D Slater state: N orthonormalized gaussians
inline ltlab::states::ManyBodyState slater1d(Rng& r, const ltlab::states::GridSpec& g, int N) {
    std::vector<ltlab::states::GridField> fs;
    for (int i = 0; i < N; ++i)
        fs.push_back(ltlab::states::gaussian(g, {r.uniform(-0.25, 0.25) * g.box_side}, r.uniform(0.4, 1.2)));
    return ltlab::states::ManyBodyState::slater(ltlab::states::orthonormalize(fs));
}

}  // namespace gen
