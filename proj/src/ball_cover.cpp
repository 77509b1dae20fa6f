#include <algorithm>
#include <cmath>
#include <functional>

#include "ltlab/geometry.hpp"

namespace ltlab::geometry {

double rn_radius(int d, double delta, Ratio eps, int n) {
    return 8.0 * std::sqrt(static_cast<double>(d)) * (1.0 / delta + 3.0) * eps.side(n);
}

namespace {

double dist2(const Point& a, const Point& b) {
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return s;
}

int count_within(const std::vector<Point>& centers, double r2, const Point& x) {
    int m = 0;
    for (auto& c : centers)
        if (dist2(c, x) <= r2) ++m;
    return m;
}

}  // namespace

std::vector<Point> greedy_separated(const std::vector<Point>& candidates, double separation) {
    const double s2 = separation * separation * (1.0 - 1e-12);
    std::vector<Point> chosen;
    for (auto& c : candidates) {
        bool far = true;
        for (auto& q : chosen)
            if (dist2(c, q) < s2) {
                far = false;
                break;
            }
        if (far) chosen.push_back(c);
    }
    return chosen;
}

int multiplicity_at(const std::vector<Point>& centers, double radius, const Point& x) {
    return count_within(centers, radius * radius, x);
}

int max_multiplicity(const std::vector<Point>& centers, double radius) {
    if (centers.empty()) return 0;
    const int d = static_cast<int>(centers[0].size());
    if (d == 1) {
        std::vector<std::pair<double, int>> ev;
        for (auto& c : centers) {
            ev.push_back({c[0] - radius, 0});  // opening sorts first at ties: balls are closed
            ev.push_back({c[0] + radius, 1});
        }
        std::sort(ev.begin(), ev.end());
        int cur = 0, best = 0;
        for (auto& e : ev) {
            cur += e.second == 0 ? 1 : -1;
            best = std::max(best, cur);
        }
        return best;
    }
    // d >= 2: the maximum over the plane is attained at a center or at a pairwise
    // boundary intersection; tolerant counting errs upward. For d > 2 the same
    // candidates are only a sample.
    const double r2 = radius * radius * (1.0 + 1e-9);
    int best = 0;
    for (auto& c : centers) best = std::max(best, count_within(centers, r2, c));
    for (size_t i = 0; i < centers.size(); ++i)
        for (size_t j = i + 1; j < centers.size(); ++j) {
            const double q = dist2(centers[i], centers[j]);
            if (q > 4.0 * radius * radius || q == 0.0) continue;
            const double dd = std::sqrt(q);
            Point mid(d);
            for (int a = 0; a < d; ++a) mid[a] = 0.5 * (centers[i][a] + centers[j][a]);
            best = std::max(best, count_within(centers, r2, mid));
            if (d == 2) {
                const double h = std::sqrt(std::max(0.0, radius * radius - q / 4.0));
                const double ux = -(centers[j][1] - centers[i][1]) / dd;
                const double uy = (centers[j][0] - centers[i][0]) / dd;
                for (double sgn : {-1.0, 1.0}) {
                    Point p{mid[0] + sgn * h * ux, mid[1] + sgn * h * uy};
                    best = std::max(best, count_within(centers, r2, p));
                }
            }
        }
    return best;
}

MassBounds ball_mass_bounds(const DensityOracle& rho, const Point& c, double r, double min_side) {
    MassBounds mb;
    const double r2 = r * r;
    const int d = rho.dim();
    std::function<void(const Box&)> visit = [&](const Box& b) {
        double near = 0.0, far = 0.0, extent = 0.0;
        for (int a = 0; a < d; ++a) {
            double lo = b.lo[a] - c[a], hi = b.hi[a] - c[a];
            double n = lo > 0 ? lo : (hi < 0 ? -hi : 0.0);
            double f = std::max(std::abs(lo), std::abs(hi));
            near += n * n;
            far += f * f;
            extent = std::max(extent, b.hi[a] - b.lo[a]);
        }
        if (near > r2) return;
        const double m = rho.box_mass(b);
        if (m == 0.0) return;
        if (far <= r2) {
            mb.lower += m;
            mb.upper += m;
            return;
        }
        if (extent <= min_side) {
            mb.upper += m;
            return;
        }
        Box child = b;
        for (int mask = 0; mask < (1 << d); ++mask) {
            for (int a = 0; a < d; ++a) {
                double mid = 0.5 * (b.lo[a] + b.hi[a]);
                if (mask & (1 << a)) {
                    child.lo[a] = mid;
                    child.hi[a] = b.hi[a];
                } else {
                    child.lo[a] = b.lo[a];
                    child.hi[a] = mid;
                }
            }
            visit(child);
        }
    };
    visit(root_box(d));
    return mb;
}

BallCover build_ball_cover(const Covering& cov, int level, double delta, const DensityOracle& rho,
                           int audit_per_axis) {
    if (delta != cov.delta) throw InputError("build_ball_cover: delta differs from the covering's delta");
    auto cubes = cov.class2_cubes(level);
    if (level < 1 || cubes.empty())
        throw EmptyCoverError("build_ball_cover: no class2 cubes at level " + std::to_string(level));
    const int d = cov.dim;
    const Ratio eps = cov.epsilon;
    const double h = eps.side(level);

    BallCover bc;
    bc.level = level;
    const double R = rn_radius(d, delta, eps, level);
    bc.radius = R / 2.0;
    std::vector<Point> candidates;
    for (auto& c : cubes) candidates.push_back(c.center(eps));
    bc.centers = greedy_separated(candidates, R / 4.0);

    for (auto& c : bc.centers) {
        MassBounds mb = ball_mass_bounds(rho, c, bc.radius, h / 8.0);
        bc.ball_mass_lower.push_back(mb.lower);
        if (mb.lower < 1.0 + delta)
            throw ConsistencyError("build_ball_cover: ball at level " + std::to_string(level) +
                                   " has certified mass " + std::to_string(mb.lower) + " < 1+delta");
    }

    // audit on E = union of the 1/2-dilated class2 cubes
    long covered = 0, total = 0;
    const int g = std::max(2, audit_per_axis);
    for (auto& c : cubes) {
        Box b = c.box(eps);
        std::vector<int> k(d, 0);
        while (true) {
            Point x(d);
            for (int a = 0; a < d; ++a) x[a] = b.lo[a] - h / 2 + 2.0 * h * k[a] / (g - 1);
            int m = multiplicity_at(bc.centers, bc.radius, x);
            ++total;
            if (m > 0) ++covered;
            bc.audited_multiplicity = std::max(bc.audited_multiplicity, m);
            int a = 0;
            while (a < d && k[a] == g - 1) k[a++] = 0;
            if (a == d) break;
            ++k[a];
        }
    }
    bc.audited_coverage = static_cast<double>(covered) / static_cast<double>(total);
    bc.overlap_bound = d <= 2 ? max_multiplicity(bc.centers, bc.radius)
                              : std::max(bc.audited_multiplicity, max_multiplicity(bc.centers, bc.radius));
    return bc;
}

}  // namespace ltlab::geometry
