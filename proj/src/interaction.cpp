#include "ltlab/interaction.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <ostream>

namespace ltlab::interaction {

namespace {

double dist2(const Point& a, const Point& b) {
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return s;
}

void validate(const std::vector<Point>& pts) {
    if (pts.size() < 2) throw InputError("nn_distances: need at least two points");
    const size_t d = pts[0].size();
    for (auto& p : pts)
        if (p.size() != d) throw InputError("nn_distances: mixed dimensions");
}

}  // namespace

std::vector<double> nn_distances_brute(const std::vector<Point>& pts) {
    validate(pts);
    const size_t N = pts.size();
    std::vector<double> best(N, std::numeric_limits<double>::infinity());
    for (size_t i = 0; i < N; ++i)
        for (size_t j = 0; j < N; ++j) {
            if (i == j) continue;
            double q = dist2(pts[i], pts[j]);
            if (q == 0.0) throw InputError("nn_distances: duplicate points");
            best[i] = std::min(best[i], q);
        }
    for (auto& b : best) b = std::sqrt(b);
    return best;
}

std::vector<double> nn_distances_indexed(const std::vector<Point>& pts) {
    validate(pts);
    const size_t N = pts.size();
    const int d = static_cast<int>(pts[0].size());
    Point lo = pts[0], hi = pts[0];
    for (auto& p : pts)
        for (int a = 0; a < d; ++a) {
            lo[a] = std::min(lo[a], p[a]);
            hi[a] = std::max(hi[a], p[a]);
        }
    double extent = 0.0;
    for (int a = 0; a < d; ++a) extent = std::max(extent, hi[a] - lo[a]);
    const double per_axis = std::max(1.0, std::floor(std::pow(static_cast<double>(N), 1.0 / d)));
    const double cell = extent > 0 ? extent / per_axis : 1.0;

    using Key = std::vector<long>;
    std::map<Key, std::vector<size_t>> grid;
    std::vector<Key> key(N, Key(d));
    for (size_t i = 0; i < N; ++i) {
        for (int a = 0; a < d; ++a) key[i][a] = static_cast<long>(std::floor((pts[i][a] - lo[a]) / cell));
        grid[key[i]].push_back(i);
    }
    const long reach = static_cast<long>(per_axis) + 2;

    std::vector<double> best(N, std::numeric_limits<double>::infinity());
    for (size_t i = 0; i < N; ++i) {
        for (long r = 0; r <= reach; ++r) {
            // cells on the Chebyshev shell of radius r
            Key off(d, -r);
            while (true) {
                long cheb = 0;
                for (long o : off) cheb = std::max(cheb, std::abs(o));
                if (cheb == r) {
                    Key k = key[i];
                    for (int a = 0; a < d; ++a) k[a] += off[a];
                    auto it = grid.find(k);
                    if (it != grid.end())
                        for (size_t j : it->second) {
                            if (j == i) continue;
                            double q = dist2(pts[i], pts[j]);
                            if (q == 0.0) throw InputError("nn_distances: duplicate points");
                            best[i] = std::min(best[i], q);
                        }
                }
                int a = 0;
                while (a < d && off[a] == r) off[a++] = -r;
                if (a == d) break;
                ++off[a];
            }
            // anything beyond shell r is at least r*cell away
            const double bound = r * cell;
            if (best[i] <= bound * bound) break;
        }
        best[i] = std::sqrt(best[i]);
    }
    return best;
}

std::vector<double> nn_distances(const std::vector<Point>& pts) {
    return pts.size() <= static_cast<size_t>(kBruteForceLimit) ? nn_distances_brute(pts) : nn_distances_indexed(pts);
}

double pairwise_sum(const std::vector<double>& v) {
    std::vector<double> cur(v);
    while (cur.size() > 1) {
        std::vector<double> next((cur.size() + 1) / 2);
        for (size_t i = 0; i + 1 < cur.size(); i += 2) next[i / 2] = cur[i] + cur[i + 1];
        if (cur.size() % 2) next.back() = cur.back();
        cur.swap(next);
    }
    return cur.empty() ? 0.0 : cur[0];
}

double config_interaction(const std::vector<Point>& pts, double s) {
    if (pts.size() < 2) return 0.0;
    double total = 0.0;
    for (double dlt : nn_distances(pts)) total += std::pow(dlt, -2.0 * s);
    return total;
}

Estimate batch_interaction(const Configurations& batch, double s) {
    if (!(s > 0)) throw DomainError("interaction: s must be positive");
    Estimate e;
    e.samples = batch.count;
    e.rejected = batch.rejected;
    if (batch.count == 0 || batch.particles < 2) return e;
    std::vector<double> vals(batch.count);
    for (size_t k = 0; k < batch.count; ++k) vals[k] = config_interaction(batch.points(k), s);
    e.mean = pairwise_sum(vals) / static_cast<double>(batch.count);
    std::vector<double> dev(batch.count);
    for (size_t k = 0; k < batch.count; ++k) dev[k] = (vals[k] - e.mean) * (vals[k] - e.mean);
    if (batch.count > 1)
        e.std_error = std::sqrt(pairwise_sum(dev) / static_cast<double>(batch.count - 1) /
                                static_cast<double>(batch.count));
    return e;
}

Estimate interaction_energy(const ManyBodyState& state, double s, size_t samples, std::uint64_t seed,
                            const states::SamplingOptions& opt) {
    if (!(s > 0)) throw DomainError("interaction: s must be positive");
    if (state.particles() < 2) return Estimate{0.0, 0.0, samples, 0};
    return batch_interaction(states::sample_configurations(state, samples, seed, opt), s);
}

ExclusionLedger layered_lower_bound(const geometry::Covering& cov, const geometry::DensityOracle& rho, double s,
                                    double delta, double length_scale) {
    if (delta != cov.delta) throw InputError("layered_lower_bound: delta differs from the covering's delta");
    if (!(s > 0)) throw DomainError("layered_lower_bound: s must be positive");
    ExclusionLedger led;
    led.s = s;
    led.delta = delta;
    led.length_scale = length_scale;
    double prev_power = 0.0;  // R_0 = +inf
    std::vector<double> terms, simple;
    for (size_t n = 1; n < cov.levels.size(); ++n) {
        if (cov.levels[n].class2.empty()) continue;
        auto bc = geometry::build_ball_cover(cov, static_cast<int>(n), delta, rho);
        LevelTerm t;
        t.n = static_cast<int>(n);
        t.Rn = length_scale * geometry::rn_radius(cov.dim, delta, cov.epsilon, t.n);
        t.radius = 0.5 * t.Rn;
        t.ball_count = static_cast<int>(bc.centers.size());
        t.overlap = bc.overlap_bound;
        for (auto c : bc.centers) {
            for (auto& x : c) x *= length_scale;
            t.centers.push_back(std::move(c));
        }
        const double power = std::pow(t.Rn, -2.0 * s);
        t.layer_coefficient = (power - prev_power) / (2.0 * t.overlap);
        prev_power = power;
        double excess = 0.0;
        for (double m : bc.ball_mass_lower) {
            t.covered_mass += m;
            excess += m - 1.0;
        }
        t.term_value = t.layer_coefficient * excess;
        t.simplified_value = t.layer_coefficient * delta / (1.0 + delta) * t.covered_mass;
        terms.push_back(t.term_value);
        simple.push_back(t.simplified_value);
        led.per_level.push_back(std::move(t));
    }
    led.total_lower_bound = pairwise_sum(terms);
    led.simplified_total = pairwise_sum(simple);
    return led;
}

ExclusionLedger layered_lower_bound(const geometry::Covering& cov, const states::DensityProfile& rho, double s,
                                    double delta) {
    return layered_lower_bound(cov, static_cast<const geometry::DensityOracle&>(rho), s, delta,
                               rho.grid().box_side);
}

nlohmann::ordered_json ledger_to_json(const ExclusionLedger& l) {
    nlohmann::ordered_json j;
    j["schema"] = "ltlab.exclusion-ledger/1";
    j["s"] = l.s;
    j["delta"] = l.delta;
    j["length_scale"] = l.length_scale;
    j["per_level"] = nlohmann::ordered_json::array();
    for (auto& t : l.per_level)
        j["per_level"].push_back({{"n", t.n},
                                  {"Rn", t.Rn},
                                  {"ball_count", t.ball_count},
                                  {"measured_overlap_Cn", t.overlap},
                                  {"layer_coefficient", t.layer_coefficient},
                                  {"covered_mass", t.covered_mass},
                                  {"term_value", t.term_value},
                                  {"simplified_value", t.simplified_value}});
    j["total_lower_bound"] = l.total_lower_bound;
    j["simplified_total"] = l.simplified_total;
    return j;
}

void ledger_to_csv(std::ostream& os, const ExclusionLedger& l) {
    os.precision(17);
    os << "n,Rn,ball_count,measured_overlap_Cn,layer_coefficient,covered_mass,term_value,simplified_value\n";
    for (auto& t : l.per_level)
        os << t.n << ',' << t.Rn << ',' << t.ball_count << ',' << t.overlap << ',' << t.layer_coefficient << ','
           << t.covered_mass << ',' << t.term_value << ',' << t.simplified_value << '\n';
}

SampleAudit audit_samples(const Configurations& batch, const ExclusionLedger& l) {
    SampleAudit a;
    a.samples = batch.count;
    a.worst_layer_slack = std::numeric_limits<double>::infinity();
    if (batch.particles < 2) return a;
    const double s = l.s;
    for (size_t k = 0; k < batch.count; ++k) {
        auto pts = batch.points(k);
        auto dl = nn_distances(pts);
        double lhs = 0.0;
        for (double x : dl) lhs += std::pow(x, -2.0 * s);
        double rhs = 0.0, prev = 0.0;
        bool ball_ok = true;
        for (auto& t : l.per_level) {
            long close = 0;
            for (double x : dl)
                if (x <= t.Rn) ++close;
            const double power = std::pow(t.Rn, -2.0 * s);
            rhs += (power - prev) * static_cast<double>(close);
            prev = power;
            long excess = 0;
            const double r2 = t.radius * t.radius;
            for (auto& c : t.centers) {
                long inside = 0;
                for (auto& p : pts)
                    if (dist2(p, c) <= r2) ++inside;
                excess += inside - 1;
            }
            if (static_cast<long>(t.overlap) * close < excess) ball_ok = false;
        }
        const double slack = rhs > 0 ? (lhs - rhs) / rhs : 0.0;
        a.worst_layer_slack = std::min(a.worst_layer_slack, slack);
        if (lhs < rhs * (1.0 - 1e-12)) ++a.layer_violations;
        if (!ball_ok) ++a.ball_violations;
    }
    return a;
}

ExclusionReport verify_exclusion(const ManyBodyState& state, const geometry::Covering& cov, double s, double delta,
                                 size_t samples, std::uint64_t seed, const states::SamplingOptions& opt) {
    ExclusionReport r;
    auto rho = states::density_of(state);
    r.ledger = layered_lower_bound(cov, rho, s, delta);
    r.lower_bound = r.ledger.total_lower_bound;
    r.simplified_lower_bound = r.ledger.simplified_total;
    if (state.particles() >= 2) {
        auto batch = states::sample_configurations(state, samples, seed, opt);
        r.interaction = batch_interaction(batch, s);
        r.audit = audit_samples(batch, r.ledger);
    }
    r.ratio = r.lower_bound > 0 ? r.interaction.mean / r.lower_bound : std::numeric_limits<double>::infinity();
    r.pass = r.interaction.mean + 4.0 * r.interaction.std_error >= r.lower_bound && r.audit.layer_violations == 0 &&
             r.audit.ball_violations == 0;
    return r;
}

}  // namespace ltlab::interaction
