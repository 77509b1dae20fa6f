#include "ltlab/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <ostream>

namespace ltlab::pipeline {

nlohmann::ordered_json Constants::to_json() const {
    return {{"C_unc", C_unc},   {"C_err", C_err},   {"C_int", C_int},
            {"C_delta", C_delta}, {"C_pred", C_pred}, {"gn_reference", gn_reference}};
}

DeltaChoice delta_choice(int d, double s, double lambda, double C, double eta) {
    if (!(C > 0)) throw InputError("delta choice: C must be positive");
    if (!(lambda > 0)) throw DomainError("delta choice: lambda must be positive");
    DeltaChoice r{0.5, "half"};
    const double a = std::pow(1.0 / C, d / (2.0 * s));
    const double b = std::pow(C / lambda, 1.0 / (1.0 + 2.0 * s + eta));
    if (a < r.delta) r = {a, "C"};
    if (b < r.delta) r = {b, "lambda"};
    return r;
}

namespace {

struct ChainParams {
    double eta = 0.0, k = 0.0;
};

ChainParams chain_params(int d, double s, bool hardy) {
    auto pt = energy::param_table(d, s);
    if (hardy) {
        if (!pt.hardy_defined) throw DomainError("hardy pipeline needs 0 < s < d/2");
        return {pt.eta2, pt.k2};
    }
    return {pt.eta1, pt.k1};
}

// every cube either centered at the origin or at distance >= side/2 from it
void check_proper(const geometry::Cube& q, geometry::Ratio eps) {
    const Box b = q.box(eps);
    const auto c = q.center(eps);
    bool centered = true;
    double d2 = 0.0;
    for (int a = 0; a < b.dim(); ++a) {
        if (std::abs(c[a]) > 1e-14) centered = false;
        const double g = std::max({0.0, b.lo[a], -b.hi[a]});
        d2 += g * g;
    }
    if (centered) return;
    if (std::sqrt(d2) < 0.5 * q.side * (1.0 - 1e-12))
        throw ConsistencyError("hardy pipeline: cube at level " + std::to_string(q.level) +
                               " is neither centered at the origin nor half a side away");
}

}  // namespace

Covering chain_covering(const DensityOracle& rho, double lambda, double s, const Constants& c, geometry::Ratio eps,
                        int max_depth, bool hardy) {
    if (hardy && eps.den != 3) throw InputError("hardy pipeline requires eps = 1/3");
    auto cp = chain_params(rho.dim(), s, hardy);
    auto dc = delta_choice(rho.dim(), s, lambda, c.C_delta, cp.eta);
    return geometry::build_covering(rho, dc.delta, eps, max_depth);
}

BoundLedger assemble_lower_bound(const DensityOracle& rho, const Covering& cov, double lambda, double s,
                                 const Constants& c, const AssembleOptions& opt) {
    if (!cov.terminated) throw InputError("assemble: covering did not terminate");
    if (cov.dim != rho.dim()) throw InputError("assemble: covering and density dimensions differ");
    if (opt.hardy && cov.epsilon.den != 3) throw InputError("hardy pipeline requires eps = 1/3");
    if (!(c.gn_reference > 0)) throw InputError("assemble: gn_reference must be set");
    if (!rho.pointwise()) throw CapabilityError("assemble: density lacks pointwise evaluation");
    const int d = cov.dim;
    const auto cp = chain_params(d, s, opt.hardy);
    const auto dc = delta_choice(d, s, lambda, c.C_delta, cp.eta);
    if (cov.delta != dc.delta)
        throw InputError("assemble: covering built with delta " + std::to_string(cov.delta) +
                         ", the chain needs " + std::to_string(dc.delta));

    BoundLedger L;
    L.d = d;
    L.s = s;
    L.lambda = lambda;
    L.hardy = opt.hardy;
    L.constants = c;
    L.delta_used = dc.delta;
    L.delta_branch = dc.branch;
    L.eta = cp.eta;
    L.k = cp.k;
    L.gn_reference = c.gn_reference;

    const double p = 1.0 + 2.0 * s / d;
    const double delta = dc.delta;
    const double q = 2.0 * s / d;
    const double a = c.C_unc * std::pow(delta, q);
    const double cluster_factor = (1.0 - a) * (1.0 - delta) * std::pow(1.0 + delta, -q);
    const double credit_factor = lambda * std::pow(delta, 1.0 + 2.0 * s) / c.C_int;
    const auto eps = cov.epsilon;

    for (size_t n = 1; n < cov.levels.size(); ++n) {
        const auto& lev = cov.levels[n];
        LevelLedger t;
        t.n = static_cast<int>(n);
        t.class0_count = static_cast<int>(lev.class0.size());
        t.class1_count = static_cast<int>(lev.class1.size());
        const double w = std::pow(static_cast<double>(eps.den), 2.0 * s * static_cast<double>(n));
        double m0 = 0.0, P0 = 0.0, P1 = 0.0, enl = 0.0, m1 = 0.0;
        for (auto& cube : lev.class0) {
            if (opt.hardy) check_proper(cube, eps);
            m0 += cube.mass;
            P0 += rho.box_power_integral(cube.box(eps), p);
        }
        for (auto& K : lev.class1) {
            for (auto& cube : K.members) {
                if (opt.hardy) check_proper(cube, eps);
                P1 += rho.box_power_integral(cube.box(eps), p);
                m1 += cube.mass;
            }
            enl += K.enlarged_mass;
        }
        t.class0_uncertainty_gain = c.gn_reference * P0;
        t.class1_uncertainty_gain = c.gn_reference * cluster_factor * P1;
        t.class0_error = a * w * (opt.hardy ? m0 + m1 : m0);
        t.class1_error = (1.0 - a) * c.C_err * w * std::pow(delta, -cp.eta) * enl;
        // credits come from the class2 layer one level up; the root carries none
        t.interaction_credit = n >= 2 ? credit_factor * w * (m0 + enl) : 0.0;
        L.gains += t.class0_uncertainty_gain + t.class1_uncertainty_gain;
        L.errors += t.class0_error + t.class1_error;
        L.credits += t.interaction_credit;
        L.per_level.push_back(t);
    }
    L.power_integral = rho.box_power_integral(geometry::root_box(d), p);
    if (!(L.power_integral > 0)) throw InputError("assemble: density has zero power integral");
    L.credits_cover_errors = L.credits >= L.errors;
    L.assembled_lower = (L.gains - std::max(0.0, L.errors - L.credits)) / L.power_integral;
    L.predicted = c.gn_reference - c.C_pred * std::pow(lambda, -L.k);
    L.below_reference = L.assembled_lower <= c.gn_reference * (1.0 + 1e-12);
    return L;
}

BoundLedger assemble_lower_bound(const states::ManyBodyState& state, const Covering& cov, double lambda, double s,
                                 const Constants& c, const AssembleOptions& opt) {
    return assemble_lower_bound(states::density_of(state), cov, lambda, s, c, opt);
}

nlohmann::ordered_json bound_ledger_to_json(const BoundLedger& l) {
    nlohmann::ordered_json j;
    j["schema"] = "ltlab.bound-ledger/1";
    j["d"] = l.d;
    j["s"] = l.s;
    j["lambda"] = l.lambda;
    j["hardy"] = l.hardy;
    j["constants"] = l.constants.to_json();
    j["delta_used"] = l.delta_used;
    j["delta_branch"] = l.delta_branch;
    j["eta"] = l.eta;
    j["k"] = l.k;
    j["per_level"] = nlohmann::ordered_json::array();
    for (auto& t : l.per_level)
        j["per_level"].push_back({{"n", t.n},
                                  {"class0_count", t.class0_count},
                                  {"class1_count", t.class1_count},
                                  {"class0_uncertainty_gain", t.class0_uncertainty_gain},
                                  {"class1_uncertainty_gain", t.class1_uncertainty_gain},
                                  {"class0_error", t.class0_error},
                                  {"class1_error", t.class1_error},
                                  {"interaction_credit", t.interaction_credit}});
    j["power_integral"] = l.power_integral;
    j["gains"] = l.gains;
    j["errors"] = l.errors;
    j["credits"] = l.credits;
    j["assembled_lower"] = l.assembled_lower;
    j["gn_reference"] = l.gn_reference;
    j["predicted"] = l.predicted;
    j["credits_cover_errors"] = l.credits_cover_errors;
    j["below_reference"] = l.below_reference;
    return j;
}

void bound_ledger_to_csv(std::ostream& os, const BoundLedger& l) {
    os.precision(17);
    os << "n,class0_count,class1_count,class0_uncertainty_gain,class1_uncertainty_gain,class0_error,class1_error,"
          "interaction_credit\n";
    for (auto& t : l.per_level)
        os << t.n << ',' << t.class0_count << ',' << t.class1_count << ',' << t.class0_uncertainty_gain << ','
           << t.class1_uncertainty_gain << ',' << t.class0_error << ',' << t.class1_error << ','
           << t.interaction_credit << '\n';
}

// ---- trial states ----

std::pair<int, int> support_cells(const GridField& u, double threshold) {
    const auto& g = u.grid();
    int lo = g.points, hi = -1;
    for (size_t i = 0; i < g.size(); ++i)
        if (std::abs(u.values()[i]) > threshold) {
            const int j = g.unflatten(i)[0];
            lo = std::min(lo, j);
            hi = std::max(hi, j);
        }
    if (hi < 0) throw InputError("support: field vanishes");
    return {lo, hi};
}

namespace {

double smooth_step(double t) {  // 0 for t <= 0, 1 for t >= 1, C-infinity
    if (t <= 0) return 0.0;
    if (t >= 1) return 1.0;
    const double a = std::exp(-1.0 / t), b = std::exp(-1.0 / (1.0 - t));
    return a / (a + b);
}

}  // namespace

GridField tapered(const GridField& u, double radius) {
    if (!(radius > 0)) throw InputError("taper: radius must be positive");
    const auto& g = u.grid();
    std::vector<states::cplx> v(u.values());
    for (size_t i = 0; i < v.size(); ++i) {
        auto x = g.point(i);
        double r = 0.0;
        for (double c : x) r += c * c;
        r = std::sqrt(r) / radius;
        v[i] *= 1.0 - smooth_step(2.0 * r - 1.0);
    }
    return GridField(g, std::move(v)).normalized();
}

TrialValue run_trial_upper(const GridField& u, int N, double ell, double lambda, double s, size_t samples,
                           std::uint64_t seed) {
    if (N < 1) throw InputError("trial: N must be at least 1");
    if (!(ell > 0)) throw InputError("trial: ell must be positive");
    if (!u.is_normalized(1e-8)) throw InputError("trial: orbital must be normalized");
    const auto& g = u.grid();
    const long k = std::lround(ell / g.dx());
    if (N > 1 && k < 1) throw InputError("trial: ell below one lattice cell");
    const long first = -((N - 1) * k) / 2;
    const auto [lo, hi] = support_cells(u);
    if (lo + first < 0 || hi + first + (N - 1) * k > g.points - 1)
        throw GeometryError("trial: translated copies wrap around the box");

    std::vector<GridField> orbitals;
    for (int j = 0; j < N; ++j) {
        std::vector<int> sh(g.dim, 0);
        sh[0] = static_cast<int>(first + j * k);
        orbitals.push_back(states::shift_cells(u, sh));
    }
    auto st = states::ManyBodyState::product(orbitals);
    TrialValue r;
    r.ell = static_cast<double>(k) * g.dx();
    for (auto& o : orbitals) r.kinetic += energy::kinetic_energy(o, s);
    r.power_integral = states::density_power_integral(states::density_of(st), s);
    r.interaction = interaction::interaction_energy(st, s, samples, seed);
    r.value = (r.kinetic + lambda * r.interaction.mean) / r.power_integral;
    return r;
}

TranslatedCopies::TranslatedCopies(states::DensityProfile base, int N, double ell, double frame)
    : base_(std::move(base)), N_(N), ell_(ell), frame_(frame) {
    if (N < 1) throw InputError("copies: N must be at least 1");
    if (!(frame > 0)) throw InputError("copies: frame must be positive");
}

std::vector<double> TranslatedCopies::offsets() const {
    std::vector<double> o(N_);
    for (int j = 0; j < N_; ++j) o[j] = (j - 0.5 * (N_ - 1)) * ell_;
    return o;
}

Box TranslatedCopies::physical(const Box& root, int j) const {
    Box b = geometry::scaled(root, frame_);
    const double o = (j - 0.5 * (N_ - 1)) * ell_;
    b.lo[0] -= o;
    b.hi[0] -= o;
    return b;
}

double TranslatedCopies::box_mass(const Box& root) const {
    double m = 0.0;
    for (int j = 0; j < N_; ++j) m += base_.physical_box_mass(physical(root, j));
    return m;
}

double TranslatedCopies::box_power_integral(const Box& root, double p) const {
    double m = 0.0;
    for (int j = 0; j < N_; ++j) m += base_.physical_power_integral(physical(root, j), p);
    return std::pow(frame_, dim() * (p - 1.0)) * m;
}

TrialValue separated_trial(const GridField& u, int N, double ell, double lambda, double s, size_t samples,
                           std::uint64_t seed) {
    if (N < 1) throw InputError("trial: N must be at least 1");
    if (!u.is_normalized(1e-8)) throw InputError("trial: orbital must be normalized");
    const auto [lo, hi] = support_cells(u);
    const double width = (hi - lo + 1) * u.dx();
    if (N > 1 && ell < width) throw InputError("separated trial: copies overlap");
    TrialValue r;
    r.ell = ell;
    r.kinetic = N * energy::kinetic_energy(u, s);
    r.power_integral = N * states::density_power_integral(states::density_of(u), s);
    if (N > 1) {
        auto st = states::ManyBodyState::product(std::vector<GridField>(N, u));
        auto batch = states::sample_configurations(st, samples, seed);
        for (size_t c = 0; c < batch.count; ++c)
            for (int i = 0; i < N; ++i) batch.coords[(c * N + i) * batch.dim] += (i - 0.5 * (N - 1)) * ell;
        r.interaction = interaction::batch_interaction(batch, s);
    }
    r.value = (r.kinetic + lambda * r.interaction.mean) / r.power_integral;
    return r;
}

std::vector<TrialOrbital> trial_orbitals(const GridField& gn_minimizer, double radius) {
    std::vector<TrialOrbital> out;
    out.push_back({"tapered_gn", tapered(gn_minimizer, radius)});
    out.push_back({"cos2_bump", states::cos2_bump(gn_minimizer.grid(), geometry::Point(gn_minimizer.dim(), 0.0),
                                                  radius)});
    return out;
}

namespace {

struct RowResult {
    ScanRow row;
    BoundLedger ledger;
};

RowResult scan_row(const ScanConfig& cfg, double gn_value, const std::vector<TrialOrbital>& orbitals, size_t i) {
    const double lambda = cfg.lambdas[i];
    RowResult out;
    ScanRow& row = out.row;
    row.lambda = lambda;
    row.trial_upper = std::numeric_limits<double>::infinity();
    const TrialOrbital* best = nullptr;
    double best_ell = 0.0;
    const double grow = std::pow(lambda, cfg.ell_exponent / cfg.s);
    for (size_t o = 0; o < orbitals.size(); ++o) {
        const auto& u = orbitals[o].u;
        const auto [lo, hi] = support_cells(u);
        const double width = (hi - lo + 1) * u.dx();
        for (size_t e = 0; e < cfg.ell_factors.size(); ++e) {
            const double ell = cfg.ell_factors[e] * 0.5 * width * grow;
            if (ell < width) continue;
            const std::uint64_t seed = cfg.seed + 1000003ULL * i + 1009ULL * o + e;
            auto tv = separated_trial(u, cfg.N, ell, lambda, cfg.s, cfg.samples, seed);
            if (tv.value < row.trial_upper) {
                row.trial_upper = tv.value;
                row.ell = ell;
                row.orbital = orbitals[o].name;
                best = &orbitals[o];
                best_ell = ell;
            }
        }
    }
    if (!best) throw InputError("scan: no admissible separation");

    Constants c = cfg.constants;
    if (!(c.gn_reference > 0)) c.gn_reference = gn_value;
    const auto& u = best->u;
    const auto [lo, hi] = support_cells(u);
    double extent = std::max(std::abs(u.grid().coord(lo)), std::abs(u.grid().coord(hi))) + u.dx();
    extent += 0.5 * (cfg.N - 1) * best_ell;
    const double frame = std::max(u.box_side(), 2.1 * extent);
    TranslatedCopies rho(states::density_of(u), cfg.N, best_ell, frame);
    auto cov = chain_covering(rho, lambda, cfg.s, c, cfg.eps, cfg.max_depth);
    row.gn_gap_prediction = c.gn_reference - c.C_pred * std::pow(lambda, -energy::param_table(cfg.d, cfg.s).k1);
    if (cov.terminated) {
        out.ledger = assemble_lower_bound(rho, cov, lambda, cfg.s, c);
        row.assembled_lower = out.ledger.assembled_lower;
        row.delta_used = out.ledger.delta_used;
        row.delta_branch = out.ledger.delta_branch;
        row.ordered = row.trial_upper >= row.assembled_lower;
    } else {
        row.assembled_lower = std::numeric_limits<double>::quiet_NaN();
        row.delta_used = cov.delta;
        row.delta_branch = "unterminated";
        row.ordered = true;
    }
    return out;
}

}  // namespace

QuotientScan scan_lambda(const ScanConfig& cfg, double gn_value, const std::vector<TrialOrbital>& orbitals) {
    if (cfg.lambdas.empty()) throw InputError("scan: empty lambda grid");
    if (orbitals.empty()) throw InputError("scan: no trial orbitals");
    for (double l : cfg.lambdas)
        if (!(l > 0)) throw DomainError("scan: lambda must be positive");
    QuotientScan scan;
    scan.config = cfg;
    scan.gn_value = gn_value;
    for (auto& o : orbitals)
        scan.orbitals.emplace_back(o.name, separated_trial(o.u, 1, 1.0, 0.0, cfg.s, 0, cfg.seed).value);

    std::vector<RowResult> results(cfg.lambdas.size());
    const size_t T = static_cast<size_t>(std::max(1, cfg.threads));
    for (size_t start = 0; start < results.size(); start += T) {
        std::vector<std::future<RowResult>> jobs;
        for (size_t i = start; i < std::min(results.size(), start + T); ++i)
            jobs.push_back(std::async(T > 1 ? std::launch::async : std::launch::deferred,
                                      [&, i] { return scan_row(cfg, gn_value, orbitals, i); }));
        for (size_t k = 0; k < jobs.size(); ++k) results[start + k] = jobs[k].get();
    }
    scan.ordered = true;
    scan.gap_non_increasing = true;
    for (size_t i = 0; i < results.size(); ++i) {
        scan.rows.push_back(results[i].row);
        scan.ledgers.push_back(results[i].ledger);
        scan.ordered = scan.ordered && results[i].row.ordered;
        if (i > 0) {
            const double prev = results[i - 1].row.trial_upper - gn_value;
            const double cur = results[i].row.trial_upper - gn_value;
            if (cur > prev + 1e-3 * gn_value) scan.gap_non_increasing = false;
        }
    }
    return scan;
}

void scan_to_csv(std::ostream& os, const QuotientScan& scan) {
    os.precision(17);
    os << "lambda,trial_upper,ell,orbital,assembled_lower,gn_gap_prediction,gn_value,delta_used,delta_branch,"
          "ordered\n";
    for (auto& r : scan.rows)
        os << r.lambda << ',' << r.trial_upper << ',' << r.ell << ',' << r.orbital << ',' << r.assembled_lower
           << ',' << r.gn_gap_prediction << ',' << scan.gn_value << ',' << r.delta_used << ',' << r.delta_branch
           << ',' << (r.ordered ? 1 : 0) << '\n';
}

}  // namespace ltlab::pipeline
