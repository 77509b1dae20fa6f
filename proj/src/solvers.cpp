#include "ltlab/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

#include "ltlab/fft.hpp"

namespace ltlab::solvers {

using states::cplx;

namespace {

class QuotientEngine {
public:
    explicit QuotientEngine(const QuotientProblem& pb) : pb_(pb), g_(pb.grid) {
        if (!(pb.s > 0)) throw DomainError("quotient: s must be positive");
        if (pb.d != g_.dim) throw InputError("quotient: grid dimension differs from d");
        const auto k = fft::wavenumbers(g_.points, g_.box_side);
        mult_.resize(g_.size());
        pre_.resize(g_.size());
        for (size_t i = 0; i < mult_.size(); ++i) {
            auto idx = g_.unflatten(i);
            double k2 = 0.0;
            for (int a = 0; a < g_.dim; ++a) k2 += k[idx[a]] * k[idx[a]];
            mult_[i] = k2 > 0 ? std::pow(k2, pb.s) : 0.0;
            pre_[i] = 1.0 / (1.0 + mult_[i]);
        }
        if (pb.hardy) {
            const double C = energy::hardy_constant(pb.d, pb.s);
            W_ = energy::hardy_cell_integrals(g_, pb.s);
            for (auto& w : W_) w *= C;
        }
        p_ = 1.0 + 2.0 * pb.s / pb.d;
        dv_ = g_.cell_volume();
    }

    struct Eval {
        double E = 0, n = 0, D = 0, Q = 0;
        double J = 0;  // (E + n) / D^{1/p}, fixes the scale
        std::vector<cplx> Au;
    };

    Eval eval(const std::vector<cplx>& u) const {
        Eval e;
        e.Au = apply(u, mult_);
        double T = 0.0, H = 0.0, n = 0.0, D = 0.0;
        for (size_t i = 0; i < u.size(); ++i) {
            const double a2 = std::norm(u[i]);
            T += (std::conj(u[i]) * e.Au[i]).real();
            if (!W_.empty()) H += W_[i] * a2;
            n += a2;
            D += std::pow(a2, p_);
        }
        e.E = T * dv_ - H;
        e.n = n * dv_;
        e.D = D * dv_;
        e.Q = e.E * std::pow(e.n, 2.0 * pb_.s / pb_.d) / e.D;
        e.J = (e.E + e.n) / std::pow(e.D, 1.0 / p_);
        return e;
    }

    // gradient of J; minimizing J over scale and shape is minimizing Q
    std::vector<cplx> gradient(const std::vector<cplx>& u, const Eval& e) const {
        const double Dp = std::pow(e.D, 1.0 / p_);
        const double c = (e.E + e.n) / (p_ * e.D * Dp);
        std::vector<cplx> g(u.size());
        for (size_t i = 0; i < u.size(); ++i) {
            cplx gE = e.Au[i] - (W_.empty() ? 0.0 : W_[i] / dv_) * u[i];
            cplx gD = p_ * std::pow(std::norm(u[i]), p_ - 1.0) * u[i];
            g[i] = (gE + u[i]) / Dp - c * gD;
        }
        return g;
    }

    std::vector<cplx> precondition(const std::vector<cplx>& v) const { return apply(v, pre_); }
    double dv() const { return dv_; }

private:
    std::vector<cplx> apply(const std::vector<cplx>& v, const std::vector<double>& m) const {
        auto V = fft::forward(v, g_.dim, g_.points);
        for (size_t i = 0; i < V.size(); ++i) V[i] *= m[i];
        auto out = fft::backward(V, g_.dim, g_.points);
        const double inv = 1.0 / static_cast<double>(out.size());
        for (auto& x : out) x *= inv;
        return out;
    }

    QuotientProblem pb_;
    GridSpec g_;
    std::vector<double> mult_, pre_, W_;
    double p_ = 3.0, dv_ = 1.0;
};

void normalize(std::vector<cplx>& u, double dv) {
    double n = 0.0;
    for (auto& x : u) n += std::norm(x);
    const double f = 1.0 / std::sqrt(n * dv);
    for (auto& x : u) x *= f;
}

}  // namespace

double QuotientProblem::quotient(const GridField& u) const {
    if (!(u.grid() == grid)) throw InputError("quotient: field grid differs from the problem grid");
    return QuotientEngine(*this).eval(u.values()).Q;
}

GridField preset_field(const GridSpec& g, Preset p) {
    const double L = g.box_side;
    return GridField::sample(g, [&](const Point& x) {
               double r2 = 0.0;
               for (double c : x) r2 += c * c;
               switch (p) {
                   case Preset::Gaussian:
                       return cplx(std::exp(-r2 / (2.0 * (L / 12) * (L / 12))), 0.0);
                   case Preset::Plateau:
                       return cplx(std::exp(-std::pow(r2 / ((L / 10) * (L / 10)), 2.0)), 0.0);
                   case Preset::TwoBump: {
                       const double w = L / 20, off = L / 8;
                       double a = r2 - 2 * off * x[0] + off * off, b = r2 + 2 * off * x[0] + off * off;
                       return cplx(std::exp(-a / (2 * w * w)) + 0.8 * std::exp(-b / (2 * w * w)), 0.0);
                   }
               }
               return cplx(0.0, 0.0);
           })
        .normalized();
}

std::string preset_name(Preset p) {
    switch (p) {
        case Preset::Gaussian: return "gaussian";
        case Preset::Plateau: return "plateau";
        case Preset::TwoBump: return "two-bump";
    }
    return "?";
}

MinimizeResult minimize_quotient(const QuotientProblem& pb, const GridField& init, const MinimizeOptions& opt) {
    if (!(init.grid() == pb.grid)) throw InputError("minimize_quotient: init grid differs from the problem grid");
    if (!init.is_normalized(1e-8)) throw InputError("minimize_quotient: init must be normalized");
    if (pb.hardy && !(pb.s < 0.5 * pb.d)) throw DomainError("minimize_quotient: hardy mode requires s < d/2");
    QuotientEngine eng(pb);
    const double dv = eng.dv();

    std::vector<cplx> u = init.values();
    auto cur = eng.eval(u);
    MinimizeResult res;
    res.start = "given";
    res.trace.push_back({0, cur.Q, 0.0});
    double t = 1.0;
    int rising = 0;
    std::vector<double> history{cur.J};

    for (int step = 1; step <= opt.max_steps; ++step) {
        auto g = eng.gradient(u, cur);
        auto dir = eng.precondition(g);
        double slope = 0.0;
        for (size_t i = 0; i < g.size(); ++i) slope += (std::conj(g[i]) * dir[i]).real();
        slope *= -2.0 * dv;  // directional derivative along -dir
        if (!(slope < 0)) {
            res.converged = true;
            break;
        }
        bool accepted = false;
        std::vector<cplx> trial(u.size());
        QuotientEngine::Eval next;
        while (t > 1e-16) {
            for (size_t i = 0; i < u.size(); ++i) trial[i] = u[i] - t * dir[i];
            normalize(trial, dv);
            next = eng.eval(trial);
            if (std::isfinite(next.J) && next.J <= cur.J + 1e-4 * t * slope) {
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if (!accepted) {
            res.converged = true;
            break;
        }
        rising = next.J > cur.J ? rising + 1 : 0;
        if (rising >= opt.divergence_steps) throw SolverError("minimize_quotient: value increased over 50 steps");
        u.swap(trial);
        cur = std::move(next);
        res.trace.push_back({step, cur.Q, t});
        history.push_back(cur.J);
        t = std::min(t * 2.0, 1e6);
        if (static_cast<int>(history.size()) > opt.window) {
            double old = history[history.size() - 1 - opt.window];
            if (std::abs(old - cur.J) <= opt.tolerance * std::abs(cur.J)) {
                res.converged = true;
                break;
            }
        }
    }
    res.value = cur.Q;
    res.minimizer = GridField(pb.grid, std::move(u));
    return res;
}

MinimizeResult minimize_quotient(const QuotientProblem& pb, const std::vector<GridField>& extra_starts,
                                 const MinimizeOptions& opt) {
    std::optional<MinimizeResult> best;
    auto consider = [&](MinimizeResult r) {
        if (!best || r.value < best->value) best = std::move(r);
    };
    for (Preset p : {Preset::Gaussian, Preset::Plateau, Preset::TwoBump}) {
        auto r = minimize_quotient(pb, preset_field(pb.grid, p), opt);
        r.start = preset_name(p);
        consider(std::move(r));
    }
    for (size_t i = 0; i < extra_starts.size(); ++i) {
        auto r = minimize_quotient(pb, extra_starts[i].normalized(), opt);
        r.start = "start-" + std::to_string(i);
        consider(std::move(r));
    }
    return std::move(*best);
}

void write_trace_csv(std::ostream& os, const std::vector<TraceRow>& trace) {
    os.precision(17);
    os << "step,value,step_size\n";
    for (auto& r : trace) os << r.step << ',' << r.value << ',' << r.step_size << '\n';
}

std::vector<double> constant_lattice() {
    std::vector<double> v;
    for (int i = 0; i <= 6 * 25; ++i) v.push_back(std::pow(10.0, -2.0 + i / 25.0));
    return v;
}

namespace {

UncertaintyEstimate uncertainty_from(double A, double m, double P, double volume, int d, double s) {
    UncertaintyEstimate e;
    e.seminorm = A;
    e.mass = m;
    e.power_integral = P;
    if (!(m > 0)) {
        e.degenerate = true;
        return e;
    }
    const double X = P / std::pow(m, 2.0 * s / d);
    const double Y = m / std::pow(volume, 2.0 * s / d);
    e.C_star = (-A + std::sqrt(A * A + 4.0 * X * Y)) / (2.0 * Y);
    const auto lat = constant_lattice();
    double best = std::numeric_limits<double>::infinity();
    for (double c1 : lat)
        for (double c2 : lat) {
            if (std::max(c1, c2) >= best) break;
            if (A >= X / c1 - c2 * Y) {
                best = std::max(c1, c2);
                e.C1 = c1;
                e.C2 = c2;
                break;
            }
        }
    if (!std::isfinite(best)) {
        e.C1 = e.C2 = std::numeric_limits<double>::infinity();
    }
    return e;
}

}  // namespace

UncertaintyEstimate estimate_local_uncertainty_constant(const GridField& u, const Box& cube, double s) {
    const int d = u.dim();
    const double A = energy::local_seminorm(u, energy::Region{cube}, s);
    auto rho = states::density_of(u);
    const double m = rho.physical_box_mass(cube);
    const double P = states::density_power_integral(rho, s, {cube});
    return uncertainty_from(A, m, P, cube.volume(), d, s);
}

UncertaintyEstimate estimate_local_uncertainty_constant(const GridField& u, const geometry::EnlargedRegion& r,
                                                        double s) {
    const int d = u.dim();
    auto region = energy::physical_region(r, u.box_side());
    const double A = energy::local_seminorm(u, region, s);
    auto rho = states::density_of(u);
    double m = 0.0, vol = 0.0;
    for (auto& b : region) {
        m += rho.physical_box_mass(b);
        vol += b.volume();
    }
    const double P = states::density_power_integral(rho, s, region);
    return uncertainty_from(A, m, P, vol, d, s);
}

UncertaintyEstimate aggregate(const std::vector<UncertaintyEstimate>& family) {
    UncertaintyEstimate out;
    out.degenerate = true;
    for (auto& e : family) {
        if (e.degenerate) continue;
        out.degenerate = false;
        out.C1 = std::max(out.C1, e.C1);
        out.C2 = std::max(out.C2, e.C2);
        out.C_star = std::max(out.C_star, e.C_star);
    }
    return out;
}

FermionicResult fermionic_ratio(const states::ManyBodyState& st, double s, size_t samples, std::uint64_t seed,
                                const states::SamplingOptions& opt) {
    if (st.kind() != states::StateKind::Slater) throw InputError("fermionic_ratio: state must be a Slater determinant");
    const int d = st.grid().dim;
    if (!(s > 0) || !(s < 0.5 * d)) throw DomainError("fermionic_ratio: requires 0 < s < d/2");
    FermionicResult r;
    for (auto& o : st.orbitals()) r.kinetic += energy::kinetic_energy(o, s);
    r.interaction = interaction::interaction_energy(st, s, samples, seed, opt);
    const double mean = r.interaction.mean;
    if (!(mean > 0) || r.kinetic / mean > kRatioCap) {
        r.capped = true;
        r.ratio = r.ratio_low = kRatioCap;
        return r;
    }
    r.ratio = r.kinetic / mean;
    r.ratio_low = r.kinetic / (mean + 3.0 * r.interaction.std_error);
    return r;
}

}  // namespace ltlab::solvers
