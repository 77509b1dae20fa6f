#include "ltlab/energy.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <ostream>

#include "ltlab/fft.hpp"

namespace ltlab::energy {

using states::cplx;
using states::GridSpec;

FractionalOrder FractionalOrder::of(double s) {
    if (!(s > 0) || !std::isfinite(s)) throw DomainError("fractional order must be positive");
    FractionalOrder f;
    f.s = s;
    f.m = static_cast<int>(std::floor(s));
    f.sigma = s - f.m;
    if (f.sigma == 0.0) f.sigma = 0.0;  // drop a negative zero
    return f;
}

double hardy_constant(int d, double s) {
    if (d < 1) throw DomainError("hardy_constant: d must be >= 1");
    if (!(s > 0) || !(s < 0.5 * d)) throw DomainError("hardy_constant: requires 0 < s < d/2");
    const double r = std::exp(std::lgamma(0.25 * (d + 2 * s)) - std::lgamma(0.25 * (d - 2 * s)));
    return std::pow(2.0, 2 * s) * r * r;
}

double weight_constant(int d, double sigma) {
    if (sigma == 0.0) return 1.0;
    if (!(sigma > 0 && sigma < 1)) throw DomainError("weight_constant: sigma must lie in [0,1)");
    // |Gamma(-sigma)| = pi / (sin(pi sigma) Gamma(1+sigma))
    const double abs_gamma = std::numbers::pi / (std::sin(std::numbers::pi * sigma) * std::tgamma(1.0 + sigma));
    return std::pow(2.0, 2 * sigma - 1) * std::tgamma(0.5 * d + sigma) /
           (std::pow(std::numbers::pi, 0.5 * d) * abs_gamma);
}

ParamTable param_table(int d, double s) {
    if (d < 1) throw DomainError("param_table: d must be >= 1");
    ParamTable p;
    p.d = d;
    p.s = FractionalOrder::of(s);
    const double sg = p.s.sigma;
    if (sg == 0.0) {
        p.t0 = p.t1 = s - 1.0;
    } else {
        const double q = std::min(sg, 1.0 - sg);
        p.t0 = s - q / 4.0;
        p.t1 = s - q / 8.0;
    }
    p.eta1 = 2.0 * sg * s / (d * (s - p.t0)) + p.t0 / (s - p.t0);
    p.k1 = std::min(1.0, 2.0 * s / d) / (1.0 + 2.0 * s + p.eta1);
    p.weight_c = weight_constant(d, sg);
    if (s < 0.5 * d) {
        p.hardy_defined = true;
        p.eta2 = (s + p.t1) / (s - p.t1) + (sg == 0.0 ? 0.0 : 2.0 * sg * p.t1 / (d * (p.t1 - p.t0)));
        p.k2 = (2.0 * s / d) / (1.0 + 2.0 * s + p.eta2);
        p.hardy_c = hardy_constant(d, s);
    }
    return p;
}

void write_constants_csv(std::ostream& os, const std::vector<ParamTable>& rows) {
    os.precision(17);
    os << "d,s,m,sigma,t0,t1,eta1,eta2,k1,k2,hardy_c,weight_c\n";
    for (auto& r : rows) {
        os << r.d << ',' << r.s.s << ',' << r.s.m << ',' << r.s.sigma << ',' << r.t0 << ',' << r.t1 << ','
           << r.eta1 << ',';
        if (r.hardy_defined)
            os << r.eta2 << ',' << r.k1 << ',' << r.k2 << ',' << r.hardy_c;
        else
            os << ',' << r.k1 << ",,";
        os << ',' << r.weight_c << '\n';
    }
}

double kinetic_energy(const GridField& u, double s) {
    const GridSpec& g = u.grid();
    auto U = fft::forward(u.values(), g.dim, g.points);
    auto k = fft::wavenumbers(g.points, g.box_side);
    double sum = 0.0;
    for (size_t i = 0; i < U.size(); ++i) {
        auto idx = g.unflatten(i);
        double k2 = 0.0;
        for (int a = 0; a < g.dim; ++a) k2 += k[idx[a]] * k[idx[a]];
        if (k2 > 0) sum += std::pow(k2, s) * std::norm(U[i]);
    }
    const double M = static_cast<double>(g.size());
    return std::pow(g.box_side, g.dim) / (M * M) * sum;
}

GridField spectral_derivative(const GridField& u, const std::vector<int>& alpha) {
    const GridSpec& g = u.grid();
    auto U = fft::forward(u.values(), g.dim, g.points);
    auto k = fft::wavenumbers(g.points, g.box_side);
    for (size_t i = 0; i < U.size(); ++i) {
        auto idx = g.unflatten(i);
        cplx f = 1.0;
        for (int a = 0; a < g.dim; ++a) {
            if (alpha[a] == 0) continue;
            if (alpha[a] % 2 == 1 && 2 * idx[a] == g.points) {
                f = 0.0;
                break;
            }
            f *= std::pow(cplx(0.0, k[idx[a]]), alpha[a]);
        }
        U[i] *= f;
    }
    auto v = fft::backward(U, g.dim, g.points);
    const double inv = 1.0 / static_cast<double>(g.size());
    for (auto& x : v) x *= inv;
    return GridField(g, std::move(v));
}

Region physical_region(const geometry::EnlargedRegion& r, double box_side) {
    Region out;
    for (auto& b : r.disjoint_pieces()) out.push_back(geometry::scaled(b, box_side));
    return out;
}

std::vector<double> cell_weights(const GridSpec& g, const Region& region) {
    std::vector<double> w(g.size(), 0.0);
    if (region.empty()) {
        std::fill(w.begin(), w.end(), 1.0);
        return w;
    }
    const Box dom = g.domain();
    const double slack = 1e-12 * g.box_side;
    for (auto& b : region) {
        if (b.dim() != g.dim) throw InputError("region dimension does not match the grid");
        for (int a = 0; a < g.dim; ++a)
            if (b.lo[a] < dom.lo[a] - slack || b.hi[a] > dom.hi[a] + slack)
                throw InputError("region extends outside the grid domain");
    }
    for (size_t i = 0; i < region.size(); ++i)
        for (size_t j = i + 1; j < region.size(); ++j)
            if (region[i].overlaps_open(region[j])) throw InputError("region boxes must be disjoint");
    const double h = g.dx(), L = g.box_side;
    const int d = g.dim, M = g.points;
    for (auto& b : region) {
        std::vector<int> lo(d), hi(d);
        for (int a = 0; a < d; ++a) {
            lo[a] = std::clamp(static_cast<int>(std::floor((b.lo[a] + 0.5 * L) / h)), 0, M - 1);
            hi[a] = std::clamp(static_cast<int>(std::ceil((b.hi[a] + 0.5 * L) / h)) - 1, 0, M - 1);
        }
        std::vector<int> idx = lo;
        while (true) {
            double f = 1.0;
            for (int a = 0; a < d; ++a) {
                double clo = -0.5 * L + idx[a] * h;
                f *= std::max(0.0, std::min(clo + h, b.hi[a]) - std::max(clo, b.lo[a])) / h;
            }
            w[g.flatten(idx)] += f;
            int a = d - 1;
            while (a >= 0 && idx[a] == hi[a]) {
                idx[a] = lo[a];
                --a;
            }
            if (a < 0) break;
            ++idx[a];
        }
    }
    for (auto& x : w) x = std::min(x, 1.0);
    return w;
}

namespace {

using Kronrod = boost::math::quadrature::gauss_kronrod<double, 31>;

double integrate01(const std::function<double(double)>& f) { return Kronrod::integrate(f, 0.0, 1.0, 12, 1e-13); }

// int over [0,1]^n of f(v)
double integrate_cube(int n, const std::function<double(const std::vector<double>&)>& f) {
    std::vector<double> v(n);
    std::function<double(int)> rec = [&](int k) -> double {
        if (k == n) return f(v);
        return integrate01([&](double t) {
            v[k] = t;
            return rec(k + 1);
        });
    };
    return rec(0);
}

double sphere_area(int d) { return 2.0 * std::pow(std::numbers::pi, 0.5 * d) / std::tgamma(0.5 * d); }

std::vector<std::vector<int>> multi_indices(int d, int m) {
    std::vector<std::vector<int>> out;
    std::vector<int> a(d, 0);
    std::function<void(int, int)> rec = [&](int k, int left) {
        if (k == d - 1) {
            a[k] = left;
            out.push_back(a);
            return;
        }
        for (int i = left; i >= 0; --i) {
            a[k] = i;
            rec(k + 1, left - i);
        }
    };
    rec(0, m);
    return out;
}

double multinomial(const std::vector<int>& alpha) {
    int m = 0;
    double den = 1.0;
    for (int x : alpha) {
        m += x;
        den *= std::tgamma(x + 1.0);
    }
    return std::tgamma(m + 1.0) / den;
}

}  // namespace

double unit_cell_integral(int d, double sigma) {
    const double a = 1.0 / (2.0 - 2.0 * sigma);
    const double e = 0.5 * (2.0 - d - 2.0 * sigma);
    // Duffy split: d pyramids with w_1 = max, w = w_1 (1, v); w_1 = t^a removes the radial power
    double inner = integrate01([&](double t) {
        const double w1 = std::pow(t, a);
        return integrate_cube(d - 1, [&](const std::vector<double>& v) {
            double r2 = 1.0, prod = 1.0 - w1;
            for (double x : v) {
                r2 += x * x;
                prod *= 1.0 - w1 * x;
            }
            return std::pow(r2, e) * prod;
        });
    });
    return std::pow(2.0, d) * d * a * inner;
}

double local_seminorm(const GridField& u, const Region& region, double s, const SeminormOptions& opt) {
    const auto ord = FractionalOrder::of(s);
    const GridSpec& g = u.grid();
    const int d = g.dim;
    const auto w = cell_weights(g, region);
    const double h = g.dx(), L = g.box_side, dv = g.cell_volume();

    std::vector<size_t> cells;
    for (size_t i = 0; i < w.size(); ++i)
        if (w[i] > 0) cells.push_back(i);

    std::vector<std::pair<double, GridField>> derivs;
    for (auto& alpha : multi_indices(d, ord.m))
        derivs.push_back({multinomial(alpha), ord.m == 0 ? u : spectral_derivative(u, alpha)});

    if (ord.sigma == 0.0) {
        double total = 0.0;
        for (auto& [c, f] : derivs) {
            double part = 0.0;
            for (size_t i : cells) part += w[i] * std::norm(f.values()[i]);
            total += c * part * dv;
        }
        return total;
    }

    const double sg = ord.sigma;
    const int M = g.points;
    const int images = opt.images >= 0 ? opt.images : (d == 1 ? 8 : (d == 2 ? 3 : 1));
    // periodized kernel by lattice displacement
    std::vector<double> K(g.size(), 0.0);
    const double tail = sphere_area(d) * std::pow((images + 0.5) * L, -2.0 * sg) / (2.0 * sg) / std::pow(L, d);
    for (size_t i = 0; i < K.size(); ++i) {
        auto idx = g.unflatten(i);
        std::vector<double> r(d);
        bool zero = true;
        for (int a = 0; a < d; ++a) {
            int dd = idx[a] <= M / 2 ? idx[a] : idx[a] - M;
            r[a] = dd * h;
            zero = zero && dd == 0;
        }
        if (zero) continue;
        std::vector<int> n(d, -images);
        double acc = 0.0;
        while (true) {
            double q = 0.0;
            for (int a = 0; a < d; ++a) {
                double x = r[a] + n[a] * L;
                q += x * x;
            }
            acc += std::pow(q, -0.5 * d - sg);
            int a = 0;
            while (a < d && n[a] == images) n[a++] = -images;
            if (a == d) break;
            ++n[a];
        }
        K[i] = acc + tail;
    }
    const double self_moment = std::pow(h, d + 2.0 - 2.0 * sg) * unit_cell_integral(d, sg) / d;

    std::vector<std::vector<int>> cidx;
    for (size_t i : cells) cidx.push_back(g.unflatten(i));

    double total = 0.0;
    for (auto& [c, f] : derivs) {
        const auto& fv = f.values();
        double pairs = 0.0;
        for (size_t p = 0; p < cells.size(); ++p) {
            double row = 0.0;
            for (size_t q = 0; q < cells.size(); ++q) {
                if (p == q) continue;
                size_t disp = 0;
                for (int a = 0; a < d; ++a) disp = disp * M + static_cast<size_t>((cidx[p][a] - cidx[q][a] + M) % M);
                row += w[cells[q]] * std::norm(fv[cells[p]] - fv[cells[q]]) * K[disp];
            }
            pairs += w[cells[p]] * row;
        }
        double self = 0.0;
        for (size_t p = 0; p < cells.size(); ++p) {
            double g2 = 0.0;
            for (int a = 0; a < d; ++a) {
                auto up = cidx[p], dn = cidx[p];
                up[a] = (up[a] + 1) % M;
                dn[a] = (dn[a] - 1 + M) % M;
                const cplx x = fv[cells[p]];
                g2 += (std::norm(fv[g.flatten(up)] - x) + std::norm(x - fv[g.flatten(dn)])) / (2.0 * h * h);
            }
            self += w[cells[p]] * w[cells[p]] * g2;
        }
        total += c * (pairs * dv * dv + self * self_moment);
    }
    return weight_constant(d, sg) * total;
}

double local_seminorm(const GridField& u, const geometry::EnlargedRegion& region, double s) {
    return local_seminorm(u, physical_region(region, u.box_side()), s);
}

namespace {

// int over [0,1]^d of |x|^{-2s}
double corner_cell_integral(int d, double s) {
    double T = integrate_cube(d - 1, [&](const std::vector<double>& v) {
        double r2 = 1.0;
        for (double x : v) r2 += x * x;
        return std::pow(r2, -s);
    });
    return d * T / (d - 2.0 * s);
}

double radial_antiderivative(double x, double s) {
    // int_0^x |t|^{-2s} dt, odd in x
    double v = std::pow(std::abs(x), 1.0 - 2.0 * s) / (1.0 - 2.0 * s);
    return x < 0 ? -v : v;
}

}  // namespace

std::vector<double> hardy_cell_integrals(const GridSpec& g, double s, const Region& region) {
    const int d = g.dim;
    if (!(s > 0) || !(s < 0.5 * d)) throw DomainError("hardy energy requires 0 < s < d/2");
    std::vector<double> out(g.size(), 0.0);
    const double h = g.dx();
    if (d == 1) {
        Region r = region.empty() ? Region{g.domain()} : region;
        cell_weights(g, r);  // validation only
        for (size_t i = 0; i < out.size(); ++i) {
            Box c = g.cell(i);
            for (auto& b : r) {
                double lo = std::max(c.lo[0], b.lo[0]), hi = std::min(c.hi[0], b.hi[0]);
                if (hi > lo) out[i] += radial_antiderivative(hi, s) - radial_antiderivative(lo, s);
            }
        }
        return out;
    }
    const auto w = cell_weights(g, region);
    const bool corner_origin = g.points % 2 == 0;
    const double J = corner_cell_integral(d, s);
    for (size_t i = 0; i < out.size(); ++i) {
        if (w[i] == 0) continue;
        auto idx = g.unflatten(i);
        bool at_origin = true;
        for (int a = 0; a < d; ++a) {
            int c = idx[a] - g.points / 2;
            at_origin = at_origin && (corner_origin ? (c == 0 || c == -1) : c == 0);
        }
        double v;
        if (at_origin)
            v = corner_origin ? std::pow(h, d - 2 * s) * J : std::pow(2.0, d) * std::pow(0.5 * h, d - 2 * s) * J;
        else {
            double r2 = 0.0;
            for (double x : g.point(i)) r2 += x * x;
            v = std::pow(r2, -s) * g.cell_volume();
        }
        out[i] = w[i] * v;
    }
    return out;
}

double hardy_energy(const DensityProfile& rho, const Region& region, int d, double s) {
    if (rho.dim() != d) throw InputError("hardy_energy: density dimension differs from d");
    const double C = hardy_constant(d, s);
    auto I = hardy_cell_integrals(rho.grid(), s, region);
    double total = 0.0;
    for (size_t i = 0; i < I.size(); ++i) total += rho.values()[i] * I[i];
    return C * total;
}

double hardy_energy(const GridField& u, const Region& region, int d, double s) {
    return hardy_energy(states::density_of(u), region, d, s);
}

}  // namespace ltlab::energy
