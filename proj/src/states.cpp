#include "ltlab/states.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>
#include <thread>

#include <json.hpp>

namespace ltlab::states {

size_t GridSpec::size() const {
    size_t n = 1;
    for (int a = 0; a < dim; ++a) n *= static_cast<size_t>(points);
    return n;
}

double GridSpec::cell_volume() const { return std::pow(dx(), dim); }

Box GridSpec::domain() const { return Box{Point(dim, -0.5 * box_side), Point(dim, 0.5 * box_side)}; }

std::vector<int> GridSpec::unflatten(size_t flat) const {
    std::vector<int> idx(dim);
    for (int a = dim - 1; a >= 0; --a) {
        idx[a] = static_cast<int>(flat % points);
        flat /= points;
    }
    return idx;
}

size_t GridSpec::flatten(const std::vector<int>& idx) const {
    size_t f = 0;
    for (int a = 0; a < dim; ++a) f = f * points + static_cast<size_t>(idx[a]);
    return f;
}

Point GridSpec::point(size_t flat) const {
    auto idx = unflatten(flat);
    Point x(dim);
    for (int a = 0; a < dim; ++a) x[a] = coord(idx[a]);
    return x;
}

Box GridSpec::cell(size_t flat) const {
    auto idx = unflatten(flat);
    Box b{Point(dim), Point(dim)};
    for (int a = 0; a < dim; ++a) {
        b.lo[a] = -0.5 * box_side + idx[a] * dx();
        b.hi[a] = -0.5 * box_side + (idx[a] + 1) * dx();
    }
    return b;
}

GridField::GridField(GridSpec grid, std::vector<cplx> values) : grid_(grid), values_(std::move(values)) {
    if (grid_.dim < 1 || grid_.points < 2 || !(grid_.box_side > 0))
        throw InputError("grid field: bad grid specification");
    if (values_.size() != grid_.size()) throw InputError("grid field: value count does not match grid");
    for (auto& v : values_)
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) throw InputError("grid field: non-finite value");
}

GridField GridField::sample(const GridSpec& grid, const std::function<cplx(const Point&)>& f) {
    std::vector<cplx> v(grid.size());
    for (size_t i = 0; i < v.size(); ++i) v[i] = f(grid.point(i));
    return GridField(grid, std::move(v));
}

double GridField::norm2() const {
    double s = 0.0;
    for (auto& v : values_) s += std::norm(v);
    return s * grid_.cell_volume();
}

GridField GridField::normalized() const {
    const double n = norm2();
    if (!(n > 0)) throw InputError("grid field: cannot normalize a zero field");
    return scaled(1.0 / std::sqrt(n));
}

GridField GridField::scaled(cplx c) const {
    std::vector<cplx> v(values_);
    for (auto& x : v) x *= c;
    return GridField(grid_, std::move(v));
}

bool GridField::is_normalized(double tol) const { return std::abs(norm2() - 1.0) <= tol; }

cplx inner(const GridField& a, const GridField& b) {
    if (!(a.grid() == b.grid())) throw InputError("inner: grids differ");
    cplx s = 0.0;
    for (size_t i = 0; i < a.values().size(); ++i) s += std::conj(a.values()[i]) * b.values()[i];
    return s * a.grid().cell_volume();
}

GridField gaussian(const GridSpec& g, const Point& center, double width) {
    return GridField::sample(g, [&](const Point& x) {
               double r2 = 0.0;
               for (int a = 0; a < g.dim; ++a) r2 += (x[a] - center[a]) * (x[a] - center[a]);
               return cplx(std::exp(-r2 / (2.0 * width * width)), 0.0);
           })
        .normalized();
}

GridField cos2_bump(const GridSpec& g, const Point& center, double radius) {
    return GridField::sample(g, [&](const Point& x) {
               double r2 = 0.0;
               for (int a = 0; a < g.dim; ++a) r2 += (x[a] - center[a]) * (x[a] - center[a]);
               double r = std::sqrt(r2);
               if (r >= radius) return cplx(0.0, 0.0);
               double c = std::cos(0.5 * std::numbers::pi * r / radius);
               return cplx(c * c, 0.0);
           })
        .normalized();
}

std::vector<GridField> orthonormalize(const std::vector<GridField>& fs) {
    if (fs.empty()) return {};
    const GridSpec g = fs[0].grid();
    const Eigen::Index P = static_cast<Eigen::Index>(g.size()), N = static_cast<Eigen::Index>(fs.size());
    const double w = std::sqrt(g.cell_volume());
    Eigen::MatrixXcd A(P, N);
    for (Eigen::Index j = 0; j < N; ++j) {
        if (!(fs[j].grid() == g)) throw InputError("orthonormalize: grids differ");
        for (Eigen::Index i = 0; i < P; ++i) A(i, j) = fs[j].values()[i] * w;
    }
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(A);
    Eigen::MatrixXcd Q = qr.householderQ() * Eigen::MatrixXcd::Identity(P, N);
    std::vector<GridField> out;
    for (Eigen::Index j = 0; j < N; ++j) {
        // fix the phase so the column agrees in sign with the input
        cplx proj = Q.col(j).dot(A.col(j));
        cplx phase = std::abs(proj) > 0 ? proj / std::abs(proj) : cplx(1.0);
        std::vector<cplx> v(P);
        for (Eigen::Index i = 0; i < P; ++i) v[i] = Q(i, j) * phase / w;
        out.emplace_back(g, std::move(v));
    }
    return out;
}

GridField shift_cells(const GridField& u, const std::vector<int>& cells) {
    const GridSpec& g = u.grid();
    std::vector<cplx> v(u.values().size());
    for (size_t i = 0; i < v.size(); ++i) {
        auto idx = g.unflatten(i);
        for (int a = 0; a < g.dim; ++a) idx[a] = ((idx[a] + cells[a]) % g.points + g.points) % g.points;
        v[g.flatten(idx)] = u.values()[i];
    }
    return GridField(g, std::move(v));
}

ManyBodyState ManyBodyState::product(std::vector<GridField> orbitals) {
    if (orbitals.empty()) throw InputError("product state: no orbitals");
    for (auto& o : orbitals) {
        if (!(o.grid() == orbitals[0].grid())) throw InputError("product state: orbitals on different grids");
        if (!o.is_normalized()) throw InputError("product state: orbital not normalized");
    }
    return ManyBodyState(StateKind::Product, std::move(orbitals));
}

ManyBodyState ManyBodyState::slater(std::vector<GridField> orbitals) {
    if (orbitals.empty()) throw InputError("slater state: no orbitals");
    for (size_t i = 0; i < orbitals.size(); ++i) {
        if (!(orbitals[i].grid() == orbitals[0].grid())) throw InputError("slater state: orbitals on different grids");
        for (size_t j = 0; j <= i; ++j) {
            cplx g = inner(orbitals[i], orbitals[j]);
            double target = i == j ? 1.0 : 0.0;
            if (std::abs(g.real() - target) > 1e-8 || std::abs(g.imag()) > 1e-8)
                throw InputError("slater state: orbitals are not orthonormal");
        }
    }
    return ManyBodyState(StateKind::Slater, std::move(orbitals));
}

DensityProfile::DensityProfile(GridSpec grid, std::vector<double> cell_values, std::string source)
    : grid_(grid), values_(std::move(cell_values)), source_(std::move(source)) {
    if (values_.size() != grid_.size()) throw InputError("density profile: value count does not match grid");
    for (double v : values_)
        if (!(v >= 0) || !std::isfinite(v)) throw InputError("density profile: negative or non-finite value");
    const int d = grid_.dim, M = grid_.points;
    const double dv = grid_.cell_volume();
    size_t corners = 1;
    for (int a = 0; a < d; ++a) corners *= static_cast<size_t>(M + 1);
    prefix_.assign(corners, 0.0);
    // corner table: prefix_[c] = mass of cells with all indices < c
    std::vector<size_t> stride(d);
    size_t st = 1;
    for (int a = d - 1; a >= 0; --a) {
        stride[a] = st;
        st *= static_cast<size_t>(M + 1);
    }
    for (size_t i = 0; i < values_.size(); ++i) {
        auto idx = grid_.unflatten(i);
        size_t c = 0;
        for (int a = 0; a < d; ++a) c += static_cast<size_t>(idx[a] + 1) * stride[a];
        prefix_[c] = values_[i] * dv;
    }
    for (int a = 0; a < d; ++a)
        for (size_t c = 0; c < corners; ++c)
            if ((c / stride[a]) % (M + 1) != 0) prefix_[c] += prefix_[c - stride[a]];
    total_ = prefix_.back();
}

double DensityProfile::cumulative(const Point& x) const {
    const int d = grid_.dim, M = grid_.points;
    std::vector<int> base(d);
    std::vector<double> frac(d);
    for (int a = 0; a < d; ++a) {
        double t = (x[a] + 0.5 * grid_.box_side) / grid_.dx();
        t = std::clamp(t, 0.0, static_cast<double>(M));
        int c = std::min(static_cast<int>(std::floor(t)), M - 1);
        base[a] = c;
        frac[a] = t - c;
    }
    double F = 0.0;
    for (int mask = 0; mask < (1 << d); ++mask) {
        double w = 1.0;
        size_t c = 0;
        for (int a = 0; a < d; ++a) {
            int bit = (mask >> a) & 1;
            w *= bit ? frac[a] : 1.0 - frac[a];
            c = c * (M + 1) + static_cast<size_t>(base[a] + bit);
        }
        if (w != 0.0) F += w * prefix_[c];
    }
    return F;
}

double DensityProfile::physical_box_mass(const Box& bx) const {
    Box b = bx.intersect(grid_.domain());
    if (b.empty()) return 0.0;
    const int d = grid_.dim;
    double m = 0.0;
    Point corner(d);
    for (int mask = 0; mask < (1 << d); ++mask) {
        int lows = 0;
        for (int a = 0; a < d; ++a) {
            bool hi = (mask >> a) & 1;
            corner[a] = hi ? b.hi[a] : b.lo[a];
            lows += hi ? 0 : 1;
        }
        m += (lows % 2 ? -1.0 : 1.0) * cumulative(corner);
    }
    return std::max(0.0, m);
}

double DensityProfile::box_mass(const Box& root_frame) const {
    return physical_box_mass(geometry::scaled(root_frame, grid_.box_side));
}

double DensityProfile::physical_power_integral(const Box& bx, double p) const {
    Box b = bx.intersect(grid_.domain());
    if (b.empty()) return 0.0;
    const int d = grid_.dim, M = grid_.points;
    const double h = grid_.dx(), L = grid_.box_side;
    std::vector<int> lo(d), hi(d);
    for (int a = 0; a < d; ++a) {
        lo[a] = std::clamp(static_cast<int>(std::floor((b.lo[a] + 0.5 * L) / h)), 0, M - 1);
        hi[a] = std::clamp(static_cast<int>(std::ceil((b.hi[a] + 0.5 * L) / h)) - 1, 0, M - 1);
    }
    double total = 0.0;
    std::vector<int> idx = lo;
    while (true) {
        double vol = 1.0;
        for (int a = 0; a < d && vol > 0; ++a) {
            double clo = -0.5 * L + idx[a] * h, chi = clo + h;
            vol *= std::max(0.0, std::min(chi, b.hi[a]) - std::max(clo, b.lo[a]));
        }
        if (vol > 0) {
            double v = values_[grid_.flatten(idx)];
            if (v > 0) total += std::pow(v, p) * vol;
        }
        int a = d - 1;
        while (a >= 0 && idx[a] == hi[a]) {
            idx[a] = lo[a];
            --a;
        }
        if (a < 0) break;
        ++idx[a];
    }
    return total;
}

double DensityProfile::box_power_integral(const Box& root_frame, double p) const {
    // root-frame density is L^d rho(L y)
    const double L = grid_.box_side;
    return std::pow(L, grid_.dim * (p - 1.0)) * physical_power_integral(geometry::scaled(root_frame, L), p);
}

double DensityProfile::value_at(const Point& x) const {
    std::vector<int> idx(grid_.dim);
    for (int a = 0; a < grid_.dim; ++a) {
        double t = (x[a] + 0.5 * grid_.box_side) / grid_.dx();
        if (t < 0 || t >= grid_.points) return 0.0;
        idx[a] = static_cast<int>(std::floor(t));
    }
    return values_[grid_.flatten(idx)];
}

DensityProfile density_of(const ManyBodyState& state) {
    const GridSpec& g = state.grid();
    std::vector<double> rho(g.size(), 0.0);
    for (auto& o : state.orbitals())
        for (size_t i = 0; i < rho.size(); ++i) rho[i] += std::norm(o.values()[i]);
    std::string src = state.kind() == StateKind::Product ? "product" : "slater";
    return DensityProfile(g, std::move(rho), src + ":N=" + std::to_string(state.particles()));
}

DensityProfile density_of(const GridField& u) {
    std::vector<double> rho(u.values().size());
    for (size_t i = 0; i < rho.size(); ++i) rho[i] = std::norm(u.values()[i]);
    return DensityProfile(u.grid(), std::move(rho), "field");
}

namespace {

void require_disjoint(const std::vector<Box>& region) {
    for (size_t i = 0; i < region.size(); ++i)
        for (size_t j = i + 1; j < region.size(); ++j)
            if (region[i].overlaps_open(region[j])) throw InputError("region boxes must be disjoint");
}

}  // namespace

double density_power_integral(const DensityProfile& rho, double s, const std::vector<Box>& region) {
    if (!(s > 0)) throw DomainError("density_power_integral: s must be positive");
    const double p = 1.0 + 2.0 * s / rho.dim();
    if (region.empty()) return rho.physical_power_integral(rho.grid().domain(), p);
    require_disjoint(region);
    double total = 0.0;
    for (auto& b : region) total += rho.physical_power_integral(b, p);
    return total;
}

double density_power_integral(const geometry::DensityOracle& rho, double s, const std::vector<Box>& region) {
    if (!(s > 0)) throw DomainError("density_power_integral: s must be positive");
    if (!rho.pointwise()) throw CapabilityError("density_power_integral: density lacks pointwise evaluation");
    const double p = 1.0 + 2.0 * s / rho.dim();
    if (region.empty()) return rho.box_power_integral(geometry::root_box(rho.dim()), p);
    require_disjoint(region);
    double total = 0.0;
    for (auto& b : region) total += rho.box_power_integral(b, p);
    return total;
}

Point Configurations::point(size_t k, int i) const {
    const double* c = config(k) + i * dim;
    return Point(c, c + dim);
}

std::vector<Point> Configurations::points(size_t k) const {
    std::vector<Point> out;
    for (int i = 0; i < particles; ++i) out.push_back(point(k, i));
    return out;
}

namespace {

using Engine = std::mt19937_64;

Engine chunk_engine(std::uint64_t seed, std::uint64_t chunk) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(chunk), static_cast<std::uint32_t>(chunk >> 32)};
    return Engine(seq);
}

size_t pick(const std::vector<double>& cdf, double u) {
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u * cdf.back());
    size_t i = static_cast<size_t>(it - cdf.begin());
    if (i >= cdf.size()) i = cdf.size() - 1;
    // never land on a zero-weight cell
    while (i > 0 && cdf[i] == cdf[i - 1]) --i;
    return i;
}

class Drawer {
public:
    explicit Drawer(const ManyBodyState& st) : st_(st), g_(st.grid()) {
        const size_t P = g_.size();
        if (st.kind() == StateKind::Product) {
            for (auto& o : st.orbitals()) {
                std::vector<double> cdf(P);
                double acc = 0.0;
                for (size_t i = 0; i < P; ++i) cdf[i] = acc += std::norm(o.values()[i]);
                cdfs_.push_back(std::move(cdf));
            }
        } else {
            const int N = st.particles();
            const double w = std::sqrt(g_.cell_volume());
            rows_.resize(P * N);
            norms_.resize(P);
            std::vector<double> cdf(P);
            double acc = 0.0;
            for (size_t i = 0; i < P; ++i) {
                double n2 = 0.0;
                for (int j = 0; j < N; ++j) {
                    rows_[i * N + j] = st.orbitals()[j].values()[i] * w;
                    n2 += std::norm(rows_[i * N + j]);
                }
                norms_[i] = n2;
                cdf[i] = acc += n2;
            }
            cdfs_.push_back(std::move(cdf));
        }
    }

    void draw(Engine& eng, double* out) const {
        std::uniform_real_distribution<double> U(0.0, 1.0);
        const int N = st_.particles(), d = g_.dim;
        std::vector<size_t> cells(N);
        if (st_.kind() == StateKind::Product) {
            for (int j = 0; j < N; ++j) cells[j] = pick(cdfs_[j], U(eng));
        } else {
            std::vector<cplx> basis;  // orthonormal vectors in C^N, row-major
            std::vector<double> p(norms_.size());
            for (int k = 0; k < N; ++k) {
                size_t x;
                if (k == 0) {
                    x = pick(cdfs_[0], U(eng));
                } else {
                    double acc = 0.0;
                    for (size_t i = 0; i < p.size(); ++i) {
                        double r = norms_[i];
                        for (int e = 0; e < k; ++e) {
                            cplx dot = 0.0;
                            for (int j = 0; j < N; ++j) dot += std::conj(basis[e * N + j]) * rows_[i * N + j];
                            r -= std::norm(dot);
                        }
                        p[i] = acc += std::max(0.0, r);
                    }
                    x = pick(p, U(eng));
                }
                cells[k] = x;
                std::vector<cplx> v(rows_.begin() + x * N, rows_.begin() + (x + 1) * N);
                for (int e = 0; e < k; ++e) {
                    cplx dot = 0.0;
                    for (int j = 0; j < N; ++j) dot += std::conj(basis[e * N + j]) * v[j];
                    for (int j = 0; j < N; ++j) v[j] -= dot * basis[e * N + j];
                }
                double nv = 0.0;
                for (auto& c : v) nv += std::norm(c);
                nv = std::sqrt(nv);
                for (auto& c : v) basis.push_back(c / nv);
            }
        }
        for (int j = 0; j < N; ++j) {
            auto idx = g_.unflatten(cells[j]);
            for (int a = 0; a < d; ++a)
                out[j * d + a] = -0.5 * g_.box_side + (idx[a] + U(eng)) * g_.dx();
        }
    }

private:
    const ManyBodyState& st_;
    GridSpec g_;
    std::vector<std::vector<double>> cdfs_;
    std::vector<cplx> rows_;
    std::vector<double> norms_;
};

bool has_coincident(const double* c, int N, int d) {
    for (int i = 0; i < N; ++i)
        for (int j = i + 1; j < N; ++j)
            if (std::equal(c + i * d, c + (i + 1) * d, c + j * d)) return true;
    return false;
}

}  // namespace

Configurations sample_configurations(const ManyBodyState& state, size_t count, std::uint64_t seed,
                                     const SamplingOptions& opt) {
    if (state.kind() == StateKind::Slater && state.particles() > opt.slater_cap)
        throw CapabilityError("sample_configurations: slater state above the determinantal sampling cap (" +
                              std::to_string(opt.slater_cap) + ")");
    Configurations out;
    out.particles = state.particles();
    out.dim = state.grid().dim;
    out.count = count;
    out.seed = seed;
    const size_t stride = static_cast<size_t>(out.particles) * out.dim;
    out.coords.assign(count * stride, 0.0);
    const Drawer drawer(state);
    const size_t chunk = std::max<size_t>(1, opt.chunk);
    const size_t chunks = (count + chunk - 1) / chunk;
    std::vector<size_t> rejected(chunks, 0);

    auto work = [&](size_t first_chunk, size_t step) {
        for (size_t c = first_chunk; c < chunks; c += step) {
            Engine eng = chunk_engine(seed, c);
            for (size_t k = c * chunk; k < std::min(count, (c + 1) * chunk); ++k) {
                double* dst = out.coords.data() + k * stride;
                drawer.draw(eng, dst);
                while (has_coincident(dst, out.particles, out.dim)) {
                    ++rejected[c];
                    drawer.draw(eng, dst);
                }
            }
        }
    };
    const int threads = std::max(1, std::min<int>(opt.threads, static_cast<int>(chunks)));
    if (threads == 1) {
        work(0, 1);
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < threads; ++t) pool.emplace_back(work, static_cast<size_t>(t), static_cast<size_t>(threads));
        for (auto& th : pool) th.join();
    }
    for (size_t r : rejected) out.rejected += r;
    return out;
}

void write_orbital(const std::string& path, const GridField& u) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw InputError("cannot write " + path);
    nlohmann::ordered_json h;
    h["format"] = "ltlab-orbital/1";
    h["dim"] = u.dim();
    h["box_side"] = u.box_side();
    h["points_per_axis"] = u.points();
    h["encoding"] = "complex128-le";
    os << h.dump() << '\n';
    os.write(reinterpret_cast<const char*>(u.values().data()),
             static_cast<std::streamsize>(u.values().size() * sizeof(cplx)));
    if (!os) throw InputError("write failed: " + path);
}

GridField read_orbital(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw InputError("cannot read " + path);
    std::string line;
    std::getline(is, line);
    nlohmann::json h;
    try {
        h = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
        throw InputError("orbital header: " + std::string(e.what()));
    }
    GridSpec g{h.at("dim").get<int>(), h.at("box_side").get<double>(), h.at("points_per_axis").get<int>()};
    std::vector<cplx> v(g.size());
    is.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(cplx)));
    if (is.gcount() != static_cast<std::streamsize>(v.size() * sizeof(cplx)))
        throw InputError("orbital file truncated: " + path);
    return GridField(g, std::move(v));
}

void write_density_slice(std::ostream& os, const DensityProfile& rho) {
    const GridSpec& g = rho.grid();
    os << "x,rho\n";
    std::vector<int> idx(g.dim, g.points / 2);
    os.precision(17);
    for (int j = 0; j < g.points; ++j) {
        idx[0] = j;
        os << g.coord(j) << ',' << rho.values()[g.flatten(idx)] << '\n';
    }
}

}  // namespace ltlab::states
