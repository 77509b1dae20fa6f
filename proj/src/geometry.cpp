#include "ltlab/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <set>
#include <sstream>

namespace ltlab::geometry {

double Box::volume() const {
    double v = 1.0;
    for (int a = 0; a < dim(); ++a) v *= std::max(0.0, hi[a] - lo[a]);
    return v;
}

Point Box::center() const {
    Point c(lo.size());
    for (size_t a = 0; a < lo.size(); ++a) c[a] = 0.5 * (lo[a] + hi[a]);
    return c;
}

bool Box::overlaps_open(const Box& o) const {
    for (int a = 0; a < dim(); ++a)
        if (!(lo[a] < o.hi[a] && o.lo[a] < hi[a])) return false;
    return true;
}

bool Box::contains_closed(const Box& o) const {
    for (int a = 0; a < dim(); ++a)
        if (o.lo[a] < lo[a] || o.hi[a] > hi[a]) return false;
    return true;
}

Box Box::intersect(const Box& o) const {
    Box r{lo, hi};
    for (int a = 0; a < dim(); ++a) {
        r.lo[a] = std::max(lo[a], o.lo[a]);
        r.hi[a] = std::min(hi[a], o.hi[a]);
        if (r.hi[a] < r.lo[a]) r.hi[a] = r.lo[a];
    }
    return r;
}

bool Box::empty() const {
    for (int a = 0; a < dim(); ++a)
        if (!(hi[a] > lo[a])) return true;
    return false;
}

Box root_box(int d) { return Box{Point(d, -0.5), Point(d, 0.5)}; }

Box scaled(const Box& b, double f) {
    Box r = b;
    for (int a = 0; a < b.dim(); ++a) {
        r.lo[a] *= f;
        r.hi[a] *= f;
    }
    return r;
}

std::int64_t Ratio::cells(int level) const {
    std::int64_t c = 1;
    for (int i = 0; i < level; ++i) c *= den;
    return c;
}

Ratio Ratio::parse(const std::string& text) {
    if (text == "1/2" || text == "0.5") return Ratio{2};
    if (text == "1/3") return Ratio{3};
    throw InputError("epsilon must be 1/2 or 1/3, got '" + text + "'");
}

double DensityOracle::box_power_integral(const Box&, double) const {
    throw CapabilityError("density has no pointwise evaluation");
}

UniformDensity::UniformDensity(int d, double total, Box support)
    : d_(d), total_(total), support_(std::move(support)) {
    if (!(total >= 0) || !std::isfinite(total)) throw InputError("uniform density: bad total mass");
    if (!root_box(d).contains_closed(support_) || support_.empty())
        throw InputError("uniform density: support must be a non-empty box in the root box");
}

UniformDensity::UniformDensity(int d, double total) : UniformDensity(d, total, root_box(d)) {}

double UniformDensity::box_mass(const Box& b) const {
    return total_ * (b.intersect(support_).volume() / support_.volume());
}

double UniformDensity::box_power_integral(const Box& b, double p) const {
    double level = total_ / support_.volume();
    return std::pow(level, p) * b.intersect(support_).volume();
}

namespace {

// P(a < Z < b) for standard normal Z, tail-accurate
double normal_interval(double a, double b) {
    if (b <= a) return 0.0;
    const double r = 1.0 / std::sqrt(2.0);
    if (a >= 0) return 0.5 * (std::erfc(a * r) - std::erfc(b * r));
    if (b <= 0) return 0.5 * (std::erfc(-b * r) - std::erfc(-a * r));
    return 1.0 - 0.5 * std::erfc(-a * r) - 0.5 * std::erfc(b * r);
}

}  // namespace

GaussianMixture::GaussianMixture(std::vector<Bump> bumps) : bumps_(std::move(bumps)) {
    if (bumps_.empty()) throw InputError("gaussian mixture: no bumps");
    d_ = static_cast<int>(bumps_[0].center.size());
    for (auto& b : bumps_) {
        if (static_cast<int>(b.center.size()) != d_ || !(b.width > 0) || !(b.weight >= 0))
            throw InputError("gaussian mixture: malformed bump");
        double z = 1.0;
        for (int a = 0; a < d_; ++a)
            z *= normal_interval((-0.5 - b.center[a]) / b.width, (0.5 - b.center[a]) / b.width);
        norm_.push_back(z);
    }
}

double GaussianMixture::box_mass(const Box& bx) const {
    Box b = bx.intersect(root_box(d_));
    if (b.empty()) return 0.0;
    double total = 0.0;
    for (size_t k = 0; k < bumps_.size(); ++k) {
        const auto& g = bumps_[k];
        double p = 1.0;
        for (int a = 0; a < d_; ++a)
            p *= normal_interval((b.lo[a] - g.center[a]) / g.width, (b.hi[a] - g.center[a]) / g.width);
        total += g.weight * p / norm_[k];
    }
    return total;
}

Box cube_box(int level, const Index& index, Ratio eps) {
    const double n = static_cast<double>(eps.cells(level));
    Box b{Point(index.size()), Point(index.size())};
    for (size_t a = 0; a < index.size(); ++a) {
        b.lo[a] = -0.5 + static_cast<double>(index[a]) / n;
        b.hi[a] = -0.5 + static_cast<double>(index[a] + 1) / n;
    }
    return b;
}

Box Cube::box(Ratio eps) const { return cube_box(level, index, eps); }
Point Cube::center(Ratio eps) const { return box(eps).center(); }

double Cluster::member_mass() const {
    double m = 0.0;
    for (auto& c : members) m += c.mass;
    return m;
}

namespace {

void for_each_offset(int d, const std::function<void(const Index&)>& fn) {
    Index off(d, -1);
    while (true) {
        fn(off);
        int a = 0;
        while (a < d && off[a] == 1) off[a++] = -1;
        if (a == d) break;
        ++off[a];
    }
}

bool is_zero(const Index& v) {
    return std::all_of(v.begin(), v.end(), [](auto x) { return x == 0; });
}

Index add(const Index& a, const Index& b) {
    Index r(a.size());
    for (size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
    return r;
}

}  // namespace

std::vector<Cluster> detect_clusters(const std::vector<Cube>& input) {
    std::vector<Cluster> out;
    if (input.empty()) return out;
    const int level = input[0].level;
    const int d = static_cast<int>(input[0].index.size());
    std::vector<Cube> cubes = input;
    for (auto& c : cubes)
        if (c.level != level || static_cast<int>(c.index.size()) != d)
            throw InputError("detect_clusters: cubes from mixed levels or dimensions");
    std::sort(cubes.begin(), cubes.end(), [](const Cube& a, const Cube& b) { return a.index < b.index; });
    std::map<Index, size_t> where;
    for (size_t i = 0; i < cubes.size(); ++i)
        if (!where.emplace(cubes[i].index, i).second) throw InputError("detect_clusters: duplicate cube");

    std::vector<int> comp(cubes.size(), -1);
    for (size_t start = 0; start < cubes.size(); ++start) {
        if (comp[start] >= 0) continue;
        const int id = static_cast<int>(out.size());
        std::vector<size_t> stack{start}, found;
        comp[start] = id;
        while (!stack.empty()) {
            size_t cur = stack.back();
            stack.pop_back();
            found.push_back(cur);
            for_each_offset(d, [&](const Index& off) {
                if (is_zero(off)) return;
                auto it = where.find(add(cubes[cur].index, off));
                if (it != where.end() && comp[it->second] < 0) {
                    comp[it->second] = id;
                    stack.push_back(it->second);
                }
            });
        }
        std::sort(found.begin(), found.end());
        Cluster k;
        k.level = level;
        for (size_t i : found) k.members.push_back(cubes[i]);
        out.push_back(std::move(k));
    }
    return out;
}

EnlargedRegion::EnlargedRegion(const Cluster& owner, double tau, Ratio eps)
    : owner_(owner), tau_(tau), eps_(eps), side_(eps.side(owner.level)) {
    if (!(tau >= 0.25 && tau <= 0.5)) throw InputError("enlarge: tau must lie in [1/4, 1/2]");
    const double m = margin();
    for (auto& c : owner_.members) {
        Box b = c.box(eps_);
        for (int a = 0; a < b.dim(); ++a) {
            b.lo[a] -= m;
            b.hi[a] += m;
        }
        boxes_.push_back(std::move(b));
    }
}

bool EnlargedRegion::contains(const Point& x) const {
    for (auto& b : boxes_) {
        bool in = true;
        for (int a = 0; a < b.dim() && in; ++a) in = b.lo[a] < x[a] && x[a] < b.hi[a];
        if (in) return true;
    }
    return false;
}

std::vector<Box> EnlargedRegion::disjoint_pieces() const {
    std::vector<Box> pieces;
    if (owner_.members.empty()) return pieces;
    const int d = static_cast<int>(owner_.members[0].index.size());
    std::set<Index> present;
    for (auto& c : owner_.members) present.insert(c.index);
    const double m = margin();

    for (auto& c : owner_.members) {
        const Box cb = c.box(eps_);
        for_each_offset(d, [&](const Index& type) {
            // members that also contain this sub-piece sit at offsets drawn from {0, type_a}
            Index owner = c.index;
            Index delta(d, 0);
            while (true) {
                Index cand = add(c.index, delta);
                if (present.count(cand) && cand < owner) owner = cand;
                int a = 0;
                for (; a < d; ++a) {
                    if (type[a] == 0) continue;
                    if (delta[a] == 0) {
                        delta[a] = type[a];
                        break;
                    }
                    delta[a] = 0;
                }
                if (a == d) break;
            }
            if (owner != c.index) return;
            Box p{Point(d), Point(d)};
            for (int a = 0; a < d; ++a) {
                if (type[a] < 0) {
                    p.lo[a] = cb.lo[a] - m;
                    p.hi[a] = cb.lo[a] + m;
                } else if (type[a] == 0) {
                    p.lo[a] = cb.lo[a] + m;
                    p.hi[a] = cb.hi[a] - m;
                } else {
                    p.lo[a] = cb.hi[a] - m;
                    p.hi[a] = cb.hi[a] + m;
                }
            }
            if (!p.empty()) pieces.push_back(std::move(p));
        });
    }
    return pieces;
}

double EnlargedRegion::integrate(const DensityOracle& rho) const {
    double total = 0.0;
    for (auto& p : disjoint_pieces()) total += rho.box_mass(p);
    return total;
}

EnlargedRegion enlarge(const Cluster& cluster, double tau, Ratio eps) {
    return EnlargedRegion(cluster, tau, eps);
}

std::vector<Cube> Covering::class2_cubes(int level) const {
    std::vector<Cube> out;
    if (level < 0 || level >= static_cast<int>(levels.size())) return out;
    for (auto& k : levels[level].class2) out.insert(out.end(), k.members.begin(), k.members.end());
    std::sort(out.begin(), out.end(), [](const Cube& a, const Cube& b) { return a.index < b.index; });
    return out;
}

int Covering::deepest_class2_level() const {
    int deepest = -1;
    for (size_t n = 1; n < levels.size(); ++n)
        if (!levels[n].class2.empty()) deepest = static_cast<int>(n);
    return deepest;
}

namespace {

double checked_mass(const DensityOracle& rho, const Box& b) {
    double m = rho.box_mass(b);
    if (!std::isfinite(m) || m < 0) {
        std::ostringstream os;
        os << "density oracle returned invalid mass " << m;
        throw InputError(os.str());
    }
    return m;
}

std::vector<Index> children_of(const Index& parent, int den) {
    const int d = static_cast<int>(parent.size());
    std::vector<Index> kids;
    Index off(d, 0);
    while (true) {
        Index k(d);
        for (int a = 0; a < d; ++a) k[a] = parent[a] * den + off[a];
        kids.push_back(std::move(k));
        int a = d - 1;
        while (a >= 0 && off[a] == den - 1) off[a--] = 0;
        if (a < 0) break;
        ++off[a];
    }
    return kids;
}

}  // namespace

Covering build_covering(const DensityOracle& rho, double delta, Ratio eps, int max_depth, double tau) {
    if (!(delta > 0 && delta < 1)) throw InputError("build_covering: delta must lie in (0,1)");
    if (max_depth < 1) throw InputError("build_covering: max_depth must be >= 1");
    if (eps.den != 2 && eps.den != 3) throw InputError("build_covering: epsilon must be 1/2 or 1/3");
    if (!(tau >= 0.25 && tau <= 0.5)) throw InputError("build_covering: tau must lie in [1/4, 1/2]");
    const int d = rho.dim();

    Covering cov;
    cov.dim = d;
    cov.epsilon = eps;
    cov.delta = delta;
    cov.tau = tau;
    cov.max_depth = max_depth;

    Cube root{0, Index(d, 0), 1.0, checked_mass(rho, root_box(d))};
    Level l0;
    l0.class2.push_back(Cluster{0, {root}, root.mass, 2});
    cov.levels.push_back(l0);

    std::vector<Cube> parents{root};
    for (int n = 1; n <= max_depth; ++n) {
        Level lev;
        lev.n = n;
        std::vector<Cube> kids;
        for (auto& p : parents)
            for (auto& idx : children_of(p.index, eps.den)) {
                Cube c{n, idx, eps.side(n), 0.0};
                c.mass = checked_mass(rho, c.box(eps));
                kids.push_back(std::move(c));
            }
        std::sort(kids.begin(), kids.end(), [](const Cube& a, const Cube& b) { return a.index < b.index; });
        std::vector<Cube> heavy;
        for (auto& c : kids) (c.mass <= delta ? lev.class0 : heavy).push_back(c);
        parents.clear();
        for (auto& k : detect_clusters(heavy)) {
            k.enlarged_mass = enlarge(k, tau, eps).integrate(rho);
            if (k.enlarged_mass >= 1.0 + delta) {
                k.klass = 2;
                parents.insert(parents.end(), k.members.begin(), k.members.end());
                lev.class2.push_back(std::move(k));
            } else {
                k.klass = 1;
                lev.class1.push_back(std::move(k));
            }
        }
        std::sort(parents.begin(), parents.end(), [](const Cube& a, const Cube& b) { return a.index < b.index; });
        cov.levels.push_back(std::move(lev));
        if (parents.empty()) {
            cov.terminated = true;
            break;
        }
    }
    return cov;
}

bool enlarged_regions_disjoint(const std::vector<Cluster>& clusters, double tau, Ratio eps) {
    struct Tagged {
        Box box;
        size_t owner;
    };
    std::vector<Tagged> all;
    for (size_t k = 0; k < clusters.size(); ++k) {
        const auto region = enlarge(clusters[k], tau, eps);
        for (auto& b : region.boxes()) all.push_back({b, k});
    }
    std::sort(all.begin(), all.end(), [](const Tagged& a, const Tagged& b) { return a.box.lo[0] < b.box.lo[0]; });
    for (size_t i = 0; i < all.size(); ++i)
        for (size_t j = i + 1; j < all.size() && all[j].box.lo[0] < all[i].box.hi[0]; ++j)
            if (all[i].owner != all[j].owner && all[i].box.overlaps_open(all[j].box)) return false;
    return true;
}

std::vector<std::string> check_covering(const Covering& cov, const DensityOracle& rho, double rel_tol) {
    std::vector<std::string> bad;
    auto fail = [&](const std::string& msg) { bad.push_back(msg); };
    const Ratio eps = cov.epsilon;
    const int d = cov.dim;

    if (cov.levels.empty()) {
        fail("no levels");
        return bad;
    }
    const Level& l0 = cov.levels[0];
    if (!l0.class0.empty() || !l0.class1.empty() || l0.class2.size() != 1 ||
        l0.class2[0].members.size() != 1 || l0.class2[0].members[0].index != Index(d, 0))
        fail("level 0 is not the root box in class2");

    std::vector<Box> exclusive;  // class0 cubes and class1 members
    double accounted = 0.0;
    for (size_t n = 1; n < cov.levels.size(); ++n) {
        const Level& lev = cov.levels[n];
        const std::string at = "level " + std::to_string(n) + ": ";
        std::vector<Index> expect;
        for (auto& p : cov.class2_cubes(static_cast<int>(n) - 1))
            for (auto& k : children_of(p.index, eps.den)) expect.push_back(k);
        std::sort(expect.begin(), expect.end());

        std::vector<Index> got;
        auto check_cube = [&](const Cube& c) {
            if (c.level != static_cast<int>(n)) fail(at + "cube with wrong level");
            if (c.side != eps.side(static_cast<int>(n))) fail(at + "side differs from eps^n");
            if (!(c.mass >= 0)) fail(at + "negative mass");
            if (!root_box(d).contains_closed(c.box(eps))) fail(at + "cube outside root box");
            got.push_back(c.index);
        };
        for (auto& c : lev.class0) {
            check_cube(c);
            if (!(c.mass <= cov.delta)) fail(at + "class0 cube above delta");
            accounted += c.mass;
            exclusive.push_back(c.box(eps));
        }
        std::vector<Cluster> same_level;
        for (auto* group : {&lev.class1, &lev.class2})
            for (auto& k : *group) {
                same_level.push_back(k);
                if (k.members.empty()) fail(at + "empty cluster");
                for (auto& c : k.members) {
                    check_cube(c);
                    if (!(c.mass > cov.delta)) fail(at + "cluster member at or below delta");
                }
                if (detect_clusters(k.members).size() != 1) fail(at + "cluster not connected");
                double again = enlarge(k, cov.tau, eps).integrate(rho);
                if (again != k.enlarged_mass) fail(at + "enlarged mass not reproducible");
            }
        for (auto& k : lev.class1) {
            if (k.klass != 1 || !(k.enlarged_mass < 1.0 + cov.delta)) fail(at + "class1 threshold");
            if (static_cast<double>(k.members.size()) > std::floor(1.0 / cov.delta) + 2.0)
                fail(at + "class1 cluster too large");
            accounted += k.member_mass();
            for (auto& c : k.members) exclusive.push_back(c.box(eps));
        }
        for (auto& k : lev.class2)
            if (k.klass != 2 || !(k.enlarged_mass >= 1.0 + cov.delta)) fail(at + "class2 threshold");

        std::sort(got.begin(), got.end());
        if (got != expect) fail(at + "cubes are not a partition of the children of class2 cubes");
        // clusters at one level must be mutually non-adjacent
        std::vector<Cube> pooled;
        for (auto& k : same_level) pooled.insert(pooled.end(), k.members.begin(), k.members.end());
        if (detect_clusters(pooled).size() != same_level.size()) fail(at + "adjacent distinct clusters");
        if (!enlarged_regions_disjoint(same_level, cov.tau, eps)) fail(at + "enlarged regions overlap");
        if (n + 1 == cov.levels.size())
            for (auto& k : lev.class2) accounted += k.member_mass();
    }
    if (cov.terminated && cov.levels.size() > 1 && !cov.levels.back().class2.empty())
        fail("terminated but class2 remains");

    std::sort(exclusive.begin(), exclusive.end(), [](const Box& a, const Box& b) { return a.lo[0] < b.lo[0]; });
    for (size_t i = 0; i < exclusive.size(); ++i)
        for (size_t j = i + 1; j < exclusive.size() && exclusive[j].lo[0] < exclusive[i].hi[0]; ++j)
            if (exclusive[i].overlaps_open(exclusive[j])) {
                fail("class0/class1 regions overlap");
                i = exclusive.size();
                break;
            }

    const double total = rho.total_mass();
    if (std::abs(total - accounted) > rel_tol * std::max(total, 1e-300) && total > 0)
        fail("mass not conserved: total " + std::to_string(total) + " vs " + std::to_string(accounted));
    return bad;
}

nlohmann::ordered_json covering_to_json(const Covering& cov) {
    using nlohmann::ordered_json;
    ordered_json j;
    j["schema"] = "ltlab.covering/1";
    j["dim"] = cov.dim;
    j["epsilon"] = cov.epsilon.str();
    j["delta"] = cov.delta;
    j["tau"] = cov.tau;
    j["max_depth"] = cov.max_depth;
    j["levels"] = ordered_json::array();
    for (auto& lev : cov.levels) {
        ordered_json l;
        l["n"] = lev.n;
        l["class0"] = ordered_json::array();
        for (auto& c : lev.class0) l["class0"].push_back(ordered_json{{"index", c.index}, {"mass", c.mass}});
        l["clusters"] = ordered_json::array();
        for (auto* group : {&lev.class1, &lev.class2})
            for (auto& k : *group) {
                ordered_json cj;
                cj["class"] = k.klass;
                cj["members"] = ordered_json::array();
                cj["member_mass"] = ordered_json::array();
                for (auto& c : k.members) {
                    cj["members"].push_back(c.index);
                    cj["member_mass"].push_back(c.mass);
                }
                cj["enlarged_mass"] = k.enlarged_mass;
                l["clusters"].push_back(std::move(cj));
            }
        j["levels"].push_back(std::move(l));
    }
    j["terminated"] = cov.terminated;
    return j;
}

Covering covering_from_json(const nlohmann::ordered_json& j) {
    try {
        Covering cov;
        cov.dim = j.at("dim").get<int>();
        cov.epsilon = Ratio::parse(j.at("epsilon").get<std::string>());
        cov.delta = j.at("delta").get<double>();
        cov.tau = j.value("tau", kDefaultTau);
        cov.max_depth = j.value("max_depth", 20);
        cov.terminated = j.at("terminated").get<bool>();
        for (auto& lj : j.at("levels")) {
            Level lev;
            lev.n = lj.at("n").get<int>();
            const double side = cov.epsilon.side(lev.n);
            for (auto& cj : lj.at("class0"))
                lev.class0.push_back(Cube{lev.n, cj.at("index").get<Index>(), side, cj.at("mass").get<double>()});
            for (auto& kj : lj.at("clusters")) {
                Cluster k;
                k.level = lev.n;
                k.klass = kj.at("class").get<int>();
                k.enlarged_mass = kj.at("enlarged_mass").get<double>();
                auto members = kj.at("members");
                auto masses = kj.at("member_mass");
                for (size_t i = 0; i < members.size(); ++i)
                    k.members.push_back(Cube{lev.n, members[i].get<Index>(), side, masses.at(i).get<double>()});
                (k.klass == 2 ? lev.class2 : lev.class1).push_back(std::move(k));
            }
            cov.levels.push_back(std::move(lev));
        }
        return cov;
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("covering json: ") + e.what());
    }
}

}  // namespace ltlab::geometry
