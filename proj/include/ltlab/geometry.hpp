#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "ltlab/errors.hpp"

namespace ltlab::geometry {

using Point = std::vector<double>;
using Index = std::vector<std::int64_t>;

struct Box {
    Point lo, hi;

    int dim() const { return static_cast<int>(lo.size()); }
    double volume() const;
    Point center() const;
    bool overlaps_open(const Box& o) const;
    bool contains_closed(const Box& o) const;
    Box intersect(const Box& o) const;  // may be empty (volume 0)
    bool empty() const;
    bool operator==(const Box&) const = default;
};

Box root_box(int d);
Box scaled(const Box& b, double factor);

// Exact reciprocal scale: epsilon = 1/den, den in {2,3}.
struct Ratio {
    int den = 2;

    double value() const { return 1.0 / den; }
    std::string str() const { return "1/" + std::to_string(den); }
    std::int64_t cells(int level) const;  // den^level
    double side(int level) const { return 1.0 / static_cast<double>(cells(level)); }
    static Ratio parse(const std::string& text);
    bool operator==(const Ratio&) const = default;
};

// Reentrant region oracle over axis-aligned boxes in the root frame.
class DensityOracle {
public:
    virtual ~DensityOracle() = default;
    virtual int dim() const = 0;
    virtual double box_mass(const Box& b) const = 0;
    virtual double total_mass() const { return box_mass(root_box(dim())); }
    virtual bool pointwise() const { return false; }
    // integral of rho^p over b; only for pointwise-evaluable densities
    virtual double box_power_integral(const Box& b, double p) const;
};

class UniformDensity : public DensityOracle {
public:
    UniformDensity(int d, double total, Box support);
    UniformDensity(int d, double total);
    int dim() const override { return d_; }
    double box_mass(const Box& b) const override;
    bool pointwise() const override { return true; }
    double box_power_integral(const Box& b, double p) const override;

private:
    int d_;
    double total_;
    Box support_;
};

// Sum of axis-aligned Gaussians truncated to the root box, each renormalized to its weight.
class GaussianMixture : public DensityOracle {
public:
    struct Bump {
        Point center;
        double width;
        double weight;
    };
    explicit GaussianMixture(std::vector<Bump> bumps);
    int dim() const override { return d_; }
    double box_mass(const Box& b) const override;
    const std::vector<Bump>& bumps() const { return bumps_; }

private:
    int d_;
    std::vector<Bump> bumps_;
    std::vector<double> norm_;
};

struct Cube {
    int level = 0;
    Index index;
    double side = 1.0;
    double mass = 0.0;

    Box box(Ratio eps) const;
    Point center(Ratio eps) const;
    bool operator==(const Cube&) const = default;
};

Box cube_box(int level, const Index& index, Ratio eps);

struct Cluster {
    int level = 0;
    std::vector<Cube> members;  // lexicographic by index
    double enlarged_mass = 0.0;
    int klass = 0;  // 1 or 2 once classified

    double member_mass() const;
    bool operator==(const Cluster&) const = default;
};

class EnlargedRegion {
public:
    EnlargedRegion(const Cluster& owner, double tau, Ratio eps);

    const Cluster& owner() const { return owner_; }
    double tau() const { return tau_; }
    double margin() const { return tau_ * side_; }
    const std::vector<Box>& boxes() const { return boxes_; }
    // strict: points on the dilated boundary are outside
    bool contains(const Point& x) const;
    // disjoint subboxes whose union is the region
    std::vector<Box> disjoint_pieces() const;
    double integrate(const DensityOracle& rho) const;

private:
    Cluster owner_;
    double tau_;
    Ratio eps_;
    double side_;
    std::vector<Box> boxes_;
};

struct Level {
    int n = 0;
    std::vector<Cube> class0;
    std::vector<Cluster> class1;
    std::vector<Cluster> class2;
    bool operator==(const Level&) const = default;
};

struct Covering {
    int dim = 1;
    Ratio epsilon;
    double delta = 0.5;
    double tau = 0.375;
    int max_depth = 20;
    std::vector<Level> levels;
    bool terminated = false;

    bool operator==(const Covering&) const = default;
    std::vector<Cube> class2_cubes(int level) const;
    int deepest_class2_level() const;  // -1 when only the root is class2
};

inline constexpr double kDefaultTau = 0.375;

Covering build_covering(const DensityOracle& rho, double delta, Ratio eps, int max_depth,
                        double tau = kDefaultTau);
std::vector<Cluster> detect_clusters(const std::vector<Cube>& cubes);
EnlargedRegion enlarge(const Cluster& cluster, double tau, Ratio eps);

// Violations of the covering invariants; empty when all hold.
std::vector<std::string> check_covering(const Covering& cov, const DensityOracle& rho,
                                        double rel_tol = 1e-9);
bool enlarged_regions_disjoint(const std::vector<Cluster>& clusters, double tau, Ratio eps);

nlohmann::ordered_json covering_to_json(const Covering& cov);
Covering covering_from_json(const nlohmann::ordered_json& j);

// ---- ball covers ----

struct BallCover {
    int level = 0;
    double radius = 0.0;
    std::vector<Point> centers;
    int overlap_bound = 0;
    double audited_coverage = 0.0;   // fraction of audit points of E inside some ball
    int audited_multiplicity = 0;    // max multiplicity seen on the audit sample
    std::vector<double> ball_mass_lower;
};

double rn_radius(int d, double delta, Ratio eps, int n);  // R_n

// lexicographic greedy maximal separated subset of candidates
std::vector<Point> greedy_separated(const std::vector<Point>& candidates, double separation);
// exact maximum pointwise multiplicity of closed equal balls (d <= 2); sampled otherwise
int max_multiplicity(const std::vector<Point>& centers, double radius);
int multiplicity_at(const std::vector<Point>& centers, double radius, const Point& x);

struct MassBounds {
    double lower = 0.0;
    double upper = 0.0;
};
MassBounds ball_mass_bounds(const DensityOracle& rho, const Point& c, double r, double min_side);

BallCover build_ball_cover(const Covering& cov, int level, double delta, const DensityOracle& rho,
                           int audit_per_axis = 5);

}  // namespace ltlab::geometry
