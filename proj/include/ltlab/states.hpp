#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "ltlab/geometry.hpp"

namespace ltlab::states {

using cplx = std::complex<double>;
using geometry::Box;
using geometry::Point;

struct GridSpec {
    int dim = 1;
    double box_side = 24.0;
    int points = 256;

    size_t size() const;
    double dx() const { return box_side / points; }
    double cell_volume() const;
    double coord(int j) const { return -0.5 * box_side + (j + 0.5) * dx(); }
    Box domain() const;
    std::vector<int> unflatten(size_t flat) const;
    size_t flatten(const std::vector<int>& idx) const;
    Point point(size_t flat) const;
    Box cell(size_t flat) const;
    bool operator==(const GridSpec&) const = default;
};

class GridField {
public:
    GridField() = default;
    GridField(GridSpec grid, std::vector<cplx> values);
    static GridField sample(const GridSpec& grid, const std::function<cplx(const Point&)>& f);

    const GridSpec& grid() const { return grid_; }
    int dim() const { return grid_.dim; }
    double box_side() const { return grid_.box_side; }
    int points() const { return grid_.points; }
    double dx() const { return grid_.dx(); }
    const std::vector<cplx>& values() const { return values_; }

    double norm2() const;
    GridField normalized() const;
    GridField scaled(cplx c) const;
    bool is_normalized(double tol = 1e-10) const;

private:
    GridSpec grid_;
    std::vector<cplx> values_;
};

cplx inner(const GridField& a, const GridField& b);  // <a, b>, conjugate-linear in a

// common orbitals
GridField gaussian(const GridSpec& g, const Point& center, double width);
// cos^2 bump supported on the ball of the given radius
GridField cos2_bump(const GridSpec& g, const Point& center, double radius);
std::vector<GridField> orthonormalize(const std::vector<GridField>& fs);
// translate by an integer number of cells (exact on the lattice)
GridField shift_cells(const GridField& u, const std::vector<int>& cells);

enum class StateKind { Product, Slater };

class ManyBodyState {
public:
    static ManyBodyState product(std::vector<GridField> orbitals);
    static ManyBodyState slater(std::vector<GridField> orbitals);

    StateKind kind() const { return kind_; }
    const std::vector<GridField>& orbitals() const { return orbitals_; }
    int particles() const { return static_cast<int>(orbitals_.size()); }
    const GridSpec& grid() const { return orbitals_.front().grid(); }

private:
    ManyBodyState(StateKind k, std::vector<GridField> o) : kind_(k), orbitals_(std::move(o)) {}
    StateKind kind_;
    std::vector<GridField> orbitals_;
};

// Piecewise-constant one-body density on the lattice cells. As a geometry oracle
// it answers root-frame boxes, [-1/2,1/2]^d mapped onto the grid domain by scale L.
class DensityProfile : public geometry::DensityOracle {
public:
    DensityProfile(GridSpec grid, std::vector<double> cell_values, std::string source);

    const GridSpec& grid() const { return grid_; }
    const std::vector<double>& values() const { return values_; }
    const std::string& source() const { return source_; }

    int dim() const override { return grid_.dim; }
    double box_mass(const Box& root_frame) const override;
    double total_mass() const override { return total_; }
    bool pointwise() const override { return true; }
    double box_power_integral(const Box& root_frame, double p) const override;

    double physical_box_mass(const Box& b) const;
    double physical_power_integral(const Box& b, double p) const;
    double value_at(const Point& x) const;  // physical coordinates

private:
    double cumulative(const Point& x) const;
    GridSpec grid_;
    std::vector<double> values_;
    std::vector<double> prefix_;  // (M+1)^d corner sums of cell masses
    std::string source_;
    double total_ = 0.0;
};

DensityProfile density_of(const ManyBodyState& state);
DensityProfile density_of(const GridField& u);

// integral of rho^{1+2s/d}; region boxes are physical and must be disjoint, empty = whole box
double density_power_integral(const DensityProfile& rho, double s, const std::vector<Box>& region = {});
// generic oracle form: root-frame boxes; needs pointwise evaluation
double density_power_integral(const geometry::DensityOracle& rho, double s, const std::vector<Box>& region);

struct Configurations {
    int particles = 0;
    int dim = 0;
    size_t count = 0;
    std::uint64_t seed = 0;
    size_t rejected = 0;  // coincident-point redraws
    std::vector<double> coords;  // count x particles x dim

    const double* config(size_t k) const { return coords.data() + k * particles * dim; }
    Point point(size_t k, int i) const;
    std::vector<Point> points(size_t k) const;
};

struct SamplingOptions {
    int slater_cap = 8;
    int threads = 1;
    size_t chunk = 256;
};

Configurations sample_configurations(const ManyBodyState& state, size_t count, std::uint64_t seed,
                                     const SamplingOptions& opt = {});

// orbital files: one JSON header line, then raw little-endian complex128 values
void write_orbital(const std::string& path, const GridField& u);
GridField read_orbital(const std::string& path);
// density along axis 0 through the lattice row nearest the origin
void write_density_slice(std::ostream& os, const DensityProfile& rho);

}  // namespace ltlab::states
