#pragma once

#include <iosfwd>
#include <vector>

#include "ltlab/geometry.hpp"
#include "ltlab/states.hpp"

namespace ltlab::energy {

using geometry::Box;
using states::DensityProfile;
using states::GridField;

struct FractionalOrder {
    double s = 1.0;
    int m = 1;
    double sigma = 0.0;

    static FractionalOrder of(double s);
};

struct ParamTable {
    int d = 1;
    FractionalOrder s;
    double t0 = 0, t1 = 0, eta1 = 0, eta2 = 0, k1 = 0, k2 = 0;
    double hardy_c = 0;   // only when s < d/2
    double weight_c = 0;  // c_{d,sigma}; 1 when sigma = 0
    bool hardy_defined = false;
};

double hardy_constant(int d, double s);
double weight_constant(int d, double sigma);
ParamTable param_table(int d, double s);
void write_constants_csv(std::ostream& os, const std::vector<ParamTable>& rows);

double kinetic_energy(const GridField& u, double s);
GridField spectral_derivative(const GridField& u, const std::vector<int>& alpha);

// physical-coordinate union of disjoint boxes; empty means the whole grid domain
using Region = std::vector<Box>;
Region physical_region(const geometry::EnlargedRegion& r, double box_side);
// fraction of each lattice cell covered by the region
std::vector<double> cell_weights(const states::GridSpec& g, const Region& region);

struct SeminormOptions {
    int images = -1;  // periodic images per side; -1 picks by dimension
};

// int over [-1,1]^d of |w|^{2-d-2 sigma} prod(1-|w_k|), the same-cell kernel moment
double unit_cell_integral(int d, double sigma);

double local_seminorm(const GridField& u, const Region& region, double s, const SeminormOptions& opt = {});
double local_seminorm(const GridField& u, const geometry::EnlargedRegion& region, double s);

// C_{d,s} * int_region rho |x|^{-2s}
double hardy_energy(const DensityProfile& rho, const Region& region, int d, double s);
double hardy_energy(const GridField& u, const Region& region, int d, double s);
// lattice weights of |x|^{-2s} per cell (before the constant); shared with the spectral check
std::vector<double> hardy_cell_integrals(const states::GridSpec& g, double s, const Region& region = {});

}  // namespace ltlab::energy
