#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "ltlab/energy.hpp"
#include "ltlab/interaction.hpp"
#include "ltlab/states.hpp"

namespace ltlab::solvers {

using geometry::Box;
using geometry::Point;
using states::GridField;
using states::GridSpec;

struct QuotientProblem {
    int d = 1;
    double s = 1.0;
    bool hardy = false;
    GridSpec grid;

    double quotient(const GridField& u) const;
};

enum class Preset { Gaussian, Plateau, TwoBump };
GridField preset_field(const GridSpec& g, Preset p);
std::string preset_name(Preset p);

struct TraceRow {
    int step = 0;
    double value = 0.0;
    double step_size = 0.0;
};

struct MinimizeOptions {
    int max_steps = 4000;
    double tolerance = 1e-10;
    int window = 20;
    int divergence_steps = 50;
};

struct MinimizeResult {
    double value = 0.0;
    GridField minimizer;
    std::vector<TraceRow> trace;
    std::string start;  // preset or "given"
    bool converged = false;
};

MinimizeResult minimize_quotient(const QuotientProblem& pb, const GridField& init, const MinimizeOptions& opt = {});
// runs every preset plus optional extra starts, returns the best
MinimizeResult minimize_quotient(const QuotientProblem& pb, const std::vector<GridField>& extra_starts = {},
                                 const MinimizeOptions& opt = {});
void write_trace_csv(std::ostream& os, const std::vector<TraceRow>& trace);

struct UncertaintyEstimate {
    bool degenerate = false;
    double C1 = 0.0, C2 = 0.0;  // lattice pair
    double C_star = 0.0;        // smallest C with C1 = C2 = C, unrestricted
    double seminorm = 0.0, mass = 0.0, power_integral = 0.0;
};

std::vector<double> constant_lattice();  // log grid over [1e-2, 1e4], 25 per decade
UncertaintyEstimate estimate_local_uncertainty_constant(const GridField& u, const Box& cube, double s);
UncertaintyEstimate estimate_local_uncertainty_constant(const GridField& u, const geometry::EnlargedRegion& r,
                                                        double s);
// batch: per-constant maxima over a family
UncertaintyEstimate aggregate(const std::vector<UncertaintyEstimate>& family);

enum class Boundary { Torus, Restricted };

struct SpectralBoundInstance {
    int d = 1;
    double s = 0.25;
    std::vector<Point> anchors;
    double beta = 0.0;
    GridSpec grid;
    Boundary boundary = Boundary::Torus;

    std::vector<double> half_distances() const;  // R_j, +inf for a lone anchor
    void validate() const;
};

struct SpectralResult {
    double neg_sum = 0.0;
    double rhs = 0.0;
    double ratio = 0.0;
    int negative_count = 0;
    double lowest = 0.0;
};

SpectralResult spectral_bound_check(const SpectralBoundInstance& inst);

struct FermionicResult {
    double kinetic = 0.0;
    interaction::Estimate interaction;
    double ratio = 0.0;
    double ratio_low = 0.0;  // kinetic / (mean + 3 se)
    bool capped = false;     // interaction indistinguishable from zero
};

inline constexpr double kRatioCap = 1e12;

FermionicResult fermionic_ratio(const states::ManyBodyState& st, double s, size_t samples, std::uint64_t seed,
                                const states::SamplingOptions& opt = {});

}  // namespace ltlab::solvers
