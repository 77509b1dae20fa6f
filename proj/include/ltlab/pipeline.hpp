#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "ltlab/energy.hpp"
#include "ltlab/geometry.hpp"
#include "ltlab/interaction.hpp"
#include "ltlab/states.hpp"

namespace ltlab::pipeline {

using geometry::Box;
using geometry::Covering;
using geometry::DensityOracle;
using states::GridField;

// Unnamed constants of the lower-bound chain. One scalar per context.
struct Constants {
    double C_unc = 2.5;    // cube uncertainty error
    double C_err = 2.5;    // cluster uncertainty error
    double C_int = 4.0;    // interaction credit denominator
    double C_delta = 10.0; // the C in the delta choice
    double C_pred = 1.0;   // prefactor of the predicted gap
    double gn_reference = 0.0;

    nlohmann::ordered_json to_json() const;
};

struct DeltaChoice {
    double delta = 0.5;
    std::string branch;  // "half", "C", "lambda"
};
// min{1/2, (1/C)^{d/2s}, (C/lambda)^{1/(1+2s+eta)}}
DeltaChoice delta_choice(int d, double s, double lambda, double C, double eta);

struct LevelLedger {
    int n = 0;
    int class0_count = 0;
    int class1_count = 0;
    double class0_uncertainty_gain = 0.0;
    double class1_uncertainty_gain = 0.0;
    double class0_error = 0.0;
    double class1_error = 0.0;
    double interaction_credit = 0.0;
};

struct BoundLedger {
    int d = 1;
    double s = 1.0;
    double lambda = 0.0;
    bool hardy = false;
    Constants constants;
    double delta_used = 0.0;
    std::string delta_branch;
    double eta = 0.0, k = 0.0;
    std::vector<LevelLedger> per_level;
    double power_integral = 0.0;  // int rho^{1+2s/d}, root frame
    double gains = 0.0, errors = 0.0, credits = 0.0;
    double assembled_lower = 0.0;  // coefficient on int rho^{1+2s/d}
    double gn_reference = 0.0;
    double predicted = 0.0;  // gn_reference - C_pred lambda^{-k}
    bool credits_cover_errors = false;
    bool below_reference = false;
};

struct AssembleOptions {
    bool hardy = false;
};

// covering of rho built at the delta the chain needs for this lambda
Covering chain_covering(const DensityOracle& rho, double lambda, double s, const Constants& c,
                        geometry::Ratio eps, int max_depth = 20, bool hardy = false);

BoundLedger assemble_lower_bound(const DensityOracle& rho, const Covering& cov, double lambda, double s,
                                 const Constants& c, const AssembleOptions& opt = {});
BoundLedger assemble_lower_bound(const states::ManyBodyState& state, const Covering& cov, double lambda, double s,
                                 const Constants& c, const AssembleOptions& opt = {});

nlohmann::ordered_json bound_ledger_to_json(const BoundLedger& l);
void bound_ledger_to_csv(std::ostream& os, const BoundLedger& l);

// ---- trial states ----

// support extent of |u| along axis 0, in cells: first and last nonzero index
std::pair<int, int> support_cells(const GridField& u, double threshold = 0.0);

// GN-type orbital multiplied by a smooth window vanishing outside radius r
GridField tapered(const GridField& u, double radius);

struct TrialValue {
    double value = 0.0;
    double kinetic = 0.0;
    interaction::Estimate interaction;
    double power_integral = 0.0;
    double ell = 0.0;  // lattice-snapped separation
};

TrialValue run_trial_upper(const GridField& u, int N, double ell, double lambda, double s, size_t samples,
                           std::uint64_t seed);

// N copies of a one-body density, translated along axis 0 by multiples of ell, seen in a root
// frame of side frame; supports of distinct copies must not overlap
class TranslatedCopies : public DensityOracle {
public:
    TranslatedCopies(states::DensityProfile base, int N, double ell, double frame);
    int dim() const override { return base_.dim(); }
    double box_mass(const Box& root) const override;
    double total_mass() const override { return N_ * base_.total_mass(); }
    bool pointwise() const override { return true; }
    double box_power_integral(const Box& root, double p) const override;
    double frame() const { return frame_; }
    std::vector<double> offsets() const;

private:
    Box physical(const Box& root, int j) const;
    states::DensityProfile base_;
    int N_;
    double ell_, frame_;
};

// separated-copies trial value without a common grid; copies must not overlap
TrialValue separated_trial(const GridField& u, int N, double ell, double lambda, double s, size_t samples,
                           std::uint64_t seed);

struct ScanConfig {
    int d = 1;
    double s = 1.0;
    int N = 3;
    std::vector<double> lambdas;
    std::vector<double> ell_factors = {2.5, 4.0, 8.0, 16.0};  // in units of the support radius
    double ell_exponent = 0.75;  // separations grow like lambda^{ell_exponent / s}
    size_t samples = 4000;
    std::uint64_t seed = 1;
    int threads = 1;
    geometry::Ratio eps{2};
    int max_depth = 20;
    Constants constants;
};

struct ScanRow {
    double lambda = 0.0;
    double trial_upper = 0.0;
    double ell = 0.0;
    std::string orbital;
    double assembled_lower = 0.0;
    double gn_gap_prediction = 0.0;
    double delta_used = 0.0;
    std::string delta_branch;
    bool ordered = false;  // trial_upper >= assembled_lower
};

struct QuotientScan {
    ScanConfig config;
    double gn_value = 0.0;
    std::vector<std::pair<std::string, double>> orbitals;  // name, one-body quotient
    std::vector<ScanRow> rows;
    std::vector<BoundLedger> ledgers;
    bool ordered = false;
    bool gap_non_increasing = false;
};

struct TrialOrbital {
    std::string name;
    GridField u;
};

// tapered GN minimizer and a cos^2 bump on the given grid
std::vector<TrialOrbital> trial_orbitals(const GridField& gn_minimizer, double radius);

QuotientScan scan_lambda(const ScanConfig& cfg, double gn_value, const std::vector<TrialOrbital>& orbitals);

void scan_to_csv(std::ostream& os, const QuotientScan& scan);

}  // namespace ltlab::pipeline
