#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "ltlab/geometry.hpp"
#include "ltlab/states.hpp"

namespace ltlab::interaction {

using geometry::Point;
using states::Configurations;
using states::ManyBodyState;

inline constexpr int kBruteForceLimit = 64;

std::vector<double> nn_distances(const std::vector<Point>& pts);
std::vector<double> nn_distances_brute(const std::vector<Point>& pts);
std::vector<double> nn_distances_indexed(const std::vector<Point>& pts);

// fixed-order pairwise summation
double pairwise_sum(const std::vector<double>& v);

struct Estimate {
    double mean = 0.0;
    double std_error = 0.0;
    size_t samples = 0;
    size_t rejected = 0;
};

double config_interaction(const std::vector<Point>& pts, double s);  // sum_i delta_i^{-2s}
Estimate batch_interaction(const Configurations& batch, double s);
Estimate interaction_energy(const ManyBodyState& state, double s, size_t samples, std::uint64_t seed,
                            const states::SamplingOptions& opt = {});

struct LevelTerm {
    int n = 0;
    double Rn = 0.0;  // physical units
    int ball_count = 0;
    int overlap = 0;  // measured C_n
    double layer_coefficient = 0.0;  // (R_n^{-2s} - R_{n-1}^{-2s}) / (2 C_n)
    double covered_mass = 0.0;       // sum_m of certified ball masses
    double term_value = 0.0;
    double simplified_value = 0.0;
    double radius = 0.0;
    std::vector<Point> centers;  // physical
};

struct ExclusionLedger {
    double s = 0.0;
    double delta = 0.0;
    double length_scale = 1.0;  // physical length of the root box side
    std::vector<LevelTerm> per_level;
    double total_lower_bound = 0.0;
    double simplified_total = 0.0;
};

ExclusionLedger layered_lower_bound(const geometry::Covering& cov, const geometry::DensityOracle& rho, double s,
                                    double delta, double length_scale = 1.0);
ExclusionLedger layered_lower_bound(const geometry::Covering& cov, const states::DensityProfile& rho, double s,
                                    double delta);

nlohmann::ordered_json ledger_to_json(const ExclusionLedger& l);
void ledger_to_csv(std::ostream& os, const ExclusionLedger& l);

// the two displays in the proof of the layered bound, checked on every sample
struct SampleAudit {
    size_t samples = 0;
    size_t layer_violations = 0;
    size_t ball_violations = 0;
    double worst_layer_slack = 0.0;  // min over samples of lhs - rhs (relative)
};
SampleAudit audit_samples(const Configurations& batch, const ExclusionLedger& l);

struct ExclusionReport {
    Estimate interaction;
    double lower_bound = 0.0;
    double simplified_lower_bound = 0.0;
    double ratio = 0.0;  // interaction / lower bound; the measured constant surrogate
    bool pass = false;
    SampleAudit audit;
    ExclusionLedger ledger;
};
ExclusionReport verify_exclusion(const ManyBodyState& state, const geometry::Covering& cov, double s,
                                 double delta, size_t samples, std::uint64_t seed,
                                 const states::SamplingOptions& opt = {});

}  // namespace ltlab::interaction
