#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "dvz/chaos.hpp"
#include "dvz/stats.hpp"

namespace dvz {

/// Separation parameters for the region A_delta(t) of T^d and the strip S_eta.
struct RegionSpec {
    double delta = 0.1;
    int d = 1;
    std::optional<double> eta;

    /// Throws ValidationError unless 0 < delta < 1/(2(d+1)) and 0 < eta <= delta/2.
    void validate() const;
    std::uint64_t fingerprint() const;
};

/// First pair (i, j), i < j, with ||p_i - p_j|| < delta.
std::optional<std::pair<int, int>> first_close_pair(std::span<const CirclePoint> pts, double delta);

/// Uniform samples of A_delta(base)^c: tuples t_1..t_d with all d+1 points
/// t_1, ..., t_d, base - sum t_i pairwise at distance >= delta.
struct RegionSample {
    int d = 1;
    CirclePoint base;
    std::vector<CirclePoint> flat; // tuple i occupies [i*d, (i+1)*d)
    std::int64_t proposed = 0;
    double acceptance_rate = 0.0; // estimates the volume of the region

    std::int64_t count() const { return static_cast<std::int64_t>(flat.size()) / d; }
    std::span<const CirclePoint> tuple(std::int64_t i) const
    {
        return {flat.data() + i * d, static_cast<std::size_t>(d)};
    }
};

inline constexpr std::int64_t kRegionProbeProposals = 1'000'000;
inline constexpr double kRegionMinAcceptance = 1e-4;

RegionSample sample_A_delta_complement(const RegionSpec& spec, std::uint64_t seed, std::int64_t count,
                                       CirclePoint base = CirclePoint(0.0));

/// F_n(t_hat, base) through a precomputed density field.
double F_n_field(const DensityField& field, std::span<const CirclePoint> t_hat, CirclePoint base);

/// int_{A_delta(base)^c} F_n(t_hat, base) d t_hat for one realization:
/// region volume times the mean of F_n over the region sample.
double separated_integral(const DensityField& field, const RegionSample& region);

/// Per-realization J_n with its own region sample.
double estimate_Jn(const CoveringSample& sample, const LengthSequence& seq, std::int64_t n, const RegionSpec& spec,
                   std::int64_t mc, std::uint64_t region_seed);

struct SeedRange {
    std::uint64_t base = 1;
    std::int64_t count = 1;
    std::uint64_t seed(std::int64_t i) const { return base + static_cast<std::uint64_t>(i); }
};

struct JnSummary {
    std::vector<double> per_seed;
    ExpectationEstimate first_moment;  // E[J_n]
    ExpectationEstimate second_moment; // E[J_n^2]
    double region_volume = 0.0;
};

JnSummary estimate_Jn_over_seeds(const LengthSequence& seq, std::int64_t n, const RegionSpec& spec, std::int64_t mc,
                                 std::uint64_t region_seed, SeedRange seeds);

struct JnPair {
    std::int64_t n = 0;
    std::int64_t m = 0;
    ExpectationEstimate squared_difference; // E[(J_n - J_m)^2]
};

struct JnStabilization {
    std::vector<std::int64_t> levels;
    std::vector<std::vector<double>> per_seed; // [seed][level]
    std::vector<JnPair> pairs;                 // consecutive levels
};

/// J_n along one omega stream per seed and one region sample shared by all
/// levels and seeds.
JnStabilization jn_stabilization(const LengthSequence& seq, const RegionSpec& spec,
                                 const std::vector<std::int64_t>& n_list, SeedRange seeds, std::int64_t mc,
                                 std::uint64_t region_seed);

/// Proposals (t, t_1..t_d) uniform on T^{d+1}, shared across delta values.
struct NearDiagonalProposals {
    int d = 1;
    std::vector<CirclePoint> flat; // proposal i: [i*(d+1)] = t, then t_1..t_d
    std::int64_t count() const { return static_cast<std::int64_t>(flat.size()) / (d + 1); }
};

NearDiagonalProposals near_diagonal_proposals(int d, std::int64_t count, std::uint64_t seed);

/// int_T int_{A_delta(t)} F_n(t_hat, t) d t_hat dt for one realization.
double near_diagonal_integral(const DensityField& field, const NearDiagonalProposals& proposals, double delta);

/// L_n^(delta) = E[(int_T int_{A_delta(t)} F_n)^{1/2}] over the seed range.
ExpectationEstimate estimate_Ln_delta(const LengthSequence& seq, std::int64_t n, const RegionSpec& spec,
                                      std::int64_t mc, std::uint64_t proposal_seed, SeedRange seeds);

struct HProductReport {
    double value = 0.0;
    double log_value = 0.0;
    std::int64_t exact_terms = 0;  // factors computed from the union measure
    double exact_log = 0.0;
    double tail_log = 0.0;         // closed-form factors, configuration independent
    double remainder_bound = 0.0;  // bound on the neglected part of tail_log
};

/// log of the closed-form factor (1 - m l)/(1 - l)^m, m = 2(d+1).
double h_tail_log_factor(double ell, int d);

/// H(t_hat, t_hat') = prod_k E[prod_i P_k(t_i) P_k(t_i')], both tuples at base 0.
HProductReport H_product(std::span<const CirclePoint> t_hat, std::span<const CirclePoint> t_hat_prime,
                         const LengthSequence& seq, const RegionSpec& spec);

/// prod_{k<=n} of the same factors (the exact E[F_n(t_hat,0) F_n(t_hat',0)]).
double joint_moment_exact(std::span<const CirclePoint> t_hat, std::span<const CirclePoint> t_hat_prime,
                          const LengthSequence& seq, std::int64_t n);

/// Monte Carlo of E[F_n(t_hat,0) F_n(t_hat',0)] with `draws` independent omega vectors.
ExpectationEstimate joint_moment_mc(std::span<const CirclePoint> t_hat, std::span<const CirclePoint> t_hat_prime,
                                    const LengthSequence& seq, std::int64_t n, std::int64_t draws, std::uint64_t seed);

struct DominatedBoundReport {
    double lhs = 0.0;   // E[F_n(t_hat,0) F_n(t_hat',0)]
    double rhs = 0.0;   // prod_i K(t_i - t_i')
    double ratio = 0.0;
};

DominatedBoundReport dominated_bound_check(std::span<const CirclePoint> t_hat,
                                           std::span<const CirclePoint> t_hat_prime, const LengthSequence& seq,
                                           std::int64_t n);

struct SandwichRow {
    double distance = 0.0;
    double pair_correlation = 0.0;
    double kernel = 0.0; // K_n(distance)
    double ratio = 0.0;
};

struct SandwichReport {
    std::vector<SandwichRow> rows;
    double min_ratio = 0.0;
    double max_ratio = 0.0;
    double constant = 0.0; // smallest C with 1/C <= ratio <= C on the rows
};

/// pair_correlation_exact(0, u) / K_n(u) over the given distances.
SandwichReport pair_kernel_sandwich(const LengthSequence& seq, std::int64_t n, std::span<const double> distances);

/// `count` log-spaced distances from lo to hi inclusive.
std::vector<double> log_spaced(double lo, double hi, int count);

} // namespace dvz
