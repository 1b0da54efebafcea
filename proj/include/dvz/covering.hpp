#pragma once

#include <cstdint>
#include <vector>

#include "dvz/circle.hpp"
#include "dvz/lengths.hpp"

namespace dvz {

/// Left endpoints omega_1..omega_N of the random intervals. omegas[k-1] is a
/// function of (seed, k) only, so samples with the same seed agree on their
/// common prefix.
struct CoveringSample {
    std::uint64_t seed = 0;
    std::vector<CirclePoint> omegas;
    bool synthetic = false; // loaded from a fixture rather than drawn

    std::int64_t size() const { return static_cast<std::int64_t>(omegas.size()); }
};

CoveringSample sample_omegas(std::uint64_t seed, std::int64_t n);

/// I_k = (omega_k, omega_k + min(l_k, 1)), k = 1..n.
std::vector<Arc> covering_arcs(const CoveringSample& sample, const LengthSequence& seq, std::int64_t n);

/// E_n = T \ (I_1 u ... u I_n).
ArcSet noncovered_set(const CoveringSample& sample, const LengthSequence& seq, std::int64_t n);

/// prod_{k<=n} (1 - l_k), the probability that a fixed point survives n intervals.
double expected_uncovered_measure(const LengthSequence& seq, std::int64_t n);

struct DimensionEstimate {
    std::vector<double> scales;            // strictly decreasing
    std::vector<std::int64_t> box_counts;
    double slope = 0.0;
    double stderr_ = 0.0;
};

struct BoxCountOptions {
    double anchor = 0.0; // grid origin
};

/// Box-counting dimension over `levels` geometrically spaced scales from
/// eps_max down to eps_min. With power-of-two endpoints the partitions are dyadic.
DimensionEstimate box_dimension(const ArcSet& s, double eps_min, double eps_max, int levels,
                                const BoxCountOptions& opts = {});

/// Number of boxes [anchor + i*eps, anchor + (i+1)*eps) meeting the closure of s.
std::int64_t count_boxes(const ArcSet& s, double eps, double anchor = 0.0);

} // namespace dvz
