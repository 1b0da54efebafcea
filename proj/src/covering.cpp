#include "dvz/covering.hpp"

#include <algorithm>
#include <cmath>

#include "dvz/errors.hpp"
#include "dvz/rng.hpp"
#include "dvz/stats.hpp"

namespace dvz {

CoveringSample sample_omegas(std::uint64_t seed, std::int64_t n)
{
    if (n < 1)
        throw ValidationError("sample_omegas: N must be >= 1");
    CoveringSample s;
    s.seed = seed;
    s.omegas.reserve(static_cast<std::size_t>(n));
    const CounterStream stream(seed, Stream::omega);
    for (std::int64_t k = 1; k <= n; ++k)
        s.omegas.emplace_back(stream.uniform(static_cast<std::uint64_t>(k)));
    return s;
}

std::vector<Arc> covering_arcs(const CoveringSample& sample, const LengthSequence& seq, std::int64_t n)
{
    if (n < 0 || n > sample.size())
        throw ValidationError("truncation level n=" + std::to_string(n) + " exceeds the sample size " +
                              std::to_string(sample.size()));
    std::vector<Arc> arcs;
    arcs.reserve(static_cast<std::size_t>(n));
    for (std::int64_t k = 1; k <= n; ++k)
        arcs.emplace_back(sample.omegas[static_cast<std::size_t>(k - 1)], std::min(seq(k), 1.0));
    return arcs;
}

ArcSet noncovered_set(const CoveringSample& sample, const LengthSequence& seq, std::int64_t n)
{
    return arc_complement(arc_union(covering_arcs(sample, seq, n)));
}

double expected_uncovered_measure(const LengthSequence& seq, std::int64_t n)
{
    double log_p = 0.0;
    for (std::int64_t k = 1; k <= n; ++k) {
        const double l = seq(k);
        if (l >= 1.0)
            throw DomainError("expected_uncovered_measure: l_" + std::to_string(k) + " >= 1");
        log_p += std::log1p(-l);
    }
    return std::exp(log_p);
}

std::int64_t count_boxes(const ArcSet& s, double eps, double anchor)
{
    if (!(eps > 0.0 && eps <= 1.0))
        throw DomainError("count_boxes: scale must lie in (0, 1]");
    const auto boxes = static_cast<std::int64_t>(std::ceil(1.0 / eps - 1e-9));
    if (s.full())
        return boxes;
    auto box_of = [&](double x) {
        return std::min(static_cast<std::int64_t>(std::floor(x / eps)), boxes - 1);
    };
    // index ranges of boxes met by each closed arc, on the circle re-based at the anchor
    std::vector<std::pair<std::int64_t, std::int64_t>> ranges;
    ranges.reserve(s.size() + 1);
    for (const Arc& a : s.arcs()) {
        const double x0 = CirclePoint::wrap(a.start().position() - anchor);
        const double x1 = x0 + a.length();
        if (x1 < 1.0) {
            ranges.emplace_back(box_of(x0), box_of(x1));
        } else {
            ranges.emplace_back(box_of(x0), boxes - 1);
            ranges.emplace_back(0, box_of(x1 - 1.0));
        }
    }
    std::sort(ranges.begin(), ranges.end());
    std::int64_t total = 0;
    std::int64_t lo = ranges.front().first, hi = ranges.front().second;
    for (std::size_t i = 1; i < ranges.size(); ++i) {
        if (ranges[i].first <= hi + 1) {
            hi = std::max(hi, ranges[i].second);
        } else {
            total += hi - lo + 1;
            lo = ranges[i].first;
            hi = ranges[i].second;
        }
    }
    total += hi - lo + 1;
    return std::min(total, boxes);
}

DimensionEstimate box_dimension(const ArcSet& s, double eps_min, double eps_max, int levels,
                                const BoxCountOptions& opts)
{
    if (s.empty())
        throw DomainError("box_dimension: empty set has no dimension");
    if (!(eps_min > 0.0 && eps_min < eps_max && eps_max <= 1.0))
        throw ValidationError("box_dimension: need 0 < eps_min < eps_max <= 1");
    if (levels < 2)
        throw ValidationError("box_dimension: need at least two scales");

    DimensionEstimate est;
    std::vector<double> x, y;
    const double ratio = std::log2(eps_min / eps_max);
    for (int j = 0; j < levels; ++j) {
        const double eps = j == levels - 1 ? eps_min
                                           : eps_max * std::exp2(ratio * static_cast<double>(j) / (levels - 1));
        const std::int64_t n = count_boxes(s, eps, opts.anchor);
        est.scales.push_back(eps);
        est.box_counts.push_back(n);
        x.push_back(std::log(1.0 / eps));
        y.push_back(std::log(static_cast<double>(n)));
    }
    const LinearFit fit = least_squares(x, y);
    est.slope = fit.slope;
    est.stderr_ = fit.slope_stderr;
    return est;
}

} // namespace dvz
