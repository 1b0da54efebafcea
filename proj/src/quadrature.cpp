// Finiteness estimate for int_{T^d} K(t_1)...K(t_d) K(-sum t_i) dt.

#include <algorithm>
#include <cmath>
#include <limits>

#include "dvz/errors.hpp"
#include "dvz/lengths.hpp"
#include "dvz/rng.hpp"

namespace dvz {

namespace {

// K on [0, 1) with K(t) = K(1 - t). Prefix sums of l are tabulated once down to
// the smallest argument the caller will ask for.
class KernelTable {
public:
    KernelTable(const LengthSequence& seq, double t_min)
        : seq_(seq), alpha_(seq.alpha())
    {
        if (!alpha_) {
            const std::int64_t n = seq.count_above(t_min);
            prefix_.resize(static_cast<std::size_t>(n) + 1, 0.0);
            for (std::int64_t k = 1; k <= n; ++k)
                prefix_[static_cast<std::size_t>(k)] = prefix_[static_cast<std::size_t>(k - 1)] + seq(k);
        }
    }

    double operator()(double t) const
    {
        t = std::min(t, 1.0 - t);
        if (t <= 0.0)
            return std::numeric_limits<double>::infinity();
        const std::int64_t n = seq_.count_above(t);
        const double s = alpha_ ? seq_.prefix_sum(n) : prefix_.at(static_cast<std::size_t>(n));
        return std::exp(s - static_cast<double>(n) * t);
    }

private:
    const LengthSequence& seq_;
    std::optional<double> alpha_;
    std::vector<double> prefix_;
};

double dist0(double t)
{
    t -= std::floor(t);
    return std::min(t, 1.0 - t);
}

double quad_d1(const KernelTable& K, std::int64_t G)
{
    const double h = 1.0 / static_cast<double>(G);
    double sum = 0.0;
    for (std::int64_t i = 1; i + 1 < G; ++i) {
        const double k = K((static_cast<double>(i) + 0.5) * h);
        sum += k * k;
    }
    return sum * h;
}

double quad_d2(const KernelTable& K, std::int64_t G)
{
    const double h = 1.0 / static_cast<double>(G);
    const auto g = static_cast<std::size_t>(G);
    std::vector<double> mid(g), node(g);
    for (std::size_t i = 0; i < g; ++i) {
        mid[i] = K((static_cast<double>(i) + 0.5) * h);
        node[i] = i == 0 ? 0.0 : K(static_cast<double>(i) * h);
    }
    // cells i, j in {0, G-1} lie within one step of t_i = 0; node[0] removes t_1 + t_2 = 0
    double sum = 0.0;
    for (std::size_t i = 1; i + 1 < g; ++i) {
        double row = 0.0;
        for (std::size_t j = 1; j + 1 < g; ++j)
            row += mid[j] * node[(i + j + 1) & (g - 1)];
        sum += mid[i] * row;
    }
    return sum * h * h;
}

double stratified(const KernelTable& K, int d, std::int64_t G, std::uint64_t seed)
{
    const double h = 1.0 / static_cast<double>(G);
    std::int64_t cells = 1;
    for (int i = 0; i < d; ++i) {
        if (cells > std::numeric_limits<std::int64_t>::max() / G)
            throw DomainError("stratified quadrature: too many strata");
        cells *= G;
    }
    const CounterStream stream(seed, Stream::stratified, static_cast<std::uint64_t>(G));
    std::vector<std::int64_t> idx(static_cast<std::size_t>(d), 0);
    double sum = 0.0;
    for (std::int64_t c = 0; c < cells; ++c) {
        std::int64_t rem = c;
        double s = 0.0, prod = 1.0;
        bool keep = true;
        for (int i = 0; i < d; ++i) {
            const std::int64_t k = rem % G;
            rem /= G;
            const double u = stream.uniform(static_cast<std::uint64_t>(c) * static_cast<std::uint64_t>(d) +
                                            static_cast<std::uint64_t>(i));
            const double t = (static_cast<double>(k) + u) * h;
            if (dist0(t) < h) {
                keep = false;
                break;
            }
            s += t;
            prod *= K(t);
        }
        if (!keep || dist0(s) < h)
            continue;
        sum += prod * K(dist0(s));
    }
    return sum / static_cast<double>(cells);
}

double truncated_integral(const KernelTable& K, int d, std::int64_t G, std::uint64_t seed)
{
    if (d == 1)
        return quad_d1(K, G);
    if (d == 2)
        return quad_d2(K, G);
    return stratified(K, d, G, seed);
}

} // namespace

std::vector<std::int64_t> default_l1_levels(int d)
{
    if (d == 1)
        return {1 << 12, 1 << 16, 1 << 20};
    if (d == 2)
        return {1 << 10, 1 << 11, 1 << 12};
    return {1 << 4, 1 << 5, 1 << 6};
}

ConditionVerdict l1_condition_estimate(const LengthSequence& seq, int d, const L1ConditionOptions& opts)
{
    if (d < 1)
        throw DomainError("l1_condition_estimate: d must be >= 1");
    const std::vector<std::int64_t> levels = opts.levels.empty() ? default_l1_levels(d) : opts.levels;
    for (std::size_t i = 0; i < levels.size(); ++i) {
        const std::int64_t G = levels[i];
        if (G < 4 || (G & (G - 1)) != 0)
            throw ValidationError("l1_condition_estimate: resolutions must be powers of two >= 4");
        if (i > 0 && G <= levels[i - 1])
            throw ValidationError("l1_condition_estimate: resolutions must increase");
    }

    const double h_min = 0.5 / static_cast<double>(levels.back());
    const KernelTable K(seq, h_min);

    // Origin exponent of the integrand: homogeneous of degree -(d+1)*alpha near 0,
    // so the excluded shell of width h carries ~ h^p with p = d - (d+1)*alpha.
    double local_alpha;
    if (auto a = seq.alpha()) {
        local_alpha = *a;
    } else {
        const double h = 1.0 / static_cast<double>(levels.back());
        local_alpha = std::log(K(h) / K(2.0 * h)) / std::log(2.0);
    }
    const double p = static_cast<double>(d) - static_cast<double>(d + 1) * local_alpha;

    ConditionVerdict v{ConditionKind::Eq3, Classification::inconclusive, Method::numeric, {}};
    std::vector<double> est;
    for (std::int64_t G : levels) {
        const double fine = truncated_integral(K, d, G, opts.mc_seed);
        double value = fine;
        if (p > 1e-9) {
            const double coarse = truncated_integral(K, d, G / 2, opts.mc_seed);
            value = fine + (fine - coarse) / (std::exp2(p) - 1.0);
        }
        est.push_back(value);
        v.partial_values.emplace_back(static_cast<double>(G), value);
    }

    const auto& th = opts.thresholds;
    const std::size_t m = est.size();
    if (m >= 2) {
        const double change = std::abs(est[m - 1] - est[m - 2]) / std::abs(est[m - 2]);
        bool growing = true;
        for (std::size_t i = (m >= 3 ? m - 2 : 1); i < m; ++i)
            growing = growing && (est[i] / est[i - 1] - 1.0 > th.sustained_growth);
        if (change < th.stable_change)
            v.classification = Classification::satisfied;
        else if (growing)
            v.classification = Classification::violated;
    }
    return v;
}

} // namespace dvz
