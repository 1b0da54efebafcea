#include "dvz/moments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <variant>

#include "dvz/errors.hpp"
#include "dvz/parallel.hpp"
#include "dvz/rng.hpp"

namespace dvz {

void RegionSpec::validate() const
{
    if (d < 1)
        throw ValidationError("region: d must be >= 1");
    const double max_delta = 1.0 / (2.0 * (d + 1));
    if (!(delta > 0.0 && delta < max_delta))
        throw ValidationError("region: delta must lie in (0, " + std::to_string(max_delta) + ")");
    if (eta && !(*eta > 0.0 && *eta <= delta / 2.0))
        throw ValidationError("region: eta must lie in (0, delta/2]");
}

std::uint64_t RegionSpec::fingerprint() const
{
    std::ostringstream os;
    os.precision(17);
    os << "region:" << delta << ':' << d << ':' << (eta ? *eta : -1.0);
    return fnv1a64(os.str());
}

std::optional<std::pair<int, int>> first_close_pair(std::span<const CirclePoint> pts, double delta)
{
    const int m = static_cast<int>(pts.size());
    for (int i = 0; i < m; ++i)
        for (int j = i + 1; j < m; ++j)
            if (circle_dist(pts[static_cast<std::size_t>(i)], pts[static_cast<std::size_t>(j)]) < delta)
                return std::pair{i, j};
    return std::nullopt;
}

namespace {

bool region_accepts(std::span<const CirclePoint> t_hat, CirclePoint base, double delta)
{
    return !first_close_pair(convolution_points(t_hat, base), delta);
}

} // namespace

RegionSample sample_A_delta_complement(const RegionSpec& spec, std::uint64_t seed, std::int64_t count,
                                       CirclePoint base)
{
    spec.validate();
    if (count < 1)
        throw ValidationError("region sampling: count must be >= 1");
    const auto d = static_cast<std::uint64_t>(spec.d);
    const CounterStream stream(seed, Stream::region);

    RegionSample out;
    out.d = spec.d;
    out.base = base;
    out.flat.reserve(static_cast<std::size_t>(count) * d);
    std::vector<CirclePoint> tuple(d);
    std::int64_t accepted = 0;
    std::uint64_t proposal = 0;
    while (accepted < count) {
        for (std::uint64_t i = 0; i < d; ++i)
            tuple[i] = CirclePoint(stream.uniform(proposal * d + i));
        ++proposal;
        if (region_accepts(tuple, base, spec.delta)) {
            out.flat.insert(out.flat.end(), tuple.begin(), tuple.end());
            ++accepted;
        }
        if (proposal == static_cast<std::uint64_t>(kRegionProbeProposals) &&
            static_cast<double>(accepted) / static_cast<double>(proposal) < kRegionMinAcceptance)
            throw RegionError("region too thin: acceptance rate below 1e-4 after 1e6 proposals; use a smaller delta");
    }
    out.proposed = static_cast<std::int64_t>(proposal);
    out.acceptance_rate = static_cast<double>(accepted) / static_cast<double>(proposal);
    return out;
}

double F_n_field(const DensityField& field, std::span<const CirclePoint> t_hat, CirclePoint base)
{
    double value = 1.0;
    double sum = 0.0;
    for (CirclePoint p : t_hat) {
        value *= field(p);
        if (value == 0.0)
            return 0.0;
        sum += p.position();
    }
    return value * field(CirclePoint(base.position() - sum));
}

double separated_integral(const DensityField& field, const RegionSample& region)
{
    double sum = 0.0;
    const std::int64_t m = region.count();
    for (std::int64_t i = 0; i < m; ++i)
        sum += F_n_field(field, region.tuple(i), region.base);
    return region.acceptance_rate * sum / static_cast<double>(m);
}

double estimate_Jn(const CoveringSample& sample, const LengthSequence& seq, std::int64_t n, const RegionSpec& spec,
                   std::int64_t mc, std::uint64_t region_seed)
{
    const RegionSample region = sample_A_delta_complement(spec, region_seed, mc);
    return separated_integral(DensityField(sample, seq, n), region);
}

JnSummary estimate_Jn_over_seeds(const LengthSequence& seq, std::int64_t n, const RegionSpec& spec, std::int64_t mc,
                                 std::uint64_t region_seed, SeedRange seeds)
{
    const RegionSample region = sample_A_delta_complement(spec, region_seed, mc);
    JnSummary out;
    out.region_volume = region.acceptance_rate;
    out.per_seed = parallel_map(static_cast<std::size_t>(seeds.count), [&](std::size_t i) {
        const auto sample = sample_omegas(seeds.seed(static_cast<std::int64_t>(i)), std::max<std::int64_t>(n, 1));
        return separated_integral(DensityField(sample, seq, n), region);
    });
    RunningStats first, second;
    for (double j : out.per_seed) {
        first.add(j);
        second.add(j * j);
    }
    const std::uint64_t fp = fnv1a64(seq.describe() + ":" + std::to_string(n) + ":" + std::to_string(mc) + ":" +
                                         std::to_string(region_seed) + ":" + std::to_string(seeds.base) + ":" +
                                         std::to_string(seeds.count),
                                     spec.fingerprint());
    out.first_moment = first.estimate(fp);
    out.second_moment = second.estimate(fp);
    return out;
}

JnStabilization jn_stabilization(const LengthSequence& seq, const RegionSpec& spec,
                                 const std::vector<std::int64_t>& n_list, SeedRange seeds, std::int64_t mc,
                                 std::uint64_t region_seed)
{
    if (n_list.empty())
        throw ValidationError("jn_stabilization: empty level list");
    for (std::size_t i = 1; i < n_list.size(); ++i)
        if (n_list[i] < n_list[i - 1])
            throw ValidationError("jn_stabilization: levels must be non-decreasing");
    const RegionSample region = sample_A_delta_complement(spec, region_seed, mc);
    const std::int64_t n_top = std::max<std::int64_t>(n_list.back(), 1);

    JnStabilization out;
    out.levels = n_list;
    out.per_seed = parallel_map(static_cast<std::size_t>(seeds.count), [&](std::size_t i) {
        const auto sample = sample_omegas(seeds.seed(static_cast<std::int64_t>(i)), n_top);
        std::vector<double> js;
        js.reserve(n_list.size());
        for (std::int64_t n : n_list)
            js.push_back(separated_integral(DensityField(sample, seq, n), region));
        return js;
    });
    const std::uint64_t fp =
        fnv1a64(seq.describe() + ":" + std::to_string(mc) + ":" + std::to_string(region_seed), spec.fingerprint());
    for (std::size_t l = 1; l < n_list.size(); ++l) {
        RunningStats rs;
        for (const auto& js : out.per_seed) {
            const double diff = js[l] - js[l - 1];
            rs.add(diff * diff);
        }
        out.pairs.push_back({n_list[l - 1], n_list[l], rs.estimate(fp)});
    }
    return out;
}

NearDiagonalProposals near_diagonal_proposals(int d, std::int64_t count, std::uint64_t seed)
{
    if (d < 1 || count < 1)
        throw ValidationError("near_diagonal_proposals: need d >= 1 and count >= 1");
    const CounterStream stream(seed, Stream::inner_mc);
    NearDiagonalProposals p;
    p.d = d;
    const auto total = static_cast<std::size_t>(count) * static_cast<std::size_t>(d + 1);
    p.flat.reserve(total);
    for (std::size_t i = 0; i < total; ++i)
        p.flat.emplace_back(stream.uniform(i));
    return p;
}

double near_diagonal_integral(const DensityField& field, const NearDiagonalProposals& proposals, double delta)
{
    const int d = proposals.d;
    const std::int64_t m = proposals.count();
    double sum = 0.0;
    std::int64_t accepted = 0;
    for (std::int64_t i = 0; i < m; ++i) {
        const CirclePoint* row = proposals.flat.data() + i * (d + 1);
        const CirclePoint t = row[0];
        std::span<const CirclePoint> t_hat(row + 1, static_cast<std::size_t>(d));
        if (region_accepts(t_hat, t, delta))
            continue; // separated: not in A_delta(t)
        ++accepted;
        sum += F_n_field(field, t_hat, t);
    }
    if (accepted == 0)
        throw RegionError("near-diagonal integral: no proposal fell in A_delta(t)");
    return sum / static_cast<double>(m);
}

ExpectationEstimate estimate_Ln_delta(const LengthSequence& seq, std::int64_t n, const RegionSpec& spec,
                                      std::int64_t mc, std::uint64_t proposal_seed, SeedRange seeds)
{
    spec.validate();
    const NearDiagonalProposals proposals = near_diagonal_proposals(spec.d, mc, proposal_seed);
    const auto values = parallel_map(static_cast<std::size_t>(seeds.count), [&](std::size_t i) {
        const auto sample = sample_omegas(seeds.seed(static_cast<std::int64_t>(i)), std::max<std::int64_t>(n, 1));
        return std::sqrt(near_diagonal_integral(DensityField(sample, seq, n), proposals, spec.delta));
    });
    const std::uint64_t fp = fnv1a64(seq.describe() + ":ln:" + std::to_string(n) + ":" + std::to_string(mc) + ":" +
                                         std::to_string(proposal_seed) + ":" + std::to_string(seeds.base) + ":" +
                                         std::to_string(seeds.count),
                                     spec.fingerprint());
    return estimate_mean(values, fp);
}

namespace {

// sum_{k >= N} k^-s by Euler-Maclaurin, s > 1, N large.
double hurwitz_tail(double s, double N)
{
    const double a = std::pow(N, -s);
    return N * a / (s - 1.0) + 0.5 * a + s * a / (12.0 * N) - s * (s + 1.0) * (s + 2.0) * a / (720.0 * N * N * N);
}

constexpr std::int64_t kExplicitTailTerms = std::int64_t{1} << 20;
constexpr int kSeriesOrder = 6;

struct TailSums {
    // z[j] = sum_{k > last} l_k^j, j = 2..kSeriesOrder
    double z[kSeriesOrder + 1] = {};
    double largest = 0.0; // l_{last+1}
};

TailSums tail_power_sums(const LengthSequence& seq, std::int64_t last)
{
    TailSums t;
    const double N = static_cast<double>(last + 1);
    std::visit(
        [&](const auto& f) {
            using F = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<F, AlphaOverN>) {
                t.largest = f.alpha / N;
                for (int j = 2; j <= kSeriesOrder; ++j)
                    t.z[j] = std::pow(f.alpha, j) * hurwitz_tail(j, N);
            } else if constexpr (std::is_same_v<F, PowerLaw>) {
                if (2.0 * f.beta <= 1.0)
                    throw DomainError("H_product: sum l_k^2 diverges for this power family");
                t.largest = f.c * std::pow(N, -f.beta);
                for (int j = 2; j <= kSeriesOrder; ++j)
                    t.z[j] = std::pow(f.c, j) * hurwitz_tail(j * f.beta, N);
            } else if constexpr (std::is_same_v<F, Geometric>) {
                t.largest = f.a * std::pow(f.ratio, N);
                for (int j = 2; j <= kSeriesOrder; ++j) {
                    const double rj = std::pow(f.ratio, j);
                    t.z[j] = std::pow(f.a, j) * std::pow(rj, N) / (1.0 - rj);
                }
            }
            // explicit lists have no tail
        },
        seq.family());
    return t;
}

std::vector<CirclePoint> joint_points(std::span<const CirclePoint> t_hat, std::span<const CirclePoint> t_hat_prime)
{
    if (t_hat.size() != t_hat_prime.size() || t_hat.empty())
        throw ValidationError("tuples must be non-empty and of equal length d");
    auto pts = convolution_points(t_hat, CirclePoint(0.0));
    const auto prime = convolution_points(t_hat_prime, CirclePoint(0.0));
    pts.insert(pts.end(), prime.begin(), prime.end());
    return pts;
}

} // namespace

double h_tail_log_factor(double ell, int d)
{
    const double m = 2.0 * (d + 1);
    return std::log1p(-m * ell) - m * std::log1p(-ell);
}

double joint_moment_exact(std::span<const CirclePoint> t_hat, std::span<const CirclePoint> t_hat_prime,
                          const LengthSequence& seq, std::int64_t n)
{
    const auto pts = joint_points(t_hat, t_hat_prime);
    double log_value = 0.0;
    for (std::int64_t k = 1; k <= n; ++k) {
        const double f = joint_Pk_expectation(pts, seq(k));
        if (f == 0.0)
            return 0.0;
        log_value += std::log(f);
    }
    return std::exp(log_value);
}

ExpectationEstimate joint_moment_mc(std::span<const CirclePoint> t_hat, std::span<const CirclePoint> t_hat_prime,
                                    const LengthSequence& seq, std::int64_t n, std::int64_t draws, std::uint64_t seed)
{
    if (draws < 2)
        throw ValidationError("joint_moment_mc: need at least two draws");
    const auto pts = joint_points(t_hat, t_hat_prime);
    const double m = static_cast<double>(pts.size());
    std::vector<double> ell(static_cast<std::size_t>(n)), weight(static_cast<std::size_t>(n));
    for (std::int64_t k = 1; k <= n; ++k) {
        ell[static_cast<std::size_t>(k - 1)] = seq(k);
        weight[static_cast<std::size_t>(k - 1)] = std::pow(1.0 - seq(k), -m);
    }
    const CounterStream stream(seed, Stream::oracle);
    RunningStats rs;
    for (std::int64_t i = 0; i < draws; ++i) {
        double value = 1.0;
        for (std::int64_t k = 0; k < n && value != 0.0; ++k) {
            const CirclePoint omega(stream.uniform(static_cast<std::uint64_t>(i * n + k)));
            const double l = ell[static_cast<std::size_t>(k)];
            for (CirclePoint p : pts) {
                const double x = forward_offset(omega, p);
                if (x > 0.0 && x < l) {
                    value = 0.0;
                    break;
                }
            }
            value *= weight[static_cast<std::size_t>(k)];
        }
        rs.add(value);
    }
    return rs.estimate(fnv1a64("joint_moment_mc:" + seq.describe() + ":" + std::to_string(n), seed));
}

HProductReport H_product(std::span<const CirclePoint> t_hat, std::span<const CirclePoint> t_hat_prime,
                         const LengthSequence& seq, const RegionSpec& spec)
{
    spec.validate();
    if (!spec.eta)
        throw ValidationError("H_product: eta is required");
    const int d = spec.d;
    if (static_cast<int>(t_hat.size()) != d || static_cast<int>(t_hat_prime.size()) != d)
        throw ValidationError("H_product: tuples must have d entries");

    const auto p = convolution_points(t_hat, CirclePoint(0.0));
    const auto q = convolution_points(t_hat_prime, CirclePoint(0.0));
    auto describe = [](const char* which, int i, int j) {
        return std::string(which) + " (" + std::to_string(i + 1) + ", " + std::to_string(j + 1) + ")";
    };
    if (auto pair = first_close_pair(p, spec.delta))
        throw PreconditionError("H_product: t_hat not in A_delta(0)^c, pair " +
                                describe("t", pair->first, pair->second));
    if (auto pair = first_close_pair(q, spec.delta))
        throw PreconditionError("H_product: t_hat' not in A_delta(0)^c, pair " +
                                describe("t'", pair->first, pair->second));
    // S_eta^c, plus the cross pairs: a t_j' sitting on t_i (i != j) makes the product diverge
    for (int i = 0; i <= d; ++i)
        for (int j = 0; j <= d; ++j)
            if (circle_dist(p[static_cast<std::size_t>(i)], q[static_cast<std::size_t>(j)]) < *spec.eta)
                throw PreconditionError("H_product: ||t_" + std::to_string(i + 1) + " - t'_" + std::to_string(j + 1) +
                                        "|| < eta");

    auto pts = p;
    pts.insert(pts.end(), q.begin(), q.end());

    const double threshold = std::min(*spec.eta, spec.delta / 2.0);
    std::int64_t exact = seq.count_above(threshold);
    while ((!seq.size() || exact < *seq.size()) && seq(exact + 1) >= threshold)
        ++exact;

    HProductReport r;
    const auto available = seq.size();
    r.exact_terms = available ? std::min(exact, *available) : exact;
    for (std::int64_t k = 1; k <= r.exact_terms; ++k) {
        const double f = joint_Pk_expectation(pts, seq(k));
        if (f == 0.0) {
            r.value = 0.0;
            r.log_value = -std::numeric_limits<double>::infinity();
            r.exact_log = r.log_value;
            return r;
        }
        r.exact_log += std::log(f);
    }

    std::int64_t last = std::max(r.exact_terms, kExplicitTailTerms);
    if (available)
        last = *available;
    double tail = 0.0;
    for (std::int64_t k = last; k > r.exact_terms; --k)
        tail += h_tail_log_factor(seq(k), d);

    if (!available) {
        // log f(l) = sum_{j>=2} (m - m^j) l^j / j
        const double m = 2.0 * (d + 1);
        const TailSums ts = tail_power_sums(seq, last);
        double series = 0.0;
        for (int j = 2; j <= kSeriesOrder; ++j)
            series += (m - std::pow(m, j)) / j * ts.z[j];
        tail += series;
        const double x = m * ts.largest;
        if (!(x < 0.5))
            throw DomainError("H_product: tail series does not converge at the truncation point");
        r.remainder_bound = ts.z[2] * std::pow(m, 2) * std::pow(x, kSeriesOrder - 1) / (1.0 - x);
    }
    r.tail_log = tail;
    r.log_value = r.exact_log + r.tail_log;
    r.value = std::exp(r.log_value);
    return r;
}

DominatedBoundReport dominated_bound_check(std::span<const CirclePoint> t_hat,
                                           std::span<const CirclePoint> t_hat_prime, const LengthSequence& seq,
                                           std::int64_t n)
{
    const auto p = convolution_points(t_hat, CirclePoint(0.0));
    const auto q = convolution_points(t_hat_prime, CirclePoint(0.0));
    if (p.size() != q.size())
        throw ValidationError("dominated_bound_check: tuples must have equal length");
    for (const auto* tuple : {&p, &q})
        if (auto pair = first_close_pair(*tuple, std::numeric_limits<double>::min()))
            throw PreconditionError("dominated_bound_check: points " + std::to_string(pair->first + 1) + " and " +
                                    std::to_string(pair->second + 1) + " of a tuple coincide");
    DominatedBoundReport r;
    r.rhs = 1.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double dist = circle_dist(p[i], q[i]);
        if (dist == 0.0)
            throw PreconditionError("dominated_bound_check: t_" + std::to_string(i + 1) + " coincides with t'_" +
                                    std::to_string(i + 1));
        r.rhs *= kernel_K(seq, dist);
    }
    r.lhs = joint_moment_exact(t_hat, t_hat_prime, seq, n);
    r.ratio = r.lhs / r.rhs;
    return r;
}

SandwichReport pair_kernel_sandwich(const LengthSequence& seq, std::int64_t n, std::span<const double> distances)
{
    SandwichReport r;
    r.min_ratio = std::numeric_limits<double>::infinity();
    r.max_ratio = 0.0;
    for (double u : distances) {
        SandwichRow row;
        row.distance = u;
        row.pair_correlation = pair_correlation_exact(CirclePoint(0.0), CirclePoint(u), seq, n);
        row.kernel = kernel_Kn(seq, n, u);
        row.ratio = row.pair_correlation / row.kernel;
        r.min_ratio = std::min(r.min_ratio, row.ratio);
        r.max_ratio = std::max(r.max_ratio, row.ratio);
        r.rows.push_back(row);
    }
    r.constant = r.min_ratio > 0.0 ? std::max(r.max_ratio, 1.0 / r.min_ratio)
                                   : std::numeric_limits<double>::infinity();
    return r;
}

std::vector<double> log_spaced(double lo, double hi, int count)
{
    if (!(lo > 0.0 && hi > lo) || count < 2)
        throw ValidationError("log_spaced: need 0 < lo < hi and count >= 2");
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(count));
    const double r = std::log(hi / lo);
    for (int i = 0; i < count; ++i)
        out.push_back(i == count - 1 ? hi : lo * std::exp(r * i / (count - 1)));
    return out;
}

} // namespace dvz
