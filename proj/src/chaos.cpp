#include "dvz/chaos.hpp"

#include <cmath>

#include "dvz/errors.hpp"

namespace dvz {

double eval_P_k(CirclePoint t, CirclePoint omega, double ell)
{
    if (!(ell > 0.0 && ell < 1.0))
        throw DomainError("eval_P_k: need 0 < l_k < 1");
    const double x = forward_offset(omega, t);
    return (x > 0.0 && x < ell) ? 0.0 : 1.0 / (1.0 - ell);
}

double log_survivor_weight(const LengthSequence& seq, std::int64_t n)
{
    double s = 0.0;
    for (std::int64_t k = 1; k <= n; ++k) {
        const double l = seq(k);
        if (!(l < 1.0))
            throw DomainError("density undefined: l_" + std::to_string(k) + " >= 1");
        s -= std::log1p(-l);
    }
    return s;
}

namespace {

void check_level(const CoveringSample& sample, std::int64_t n)
{
    if (n < 0 || n > sample.size())
        throw ValidationError("truncation level n=" + std::to_string(n) + " exceeds the sample size " +
                              std::to_string(sample.size()));
}

} // namespace

GridDensity density_grid(const CoveringSample& sample, const LengthSequence& seq, std::int64_t n, std::int64_t G)
{
    if (G < 2 || (G & (G - 1)) != 0)
        throw ValidationError("density_grid: G must be a power of two >= 2");
    check_level(sample, n);

    const auto g = static_cast<std::size_t>(G);
    const double gd = static_cast<double>(G);
    auto center = [gd](std::int64_t j) { return CirclePoint((static_cast<double>(j) + 0.5) / gd); };
    auto wrap_index = [G](std::int64_t j) { return ((j % G) + G) % G; };

    // difference array of cover counts
    std::vector<std::int32_t> diff(g + 1, 0);
    auto add_range = [&](std::int64_t first, std::int64_t count) {
        const std::int64_t a = wrap_index(first);
        if (a + count <= G) {
            diff[static_cast<std::size_t>(a)] += 1;
            diff[static_cast<std::size_t>(a + count)] -= 1;
        } else {
            diff[static_cast<std::size_t>(a)] += 1;
            diff[g] -= 1;
            diff[0] += 1;
            diff[static_cast<std::size_t>(a + count - G)] -= 1;
        }
    };

    for (std::int64_t k = 1; k <= n; ++k) {
        const double ell = seq(k);
        if (!(ell < 1.0))
            throw DomainError("density undefined: l_" + std::to_string(k) + " >= 1");
        const CirclePoint omega = sample.omegas[static_cast<std::size_t>(k - 1)];
        auto covered = [&](std::int64_t j) {
            const double x = forward_offset(omega, center(wrap_index(j)));
            return x > 0.0 && x < ell;
        };
        // cells whose centers fall in (omega, omega + l), with one cell of slack each side
        std::int64_t first = static_cast<std::int64_t>(std::floor(omega.position() * gd - 0.5));
        std::int64_t last = static_cast<std::int64_t>(std::ceil((omega.position() + ell) * gd - 0.5));
        if (last - first + 1 >= G) {
            for (std::int64_t j = 0; j < G; ++j)
                if (covered(j))
                    add_range(j, 1);
            continue;
        }
        while (first <= last && !covered(first))
            ++first;
        while (last >= first && !covered(last))
            --last;
        if (first <= last)
            add_range(first, last - first + 1);
    }

    GridDensity out;
    out.grid = G;
    out.n = n;
    out.seed = sample.seed;
    out.family = seq.describe();
    out.values.assign(g, 0.0);
    const double weight = std::exp(log_survivor_weight(seq, n));
    std::int32_t cover = 0;
    for (std::size_t j = 0; j < g; ++j) {
        cover += diff[j];
        out.values[j] = cover == 0 ? weight : 0.0;
    }
    out.mass = total_mass(out);
    return out;
}

double total_mass(const GridDensity& gd)
{
    double s = 0.0;
    for (double v : gd.values)
        s += v;
    return s / static_cast<double>(gd.values.size());
}

GridDensity constant_density(std::int64_t G, double value)
{
    GridDensity out;
    out.grid = G;
    out.family = "constant";
    out.values.assign(static_cast<std::size_t>(G), value);
    out.mass = value;
    return out;
}

nlohmann::json density_header(const GridDensity& gd)
{
    return {{"G", gd.grid}, {"n", gd.n}, {"seed", gd.seed}, {"family", gd.family}, {"mass", gd.mass}};
}

DensityField::DensityField(const CoveringSample& sample, const LengthSequence& seq, std::int64_t n)
    : weight_(0.0), n_(n)
{
    check_level(sample, n);
    weight_ = std::exp(log_survivor_weight(seq, n));
    covered_ = arc_union(covering_arcs(sample, seq, n));
}

double M_n_eval(CirclePoint t, const CoveringSample& sample, const LengthSequence& seq, std::int64_t n)
{
    check_level(sample, n);
    double log_value = 0.0;
    for (std::int64_t k = 1; k <= n; ++k) {
        const double p = eval_P_k(t, sample.omegas[static_cast<std::size_t>(k - 1)], seq(k));
        if (p == 0.0)
            return 0.0;
        log_value += std::log(p);
    }
    return std::exp(log_value);
}

double pair_factor(double ell, double dist)
{
    const double overlap = std::max(ell - dist, 0.0);
    const double num = 1.0 - 2.0 * ell + overlap;
    return num / ((1.0 - ell) * (1.0 - ell));
}

double pair_correlation_exact(CirclePoint t, CirclePoint u, const LengthSequence& seq, std::int64_t n)
{
    const double dist = circle_dist(t, u);
    double log_value = 0.0;
    for (std::int64_t k = 1; k <= n; ++k) {
        const double ell = seq(k);
        if (ell > 0.5)
            throw DomainError("pair_correlation_exact: l_" + std::to_string(k) + " = " + std::to_string(ell) +
                              " exceeds 1/2");
        const double f = pair_factor(ell, dist);
        if (f <= 0.0)
            return 0.0;
        log_value += std::log(f);
    }
    return std::exp(log_value);
}

double joint_Pk_expectation(std::span<const CirclePoint> points, double ell)
{
    if (points.empty())
        throw ValidationError("joint_Pk_expectation: need at least one point");
    if (!(ell > 0.0 && ell < 1.0))
        throw DomainError("joint_Pk_expectation: need 0 < l_k < 1");
    std::vector<Arc> windows;
    windows.reserve(points.size());
    for (CirclePoint p : points)
        windows.emplace_back(p - ell, ell);
    const double covered = arc_union(windows).measure();
    if (covered >= 1.0)
        return 0.0;
    const double m = static_cast<double>(points.size());
    return std::exp(std::log1p(-covered) - m * std::log1p(-ell));
}

std::vector<CirclePoint> convolution_points(std::span<const CirclePoint> t_hat, CirclePoint t)
{
    std::vector<CirclePoint> pts(t_hat.begin(), t_hat.end());
    double s = 0.0;
    for (CirclePoint p : t_hat)
        s += p.position();
    pts.emplace_back(t.position() - s);
    return pts;
}

double F_n_eval(std::span<const CirclePoint> t_hat, CirclePoint t, const CoveringSample& sample,
                const LengthSequence& seq, std::int64_t n)
{
    if (t_hat.empty())
        throw ValidationError("F_n_eval: d must be >= 1");
    double value = 1.0;
    for (CirclePoint p : convolution_points(t_hat, t)) {
        value *= M_n_eval(p, sample, seq, n);
        if (value == 0.0)
            return 0.0;
    }
    return value;
}

} // namespace dvz
