#include "dvz/lengths.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "dvz/errors.hpp"

namespace dvz {

namespace {

constexpr double kEulerGamma = 0.57721566490153286061;
constexpr std::int64_t kMaxKernelTerms = 400'000'000;

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double harmonic(std::int64_t n)
{
    if (n <= 0)
        return 0.0;
    if (n <= 256) {
        double h = 0.0;
        for (std::int64_t k = n; k >= 1; --k)
            h += 1.0 / static_cast<double>(k);
        return h;
    }
    const double x = static_cast<double>(n);
    const double inv2 = 1.0 / (x * x);
    return std::log(x) + kEulerGamma + 0.5 / x - inv2 / 12.0 + inv2 * inv2 / 120.0 - inv2 * inv2 * inv2 / 252.0;
}

// Adjust a floor-estimate of #{n : l_n > t} using the exact predicate.
template <class Ell>
std::int64_t refine_count(std::int64_t guess, double t, Ell&& ell)
{
    std::int64_t n = std::max<std::int64_t>(guess, 0);
    while (n > 0 && !(ell(n) > t))
        --n;
    while (ell(n + 1) > t)
        ++n;
    return n;
}

} // namespace

LengthSequence::LengthSequence(Family family)
    : family_(std::move(family))
{
    std::visit(overloaded{
                   [](const AlphaOverN& f) {
                       if (!(f.alpha > 0.0) || !std::isfinite(f.alpha))
                           throw ValidationError("alpha_over_n: alpha must be positive");
                   },
                   [](const PowerLaw& f) {
                       if (!(f.c > 0.0) || !(f.beta > 0.0))
                           throw ValidationError("power: c and beta must be positive");
                   },
                   [](const Geometric& f) {
                       if (!(f.a > 0.0) || !(f.ratio > 0.0 && f.ratio < 1.0))
                           throw ValidationError("geometric: need a > 0 and 0 < ratio < 1");
                   },
                   [](const ExplicitLengths& f) {
                       if (f.values.empty())
                           throw ValidationError("explicit lengths: empty list");
                       for (std::size_t i = 0; i < f.values.size(); ++i) {
                           if (!(f.values[i] > 0.0))
                               throw ValidationError("explicit lengths: entry " + std::to_string(i + 1) +
                                                     " is not positive");
                           if (i > 0 && f.values[i] > f.values[i - 1])
                               throw ValidationError("explicit lengths: sequence increases at n = " +
                                                     std::to_string(i + 1));
                       }
                   },
               },
               family_);
}

double LengthSequence::operator()(std::int64_t n) const
{
    if (n < 1)
        throw DomainError("length index must be >= 1");
    return std::visit(overloaded{
                          [n](const AlphaOverN& f) { return f.alpha / static_cast<double>(n); },
                          [n](const PowerLaw& f) { return f.c * std::pow(static_cast<double>(n), -f.beta); },
                          [n](const Geometric& f) { return f.a * std::pow(f.ratio, static_cast<double>(n)); },
                          [n](const ExplicitLengths& f) {
                              if (n > static_cast<std::int64_t>(f.values.size()))
                                  throw DomainError("explicit lengths: index " + std::to_string(n) +
                                                    " beyond the " + std::to_string(f.values.size()) +
                                                    " given terms");
                              return f.values[static_cast<std::size_t>(n - 1)];
                          },
                      },
                      family_);
}

std::optional<std::int64_t> LengthSequence::size() const
{
    if (const auto* e = std::get_if<ExplicitLengths>(&family_))
        return static_cast<std::int64_t>(e->values.size());
    return std::nullopt;
}

std::optional<double> LengthSequence::alpha() const
{
    if (const auto* f = std::get_if<AlphaOverN>(&family_))
        return f->alpha;
    return std::nullopt;
}

std::int64_t LengthSequence::count_above(double t) const
{
    if (!(t > 0.0))
        throw DomainError("count_above: threshold must be positive");
    const auto guard = [](double estimate) {
        if (!(estimate < static_cast<double>(kMaxKernelTerms)))
            throw DomainError("kernel cutoff exceeds the supported number of terms");
        return static_cast<std::int64_t>(estimate);
    };
    return std::visit(
        overloaded{
            [&](const AlphaOverN& f) {
                const std::int64_t g = guard(std::floor(f.alpha / t));
                return refine_count(g, t, [&](std::int64_t n) { return f.alpha / static_cast<double>(n); });
            },
            [&](const PowerLaw& f) {
                const std::int64_t g = guard(std::floor(std::pow(f.c / t, 1.0 / f.beta)));
                return refine_count(g, t, [&](std::int64_t n) {
                    return f.c * std::pow(static_cast<double>(n), -f.beta);
                });
            },
            [&](const Geometric& f) {
                const double est = t >= f.a ? 0.0 : std::floor(std::log(t / f.a) / std::log(f.ratio));
                const std::int64_t g = guard(est);
                return refine_count(g, t, [&](std::int64_t n) {
                    return f.a * std::pow(f.ratio, static_cast<double>(n));
                });
            },
            [&](const ExplicitLengths& f) {
                // values are non-increasing: count the prefix strictly above t
                auto it = std::partition_point(f.values.begin(), f.values.end(), [t](double v) { return v > t; });
                return static_cast<std::int64_t>(it - f.values.begin());
            },
        },
        family_);
}

double LengthSequence::prefix_sum(std::int64_t count) const
{
    if (count <= 0)
        return 0.0;
    return std::visit(overloaded{
                          [&](const AlphaOverN& f) { return f.alpha * harmonic(count); },
                          [&](const Geometric& f) {
                              return f.a * f.ratio * (1.0 - std::pow(f.ratio, static_cast<double>(count))) /
                                     (1.0 - f.ratio);
                          },
                          [&](const auto&) {
                              double s = 0.0;
                              for (std::int64_t n = count; n >= 1; --n)
                                  s += (*this)(n);
                              return s;
                          },
                      },
                      family_);
}

std::string LengthSequence::describe() const
{
    std::ostringstream os;
    os.precision(17);
    std::visit(overloaded{
                   [&](const AlphaOverN& f) { os << "alpha_over_n(" << f.alpha << ")"; },
                   [&](const PowerLaw& f) { os << "power(" << f.c << "," << f.beta << ")"; },
                   [&](const Geometric& f) { os << "geometric(" << f.a << "," << f.ratio << ")"; },
                   [&](const ExplicitLengths& f) { os << "explicit[" << f.values.size() << "]"; },
               },
               family_);
    return os.str();
}

nlohmann::json LengthSequence::to_json() const
{
    return std::visit(overloaded{
                          [](const AlphaOverN& f) -> nlohmann::json {
                              return {{"family", "alpha"}, {"alpha", f.alpha}};
                          },
                          [](const PowerLaw& f) -> nlohmann::json {
                              return {{"family", "power"}, {"c", f.c}, {"beta", f.beta}};
                          },
                          [](const Geometric& f) -> nlohmann::json {
                              return {{"family", "geometric"}, {"a", f.a}, {"ratio", f.ratio}};
                          },
                          [](const ExplicitLengths& f) -> nlohmann::json {
                              return {{"family", "explicit"}, {"values", f.values}};
                          },
                      },
                      family_);
}

LengthSequence LengthSequence::from_json(const nlohmann::json& j)
{
    const std::string fam = j.at("family").get<std::string>();
    if (fam == "alpha")
        return alpha_over_n(j.at("alpha").get<double>());
    if (fam == "power")
        return power(j.at("c").get<double>(), j.at("beta").get<double>());
    if (fam == "geometric")
        return geometric(j.at("a").get<double>(), j.at("ratio").get<double>());
    if (fam == "explicit")
        return explicit_list(j.at("values").get<std::vector<double>>());
    throw ValidationError("unknown length family '" + fam + "'");
}

const char* to_string(ConditionKind k)
{
    switch (k) {
    case ConditionKind::A: return "A";
    case ConditionKind::B: return "B";
    case ConditionKind::Shepp: return "shepp";
    case ConditionKind::Eq3: return "eq3";
    }
    return "?";
}

const char* to_string(Classification c)
{
    switch (c) {
    case Classification::satisfied: return "satisfied";
    case Classification::violated: return "violated";
    case Classification::inconclusive: return "inconclusive";
    }
    return "?";
}

const char* to_string(Method m)
{
    return m == Method::analytic ? "analytic" : "numeric";
}

nlohmann::json to_json(const ConditionVerdict& v)
{
    nlohmann::json pv = nlohmann::json::array();
    for (const auto& [n, value] : v.partial_values)
        pv.push_back({n, value});
    return {{"kind", to_string(v.kind)},
            {"classification", to_string(v.classification)},
            {"method", to_string(v.method)},
            {"partial_values", pv}};
}

namespace {

// Series partial sums recorded at n = 1, 2, 4, ... and at the last term.
// term(n, S_n) receives S_n = l_1 + ... + l_n and returns the n-th term.
template <class Term>
std::vector<std::pair<double, double>> dyadic_partial_sums(const LengthSequence& seq, std::int64_t last, Term&& term)
{
    std::vector<std::pair<double, double>> out;
    double s_ell = 0.0;
    double partial = 0.0;
    std::int64_t next_mark = 1;
    for (std::int64_t n = 1; n <= last; ++n) {
        s_ell += seq(n);
        partial += term(n, s_ell);
        if (!std::isfinite(partial))
            break;
        if (n == next_mark || n == last) {
            out.emplace_back(static_cast<double>(n), partial);
            while (next_mark <= n)
                next_mark *= 2;
        }
    }
    return out;
}

std::vector<double> dyadic_only(const std::vector<std::pair<double, double>>& pv)
{
    // keep exact powers of two so increments compare like with like
    std::vector<double> out;
    for (const auto& [n, v] : pv) {
        const auto k = static_cast<std::uint64_t>(n);
        if ((k & (k - 1)) == 0)
            out.push_back(v);
    }
    return out;
}

bool shows_divergence(const std::vector<std::pair<double, double>>& pv, const ConditionThresholds& th)
{
    const auto p = dyadic_only(pv);
    if (p.size() < 5)
        return false;
    const std::size_t m = p.size();
    for (std::size_t j = m - 3; j < m; ++j) {
        const double inc = p[j] - p[j - 1];
        const double prev = p[j - 1] - p[j - 2];
        if (!(prev > 0.0) || inc < th.increment_ratio * prev)
            return false;
    }
    return true;
}

bool shows_plateau(const std::vector<std::pair<double, double>>& pv, const ConditionThresholds& th)
{
    const auto p = dyadic_only(pv);
    if (p.size() < 3)
        return false;
    const double a = p[p.size() - 2];
    const double b = p.back();
    return b != 0.0 && std::abs(b - a) / std::abs(b) < th.plateau;
}

std::int64_t effective_terms(const LengthSequence& seq, std::int64_t n_max, std::int64_t reserve = 0)
{
    if (n_max < 1)
        throw ValidationError("N_max must be >= 1");
    std::int64_t last = n_max;
    if (auto sz = seq.size())
        last = std::min(last, *sz - reserve);
    return std::max<std::int64_t>(last, 0);
}

} // namespace

ConditionVerdict check_condition_A(const LengthSequence& seq, std::int64_t n_max, const ConditionThresholds& th)
{
    ConditionVerdict v{ConditionKind::A, Classification::inconclusive, Method::numeric, {}};
    v.partial_values = dyadic_partial_sums(seq, effective_terms(seq, n_max),
                                           [&](std::int64_t n, double) { return seq(n); });
    std::visit(overloaded{
                   [&](const AlphaOverN&) {
                       v.method = Method::analytic;
                       v.classification = Classification::satisfied;
                   },
                   [&](const PowerLaw& f) {
                       v.method = Method::analytic;
                       v.classification = f.beta <= 1.0 ? Classification::satisfied : Classification::violated;
                   },
                   [&](const Geometric&) {
                       v.method = Method::analytic;
                       v.classification = Classification::violated;
                   },
                   [&](const ExplicitLengths&) {
                       if (shows_divergence(v.partial_values, th))
                           v.classification = Classification::satisfied;
                   },
               },
               seq.family());
    return v;
}

ConditionVerdict check_condition_B(const LengthSequence& seq, std::int64_t n_max, const ConditionThresholds& th)
{
    ConditionVerdict v{ConditionKind::B, Classification::inconclusive, Method::numeric, {}};
    v.partial_values = dyadic_partial_sums(seq, effective_terms(seq, n_max, 1), [&](std::int64_t n, double s) {
        const double drop = seq(n) - seq(n + 1);
        return drop > 0.0 ? std::exp(std::log(drop) + s) : 0.0;
    });
    std::visit(overloaded{
                   [&](const AlphaOverN& f) {
                       // term ~ n^(alpha-2)
                       v.method = Method::analytic;
                       v.classification = f.alpha < 1.0 ? Classification::satisfied : Classification::violated;
                   },
                   [&](const PowerLaw& f) {
                       v.method = Method::analytic;
                       if (f.beta > 1.0)
                           v.classification = Classification::satisfied;
                       else if (f.beta == 1.0)
                           v.classification = f.c < 1.0 ? Classification::satisfied : Classification::violated;
                       else
                           v.classification = Classification::violated;
                   },
                   [&](const Geometric&) {
                       v.method = Method::analytic;
                       v.classification = Classification::satisfied;
                   },
                   [&](const ExplicitLengths&) {
                       if (shows_plateau(v.partial_values, th))
                           v.classification = Classification::satisfied;
                   },
               },
               seq.family());
    return v;
}

ConditionVerdict shepp_classify(const LengthSequence& seq, std::int64_t n_max, const ConditionThresholds& th)
{
    ConditionVerdict v{ConditionKind::Shepp, Classification::inconclusive, Method::numeric, {}};
    v.partial_values = dyadic_partial_sums(seq, effective_terms(seq, n_max), [](std::int64_t n, double s) {
        const double x = static_cast<double>(n);
        return std::exp(s - 2.0 * std::log(x));
    });
    // satisfied = the series diverges (the circle gets covered)
    std::visit(overloaded{
                   [&](const AlphaOverN& f) {
                       v.method = Method::analytic;
                       v.classification = f.alpha >= 1.0 ? Classification::satisfied : Classification::violated;
                   },
                   [&](const PowerLaw& f) {
                       v.method = Method::analytic;
                       if (f.beta < 1.0)
                           v.classification = Classification::satisfied;
                       else if (f.beta == 1.0)
                           v.classification = f.c >= 1.0 ? Classification::satisfied : Classification::violated;
                       else
                           v.classification = Classification::violated;
                   },
                   [&](const Geometric&) {
                       v.method = Method::analytic;
                       v.classification = Classification::violated;
                   },
                   [&](const ExplicitLengths&) {
                       if (shows_divergence(v.partial_values, th))
                           v.classification = Classification::satisfied;
                   },
               },
               seq.family());
    return v;
}

double kernel_K(const LengthSequence& seq, double t)
{
    if (t == 0.0) {
        if (check_condition_A(seq, 1).classification == Classification::violated)
            throw DomainError("kernel_K: t = 0 with summable lengths; K(0) is finite but not tabulated");
        return std::numeric_limits<double>::infinity();
    }
    if (!(t > 0.0 && t <= 0.5))
        throw DomainError("kernel_K: t must lie in (0, 1/2]");
    const std::int64_t cutoff = seq.count_above(t);
    if (auto sz = seq.size(); sz && cutoff >= *sz)
        return std::exp(seq.prefix_sum(*sz) - static_cast<double>(*sz) * t);
    return std::exp(seq.prefix_sum(cutoff) - static_cast<double>(cutoff) * t);
}

double kernel_Kn(const LengthSequence& seq, std::int64_t n, double t)
{
    if (n < 0)
        throw DomainError("kernel_Kn: n must be >= 0");
    if (!(t >= 0.0 && t <= 0.5))
        throw DomainError("kernel_Kn: t must lie in [0, 1/2]");
    const std::int64_t cutoff = t == 0.0 ? n : std::min(n, seq.count_above(t));
    return std::exp(seq.prefix_sum(cutoff) - static_cast<double>(cutoff) * t);
}

int minimal_d(double alpha)
{
    if (!(alpha > 0.0 && alpha < 1.0))
        throw DomainError("minimal_d: alpha must lie in (0, 1)");
    const double bound = alpha / (1.0 - alpha);
    return std::max(1, static_cast<int>(std::ceil(bound - 1e-12)));
}

} // namespace dvz
