#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

namespace dvz {

/// l_n = alpha / n
struct AlphaOverN {
    double alpha;
};
/// l_n = c * n^-beta
struct PowerLaw {
    double c;
    double beta;
};
/// l_n = a * ratio^n
struct Geometric {
    double a;
    double ratio;
};
/// Finite prefix l_1..l_m given explicitly.
struct ExplicitLengths {
    std::vector<double> values;
};

/// Positive, non-increasing sequence of arc lengths l_1, l_2, ...
class LengthSequence {
public:
    using Family = std::variant<AlphaOverN, PowerLaw, Geometric, ExplicitLengths>;

    explicit LengthSequence(Family family);

    static LengthSequence alpha_over_n(double alpha) { return LengthSequence(AlphaOverN{alpha}); }
    static LengthSequence power(double c, double beta) { return LengthSequence(PowerLaw{c, beta}); }
    static LengthSequence geometric(double a, double ratio) { return LengthSequence(Geometric{a, ratio}); }
    static LengthSequence explicit_list(std::vector<double> values)
    {
        return LengthSequence(ExplicitLengths{std::move(values)});
    }

    const Family& family() const { return family_; }

    /// l_n for n >= 1. Throws DomainError past the end of an explicit list.
    double operator()(std::int64_t n) const;

    /// Number of available terms; nullopt for infinite families.
    std::optional<std::int64_t> size() const;

    /// #{n : l_n > t} for t > 0. Uses the family inverse when there is one.
    std::int64_t count_above(double t) const;

    /// l_1 + ... + l_count.
    double prefix_sum(std::int64_t count) const;

    /// Closed-form alpha of the alpha/n family, if that is the family.
    std::optional<double> alpha() const;

    std::string describe() const;
    nlohmann::json to_json() const;
    static LengthSequence from_json(const nlohmann::json& j);

private:
    Family family_;
};

enum class ConditionKind { A, B, Shepp, Eq3 };
enum class Classification { satisfied, violated, inconclusive };
enum class Method { analytic, numeric };

const char* to_string(ConditionKind k);
const char* to_string(Classification c);
const char* to_string(Method m);

struct ConditionVerdict {
    ConditionKind kind;
    Classification classification;
    Method method;
    /// (N, partial sum) for the series conditions, (grid resolution, estimate) for Eq3.
    std::vector<std::pair<double, double>> partial_values;
};

nlohmann::json to_json(const ConditionVerdict& v);

/// Classification thresholds for the numeric fallbacks.
struct ConditionThresholds {
    // divergence evidence: dyadic increments keep at least this fraction of the previous one
    double increment_ratio = 0.9;
    // convergence evidence: relative change of the last two dyadic partial sums
    double plateau = 1e-3;
    // Eq. (3): relative change across the last two levels below this => satisfied
    double stable_change = 0.05;
    // Eq. (3): relative growth per level above this, sustained => violated
    double sustained_growth = 0.25;
};

ConditionVerdict check_condition_A(const LengthSequence& seq, std::int64_t n_max,
                                   const ConditionThresholds& th = {});
ConditionVerdict check_condition_B(const LengthSequence& seq, std::int64_t n_max,
                                   const ConditionThresholds& th = {});
ConditionVerdict shepp_classify(const LengthSequence& seq, std::int64_t n_max,
                                const ConditionThresholds& th = {});

/// K(t) = exp(sum_n (l_n - t)_+) for t in (0, 1/2]. Returns +inf at t = 0
/// when sum l_n diverges (or cannot be shown to converge).
double kernel_K(const LengthSequence& seq, double t);

/// K_n(t) = exp(sum_{k<=n} (l_k - t)_+) for t in [0, 1/2].
double kernel_Kn(const LengthSequence& seq, std::int64_t n, double t);

struct L1ConditionOptions {
    std::vector<std::int64_t> levels; // empty: defaults per d
    ConditionThresholds thresholds{};
    std::uint64_t mc_seed = 0x5eed;   // stratified sampler, d >= 3
};

/// Estimates int_{T^d} K(t_1)...K(t_d) K(-sum t_i) dt at increasing resolutions
/// and classifies finiteness by stabilization.
ConditionVerdict l1_condition_estimate(const LengthSequence& seq, int d, const L1ConditionOptions& opts = {});

std::vector<std::int64_t> default_l1_levels(int d);

/// Smallest integer d >= alpha / (1 - alpha), for alpha in (0, 1).
int minimal_d(double alpha);

} // namespace dvz
