#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "dvz/circle.hpp"
#include "dvz/covering.hpp"
#include "dvz/lengths.hpp"

namespace dvz {

/// P_k(t) = (1 - 1_{(0,l)}(t - omega)) / (1 - l).
double eval_P_k(CirclePoint t, CirclePoint omega, double ell);

/// log prod_{k<=n} 1/(1 - l_k): the value M_n takes off the covered set.
double log_survivor_weight(const LengthSequence& seq, std::int64_t n);

/// M_n sampled at the cell centers (j + 1/2)/G.
struct GridDensity {
    std::int64_t grid = 0;
    std::int64_t n = 0;
    std::uint64_t seed = 0;
    std::string family;
    std::vector<double> values;
    double mass = 0.0; // (1/G) sum values

    double center(std::int64_t j) const { return (static_cast<double>(j) + 0.5) / static_cast<double>(grid); }
};

GridDensity density_grid(const CoveringSample& sample, const LengthSequence& seq, std::int64_t n, std::int64_t G);
double total_mass(const GridDensity& gd);
GridDensity constant_density(std::int64_t G, double value = 1.0);

nlohmann::json density_header(const GridDensity& gd);

/// Pointwise M_n for one realization. M_n is a constant on the uncovered set
/// and 0 on the union of the first n intervals, so evaluation is a lookup.
class DensityField {
public:
    DensityField(const CoveringSample& sample, const LengthSequence& seq, std::int64_t n);

    double operator()(CirclePoint t) const { return covered_.contains(t) ? 0.0 : weight_; }
    double weight() const { return weight_; }
    std::int64_t level() const { return n_; }
    const ArcSet& covered() const { return covered_; }

private:
    ArcSet covered_;
    double weight_;
    std::int64_t n_;
};

/// Direct product prod_{k<=n} P_k(t).
double M_n_eval(CirclePoint t, const CoveringSample& sample, const LengthSequence& seq, std::int64_t n);

/// One factor of E[M_n(t) M_n(u)]: (1 - 2l + (l - dist)_+) / (1 - l)^2.
double pair_factor(double ell, double dist);

/// E[M_n(t) M_n(u)] = prod_{k<=n} pair_factor(l_k, ||t - u||). Requires l_k <= 1/2.
double pair_correlation_exact(CirclePoint t, CirclePoint u, const LengthSequence& seq, std::int64_t n);

/// E[prod_i P_k(p_i)] = (1 - |union_i (p_i - l, p_i)|) / (1 - l)^m.
double joint_Pk_expectation(std::span<const CirclePoint> points, double ell);

/// The d+1 arguments t_1..t_d, t - sum t_i of F_n.
std::vector<CirclePoint> convolution_points(std::span<const CirclePoint> t_hat, CirclePoint t);

/// F_n(t_hat, t) = M_n(t_1)...M_n(t_d) M_n(t - sum t_i), evaluated exactly.
double F_n_eval(std::span<const CirclePoint> t_hat, CirclePoint t, const CoveringSample& sample,
                const LengthSequence& seq, std::int64_t n);

} // namespace dvz
