#include <doctest.h>

#include <cmath>
#include <random>

#include "dvz/chaos.hpp"
#include "dvz/errors.hpp"
#include "dvz/stats.hpp"
#include "oracles.hpp"

using namespace dvz;

namespace {

CoveringSample fixture(std::vector<double> omegas)
{
    CoveringSample s;
    s.synthetic = true;
    for (double w : omegas)
        s.omegas.emplace_back(w);
    return s;
}

// E over omega of prod_i P(p_i), P = 1{p not in (omega, omega + l)} / (1 - l)
std::pair<double, double> mc_joint(const std::vector<double>& pts, double ell, std::int64_t draws,
                                   std::uint64_t seed)
{
    return oracle::mc_mean(
        [&](auto& gen, auto& u) {
            const double w = u(gen);
            double v = 1.0;
            for (double p : pts)
                v *= oracle::in_arc(p, w, ell) ? 0.0 : 1.0 / (1.0 - ell);
            return v;
        },
        draws, seed);
}

std::vector<CirclePoint> pts(std::initializer_list<double> xs)
{
    return {xs.begin(), xs.end()};
}

} // namespace

TEST_CASE("density grid: empty product and single interval")
{
    const auto seq = LengthSequence::alpha_over_n(0.5);
    const auto zero = density_grid(sample_omegas(1, 1), seq, 0, 16);
    for (double v : zero.values)
        CHECK(v == 1.0);
    CHECK(zero.mass == 1.0);

    // centers (j + 0.5) / 8 outside (0.3, 0.8): 0.0625, 0.1875, 0.8125, 0.9375
    const auto one = density_grid(fixture({0.3}), seq, 1, 8);
    for (int j = 0; j < 8; ++j) {
        const bool nonzero = j == 0 || j == 1 || j == 6 || j == 7;
        CHECK(one.values[static_cast<std::size_t>(j)] == (nonzero ? 2.0 : 0.0));
    }
    CHECK(one.mass == 1.0);
    CHECK(total_mass(one) == one.mass);
    CHECK_THROWS_AS(density_grid(fixture({0.3}), seq, 1, 12), ValidationError);
    CHECK_THROWS_AS(density_grid(fixture({0.3}), seq, 2, 8), ValidationError);
    CHECK_THROWS_AS(density_grid(fixture({0.3}), LengthSequence::alpha_over_n(1.0), 1, 8), DomainError);

    const auto h = density_header(one);
    CHECK(h.at("G") == 8);
    CHECK(h.at("n") == 1);
    CHECK(h.at("mass") == 1.0);
    CHECK(h.contains("family"));
    CHECK(h.contains("seed"));
}

TEST_CASE("density grid agrees with pointwise products and with the covering")
{
    const auto seq = LengthSequence::alpha_over_n(0.5);
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const auto sample = sample_omegas(seed, 300);
        for (std::int64_t n : {1, 7, 300}) {
            const auto gd = density_grid(sample, seq, n, 1024);
            const auto e = noncovered_set(sample, seq, n);
            const DensityField field(sample, seq, n);
            for (std::int64_t j = 0; j < gd.grid; ++j) {
                const CirclePoint c(gd.center(j));
                const double v = gd.values[static_cast<std::size_t>(j)];
                CHECK(v >= 0.0);
                CHECK(v == doctest::Approx(M_n_eval(c, sample, seq, n)).epsilon(1e-12));
                CHECK(v == doctest::Approx(field(c)).epsilon(1e-12));
                // positive values only off the covered set
                if (v > 0.0)
                    CHECK(e.contains(c));
            }
        }
    }
}

TEST_CASE("cells that are covered under wrap-around")
{
    // interval spanning the seam and an interval longer than half the circle
    const auto seq = LengthSequence::explicit_list({0.75, 0.2});
    const auto sample = fixture({0.9, 0.61});
    const auto gd = density_grid(sample, seq, 2, 64);
    for (std::int64_t j = 0; j < 64; ++j) {
        const double c = gd.center(j);
        const bool covered = oracle::in_arc(c, 0.9, 0.75) || oracle::in_arc(c, 0.61, 0.2);
        CHECK((gd.values[static_cast<std::size_t>(j)] == 0.0) == covered);
    }
}

TEST_CASE("martingale: each cell has mean one")
{
    const auto seq = LengthSequence::alpha_over_n(0.5);
    constexpr int G = 64;
    std::vector<RunningStats> cells(G);
    for (std::uint64_t seed = 1; seed <= 10'000; ++seed) {
        const auto gd = density_grid(sample_omegas(seed, 100), seq, 100, G);
        for (int j = 0; j < G; ++j)
            cells[static_cast<std::size_t>(j)].add(gd.values[static_cast<std::size_t>(j)]);
    }
    for (const auto& c : cells)
        CHECK(c.estimate().contains(1.0, 4.0));
}

TEST_CASE("martingale: total mass has mean one across levels")
{
    const auto seq = LengthSequence::alpha_over_n(0.5);
    for (std::int64_t n : {10, 100, 1000}) {
        RunningStats rs;
        for (std::uint64_t seed = 1; seed <= 10'000; ++seed)
            rs.add(density_grid(sample_omegas(seed, n), seq, n, 4096).mass);
        CHECK(rs.estimate().contains(1.0, 4.0));
    }
}

TEST_CASE("pair correlation single factors")
{
    const auto one = LengthSequence::explicit_list({0.2});
    CHECK(pair_correlation_exact(CirclePoint(0.0), CirclePoint(0.1), one, 1) ==
          doctest::Approx(1.09375).epsilon(1e-12));
    CHECK(pair_correlation_exact(CirclePoint(0.0), CirclePoint(0.2), one, 1) ==
          doctest::Approx(0.9375).epsilon(1e-12));
    CHECK(pair_correlation_exact(CirclePoint(0.3), CirclePoint(0.7), one, 1) ==
          doctest::Approx(0.9375).epsilon(1e-12));
    CHECK(pair_correlation_exact(CirclePoint(0.4), CirclePoint(0.4), one, 1) == doctest::Approx(1.25).epsilon(1e-12));
    CHECK(pair_correlation_exact(CirclePoint(0.4), CirclePoint(0.9), one, 0) == 1.0);

    // Monte Carlo over omega
    for (auto [u, expect] : {std::pair{0.1, 1.09375}, std::pair{0.2, 0.9375}, std::pair{0.35, 0.9375}}) {
        auto [mean, se] = mc_joint({0.0, u}, 0.2, 1'000'000, 17);
        CHECK(std::abs(mean - expect) < 4 * se);
    }
}

TEST_CASE("pair correlation rejects long intervals and names the index")
{
    const auto seq = LengthSequence::explicit_list({0.6, 0.1});
    try {
        pair_correlation_exact(CirclePoint(0.0), CirclePoint(0.2), seq, 2);
        FAIL("expected a domain error");
    } catch (const DomainError& e) {
        CHECK(std::string(e.what()).find("l_1") != std::string::npos);
    }
}

TEST_CASE("pair correlation is the product of joint expectations")
{
    const auto seq = LengthSequence::alpha_over_n(0.5);
    for (double u : {0.001, 0.01, 0.1, 0.3, 0.5}) {
        double prod = 1.0;
        for (int k = 1; k <= 200; ++k)
            prod *= joint_Pk_expectation(pts({0.0, u}), seq(k));
        CHECK(pair_correlation_exact(CirclePoint(0.0), CirclePoint(u), seq, 200) ==
              doctest::Approx(prod).epsilon(1e-10));
    }
}

TEST_CASE("joint expectation")
{
    CHECK(joint_Pk_expectation(pts({0.42}), 0.3) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(joint_Pk_expectation(pts({0.0, 0.1}), 0.2) == doctest::Approx(1.09375).epsilon(1e-12));
    const auto four = pts({0.1, 0.3, 0.55, 0.8});
    const double expect = 0.8 / std::pow(0.95, 4);
    CHECK(joint_Pk_expectation(four, 0.05) == doctest::Approx(expect).epsilon(1e-12));
    CHECK(joint_Pk_expectation(four, 0.05) == doctest::Approx(0.98218).epsilon(1e-5));
    auto [mean, se] = mc_joint({0.1, 0.3, 0.55, 0.8}, 0.05, 1'000'000, 3);
    CHECK(std::abs(mean - expect) < 4 * se);
    // windows that cover everything
    CHECK(joint_Pk_expectation(pts({0.0, 0.25, 0.5, 0.75}), 0.3) == 0.0);
    CHECK_THROWS_AS(joint_Pk_expectation(pts({0.1}), 1.0), DomainError);
}

TEST_CASE("property: joint expectation matches Monte Carlo on random configurations")
{
    std::mt19937_64 gen(99);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<double> p;
        const int m = 1 + trial % 5;
        for (int i = 0; i < m; ++i)
            p.push_back(u(gen));
        const double ell = 0.02 + 0.15 * u(gen);
        std::vector<CirclePoint> cp(p.begin(), p.end());
        auto [mean, se] = mc_joint(p, ell, 200'000, 1000 + static_cast<std::uint64_t>(trial));
        CHECK(std::abs(mean - joint_Pk_expectation(cp, ell)) < 4.5 * se + 1e-12);
    }
}

TEST_CASE("F_n")
{
    const auto seq = LengthSequence::alpha_over_n(0.3);
    const auto sample = sample_omegas(5, 100);
    CHECK(F_n_eval(pts({0.2, 0.7}), CirclePoint(0.1), sample, seq, 0) == 1.0);
    for (double t1 : {0.05, 0.3, 0.61, 0.9}) {
        const double a = M_n_eval(CirclePoint(t1), sample, seq, 100);
        const double b = M_n_eval(CirclePoint(-t1), sample, seq, 100);
        CHECK(F_n_eval(pts({t1}), CirclePoint(0.0), sample, seq, 100) == doctest::Approx(a * b));
    }
    const auto cp = convolution_points(pts({0.2, 0.7}), CirclePoint(0.1));
    REQUIRE(cp.size() == 3);
    CHECK(cp[2].position() == doctest::Approx(0.2));
}

TEST_CASE("F_n expectation factorizes over k for separated points")
{
    const auto seq = LengthSequence::alpha_over_n(0.3);
    const auto t_hat = pts({0.3, 0.6}); // with -0.9 = 0.1: pairwise distances >= 0.2
    const auto p3 = convolution_points(t_hat, CirclePoint(0.0));
    double expect = 1.0;
    for (int k = 1; k <= 50; ++k)
        expect *= joint_Pk_expectation(p3, seq(k));
    RunningStats rs;
    for (std::uint64_t seed = 1; seed <= 10'000; ++seed)
        rs.add(F_n_eval(t_hat, CirclePoint(0.0), sample_omegas(seed, 50), seq, 50));
    CHECK(rs.estimate().contains(expect, 4.0));
}
