#include <doctest.h>

#include <random>

#include "dvz/circle.hpp"
#include "dvz/errors.hpp"
#include "oracles.hpp"

using namespace dvz;

namespace {

std::vector<Arc> to_arcs(const std::vector<oracle::Interval>& xs)
{
    std::vector<Arc> out;
    for (auto [s, l] : xs)
        out.emplace_back(s, l);
    return out;
}

std::vector<oracle::Interval> random_arcs(std::mt19937_64& gen)
{
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::uniform_int_distribution<int> count(0, 8);
    std::vector<oracle::Interval> arcs;
    const int m = count(gen);
    for (int i = 0; i < m; ++i)
        arcs.push_back({u(gen), 0.3 * u(gen) * u(gen) + 1e-6});
    return arcs;
}

} // namespace

TEST_CASE("circle_dist examples")
{
    CHECK(circle_dist(CirclePoint(0.1), CirclePoint(0.9)) == doctest::Approx(0.2).epsilon(1e-15));
    CHECK(circle_dist(CirclePoint(0.3), CirclePoint(0.3)) == 0.0);
    CHECK(circle_dist(CirclePoint(0.0), CirclePoint(0.5)) == 0.5);
}

TEST_CASE("circle point normalization is total")
{
    for (double x : {-3.25, -1e-18, 0.0, 1.0, 1.0 - 1e-17, 7.5, 1e9 + 0.25})
        CHECK((CirclePoint(x).position() >= 0.0 && CirclePoint(x).position() < 1.0));
    CHECK(CirclePoint(-0.25).position() == 0.75);
    CHECK((CirclePoint(0.7) + 0.5).position() == doctest::Approx(0.2));
}

TEST_CASE("circle_dist is a metric on random points")
{
    std::mt19937_64 gen(11);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int i = 0; i < 1000; ++i) {
        CirclePoint a(u(gen)), b(u(gen)), c(u(gen));
        CHECK(circle_dist(a, b) == circle_dist(b, a));
        CHECK(circle_dist(a, b) <= 0.5);
        CHECK(circle_dist(a, c) <= circle_dist(a, b) + circle_dist(b, c) + 1e-15);
        CHECK(circle_dist(a, b) == doctest::Approx(oracle::dist(a.position(), b.position())));
    }
}

TEST_CASE("arc validation")
{
    CHECK_THROWS_AS(Arc(0.1, 0.0), DomainError);
    CHECK_THROWS_AS(Arc(0.1, -0.5), DomainError);
    CHECK(Arc(0.4, 3.0).full());
    CHECK_FALSE(Arc(0.3, 0.5).contains(CirclePoint(0.3)));
    CHECK(Arc(0.9, 0.2).contains(CirclePoint(0.05)));
}

TEST_CASE("arc_union examples against a fine-grid membership oracle")
{
    SUBCASE("wrapping merge")
    {
        const std::vector<oracle::Interval> in = {{0.9, 0.2}, {0.05, 0.1}};
        const ArcSet s = arc_union(to_arcs(in));
        REQUIRE(s.size() == 1);
        CHECK(s.arcs()[0].start().position() == doctest::Approx(0.9));
        CHECK(s.arcs()[0].length() == doctest::Approx(0.25));
        CHECK(s.measure() == doctest::Approx(0.25));
        CHECK(oracle::grid_measure([&](double x) { return oracle::in_any(x, in); }, 1'000'000) ==
              doctest::Approx(0.25).epsilon(1e-5));
        const ArcSet c = arc_complement(s);
        REQUIRE(c.size() == 1);
        CHECK(c.arcs()[0].start().position() == doctest::Approx(0.15));
        CHECK(c.arcs()[0].length() == doctest::Approx(0.75));
    }
    SUBCASE("singleton")
    {
        const ArcSet s = arc_union(to_arcs({{0.2, 0.1}}));
        REQUIRE(s.size() == 1);
        CHECK(s.arcs()[0].start().position() == doctest::Approx(0.2));
        CHECK(s.arcs()[0].length() == doctest::Approx(0.1));
        CHECK(s.measure() == doctest::Approx(0.1));
    }
    SUBCASE("overlap to full circle")
    {
        const std::vector<oracle::Interval> in = {{0.0, 0.6}, {0.5, 0.6}};
        const ArcSet s = arc_union(to_arcs(in));
        CHECK(s.full());
        CHECK(s.measure() == 1.0);
        CHECK(oracle::grid_measure([&](double x) { return oracle::in_any(x, in); }, 1'000'000) ==
              doctest::Approx(1.0).epsilon(1e-5));
    }
    SUBCASE("empty")
    {
        const ArcSet s = arc_union({});
        CHECK(s.empty());
        CHECK(arc_measure(s) == 0.0);
        CHECK(arc_complement(s).full());
        CHECK(arc_complement(ArcSet::full_circle()).empty());
    }
    SUBCASE("additivity")
    {
        CHECK(arc_measure(arc_union(to_arcs({{0.1, 0.1}, {0.5, 0.2}}))) == doctest::Approx(0.3));
    }
}

TEST_CASE("complement of a single arc is the single gap")
{
    const ArcSet c = arc_complement(arc_union(to_arcs({{0.3, 0.5}})));
    REQUIRE(c.size() == 1);
    CHECK(c.arcs()[0].start().position() == doctest::Approx(0.8));
    CHECK(c.arcs()[0].length() == doctest::Approx(0.5));
    CHECK(c.contains(CirclePoint(0.95)));
    CHECK(c.contains(CirclePoint(0.1)));
    CHECK_FALSE(c.contains(CirclePoint(0.5)));
}

TEST_CASE("property: union membership, double complement, rotation")
{
    std::mt19937_64 gen(20240611);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 1000; ++trial) {
        const auto in = random_arcs(gen);
        const ArcSet s = arc_union(to_arcs(in));
        const ArcSet c = arc_complement(s);
        const ArcSet cc = arc_complement(c);
        const double shift = u(gen);
        const ArcSet rot = s.rotated(shift);

        CHECK(s.measure() + c.measure() == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(cc.measure() == doctest::Approx(s.measure()).epsilon(1e-12));
        CHECK(rot.measure() == doctest::Approx(s.measure()).epsilon(1e-12));
        CHECK(s.measure() == doctest::Approx(oracle::total(oracle::covered_intervals(in))).epsilon(1e-12));

        for (int p = 0; p < 1000; ++p) {
            const double x = u(gen);
            const bool expect = oracle::in_any(x, in);
            if (s.contains(CirclePoint(x)) != expect) {
                // only endpoints of merged arcs may disagree
                bool near_end = false;
                for (auto [a, l] : in)
                    near_end = near_end || oracle::dist(x, a) < 1e-11 || oracle::dist(x, a + l) < 1e-11;
                CHECK(near_end);
            }
            CHECK(cc.contains(CirclePoint(x)) == s.contains(CirclePoint(x)));
            CHECK(rot.contains(CirclePoint(x + shift)) == s.contains(CirclePoint(x)));
        }
    }
}

TEST_CASE("arc sets stay sorted and disjoint")
{
    std::mt19937_64 gen(5);
    for (int trial = 0; trial < 500; ++trial) {
        const ArcSet s = arc_union(to_arcs(random_arcs(gen)));
        const auto& a = s.arcs();
        for (std::size_t i = 0; i + 1 < a.size(); ++i) {
            CHECK(a[i].start().position() < a[i + 1].start().position());
            CHECK(a[i].end() < a[i + 1].start().position());
            CHECK_FALSE(a[i].wraps());
        }
    }
}

TEST_CASE("ArcSet JSON round trip")
{
    const ArcSet s = arc_union(to_arcs({{0.9, 0.2}, {0.3, 0.05}, {0.5, 0.125}}));
    nlohmann::json j = s;
    REQUIRE(j.is_array());
    CHECK(j[0].contains("start"));
    CHECK(j[0].contains("length"));
    CHECK(arc_set_from_json(j) == s);
}
