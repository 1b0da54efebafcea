#pragma once

#include <cmath>
#include <span>
#include <vector>

#include <json.hpp>

namespace dvz {

/// Arcs closer than this are merged when forming unions.
inline constexpr double kSnapTolerance = 1e-12;

/// A point of R/Z, stored as its representative in [0, 1).
class CirclePoint {
public:
    constexpr CirclePoint() = default;
    explicit CirclePoint(double t) : pos_(wrap(t)) {}

    double position() const { return pos_; }
    explicit operator double() const { return pos_; }

    CirclePoint operator+(double shift) const { return CirclePoint(pos_ + shift); }
    CirclePoint operator-(double shift) const { return CirclePoint(pos_ - shift); }
    CirclePoint operator-() const { return CirclePoint(-pos_); }

    friend bool operator==(CirclePoint, CirclePoint) = default;

    static double wrap(double t)
    {
        double x = t - std::floor(t);
        // t slightly below an integer can round up to exactly 1.0
        return x >= 1.0 ? 0.0 : x;
    }

private:
    double pos_ = 0.0;
};

/// Distance on the circle, in [0, 1/2].
double circle_dist(CirclePoint t, CirclePoint u);

/// (t - u) mod 1 in [0, 1).
inline double forward_offset(CirclePoint from, CirclePoint to)
{
    double x = to.position() - from.position();
    if (x < 0.0)
        x += 1.0;
    return x >= 1.0 ? 0.0 : x;
}

/// The arc (start, start + length) mod 1. length == 1 is the full circle.
class Arc {
public:
    Arc(CirclePoint start, double length);
    Arc(double start, double length) : Arc(CirclePoint(start), length) {}

    CirclePoint start() const { return start_; }
    double length() const { return length_; }
    /// Unwrapped end, in (0, 2).
    double end() const { return start_.position() + length_; }
    bool full() const { return length_ >= 1.0; }
    bool wraps() const { return end() > 1.0; }

    /// Open-interval membership: 0 < (t - start) mod 1 < length.
    bool contains(CirclePoint t) const;

    friend bool operator==(const Arc&, const Arc&) = default;

private:
    CirclePoint start_;
    double length_;
};

/// Finite disjoint union of arcs, sorted by start. At most the last arc wraps
/// past 1. The full circle is the single arc (0, 1).
class ArcSet {
public:
    ArcSet() = default;

    static ArcSet full_circle();

    const std::vector<Arc>& arcs() const { return arcs_; }
    double measure() const { return measure_; }
    bool empty() const { return arcs_.empty(); }
    bool full() const { return arcs_.size() == 1 && arcs_.front().full(); }
    std::size_t size() const { return arcs_.size(); }

    bool contains(CirclePoint t) const;
    ArcSet rotated(double shift) const;

    friend bool operator==(const ArcSet&, const ArcSet&) = default;

private:
    friend ArcSet arc_union(std::span<const Arc> arcs);
    std::vector<Arc> arcs_;
    double measure_ = 0.0;
};

ArcSet arc_union(std::span<const Arc> arcs);
ArcSet arc_complement(const ArcSet& s);
inline double arc_measure(const ArcSet& s) { return s.measure(); }

void to_json(nlohmann::json& j, const ArcSet& s);
ArcSet arc_set_from_json(const nlohmann::json& j);

} // namespace dvz
