#include "dvz/circle.hpp"

#include <algorithm>

#include "dvz/errors.hpp"

namespace dvz {

double circle_dist(CirclePoint t, CirclePoint u)
{
    const double x = std::abs(t.position() - u.position());
    return std::min(x, 1.0 - x);
}

Arc::Arc(CirclePoint start, double length)
    : start_(start), length_(length)
{
    if (!(length > 0.0))
        throw DomainError("Arc: length must be positive");
    if (length >= 1.0) {
        start_ = CirclePoint(0.0);
        length_ = 1.0;
    }
}

bool Arc::contains(CirclePoint t) const
{
    if (full())
        return true;
    const double x = forward_offset(start_, t);
    return x > 0.0 && x < length_;
}

ArcSet ArcSet::full_circle()
{
    ArcSet s;
    s.arcs_.emplace_back(0.0, 1.0);
    s.measure_ = 1.0;
    return s;
}

bool ArcSet::contains(CirclePoint t) const
{
    if (arcs_.empty())
        return false;
    const double x = t.position();
    auto it = std::upper_bound(arcs_.begin(), arcs_.end(), x,
                               [](double v, const Arc& a) { return v < a.start().position(); });
    if (it != arcs_.begin() && std::prev(it)->contains(t))
        return true;
    // the wrapping arc, if any, is last and can contain points before every start
    return arcs_.back().wraps() && arcs_.back().contains(t);
}

ArcSet ArcSet::rotated(double shift) const
{
    std::vector<Arc> moved;
    moved.reserve(arcs_.size());
    for (const Arc& a : arcs_)
        moved.emplace_back(a.start() + shift, a.length());
    return arc_union(moved);
}

namespace {

struct Segment {
    double lo;
    double hi;
};

} // namespace

ArcSet arc_union(std::span<const Arc> arcs)
{
    ArcSet out;
    if (arcs.empty())
        return out;

    std::vector<Segment> segs;
    segs.reserve(arcs.size() + 4);
    for (const Arc& a : arcs) {
        if (a.full())
            return ArcSet::full_circle();
        const double s = a.start().position();
        const double e = a.end();
        if (e <= 1.0) {
            segs.push_back({s, e});
        } else {
            segs.push_back({s, 1.0});
            segs.push_back({0.0, e - 1.0});
        }
    }
    std::sort(segs.begin(), segs.end(), [](const Segment& a, const Segment& b) {
        return a.lo < b.lo || (a.lo == b.lo && a.hi < b.hi);
    });

    std::vector<Segment> merged;
    merged.reserve(segs.size());
    for (const Segment& s : segs) {
        if (!merged.empty() && s.lo <= merged.back().hi + kSnapTolerance)
            merged.back().hi = std::max(merged.back().hi, s.hi);
        else
            merged.push_back(s);
    }

    const bool touches_zero = merged.front().lo <= kSnapTolerance;
    const bool touches_one = merged.back().hi >= 1.0 - kSnapTolerance;
    if (merged.size() == 1 && touches_zero && touches_one)
        return ArcSet::full_circle();

    std::size_t first = 0;
    std::size_t last = merged.size();
    double wrap_start = 0.0, wrap_len = 0.0;
    const bool join = merged.size() > 1 && touches_zero && touches_one;
    if (join) {
        wrap_start = merged.back().lo;
        wrap_len = (1.0 - merged.back().lo) + merged.front().hi;
        first = 1;
        last = merged.size() - 1;
    }

    out.arcs_.reserve(last - first + 1);
    double total = 0.0;
    for (std::size_t i = first; i < last; ++i) {
        const double len = merged[i].hi - merged[i].lo;
        if (len <= 0.0)
            continue;
        out.arcs_.emplace_back(merged[i].lo, len);
        total += len;
    }
    if (join) {
        if (wrap_len >= 1.0 - kSnapTolerance)
            return ArcSet::full_circle();
        out.arcs_.emplace_back(wrap_start, wrap_len);
        total += wrap_len;
    }
    out.measure_ = std::clamp(total, 0.0, 1.0);
    return out;
}

ArcSet arc_complement(const ArcSet& s)
{
    if (s.empty())
        return ArcSet::full_circle();
    if (s.full())
        return {};
    const auto& arcs = s.arcs();
    std::vector<Arc> gaps;
    gaps.reserve(arcs.size());
    for (std::size_t i = 0; i < arcs.size(); ++i) {
        const double end = arcs[i].end();
        const double next = i + 1 < arcs.size() ? arcs[i + 1].start().position()
                                                : arcs.front().start().position() + 1.0;
        const double len = next - end;
        if (len > kSnapTolerance)
            gaps.emplace_back(end, len);
    }
    return arc_union(gaps);
}

void to_json(nlohmann::json& j, const ArcSet& s)
{
    j = nlohmann::json::array();
    for (const Arc& a : s.arcs())
        j.push_back({{"start", a.start().position()}, {"length", a.length()}});
}

ArcSet arc_set_from_json(const nlohmann::json& j)
{
    if (!j.is_array())
        throw ValidationError("arc set JSON must be an array of {start, length}");
    std::vector<Arc> arcs;
    arcs.reserve(j.size());
    for (const auto& item : j)
        arcs.emplace_back(item.at("start").get<double>(), item.at("length").get<double>());
    return arc_union(arcs);
}

} // namespace dvz
