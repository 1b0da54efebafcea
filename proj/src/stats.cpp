#include "dvz/stats.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace dvz {

void RunningStats::add(double x)
{
    ++n_;
    const double delta = x - mean_;
    mean_ += delta / static_cast<double>(n_);
    m2_ += delta * (x - mean_);
}

double RunningStats::variance() const
{
    return n_ < 2 ? 0.0 : m2_ / static_cast<double>(n_ - 1);
}

double RunningStats::stderr_of_mean() const
{
    return n_ < 2 ? 0.0 : std::sqrt(variance() / static_cast<double>(n_));
}

ExpectationEstimate RunningStats::estimate(std::uint64_t fingerprint) const
{
    return {mean_, stderr_of_mean(), n_, fingerprint};
}

ExpectationEstimate estimate_mean(std::span<const double> values, std::uint64_t fingerprint)
{
    RunningStats rs;
    for (double v : values)
        rs.add(v);
    return rs.estimate(fingerprint);
}

LinearFit least_squares(std::span<const double> x, std::span<const double> y)
{
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("least_squares: need at least two paired points");
    const double n = static_cast<double>(x.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (sxx == 0.0)
        throw std::invalid_argument("least_squares: degenerate abscissae");
    LinearFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    if (x.size() > 2) {
        double rss = 0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double r = y[i] - (fit.intercept + fit.slope * x[i]);
            rss += r * r;
        }
        fit.slope_stderr = std::sqrt(rss / (n - 2.0) / sxx);
    }
    return fit;
}

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed)
{
    std::uint64_t h = seed;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex64(std::uint64_t v)
{
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

} // namespace dvz
