#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dvz {

/// Monte Carlo mean with its standard error.
struct ExpectationEstimate {
    double mean = 0.0;
    double stderr_ = 0.0; // sample standard deviation / sqrt(samples)
    std::int64_t samples = 0;
    std::uint64_t fingerprint = 0;

    double lower(double k) const { return mean - k * stderr_; }
    double upper(double k) const { return mean + k * stderr_; }
    bool contains(double value, double k) const { return value >= lower(k) && value <= upper(k); }
};

/// Welford accumulator; add order is the reduction order.
class RunningStats {
public:
    void add(double x);
    std::int64_t count() const { return n_; }
    double mean() const { return mean_; }
    double variance() const; // unbiased
    double stderr_of_mean() const;
    ExpectationEstimate estimate(std::uint64_t fingerprint = 0) const;

private:
    std::int64_t n_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
};

ExpectationEstimate estimate_mean(std::span<const double> values, std::uint64_t fingerprint = 0);

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_stderr = 0.0; // 0 when fewer than three points
};

LinearFit least_squares(std::span<const double> x, std::span<const double> y);

// FNV-1a, used for config fingerprints and output checksums.
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ULL);
std::string hex64(std::uint64_t v);

} // namespace dvz
