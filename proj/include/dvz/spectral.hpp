#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <vector>

#include "dvz/chaos.hpp"

namespace dvz {

/// Coefficients mu^(k) = (1/G) sum_j v_j e^{-2 pi i k j / G} for |k| <= K_max.
/// Both halves are stored.
struct SpectrumSlice {
    std::int64_t grid = 0;
    std::int64_t k_max = 0;
    std::vector<std::complex<double>> coeffs; // index k + k_max

    std::complex<double> at(std::int64_t k) const { return coeffs.at(static_cast<std::size_t>(k + k_max)); }
};

SpectrumSlice fourier_coeffs(const GridDensity& gd, std::int64_t k_max);

/// Coefficientwise d-th power.
SpectrumSlice convolution_power(const SpectrumSlice& spec, int d);

/// d-fold circular self-convolution on the grid,
/// (v * w)_j = (1/G) sum_i v_i w_{(j - i) mod G}, computed in the spectral domain.
GridDensity convolution_density(const GridDensity& gd, int d);

/// sum over one period k in (-G/2, G/2] of |mu^(k)|^2; needs k_max == G/2.
double spectral_energy(const SpectrumSlice& spec);

struct DecayBand {
    std::int64_t start = 0;  // K
    double band_max = 0.0;   // max |mu^(k)| over K <= |k| < 2K
};

struct DecayProfile {
    std::vector<DecayBand> bands;
    std::optional<double> slope; // log-log fit of band_max against K; empty when flat-zero
    bool flat_zero = false;
};

DecayProfile decay_profile(const SpectrumSlice& spec, const std::vector<std::int64_t>& band_starts);

double l2_norm(const GridDensity& gd);

} // namespace dvz
