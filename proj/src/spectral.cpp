#include "dvz/spectral.hpp"

#include <cmath>
#include <memory>
#include <mutex>

#include <fftw3.h>

#include "dvz/errors.hpp"
#include "dvz/stats.hpp"

namespace dvz {

namespace {

// FFTW's planner is not thread safe.
std::mutex& planner_mutex()
{
    static std::mutex m;
    return m;
}

struct FftwFree {
    void operator()(void* p) const { fftw_free(p); }
};
struct PlanDestroy {
    void operator()(fftw_plan p) const
    {
        std::lock_guard lock(planner_mutex());
        fftw_destroy_plan(p);
    }
};

using RealBuffer = std::unique_ptr<double[], FftwFree>;
using ComplexBuffer = std::unique_ptr<fftw_complex[], FftwFree>;
using Plan = std::unique_ptr<std::remove_pointer_t<fftw_plan>, PlanDestroy>;

RealBuffer alloc_real(std::size_t n)
{
    return RealBuffer(fftw_alloc_real(n));
}
ComplexBuffer alloc_complex(std::size_t n)
{
    return ComplexBuffer(fftw_alloc_complex(n));
}

// Unnormalized r2c transform: out[k] = sum_j v_j e^{-2 pi i k j / G}, k = 0..G/2.
std::vector<std::complex<double>> forward(const std::vector<double>& values)
{
    const std::size_t g = values.size();
    auto in = alloc_real(g);
    auto out = alloc_complex(g / 2 + 1);
    Plan plan;
    {
        std::lock_guard lock(planner_mutex());
        plan.reset(fftw_plan_dft_r2c_1d(static_cast<int>(g), in.get(), out.get(), FFTW_ESTIMATE));
    }
    std::copy(values.begin(), values.end(), in.get());
    fftw_execute(plan.get());
    std::vector<std::complex<double>> res(g / 2 + 1);
    for (std::size_t k = 0; k <= g / 2; ++k)
        res[k] = {out[k][0], out[k][1]};
    return res;
}

// Inverse of `forward` including the 1/G factor.
std::vector<double> inverse(const std::vector<std::complex<double>>& half, std::size_t g)
{
    auto in = alloc_complex(g / 2 + 1);
    auto out = alloc_real(g);
    Plan plan;
    {
        std::lock_guard lock(planner_mutex());
        plan.reset(fftw_plan_dft_c2r_1d(static_cast<int>(g), in.get(), out.get(), FFTW_ESTIMATE));
    }
    for (std::size_t k = 0; k <= g / 2; ++k) {
        in[k][0] = half[k].real();
        in[k][1] = half[k].imag();
    }
    fftw_execute(plan.get());
    std::vector<double> res(out.get(), out.get() + g);
    for (double& v : res)
        v /= static_cast<double>(g);
    return res;
}

void check_grid(const GridDensity& gd)
{
    const auto g = static_cast<std::int64_t>(gd.values.size());
    if (g < 2 || (g & (g - 1)) != 0 || g != gd.grid)
        throw ValidationError("spectral: grid size must be a power of two matching the values");
}

} // namespace

SpectrumSlice fourier_coeffs(const GridDensity& gd, std::int64_t k_max)
{
    check_grid(gd);
    if (k_max < 0 || k_max > gd.grid / 2)
        throw ValidationError("fourier_coeffs: K_max must lie in [0, G/2]");
    const auto half = forward(gd.values);
    const double inv_g = 1.0 / static_cast<double>(gd.grid);
    SpectrumSlice s;
    s.grid = gd.grid;
    s.k_max = k_max;
    s.coeffs.resize(static_cast<std::size_t>(2 * k_max + 1));
    for (std::int64_t k = 0; k <= k_max; ++k) {
        const std::complex<double> c = half[static_cast<std::size_t>(k)] * inv_g;
        s.coeffs[static_cast<std::size_t>(k_max + k)] = c;
        s.coeffs[static_cast<std::size_t>(k_max - k)] = std::conj(c);
    }
    // real input: mu^(0) and the Nyquist term are real
    s.coeffs[static_cast<std::size_t>(k_max)].imag(0.0);
    return s;
}

SpectrumSlice convolution_power(const SpectrumSlice& spec, int d)
{
    if (d < 1)
        throw ValidationError("convolution_power: d must be >= 1");
    SpectrumSlice out = spec;
    if (d == 1)
        return out;
    for (auto& c : out.coeffs) {
        std::complex<double> p = c;
        for (int i = 1; i < d; ++i)
            p *= c;
        c = p;
    }
    return out;
}

GridDensity convolution_density(const GridDensity& gd, int d)
{
    check_grid(gd);
    if (d < 1)
        throw ValidationError("convolution_density: d must be >= 1");
    if (d == 1)
        return gd;
    const auto g = static_cast<std::size_t>(gd.grid);
    auto half = forward(gd.values);
    const double inv_g = 1.0 / static_cast<double>(gd.grid);
    for (auto& c : half) {
        const std::complex<double> mu = c * inv_g;
        std::complex<double> p = mu;
        for (int i = 1; i < d; ++i)
            p *= mu;
        c = p * static_cast<double>(gd.grid);
    }
    GridDensity out = gd;
    out.values = inverse(half, g);
    // the exact convolution of a non-negative sequence is non-negative; drop FFT round-off
    for (double& v : out.values)
        v = std::max(v, 0.0);
    out.mass = total_mass(out);
    return out;
}

double spectral_energy(const SpectrumSlice& spec)
{
    if (spec.k_max != spec.grid / 2)
        throw ValidationError("spectral_energy: needs the full spectrum (K_max = G/2)");
    double e = 0.0;
    for (std::int64_t k = -spec.k_max + 1; k <= spec.k_max; ++k)
        e += std::norm(spec.at(k));
    return e;
}

DecayProfile decay_profile(const SpectrumSlice& spec, const std::vector<std::int64_t>& band_starts)
{
    if (band_starts.size() < 2)
        throw ValidationError("decay_profile: need at least two bands");
    DecayProfile p;
    for (std::int64_t K : band_starts) {
        if (K < 1 || 2 * K - 1 > spec.k_max)
            throw ValidationError("decay_profile: band [" + std::to_string(K) + ", " + std::to_string(2 * K) +
                                  ") exceeds K_max");
        double m = 0.0;
        for (std::int64_t k = K; k < 2 * K; ++k)
            m = std::max({m, std::abs(spec.at(k)), std::abs(spec.at(-k))});
        p.bands.push_back({K, m});
    }
    const double scale = std::abs(spec.at(0));
    bool flat = true;
    for (const auto& b : p.bands)
        flat = flat && b.band_max <= 1e-12 * std::max(scale, 1.0);
    p.flat_zero = flat;
    if (!flat) {
        std::vector<double> x, y;
        for (const auto& b : p.bands) {
            if (b.band_max <= 0.0)
                continue;
            x.push_back(std::log(static_cast<double>(b.start)));
            y.push_back(std::log(b.band_max));
        }
        if (x.size() >= 2)
            p.slope = least_squares(x, y).slope;
    }
    return p;
}

double l2_norm(const GridDensity& gd)
{
    double s = 0.0;
    for (double v : gd.values)
        s += v * v;
    return std::sqrt(s / static_cast<double>(gd.values.size()));
}

} // namespace dvz
