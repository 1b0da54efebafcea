#include "dvz/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "dvz/chaos.hpp"
#include "dvz/errors.hpp"
#include "dvz/moments.hpp"
#include "dvz/parallel.hpp"
#include "dvz/spectral.hpp"
#include "dvz/stats.hpp"
#include "dvz/table.hpp"

#ifndef DVZ_VERSION
#define DVZ_VERSION "0.0.0"
#endif

namespace dvz {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kCommands[] = {"cover",    "density",    "fourier",   "convolve",
                                     "kernel",   "conditions", "dimension", "verify"};
const std::set<std::string> kVerifyChecks = {"ln-delta", "jn-cauchy", "h-product", "dominated-bound",
                                             "pair-correlation"};
const std::set<std::string> kConditionChecks = {"A", "B", "shepp", "eq3"};

std::vector<std::string> relevant_keys(const ExperimentConfig& c)
{
    switch (c.command) {
    case Command::cover: return {"n", "seed", "omegas"};
    case Command::density: return {"n", "grid", "seed", "omegas"};
    case Command::fourier: return {"n", "grid", "k_max", "band_lo", "seed", "seeds"};
    case Command::convolve: return {"n_list", "grid", "d", "seed", "seeds"};
    case Command::kernel: return {"n"};
    case Command::conditions: return {"n", "d", "checks", "mc_seed"};
    case Command::dimension: return {"n", "seed", "seeds", "scale_lo", "scale_hi", "anchor"};
    case Command::verify:
        if (c.check == "ln-delta")
            return {"check", "n", "d", "delta_list", "mc", "mc_seed", "seed", "seeds"};
        if (c.check == "jn-cauchy")
            return {"check", "n_list", "d", "delta", "mc", "mc_seed", "seed", "seeds"};
        if (c.check == "h-product")
            return {"check", "n", "d", "delta", "eta", "t_hat", "t_hat_prime", "mc", "mc_seed"};
        if (c.check == "dominated-bound")
            return {"check", "n", "d", "t_hat", "t_hat_prime"};
        return {"check", "n"};
    }
    return {};
}

std::vector<std::int64_t> levels_of(const ExperimentConfig& c)
{
    return c.n_list.empty() ? std::vector<std::int64_t>{c.n} : c.n_list;
}

std::vector<double> deltas_of(const ExperimentConfig& c)
{
    return c.delta_list.empty() ? std::vector<double>{c.delta} : c.delta_list;
}

std::int64_t k_max_of(const ExperimentConfig& c)
{
    return c.k_max > 0 ? c.k_max : c.grid / 2;
}

std::vector<std::string> checks_of(const ExperimentConfig& c)
{
    return c.checks.empty() ? std::vector<std::string>{"A", "B", "shepp", "eq3"} : c.checks;
}

template <class T>
void get_if_present(const json& j, const char* key, T& out)
{
    if (!j.contains(key) || j.at(key).is_null())
        return;
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ValidationError(std::string("config field '") + key + "': " + e.what());
    }
}

std::vector<CirclePoint> points(const std::vector<double>& xs)
{
    std::vector<CirclePoint> out;
    out.reserve(xs.size());
    for (double x : xs)
        out.emplace_back(x);
    return out;
}

// Sidecar path: "out/run.csv" + ".spectrum.csv" -> "out/run.spectrum.csv".
std::string sibling(const std::string& path, const std::string& suffix)
{
    fs::path p(path);
    return (p.parent_path() / (p.stem().string() + suffix)).string();
}

class Emitter {
public:
    explicit Emitter(std::vector<OutputRecord>& outputs) : outputs_(outputs) {}

    void text(const std::string& path, const std::string& body)
    {
        write_text_file(path, body);
        outputs_.push_back({path, fnv1a64(body), body.size()});
    }
    void csv(const std::string& path, const Table& t) { text(path, to_csv(t)); }
    void json_file(const std::string& path, const json& j) { text(path, j.dump(2) + "\n"); }

private:
    std::vector<OutputRecord>& outputs_;
};

CoveringSample sample_for(const ExperimentConfig& c, std::uint64_t seed, std::int64_t n)
{
    if (!c.omegas.empty()) {
        CoveringSample s = omegas_from_json(c.omegas);
        if (s.size() < n)
            throw ValidationError("omegas: fixture has " + std::to_string(s.size()) + " entries, n = " +
                                  std::to_string(n));
        return s;
    }
    return sample_omegas(seed, n);
}

void run_cover(const ExperimentConfig& c, Emitter& out, json& summary)
{
    const LengthSequence seq = c.sequence();
    const CoveringSample sample = sample_for(c, c.seed, c.n);
    const ArcSet e = noncovered_set(sample, seq, c.n);
    json j;
    j["family"] = seq.to_json();
    j["n"] = c.n;
    j["seed"] = sample.synthetic ? json(nullptr) : json(c.seed);
    j["synthetic"] = sample.synthetic;
    j["noncovered"] = e;
    j["measure"] = e.measure();
    try {
        j["expected_measure"] = expected_uncovered_measure(seq, c.n);
    } catch (const DomainError&) {
        j["expected_measure"] = nullptr;
    }
    summary["measure"] = e.measure();
    summary["arcs"] = e.size();
    out.json_file(c.emit, j);
}

void run_density(const ExperimentConfig& c, Emitter& out, json& summary)
{
    const LengthSequence seq = c.sequence();
    const CoveringSample sample = sample_for(c, c.seed, c.n);
    GridDensity gd = density_grid(sample, seq, c.n, c.grid);
    gd.seed = sample.synthetic ? 0 : c.seed;
    Table t({"index", "center", "value"});
    for (std::int64_t j = 0; j < gd.grid; ++j)
        t.add_row({j, gd.center(j), gd.values[static_cast<std::size_t>(j)]});
    out.csv(c.emit, t);
    out.json_file(sibling(c.emit, ".header.json"), density_header(gd));
    summary["mass"] = gd.mass;
}

std::vector<std::int64_t> band_starts(const ExperimentConfig& c)
{
    std::vector<std::int64_t> starts;
    const std::int64_t k_max = k_max_of(c);
    for (std::int64_t K = std::int64_t{1} << c.band_lo; 2 * K - 1 <= k_max; K *= 2)
        starts.push_back(K);
    if (starts.size() < 2)
        throw ValidationError("k_max: need at least two dyadic bands from 2^" + std::to_string(c.band_lo));
    return starts;
}

void run_fourier(const ExperimentConfig& c, Emitter& out, json& summary)
{
    const LengthSequence seq = c.sequence();
    const auto starts = band_starts(c);
    const std::int64_t k_max = k_max_of(c);
    struct PerSeed {
        DecayProfile profile;
        SpectrumSlice spectrum;
        double refinement_delta;
    };
    const auto per_seed = parallel_map(static_cast<std::size_t>(c.seeds), [&](std::size_t i) {
        const auto sample = sample_omegas(c.seed + i, c.n);
        const auto spec = fourier_coeffs(density_grid(sample, seq, c.n, c.grid), k_max);
        PerSeed r{decay_profile(spec, starts), {}, 0.0};
        if (i == 0) {
            r.spectrum = spec;
            // quantization control: same realization on a grid four times coarser
            if (c.grid >= 8) {
                const std::int64_t k_cmp = std::min<std::int64_t>(k_max, c.grid / 8);
                const auto coarse = fourier_coeffs(density_grid(sample, seq, c.n, c.grid / 4), k_cmp);
                for (std::int64_t k = -k_cmp; k <= k_cmp; ++k)
                    r.refinement_delta = std::max(r.refinement_delta, std::abs(coarse.at(k) - spec.at(k)));
            }
        }
        return r;
    });

    Table decay({"K", "band_max", "stderr", "seeds"});
    std::vector<double> logk, logm;
    for (std::size_t b = 0; b < starts.size(); ++b) {
        RunningStats rs;
        for (const auto& p : per_seed)
            rs.add(p.profile.bands[b].band_max);
        decay.add_row({starts[b], rs.mean(), rs.stderr_of_mean(), c.seeds});
        if (rs.mean() > 0.0) {
            logk.push_back(std::log(static_cast<double>(starts[b])));
            logm.push_back(std::log(rs.mean()));
        }
    }
    out.csv(c.emit, decay);

    const SpectrumSlice& s = per_seed.front().spectrum;
    Table spectrum({"k", "re", "im", "abs"});
    for (std::int64_t k = -s.k_max; k <= s.k_max; ++k) {
        const auto z = s.at(k);
        spectrum.add_row({k, z.real(), z.imag(), std::abs(z)});
    }
    out.csv(sibling(c.emit, ".spectrum.csv"), spectrum);
    if (logk.size() >= 2)
        summary["slope"] = least_squares(logk, logm).slope;
    summary["bands"] = starts.size();
    if (c.grid >= 8) {
        summary["refinement_grid"] = c.grid / 4;
        summary["refinement_k_max"] = std::min<std::int64_t>(k_max, c.grid / 8);
        summary["refinement_delta"] = per_seed.front().refinement_delta;
    }
}

void run_convolve(const ExperimentConfig& c, Emitter& out, json& summary, const std::string& hash)
{
    const LengthSequence seq = c.sequence();
    const auto levels = levels_of(c);
    const std::int64_t n_top = *std::max_element(levels.begin(), levels.end());
    const auto per_seed = parallel_map(static_cast<std::size_t>(c.seeds), [&](std::size_t i) {
        const auto sample = sample_omegas(c.seed + i, std::max<std::int64_t>(n_top, 1));
        std::vector<double> norms;
        // *^d M_n integrates d + 1 density factors
        for (std::int64_t n : levels)
            norms.push_back(l2_norm(convolution_density(density_grid(sample, seq, n, c.grid), c.d + 1)));
        return norms;
    });
    Table t({"n", "d", "l2_mean", "stderr", "samples", "config_hash"});
    std::vector<double> means;
    for (std::size_t l = 0; l < levels.size(); ++l) {
        RunningStats rs;
        for (const auto& v : per_seed)
            rs.add(v[l]);
        t.add_row({levels[l], std::int64_t{c.d}, rs.mean(), rs.stderr_of_mean(), c.seeds, hash});
        means.push_back(rs.mean());
    }
    out.csv(c.emit, t);
    summary["factors"] = c.d + 1;
    if (means.size() >= 2)
        summary["last_relative_change"] = means.back() / means[means.size() - 2] - 1.0;
}

void run_kernel(const ExperimentConfig& c, Emitter& out, json& summary)
{
    const LengthSequence seq = c.sequence();
    Table t({"t", "K", "K_n"});
    std::vector<double> x, y;
    for (double u : log_spaced(1e-4, 0.5, 64)) {
        const double k = kernel_K(seq, u);
        t.add_row({u, k, kernel_Kn(seq, c.n, u)});
        if (u <= 1e-2 + 1e-15) {
            x.push_back(std::log(1.0 / u));
            y.push_back(std::log(k));
        }
    }
    out.csv(c.emit, t);
    summary["log_slope"] = least_squares(x, y).slope;
}

L1ConditionOptions eq3_options(const ExperimentConfig& c)
{
    L1ConditionOptions o;
    o.mc_seed = c.mc_seed;
    return o;
}

void run_conditions(const ExperimentConfig& c, Emitter& out, json& summary)
{
    const LengthSequence seq = c.sequence();
    json verdicts = json::array();
    for (const auto& name : checks_of(c)) {
        ConditionVerdict v = name == "A"       ? check_condition_A(seq, c.n)
                             : name == "B"     ? check_condition_B(seq, c.n)
                             : name == "shepp" ? shepp_classify(seq, c.n)
                                               : l1_condition_estimate(seq, c.d, eq3_options(c));
        json j = to_json(v);
        if (name == "eq3")
            j["d"] = c.d;
        summary[name] = to_string(v.classification);
        verdicts.push_back(j);
    }
    out.json_file(c.emit, verdicts);
}

void run_dimension(const ExperimentConfig& c, Emitter& out, json& summary)
{
    const LengthSequence seq = c.sequence();
    // finest scale no smaller than 1/N
    int hi = c.scale_hi;
    while (hi > c.scale_lo + 1 && std::exp2(-hi) < 1.0 / static_cast<double>(std::max<std::int64_t>(c.n, 1)))
        --hi;
    const double eps_max = std::exp2(-c.scale_lo);
    const double eps_min = std::exp2(-hi);
    const int levels = hi - c.scale_lo + 1;

    const auto per_seed = parallel_map(static_cast<std::size_t>(c.seeds), [&](std::size_t i) {
        const auto e = noncovered_set(sample_omegas(c.seed + i, c.n), seq, c.n);
        std::optional<DimensionEstimate> r;
        if (!e.empty())
            r = box_dimension(e, eps_min, eps_max, levels, {.anchor = c.anchor});
        return r;
    });
    Table t({"seed", "scale", "box_count", "slope", "stderr"});
    RunningStats slopes;
    json skipped = json::array();
    for (std::size_t i = 0; i < per_seed.size(); ++i) {
        const auto seed = static_cast<std::int64_t>(c.seed + i);
        if (!per_seed[i]) {
            skipped.push_back(seed);
            continue;
        }
        const auto& est = *per_seed[i];
        slopes.add(est.slope);
        for (std::size_t s = 0; s < est.scales.size(); ++s)
            t.add_row({seed, est.scales[s], est.box_counts[s], est.slope, est.stderr_});
    }
    out.csv(c.emit, t);
    summary["mean_slope"] = slopes.count() ? json(slopes.mean()) : json(nullptr);
    summary["slope_stderr"] = slopes.count() > 1 ? json(slopes.stderr_of_mean()) : json(nullptr);
    summary["empty_seeds"] = skipped;
    summary["finest_scale_exponent"] = hi;
}

struct VerifyTable {
    Table t{{"check", "quantity", "n", "m", "param", "mean", "stderr", "samples", "config_hash"}};
    std::string check, hash;
    void row(const std::string& q, std::int64_t n, std::int64_t m, double param, double mean, double se,
             std::int64_t samples)
    {
        t.add_row({check, q, n, m, param, mean, se, samples, hash});
    }
};

std::vector<std::pair<std::vector<double>, std::vector<double>>> dominated_grid(const ExperimentConfig& c)
{
    if (!c.t_hat.empty())
        return {{c.t_hat, c.t_hat_prime}};
    if (c.d != 1)
        throw ValidationError("dominated-bound: t_hat and t_hat_prime are required for d > 1");
    std::vector<std::pair<std::vector<double>, std::vector<double>>> grid;
    // coordinate distances >= 0.425 and all four points at least 0.15 apart
    for (double t1 : {0.100, 0.125, 0.150, 0.175})
        for (double t1p : {0.600, 0.625, 0.650, 0.675})
            grid.push_back({{t1}, {t1p}});
    return grid;
}

void run_verify(const ExperimentConfig& c, Emitter& out, json& summary, const std::string& hash)
{
    const LengthSequence seq = c.sequence();
    VerifyTable v;
    v.check = c.check;
    v.hash = hash;
    const SeedRange seeds{c.seed, c.seeds};
    RegionSpec spec{c.delta, c.d, c.eta};

    if (c.check == "ln-delta") {
        for (double delta : deltas_of(c)) {
            spec.delta = delta;
            const auto e = estimate_Ln_delta(seq, c.n, spec, c.mc, c.mc_seed, seeds);
            v.row("L_n_delta", c.n, c.n, delta, e.mean, e.stderr_, e.samples);
        }
    } else if (c.check == "jn-cauchy") {
        const auto st = jn_stabilization(seq, spec, levels_of(c), seeds, c.mc, c.mc_seed);
        for (std::size_t l = 0; l < st.levels.size(); ++l) {
            RunningStats rs;
            for (const auto& js : st.per_seed)
                rs.add(js[l]);
            v.row("J_n", st.levels[l], st.levels[l], c.delta, rs.mean(), rs.stderr_of_mean(), rs.count());
        }
        for (const auto& p : st.pairs)
            v.row("sq_diff", p.n, p.m, c.delta, p.squared_difference.mean, p.squared_difference.stderr_,
                  p.squared_difference.samples);
    } else if (c.check == "h-product") {
        const auto t = points(c.t_hat), tp = points(c.t_hat_prime);
        const auto h = H_product(t, tp, seq, spec);
        const double eta = spec.eta.value_or(0.0);
        v.row("H", h.exact_terms, 0, eta, h.value, h.remainder_bound, 0);
        v.row("exact_truncated", c.n, 0, eta, joint_moment_exact(t, tp, seq, c.n), 0.0, 0);
        if (c.mc > 1) {
            const auto e = joint_moment_mc(t, tp, seq, c.n, c.mc, c.mc_seed);
            v.row("mc_truncated", c.n, 0, eta, e.mean, e.stderr_, e.samples);
        }
        summary["H"] = h.value;
    } else if (c.check == "dominated-bound") {
        double worst = 0.0;
        for (const auto& [t, tp] : dominated_grid(c)) {
            const auto pt = points(t), ptp = points(tp);
            const auto r = dominated_bound_check(pt, ptp, seq, c.n);
            v.row("ratio", c.n, 0, circle_dist(pt[0], ptp[0]), r.ratio, 0.0, 0);
            worst = std::max(worst, r.ratio);
        }
        v.row("max_ratio", c.n, 0, 0.0, worst, 0.0, 0);
        summary["max_ratio"] = worst;
    } else {
        const auto distances = log_spaced(std::exp2(-10.0), 0.5, 64);
        const auto s = pair_kernel_sandwich(seq, c.n, distances);
        for (const auto& row : s.rows)
            v.row("ratio", c.n, 0, row.distance, row.ratio, 0.0, 0);
        v.row("constant", c.n, 0, 0.0, s.constant, 0.0, 0);
        summary["min_ratio"] = s.min_ratio;
        summary["max_ratio"] = s.max_ratio;
        summary["constant"] = s.constant;
    }
    out.csv(c.emit, v.t);
}

} // namespace

const char* to_string(Command c)
{
    return kCommands[static_cast<int>(c)];
}

Command command_from_string(const std::string& s)
{
    for (int i = 0; i < 8; ++i)
        if (s == kCommands[i])
            return static_cast<Command>(i);
    throw ValidationError("command: unknown '" + s + "'");
}

LengthSequence ExperimentConfig::sequence() const
{
    try {
        return LengthSequence::from_json(family);
    } catch (const json::exception& e) {
        throw ValidationError(std::string("family: ") + e.what());
    } catch (const ValidationError& e) {
        throw ValidationError(std::string("family: ") + e.what());
    }
}

void ExperimentConfig::validate() const
{
    auto fail = [](const std::string& field, const std::string& msg) {
        throw ValidationError("config field '" + field + "': " + msg);
    };
    sequence();
    if (n < 0)
        fail("n", "must be >= 0");
    for (std::size_t i = 0; i < n_list.size(); ++i) {
        if (n_list[i] < 0)
            fail("n_list", "entries must be >= 0");
        if (i > 0 && n_list[i] <= n_list[i - 1])
            fail("n_list", "must be increasing");
    }
    if (grid < 2 || (grid & (grid - 1)) != 0)
        fail("grid", "must be a power of two >= 2");
    if (d < 1)
        fail("d", "must be >= 1");
    if (k_max < 0 || k_max > grid / 2)
        fail("k_max", "must lie in [0, grid/2]");
    if (band_lo < 0 || band_lo > 40)
        fail("band_lo", "must lie in [0, 40]");
    if (seeds < 1)
        fail("seeds", "must be >= 1");
    if (mc < 1)
        fail("mc", "must be >= 1");
    if (scale_lo < 0 || scale_hi <= scale_lo || scale_hi > 40)
        fail("scales", "need 0 <= lo < hi <= 40");
    for (const auto& ch : checks)
        if (!kConditionChecks.count(ch))
            fail("checks", "unknown check '" + ch + "'");
    for (double w : omegas)
        if (!(w >= 0.0 && w < 1.0))
            fail("omegas", "values must lie in [0, 1)");
    if (command == Command::verify) {
        if (!kVerifyChecks.count(check))
            fail("check", "must be one of ln-delta, jn-cauchy, h-product, dominated-bound, pair-correlation");
        if (check == "ln-delta" || check == "jn-cauchy" || check == "h-product") {
            for (double dl : deltas_of(*this))
                try {
                    RegionSpec{dl, d, check == "h-product" ? eta : std::nullopt}.validate();
                } catch (const ValidationError& e) {
                    fail(check == "ln-delta" ? "delta_list" : "delta", e.what());
                }
        }
        if (check == "h-product") {
            if (!eta)
                fail("eta", "required for h-product");
            if (static_cast<int>(t_hat.size()) != d || static_cast<int>(t_hat_prime.size()) != d)
                fail("t_hat", "h-product needs t_hat and t_hat_prime with d entries");
        }
        if (check == "dominated-bound" && t_hat.size() != t_hat_prime.size())
            fail("t_hat", "t_hat and t_hat_prime must have equal length");
    }
    if (emit.empty())
        fail("emit", "an output path is required");
}

json ExperimentConfig::to_json() const
{
    return {
        {"command", to_string(command)},
        {"family", family},
        {"n", n},
        {"n_list", n_list},
        {"grid", grid},
        {"d", d},
        {"delta", delta},
        {"eta", eta ? json(*eta) : json(nullptr)},
        {"delta_list", delta_list},
        {"k_max", k_max},
        {"band_lo", band_lo},
        {"seed", seed},
        {"seeds", seeds},
        {"mc", mc},
        {"mc_seed", mc_seed},
        {"checks", checks},
        {"check", check},
        {"scale_lo", scale_lo},
        {"scale_hi", scale_hi},
        {"anchor", anchor},
        {"t_hat", t_hat},
        {"t_hat_prime", t_hat_prime},
        {"omegas", omegas},
        {"emit", emit},
        {"manifest", manifest},
        {"threads", threads},
    };
}

ExperimentConfig ExperimentConfig::from_json(const json& j)
{
    if (!j.is_object())
        throw ValidationError("config must be a JSON object");
    static const std::set<std::string> known = {
        "command", "family",   "n",      "n_list", "grid",     "d",      "delta",   "eta",    "delta_list",
        "k_max",   "band_lo",  "seed",   "seeds",  "mc",       "mc_seed", "checks", "check",  "scale_lo",
        "scale_hi", "anchor",  "t_hat",  "t_hat_prime", "omegas", "emit",  "manifest", "threads"};
    for (const auto& [key, value] : j.items())
        if (!known.count(key))
            throw ValidationError("config: unknown field '" + key + "'");
    ExperimentConfig c;
    if (j.contains("command"))
        c.command = command_from_string(j.at("command").get<std::string>());
    if (j.contains("family"))
        c.family = j.at("family");
    get_if_present(j, "n", c.n);
    get_if_present(j, "n_list", c.n_list);
    get_if_present(j, "grid", c.grid);
    get_if_present(j, "d", c.d);
    get_if_present(j, "delta", c.delta);
    if (j.contains("eta") && !j.at("eta").is_null())
        c.eta = j.at("eta").get<double>();
    get_if_present(j, "delta_list", c.delta_list);
    get_if_present(j, "k_max", c.k_max);
    get_if_present(j, "band_lo", c.band_lo);
    get_if_present(j, "seed", c.seed);
    get_if_present(j, "seeds", c.seeds);
    get_if_present(j, "mc", c.mc);
    get_if_present(j, "mc_seed", c.mc_seed);
    get_if_present(j, "checks", c.checks);
    get_if_present(j, "check", c.check);
    get_if_present(j, "scale_lo", c.scale_lo);
    get_if_present(j, "scale_hi", c.scale_hi);
    get_if_present(j, "anchor", c.anchor);
    get_if_present(j, "t_hat", c.t_hat);
    get_if_present(j, "t_hat_prime", c.t_hat_prime);
    get_if_present(j, "omegas", c.omegas);
    get_if_present(j, "emit", c.emit);
    get_if_present(j, "manifest", c.manifest);
    get_if_present(j, "threads", c.threads);
    return c;
}

json ExperimentConfig::canonical() const
{
    json full = to_json();
    full["n_list"] = levels_of(*this);
    full["delta_list"] = deltas_of(*this);
    full["k_max"] = k_max_of(*this);
    full["checks"] = checks_of(*this);
    full["family"] = sequence().to_json();
    json out = {{"command", full["command"]}, {"family", full["family"]}};
    for (const auto& key : relevant_keys(*this))
        out[key] = full[key];
    return out;
}

std::uint64_t ExperimentConfig::hash() const
{
    return fnv1a64(canonical().dump());
}

json RunManifest::to_json() const
{
    json outs = json::array();
    for (const auto& o : outputs)
        outs.push_back({{"path", o.path}, {"checksum", hex64(o.checksum)}, {"bytes", o.bytes}});
    return {
        {"config", config.to_json()},
        {"config_hash", config_hash},
        {"tool_version", tool_version},
        {"outputs", outs},
        {"wall_clock_seconds", wall_clock_seconds},
        {"summary", summary},
    };
}

RunManifest RunManifest::from_json(const json& j)
{
    RunManifest m;
    try {
        m.config = ExperimentConfig::from_json(j.at("config"));
        m.config_hash = j.at("config_hash").get<std::string>();
        m.tool_version = j.at("tool_version").get<std::string>();
        for (const auto& o : j.at("outputs")) {
            OutputRecord r;
            r.path = o.at("path").get<std::string>();
            r.checksum = std::stoull(o.at("checksum").get<std::string>(), nullptr, 16);
            r.bytes = o.at("bytes").get<std::uintmax_t>();
            m.outputs.push_back(r);
        }
        m.wall_clock_seconds = j.value("wall_clock_seconds", 0.0);
        m.summary = j.value("summary", json::object());
    } catch (const json::exception& e) {
        throw ValidationError(std::string("manifest: ") + e.what());
    }
    return m;
}

RunManifest run(const ExperimentConfig& config)
{
    config.validate();
    const auto start = std::chrono::steady_clock::now();
    RunManifest m;
    m.config = config;
    m.config_hash = hex64(config.hash());
    m.tool_version = DVZ_VERSION;
    Emitter out(m.outputs);
    switch (config.command) {
    case Command::cover: run_cover(config, out, m.summary); break;
    case Command::density: run_density(config, out, m.summary); break;
    case Command::fourier: run_fourier(config, out, m.summary); break;
    case Command::convolve: run_convolve(config, out, m.summary, m.config_hash); break;
    case Command::kernel: run_kernel(config, out, m.summary); break;
    case Command::conditions: run_conditions(config, out, m.summary); break;
    case Command::dimension: run_dimension(config, out, m.summary); break;
    case Command::verify: run_verify(config, out, m.summary, m.config_hash); break;
    }
    m.wall_clock_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const std::string manifest_path = config.manifest.empty() ? config.emit + ".manifest.json" : config.manifest;
    write_text_file(manifest_path, m.to_json().dump(2) + "\n");
    return m;
}

RerunReport rerun_manifest(const std::string& manifest_path, const std::optional<std::string>& out_dir)
{
    json j;
    try {
        j = json::parse(read_text_file(manifest_path));
    } catch (const json::parse_error& e) {
        throw ValidationError(std::string("manifest: ") + e.what());
    }
    const RunManifest original = RunManifest::from_json(j);
    ExperimentConfig c = original.config;
    auto relocate = [&](const std::string& p) {
        return out_dir ? (fs::path(*out_dir) / fs::path(p).filename()).string() : p;
    };
    c.emit = relocate(c.emit);
    c.manifest = relocate(c.manifest.empty() ? original.config.emit + ".manifest.json" : c.manifest);
    if (out_dir)
        fs::create_directories(*out_dir);

    RerunReport r{run(c), {}};
    if (r.rerun.config_hash != original.config_hash)
        r.mismatched.push_back("config_hash");
    for (const auto& o : original.outputs) {
        const std::string name = fs::path(o.path).filename().string();
        auto it = std::find_if(r.rerun.outputs.begin(), r.rerun.outputs.end(),
                               [&](const OutputRecord& x) { return fs::path(x.path).filename() == name; });
        if (it == r.rerun.outputs.end() || it->checksum != o.checksum || file_checksum(it->path) != o.checksum)
            r.mismatched.push_back(o.path);
    }
    return r;
}

CoveringSample omegas_from_json(const json& j)
{
    if (!j.is_array())
        throw ValidationError("omegas: expected a JSON list of reals");
    if (j.empty())
        throw ValidationError("empty sample");
    CoveringSample s;
    s.synthetic = true;
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number())
            throw ValidationError("omegas: entry " + std::to_string(i + 1) + " is not a number");
        const double w = j[i].get<double>();
        if (!(w >= 0.0 && w < 1.0))
            throw ValidationError("omegas: entry " + std::to_string(i + 1) + " = " + format_double(w) +
                                  " is outside [0, 1)");
        s.omegas.emplace_back(w);
    }
    return s;
}

CoveringSample load_omegas_file(const std::string& path)
{
    json j;
    try {
        j = json::parse(read_text_file(path));
    } catch (const json::parse_error& e) {
        throw ValidationError("omegas file " + path + ": " + e.what());
    }
    return omegas_from_json(j);
}

std::string read_text_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_text_file(const std::string& path, const std::string& text)
{
    const fs::path p(path);
    if (p.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(p.parent_path(), ec);
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw IoError("cannot write " + path);
    out << text;
    if (!out.flush())
        throw IoError("write failed for " + path);
}

std::uint64_t file_checksum(const std::string& path)
{
    return fnv1a64(read_text_file(path));
}

} // namespace dvz
